#pragma once

#include <Eigen/Core>

#include "gsprop/camera.hpp"

namespace gsprop {

// Numerical guard for the perspective divide, meters.
inline constexpr double kZNear = 1e-4;

struct Projection {
    double u = 0, v = 0; // pixels
    double z_cam = 0;    // meters, camera-frame z
    bool behind = false; // z_cam <= kZNear
};

// Pinhole projection with the homogeneous divide: x_cam = R*p + t,
// (u, v) = (K*x_cam).xy / x_cam.z.
inline Projection project_point(const Eigen::Vector3d& p, const CameraModel& cam) {
    Projection out;
    const Eigen::Vector3d x_cam = cam.rotation * p + cam.translation;
    out.z_cam = x_cam.z();
    if (x_cam.z() <= kZNear) {
        out.behind = true;
        return out;
    }
    const Eigen::Vector3d h = cam.intrinsics * x_cam;
    out.u = h.x() / h.z();
    out.v = h.y() / h.z();
    return out;
}

} // namespace gsprop
