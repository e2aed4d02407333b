#pragma once

// Internal helper shared by the depth and label renderers: walks every
// Gaussian in ascending center-depth order and visits the pixels of its
// elliptical EWA footprint. Per pixel, visits therefore arrive front to back,
// which is what alpha compositing needs.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "gsprop/camera.hpp"
#include "gsprop/depth_render.hpp"
#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/projection.hpp"

namespace gsprop::detail {

// visit(x, y, gaussian_index, alpha, z_cam)
template <typename Visitor>
void rasterize_splats(const GaussianCloud& cloud, const CameraModel& cam,
                      const RenderParams& params, Visitor&& visit) {
    struct Splat {
        std::size_t index;
        double z;
    };
    std::vector<Splat> order;
    order.reserve(cloud.count);
    for (std::size_t i = 0; i < cloud.count; ++i) {
        const Projection pr = project_point(cloud.positions[i].cast<double>(), cam);
        if (!pr.behind)
            order.push_back({i, pr.z_cam});
    }
    std::sort(order.begin(), order.end(), [](const Splat& a, const Splat& b) {
        return a.z != b.z ? a.z < b.z : a.index < b.index;
    });

    const Eigen::Matrix3d w = cam.rotation;
    const Eigen::Matrix3d k = cam.intrinsics;
    const double cutoff_sq = double(params.sigma_cutoff) * params.sigma_cutoff;

    for (const Splat& s : order) {
        const std::size_t i = s.index;
        const Eigen::Vector3d x_cam =
            cam.rotation * cloud.positions[i].cast<double>() + cam.translation;
        const double z = x_cam.z();
        const Eigen::Vector3d h = k * x_cam;
        const double u = h.x() / z;
        const double v = h.y() / z;

        // 3D covariance from scales and rotation, then into the camera frame.
        const Eigen::Matrix3d rot = cloud.rotations[i].toRotationMatrix().cast<double>();
        const Eigen::Vector3d sc = cloud.scales[i].cast<double>();
        const Eigen::Matrix3d sigma_world =
            rot * sc.cwiseProduct(sc).asDiagonal() * rot.transpose();
        const Eigen::Matrix3d sigma_cam = w * sigma_world * w.transpose();

        // Projection Jacobian at the center.
        Eigen::Matrix<double, 2, 3> jac;
        jac(0, 0) = k(0, 0) / z;
        jac(0, 1) = k(0, 1) / z;
        jac(0, 2) = -(k(0, 0) * x_cam.x() + k(0, 1) * x_cam.y()) / (z * z);
        jac(1, 0) = 0.0;
        jac(1, 1) = k(1, 1) / z;
        jac(1, 2) = -(k(1, 1) * x_cam.y()) / (z * z);

        Eigen::Matrix2d sigma_px = jac * sigma_cam * jac.transpose();
        double det = sigma_px.determinant();
        if (det <= 1e-12) {
            sigma_px.diagonal().array() += 1e-6;
            det = sigma_px.determinant();
            if (det <= 0.0)
                continue;
        }
        Eigen::Matrix2d inv;
        inv << sigma_px(1, 1), -sigma_px(0, 1), -sigma_px(1, 0), sigma_px(0, 0);
        inv /= det;

        const double rx = params.sigma_cutoff * std::sqrt(sigma_px(0, 0));
        const double ry = params.sigma_cutoff * std::sqrt(sigma_px(1, 1));
        const int x0 = std::max(0, static_cast<int>(std::ceil(u - rx)));
        const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(u + rx)));
        const int y0 = std::max(0, static_cast<int>(std::ceil(v - ry)));
        const int y1 = std::min(cam.height - 1, static_cast<int>(std::floor(v + ry)));
        if (x0 > x1 || y0 > y1)
            continue;

        const double opacity = cloud.opacities[i];
        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                const Eigen::Vector2d d(px - u, py - v);
                const double md = d.dot(inv * d);
                if (md > cutoff_sq)
                    continue;
                const double alpha = opacity * std::exp(-0.5 * md);
                if (alpha < params.alpha_min)
                    continue;
                visit(px, py, i, static_cast<float>(alpha), static_cast<float>(z));
            }
        }
    }
}

} // namespace gsprop::detail
