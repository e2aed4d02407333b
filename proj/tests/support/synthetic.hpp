#pragma once

// Shared builders for synthetic scenes, cameras and small material libraries
// used across the test suites and the acceptance runner.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Geometry>

#include "gsprop/camera.hpp"
#include "gsprop/depth_render.hpp"
#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/grid.hpp"
#include "gsprop/material_library.hpp"

namespace gsprop::testing {

// 100x100 camera at the origin looking down +z, f=100, c=(50,50).
inline CameraModel simple_camera(std::string view_id = "view_0") {
    CameraModel cam;
    cam.view_id = std::move(view_id);
    cam.intrinsics << 100, 0, 50, 0, 100, 50, 0, 0, 1;
    cam.width = 100;
    cam.height = 100;
    return cam;
}

// World-to-camera pose looking from `eye` toward `target` (+z forward,
// +y down in camera frame so the image is upright for y-up scenes).
inline CameraModel look_at_camera(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                                  double focal, int width, int height, std::string view_id) {
    const Eigen::Vector3d forward = (target - eye).normalized();
    Eigen::Vector3d up(0, 1, 0);
    if (std::abs(forward.dot(up)) > 0.99)
        up = Eigen::Vector3d(1, 0, 0);
    const Eigen::Vector3d right = forward.cross(up).normalized();
    const Eigen::Vector3d down = forward.cross(right).normalized();

    CameraModel cam;
    cam.view_id = std::move(view_id);
    cam.intrinsics << focal, 0, width / 2.0, 0, focal, height / 2.0, 0, 0, 1;
    cam.width = width;
    cam.height = height;
    Eigen::Matrix3d r_c2w;
    r_c2w.col(0) = right;
    r_c2w.col(1) = down;
    r_c2w.col(2) = forward;
    cam.rotation = r_c2w.transpose();
    cam.translation = -cam.rotation * eye;
    return cam;
}

inline GaussianCloud make_cloud(const std::vector<Eigen::Vector3f>& positions, float scale,
                                float opacity) {
    GaussianCloud cloud;
    cloud.count = positions.size();
    cloud.positions = positions;
    cloud.opacities.assign(cloud.count, opacity);
    cloud.scales.assign(cloud.count, Eigen::Vector3f::Constant(scale));
    cloud.rotations.assign(cloud.count, Eigen::Quaternionf::Identity());
    cloud.sh_degree = 0;
    cloud.sh_coeffs.assign(cloud.count * 3, 0.5f);
    return cloud;
}

// Points on the six faces of an axis-aligned cube, `per_axis` x `per_axis`
// per face.
inline std::vector<Eigen::Vector3f> cube_surface(const Eigen::Vector3f& center, float side,
                                                 int per_axis) {
    std::vector<Eigen::Vector3f> out;
    out.reserve(static_cast<std::size_t>(per_axis) * per_axis * 6);
    const float h = side / 2;
    for (int i = 0; i < per_axis; ++i) {
        for (int j = 0; j < per_axis; ++j) {
            const float a = -h + side * (i + 0.5f) / per_axis;
            const float b = -h + side * (j + 0.5f) / per_axis;
            out.push_back(center + Eigen::Vector3f(a, b, -h));
            out.push_back(center + Eigen::Vector3f(a, b, h));
            out.push_back(center + Eigen::Vector3f(a, -h, b));
            out.push_back(center + Eigen::Vector3f(a, h, b));
            out.push_back(center + Eigen::Vector3f(-h, a, b));
            out.push_back(center + Eigen::Vector3f(h, a, b));
        }
    }
    return out;
}

// Uniformly jittered grid filling an axis-aligned cube volume.
inline std::vector<Eigen::Vector3f> cube_volume(const Eigen::Vector3f& center, float side,
                                                int per_axis, std::uint32_t seed) {
    std::mt19937 rng(seed);
    const float step = side / per_axis;
    std::uniform_real_distribution<float> jitter(-step * 0.25f, step * 0.25f);
    std::vector<Eigen::Vector3f> out;
    out.reserve(static_cast<std::size_t>(per_axis) * per_axis * per_axis);
    for (int i = 0; i < per_axis; ++i)
        for (int j = 0; j < per_axis; ++j)
            for (int k = 0; k < per_axis; ++k) {
                const Eigen::Vector3f p(-side / 2 + step * (i + 0.5f) + jitter(rng),
                                        -side / 2 + step * (j + 0.5f) + jitter(rng),
                                        -side / 2 + step * (k + 0.5f) + jitter(rng));
                out.push_back(center + p);
            }
    return out;
}

// Minimal two-material library used by the lifting and physics tests.
inline const char* kTinyLibrary = R"(schema_version 1
material oak
  family wood
  default
  density 600 900 750
  youngs_modulus 9.0e9 1.2e10 1.1e10
  poisson 0.3
  friction 0.55
  yield_stress 4.0e7
  shore D 60 80
end
material steel
  family metal
  default
  density 7750 8050 7850
  youngs_modulus 1.9e11 2.1e11 2.0e11
  poisson 0.29
  friction 0.5
  yield_stress 2.5e8
  shore D 90 100
end
material aluminum
  family metal
  density 2700 2700 2700
  youngs_modulus 6.8e10 7.0e10 6.9e10
  poisson 0.33
  friction 0.45
  yield_stress 9.5e7
  shore D 85 95
end
)";

// Two adjacent cube shells with known per-Gaussian materials plus a ring of
// cameras. Ground-truth material maps are derived from a depth render of the
// true field (front-surface material at every covered pixel).
struct TwoBoxScene {
    GaussianCloud cloud;
    std::vector<std::uint16_t> gt_material; // per Gaussian, library ordinals
    std::vector<CameraModel> cameras;
    std::uint16_t ordinal_a = 0, ordinal_b = 0;
};

TwoBoxScene make_two_box_scene(const MaterialLibrary& library, int per_axis, int views,
                               int image_size);

// Ground-truth material map for one view: the material of the front-surface
// Gaussian at every pixel where the depth render found a surface.
LabelGrid ground_truth_map(const GaussianCloud& cloud,
                           const std::vector<std::uint16_t>& gt_material, const CameraModel& cam,
                           const RenderParams& params = {});

// transforms-style JSON for a camera list (world-to-camera poses are
// inverted back to the camera-to-world matrices the format stores).
std::string cameras_to_transforms_json(const std::vector<CameraModel>& cameras);

// A complete on-disk fixture workspace for pipeline runs: scene.ply,
// transforms.json, per-view masks + fixture annotations derived from the
// ground truth, materials.txt, gripper.txt and a pipeline config.
struct FixtureWorkspace {
    std::filesystem::path root;
    std::filesystem::path config_path;
    TwoBoxScene scene;
    MaterialLibrary library;
};

FixtureWorkspace make_fixture_workspace(const std::filesystem::path& root, int per_axis,
                                        int views, int image_size, int workers = 1);

} // namespace gsprop::testing
