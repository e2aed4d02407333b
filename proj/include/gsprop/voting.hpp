#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "gsprop/camera.hpp"
#include "gsprop/depth_render.hpp"
#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/grid.hpp"

namespace gsprop {

struct VisibilityParams {
    double tol_rel = 0.01; // relative slack on the rendered depth
    double tol_abs = 0.0;  // absolute slack, meters (scene-extent floor)
};

// True iff the point projects inside the image, lies in front of the camera,
// and is no deeper than depth(u,v)*(1+tol_rel) + tol_abs at its nearest pixel.
bool visible(const Eigen::Vector3d& position, const CameraModel& cam, const DepthMap& depth_map,
             const VisibilityParams& params = {});

bool visible(const GaussianCloud& cloud, std::size_t gaussian_index, const CameraModel& cam,
             const DepthMap& depth_map, const VisibilityParams& params = {});

// (view index, material ordinal) pairs observed for one Gaussian.
using Observation = std::pair<int, std::uint16_t>;

struct PropertyVote {
    std::size_t gaussian_index = 0;
    std::vector<Observation> observations;
    std::uint16_t winner = 0; // 0 = unresolved
};

// One observation per view in which the Gaussian is visible and the material
// map is labeled at its nearest pixel.
std::vector<PropertyVote> gather_votes(const GaussianCloud& cloud,
                                       std::span<const CameraModel> cameras,
                                       std::span<const LabelGrid> material_maps,
                                       std::span<const DepthMap> depth_maps,
                                       const VisibilityParams& params = {}, int workers = 1);

// Frequency vote: argmax of the observation counts. Ties go to the material
// with the higher scene-wide count (`scene_counts`, indexed by ordinal), then
// to the smaller ordinal. Empty observations return 0 (unresolved).
std::uint16_t vote(std::span<const Observation> observations,
                   std::span<const std::size_t> scene_counts = {});

} // namespace gsprop
