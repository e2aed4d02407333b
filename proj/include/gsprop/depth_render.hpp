#pragma once

#include <cstdint>
#include <limits>
#include <string>

#include "gsprop/camera.hpp"
#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/grid.hpp"

namespace gsprop {

struct DepthMap {
    std::string view_id;
    FloatGrid depth;         // meters; +inf where no surface was found
    FloatGrid opacity_accum; // final accumulated opacity, [0, 1]
    // Index of the Gaussian whose splat pushed the accumulated opacity across
    // front_threshold; -1 where none did. Lets per-point lookups (hardness)
    // reuse the render instead of re-marching rays.
    Grid<std::int32_t> surface_index;
};

struct RenderParams {
    float front_threshold = 0.5f; // accumulated opacity declaring a surface
    float sigma_cutoff = 3.0f;    // splat footprint radius in standard deviations
    float alpha_min = 1.0f / 255; // splats fainter than this are skipped
};

// Reference EWA splatter. Each Gaussian's 2D footprint is J*W*Sigma*W^T*J^T
// (J the projection Jacobian at the center, W the camera rotation); splats
// are composited front to back in center-depth order, and depth records the
// z at which the accumulated opacity first crosses front_threshold.
DepthMap render_depth(const GaussianCloud& cloud, const CameraModel& cam,
                      const RenderParams& params = {});

} // namespace gsprop
