#pragma once

#include <span>
#include <vector>

#include "gsprop/depth_render.hpp"
#include "gsprop/property_field.hpp"
#include "gsprop/voting.hpp"

namespace gsprop {

struct LiftParams {
    RenderParams render;
    // tol_abs < 0 selects the default floor of 1e-3 * scene extent.
    VisibilityParams visibility{0.01, -1.0};
    int propagate_k = 8;
    int workers = 1;
    bool keep_depth_maps = false;
    bool keep_votes = false;
};

struct LiftResult {
    PropertyField field;
    std::vector<PropertyVote> votes;    // populated when keep_votes
    std::vector<DepthMap> depth_maps;   // populated when keep_depth_maps
    std::size_t voted = 0;              // Gaussians resolved by voting
    std::size_t propagated = 0;         // Gaussians filled by propagation
};

// Full 2D-to-3D lift: per-view depth render, visibility-gated vote gathering,
// frequency voting with the documented tie rule, scalar resolution from the
// library nominals, then nearest-neighbor propagation to never-observed
// Gaussians. Deterministic for any worker count.
LiftResult lift(const GaussianCloud& cloud, std::span<const CameraModel> cameras,
                std::span<const LabelGrid> material_maps, const MaterialLibrary& library,
                const LiftParams& params = {});

} // namespace gsprop
