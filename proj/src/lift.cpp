#include "gsprop/lift.hpp"

#include "gsprop/error.hpp"
#include "gsprop/parallel.hpp"

namespace gsprop {

LiftResult lift(const GaussianCloud& cloud, std::span<const CameraModel> cameras,
                std::span<const LabelGrid> material_maps, const MaterialLibrary& library,
                const LiftParams& params) {
    if (cameras.size() != material_maps.size())
        throw DataError("lift: one material map per camera required");
    if (cameras.empty())
        throw DataError("lift: no views");

    VisibilityParams vis = params.visibility;
    if (vis.tol_abs < 0.0)
        vis.tol_abs = 1e-3 * cloud.extent();

    std::vector<DepthMap> depth_maps(cameras.size());
    parallel_for(cameras.size(), params.workers, [&](std::size_t v) {
        depth_maps[v] = render_depth(cloud, cameras[v], params.render);
    });

    std::vector<PropertyVote> votes =
        gather_votes(cloud, cameras, material_maps, depth_maps, vis, params.workers);

    // Scene-wide observation counts feed the vote tie rule.
    std::vector<std::size_t> scene_counts;
    for (const auto& vote : votes) {
        for (const auto& [view, ordinal] : vote.observations) {
            if (ordinal >= scene_counts.size())
                scene_counts.resize(ordinal + 1, 0);
            ++scene_counts[ordinal];
        }
    }

    LiftResult result;
    result.field = PropertyField::make(cloud.count);
    parallel_for(cloud.count, params.workers, [&](std::size_t i) {
        PropertyVote& v = votes[i];
        v.winner = vote(v.observations, scene_counts);
        if (v.winner != 0) {
            result.field.material[i] = v.winner;
            result.field.provenance[i] = Provenance::voted;
            result.field.observation_count[i] =
                static_cast<std::uint16_t>(std::min<std::size_t>(v.observations.size(), 0xffff));
        }
    });
    result.voted = result.field.resolved_count();

    if (result.voted == 0)
        throw DataError("lift: voting resolved no Gaussian; material maps may be empty");
    result.field = propagate(std::move(result.field), cloud, params.propagate_k, params.workers);
    result.propagated = result.field.resolved_count() - result.voted;

    result.field.resolve_scalars(library);
    result.field.validate();

    if (params.keep_votes)
        result.votes = std::move(votes);
    if (params.keep_depth_maps)
        result.depth_maps = std::move(depth_maps);
    return result;
}

} // namespace gsprop
