#include "gsprop/voting.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gsprop/error.hpp"
#include "gsprop/parallel.hpp"
#include "gsprop/projection.hpp"

namespace gsprop {

bool visible(const Eigen::Vector3d& position, const CameraModel& cam, const DepthMap& depth_map,
             const VisibilityParams& params) {
    const Projection pr = project_point(position, cam);
    if (pr.behind)
        return false;
    const int px = static_cast<int>(std::lround(pr.u));
    const int py = static_cast<int>(std::lround(pr.v));
    if (!depth_map.depth.inside(px, py))
        return false;
    const double limit = depth_map.depth.at(px, py) * (1.0 + params.tol_rel) + params.tol_abs;
    return pr.z_cam <= limit;
}

bool visible(const GaussianCloud& cloud, std::size_t gaussian_index, const CameraModel& cam,
             const DepthMap& depth_map, const VisibilityParams& params) {
    if (gaussian_index >= cloud.count)
        throw DataError("gaussian index " + std::to_string(gaussian_index) + " out of range");
    return visible(cloud.positions[gaussian_index].cast<double>(), cam, depth_map, params);
}

std::vector<PropertyVote> gather_votes(const GaussianCloud& cloud,
                                       std::span<const CameraModel> cameras,
                                       std::span<const LabelGrid> material_maps,
                                       std::span<const DepthMap> depth_maps,
                                       const VisibilityParams& params, int workers) {
    if (cameras.size() != material_maps.size() || cameras.size() != depth_maps.size())
        throw DataError("gather_votes: cameras, material maps and depth maps must align");
    for (std::size_t v = 0; v < cameras.size(); ++v) {
        if (material_maps[v].width != cameras[v].width ||
            material_maps[v].height != cameras[v].height)
            throw DataError("material map for view '" + cameras[v].view_id +
                            "' does not match the camera dimensions");
    }

    std::vector<PropertyVote> votes(cloud.count);
    parallel_for(cloud.count, workers, [&](std::size_t i) {
        PropertyVote& vote = votes[i];
        vote.gaussian_index = i;
        const Eigen::Vector3d p = cloud.positions[i].cast<double>();
        for (std::size_t v = 0; v < cameras.size(); ++v) {
            const Projection pr = project_point(p, cameras[v]);
            if (pr.behind)
                continue;
            const int px = static_cast<int>(std::lround(pr.u));
            const int py = static_cast<int>(std::lround(pr.v));
            if (!material_maps[v].inside(px, py))
                continue;
            const double limit =
                depth_maps[v].depth.at(px, py) * (1.0 + params.tol_rel) + params.tol_abs;
            if (pr.z_cam > limit)
                continue;
            const std::uint16_t ordinal = material_maps[v].at(px, py);
            if (ordinal == 0)
                continue; // unlabeled pixel contributes no observation
            vote.observations.emplace_back(static_cast<int>(v), ordinal);
        }
    });
    return votes;
}

std::uint16_t vote(std::span<const Observation> observations,
                   std::span<const std::size_t> scene_counts) {
    if (observations.empty())
        return 0;
    std::map<std::uint16_t, std::size_t> counts;
    for (const auto& [view, ordinal] : observations)
        ++counts[ordinal];

    auto scene_count = [&](std::uint16_t ordinal) -> std::size_t {
        return ordinal < scene_counts.size() ? scene_counts[ordinal] : 0;
    };

    std::uint16_t best = 0;
    std::size_t best_count = 0;
    std::size_t best_scene = 0;
    for (const auto& [ordinal, count] : counts) {
        const std::size_t scene = scene_count(ordinal);
        // counts map iterates in ascending ordinal, so on full ties the
        // smaller ordinal is kept.
        if (count > best_count || (count == best_count && scene > best_scene)) {
            best = ordinal;
            best_count = count;
            best_scene = scene;
        }
    }
    return best;
}

} // namespace gsprop
