#include "gsprop/depth_render.hpp"

#include "splat_raster.hpp"

namespace gsprop {

DepthMap render_depth(const GaussianCloud& cloud, const CameraModel& cam,
                      const RenderParams& params) {
    DepthMap map;
    map.view_id = cam.view_id;
    map.depth = FloatGrid(cam.width, cam.height, std::numeric_limits<float>::infinity());
    map.opacity_accum = FloatGrid(cam.width, cam.height, 0.0f);
    map.surface_index = Grid<std::int32_t>(cam.width, cam.height, -1);

    detail::rasterize_splats(
        cloud, cam, params, [&](int x, int y, std::size_t index, float alpha, float z) {
            float& accum = map.opacity_accum.at(x, y);
            const float before = accum;
            accum = before + (1.0f - before) * alpha;
            if (before < params.front_threshold && accum >= params.front_threshold) {
                map.depth.at(x, y) = z;
                map.surface_index.at(x, y) = static_cast<std::int32_t>(index);
            }
        });
    return map;
}

} // namespace gsprop
