// gsprop: annotate 3D Gaussian Splatting scenes with physical material
// properties and derive mass, hardness and grasp-force plans from them.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 endpoint error.

#include <iostream>
#include <optional>
#include <string>

#include "gsprop/config.hpp"
#include "gsprop/error.hpp"
#include "gsprop/pipeline.hpp"

#include <CLI11.hpp>

namespace {

struct Overrides {
    std::optional<std::string> scene, cameras, images_dir, masks_dir, fixtures_dir, library,
        gripper, output_dir, provider, eval_view, gt_labels, gt_legend;
    std::optional<int> views, workers;
    std::optional<double> iou_min, stability_min, overlap_max, tol_rel, front_threshold,
        voxel_size;
    bool dump_intermediates = false;
};

void add_common_flags(CLI::App* cmd, std::optional<std::string>& config_path, Overrides& o) {
    cmd->add_option("-c,--config", config_path, "pipeline config file");
    cmd->add_option("--scene", o.scene, "Gaussian PLY scene");
    cmd->add_option("--cameras", o.cameras, "transforms JSON or COLMAP cameras.txt");
    cmd->add_option("--images-dir", o.images_dir, "per-view images directory");
    cmd->add_option("--masks-dir", o.masks_dir, "input mask directory");
    cmd->add_option("--fixtures-dir", o.fixtures_dir, "fixture annotation directory");
    cmd->add_option("--library", o.library, "material library file");
    cmd->add_option("--gripper", o.gripper, "gripper profile file");
    cmd->add_option("-o,--output-dir", o.output_dir, "output directory");
    cmd->add_option("--provider", o.provider, "fixture | live");
    cmd->add_option("--views", o.views, "max views processed");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--iou-min", o.iou_min, "mask predicted-IoU threshold");
    cmd->add_option("--stability-min", o.stability_min, "mask stability threshold");
    cmd->add_option("--overlap-max", o.overlap_max, "mask overlap suppression threshold");
    cmd->add_option("--tol-rel", o.tol_rel, "visibility depth tolerance");
    cmd->add_option("--front-threshold", o.front_threshold, "surface opacity threshold");
    cmd->add_option("--voxel-size", o.voxel_size, "voxel edge length, meters");
    cmd->add_flag("--dump-intermediates", o.dump_intermediates,
                  "write depth maps and vote tables");
}

gsprop::PipelineConfig build_config(const std::optional<std::string>& config_path,
                                    const Overrides& o) {
    gsprop::PipelineConfig cfg;
    if (config_path)
        cfg = gsprop::load_config(*config_path);
    auto set_path = [](std::filesystem::path& dst, const std::optional<std::string>& src) {
        if (src)
            dst = *src;
    };
    set_path(cfg.scene, o.scene);
    set_path(cfg.cameras, o.cameras);
    set_path(cfg.images_dir, o.images_dir);
    set_path(cfg.masks_dir, o.masks_dir);
    set_path(cfg.fixtures_dir, o.fixtures_dir);
    set_path(cfg.library, o.library);
    set_path(cfg.gripper, o.gripper);
    set_path(cfg.output_dir, o.output_dir);
    if (o.provider) {
        if (*o.provider == "fixture")
            cfg.provider = gsprop::ProviderMode::fixture;
        else if (*o.provider == "live")
            cfg.provider = gsprop::ProviderMode::live;
        else
            throw gsprop::DataError("unknown provider '" + *o.provider + "'");
    }
    if (o.views)
        cfg.views = *o.views;
    if (o.workers)
        cfg.workers = *o.workers;
    if (o.iou_min)
        cfg.iou_min = *o.iou_min;
    if (o.stability_min)
        cfg.stability_min = *o.stability_min;
    if (o.overlap_max)
        cfg.overlap_max = *o.overlap_max;
    if (o.tol_rel)
        cfg.tol_rel = *o.tol_rel;
    if (o.front_threshold)
        cfg.front_threshold = *o.front_threshold;
    if (o.voxel_size)
        cfg.voxel_size = *o.voxel_size;
    if (o.dump_intermediates)
        cfg.dump_intermediates = true;
    if (o.eval_view)
        cfg.eval_view = *o.eval_view;
    set_path(cfg.gt_labels, o.gt_labels);
    set_path(cfg.gt_legend, o.gt_legend);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gsprop: physical-property annotation for 3D Gaussian Splatting scenes"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    Overrides overrides;
    std::string render_view;

    CLI::App* segment = app.add_subcommand("segment", "acquire and filter per-view masks");
    CLI::App* annotate = app.add_subcommand("annotate", "per-view material maps from masks");
    CLI::App* lift = app.add_subcommand("lift", "vote per-Gaussian materials and export");
    CLI::App* render =
        app.add_subcommand("render-materials", "render family labels for one view");
    CLI::App* physics = app.add_subcommand("physics", "mass, hardness and grasp-force reports");
    CLI::App* evaluate = app.add_subcommand("evaluate", "mIoU against annotated ground truth");
    CLI::App* pipeline = app.add_subcommand("pipeline", "multi-stage driver");
    CLI::App* run = pipeline->add_subcommand("run", "run every configured stage in order");
    pipeline->require_subcommand(1);

    for (CLI::App* cmd : {segment, annotate, lift, render, physics, evaluate, run})
        add_common_flags(cmd, config_path, overrides);
    render->add_option("--view", render_view, "view id to render");
    evaluate->add_option("--eval-view", overrides.eval_view, "view id to evaluate");
    evaluate->add_option("--gt-labels", overrides.gt_labels, "ground-truth label PNG");
    evaluate->add_option("--gt-legend", overrides.gt_legend, "ground-truth ordinal legend");
    run->add_option("--eval-view", overrides.eval_view, "view id for render/evaluate stages");
    run->add_option("--gt-labels", overrides.gt_labels, "ground-truth label PNG");
    run->add_option("--gt-legend", overrides.gt_legend, "ground-truth ordinal legend");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const gsprop::PipelineConfig cfg = build_config(config_path, overrides);
        if (segment->parsed())
            gsprop::cmd_segment(cfg);
        else if (annotate->parsed())
            gsprop::cmd_annotate(cfg);
        else if (lift->parsed())
            gsprop::cmd_lift(cfg);
        else if (render->parsed())
            gsprop::cmd_render_materials(cfg,
                                         render_view.empty() ? cfg.eval_view : render_view);
        else if (physics->parsed())
            gsprop::cmd_physics(cfg);
        else if (evaluate->parsed())
            gsprop::cmd_evaluate(cfg);
        else if (pipeline->parsed())
            gsprop::cmd_pipeline_run(cfg);
        return 0;
    } catch (const gsprop::EndpointError& e) {
        std::cerr << "endpoint error: " << e.what() << "\n";
        return 3;
    } catch (const gsprop::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const gsprop::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
