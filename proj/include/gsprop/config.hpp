#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsprop/camera.hpp"
#include "gsprop/providers.hpp"

namespace gsprop {

enum class ProviderMode { fixture, live };

// Everything a pipeline run needs, file-backed with flag overrides on top.
// The file format is line-oriented `key = value` with `#` comments and
// ${ENV_VAR} interpolation.
struct PipelineConfig {
    // paths
    std::filesystem::path scene;    // Gaussian PLY
    std::filesystem::path cameras;  // transforms JSON or COLMAP cameras.txt
    CameraFormat cameras_format = CameraFormat::auto_detect;
    std::filesystem::path images_dir;   // per-view images (live mode)
    std::filesystem::path masks_dir;    // input masks (fixture path)
    std::filesystem::path fixtures_dir; // fixture annotations
    std::filesystem::path library = "data/materials.txt";
    std::filesystem::path gripper; // gripper profile, optional
    std::filesystem::path output_dir = "out";

    // providers
    ProviderMode provider = ProviderMode::fixture;
    LmmEndpoint lmm;
    SegEndpoint seg;

    // selection & execution
    int views = 10; // max views processed, in view_id order
    int workers = 1;
    bool dump_intermediates = false;

    // thresholds
    double iou_min = 0.88;
    double stability_min = 0.95;
    double overlap_max = 0.7;
    double tol_rel = 0.01;
    double front_threshold = 0.5;
    double voxel_size = 0.005;
    double min_segment_area_frac = 0.001;
    int propagate_k = 8;

    // evaluation
    std::string eval_view;
    std::filesystem::path gt_labels;
    std::filesystem::path gt_legend;

    // grasping
    std::optional<Eigen::Vector3d> grasp_contact;
    Eigen::Vector3d grasp_axis{1, 0, 0};
    std::optional<double> surface_area;
    std::optional<double> thickness;
    std::optional<double> kappa_max;
    std::string hardness_view;
    std::vector<std::pair<int, int>> hardness_points;

    // Throws DataError when thresholds leave their documented ranges or
    // required paths are empty.
    void validate() const;
};

// Parses config text. Unknown keys are rejected; ${VAR} references resolve
// against the environment and fail loudly when unset. `base_dir` anchors
// relative paths.
PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

} // namespace gsprop
