#pragma once

#include <string>
#include <vector>

#include "gsprop/config.hpp"

namespace gsprop {

// Pipeline stages, shared by the CLI and the tests. Every stage is
// re-runnable and, in fixture mode, byte-deterministic on unchanged inputs.
// Outputs land under config.output_dir:
//
//   masks/<view>.png|.meta      segment
//   material_maps/<view>.png    annotate (+ legend.txt, annotations/<view>.txt)
//   annotated.ply               lift (+ manifest.txt, summary.txt)
//   votes.txt, depth/<view>.gsdm   lift with dump_intermediates
//   renders/<view>.png          render-materials (+ legend.txt)
//   physics_report.txt          physics (+ hardness.txt when requested)
//   metrics.txt, metrics.csv    evaluate

void cmd_segment(const PipelineConfig& config);
void cmd_annotate(const PipelineConfig& config);
void cmd_lift(const PipelineConfig& config);
void cmd_render_materials(const PipelineConfig& config, const std::string& view_id);
void cmd_physics(const PipelineConfig& config);
void cmd_evaluate(const PipelineConfig& config);
void cmd_pipeline_run(const PipelineConfig& config);

// Cameras for the run: parsed, validated, sorted by view_id and truncated to
// config.views.
std::vector<CameraModel> load_pipeline_cameras(const PipelineConfig& config);

} // namespace gsprop
