#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsprop/camera.hpp"
#include "gsprop/depth_render.hpp"
#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/grid.hpp"
#include "gsprop/material_library.hpp"
#include "gsprop/property_field.hpp"

namespace gsprop {

struct LabelRender {
    std::string view_id;
    LabelGrid labels; // family ordinals, 0 = background
};

// Splats one-hot family vectors with the same front-to-back weights as the
// depth render; a pixel takes the argmax family once its accumulated opacity
// reaches front_threshold, otherwise stays background.
LabelRender render_labels(const GaussianCloud& cloud, const PropertyField& field,
                          const MaterialLibrary& library, const CameraModel& cam,
                          const RenderParams& params = {});

struct IouReport {
    std::map<std::uint16_t, double> per_class; // classes present in gt
    double miou = 0;
    std::map<std::uint16_t, std::pair<std::size_t, std::size_t>> counts; // intersection, union
};

// PASCAL-style mIoU: per-class intersection over union, averaged over the
// classes present in the ground truth; background (0) is excluded and
// prediction-only classes contribute via the union denominators.
IouReport miou(const LabelGrid& pred, const LabelGrid& gt);

struct ScalarMetrics {
    double ade = 0;  // |p - p_hat|
    double alde = 0; // |ln p - ln p_hat|
    double ape = 0;  // |(p - p_hat) / p|
    double mnre = 0; // min(p/p_hat, p_hat/p)
};

// Throws DataError when p or p_hat is nonpositive (the log/ratio metrics are
// undefined there).
ScalarMetrics scalar_metrics(double p, double p_hat);

// Fraction of unordered pairs whose strict order agrees between p and p_hat.
// A tie on one side only counts as disagreement; ties on both sides agree.
double pra(std::span<const double> p, std::span<const double> p_hat);

struct GraspRates {
    double pur = 0; // picked-up rate
    double ndr = 0; // no-damage rate
    double sr = 0;  // both criteria met
};

// trials: (picked_up, no_damage) per attempt.
GraspRates grasp_rates(std::span<const std::pair<bool, bool>> trials);

} // namespace gsprop
