#include "gsprop/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gsprop/error.hpp"
#include "splat_raster.hpp"

namespace gsprop {

LabelRender render_labels(const GaussianCloud& cloud, const PropertyField& field,
                          const MaterialLibrary& library, const CameraModel& cam,
                          const RenderParams& params) {
    if (field.size() != cloud.count)
        throw DataError("property field length does not match the cloud");

    // Material ordinal -> family ordinal, resolved once.
    std::vector<std::uint16_t> family_of_material(library.records().size() + 1, 0);
    for (const auto& rec : library.records())
        family_of_material[library.ordinal_of(rec.material_id)] =
            library.family_ordinal(rec.family);
    for (std::uint16_t m : field.material)
        if (m > library.records().size())
            throw DataError("field names material ordinal " + std::to_string(m) +
                            " outside the library");

    const std::size_t n_families = library.family_count();
    LabelRender out;
    out.view_id = cam.view_id;
    out.labels = LabelGrid(cam.width, cam.height, 0);

    // Per-pixel accumulated weight per family plus total opacity.
    std::vector<float> weight(static_cast<std::size_t>(cam.width) * cam.height * n_families,
                              0.0f);
    FloatGrid accum(cam.width, cam.height, 0.0f);

    detail::rasterize_splats(
        cloud, cam, params, [&](int x, int y, std::size_t index, float alpha, float) {
            const std::uint16_t material = field.material[index];
            if (material == 0)
                return; // unresolved Gaussians carry no label weight
            const std::uint16_t family = family_of_material[material];
            float& total = accum.at(x, y);
            const float w = (1.0f - total) * alpha;
            total += w;
            weight[(static_cast<std::size_t>(y) * cam.width + x) * n_families + family - 1] += w;
        });

    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            if (accum.at(x, y) < params.front_threshold)
                continue;
            const float* w =
                &weight[(static_cast<std::size_t>(y) * cam.width + x) * n_families];
            const std::size_t best =
                static_cast<std::size_t>(std::max_element(w, w + n_families) - w);
            out.labels.at(x, y) = static_cast<std::uint16_t>(best + 1);
        }
    }
    return out;
}

IouReport miou(const LabelGrid& pred, const LabelGrid& gt) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw DataError("miou: prediction and ground truth dimensions differ");

    std::set<std::uint16_t> gt_classes;
    for (std::uint16_t v : gt.data)
        if (v != 0)
            gt_classes.insert(v);

    IouReport report;
    for (std::uint16_t cls : gt_classes) {
        std::size_t inter = 0, uni = 0;
        for (std::size_t i = 0; i < gt.data.size(); ++i) {
            const bool in_gt = gt.data[i] == cls;
            const bool in_pred = pred.data[i] == cls;
            inter += in_gt && in_pred;
            uni += in_gt || in_pred;
        }
        const double iou = uni == 0 ? 0.0 : static_cast<double>(inter) / uni;
        report.per_class[cls] = iou;
        report.counts[cls] = {inter, uni};
        report.miou += iou;
    }
    if (!report.per_class.empty())
        report.miou /= static_cast<double>(report.per_class.size());
    return report;
}

ScalarMetrics scalar_metrics(double p, double p_hat) {
    if (!(p > 0) || !(p_hat > 0))
        throw DataError("scalar_metrics: values must be positive for the log/ratio metrics");
    ScalarMetrics m;
    m.ade = std::abs(p - p_hat);
    m.alde = std::abs(std::log(p) - std::log(p_hat));
    m.ape = std::abs((p - p_hat) / p);
    m.mnre = std::min(p / p_hat, p_hat / p);
    return m;
}

double pra(std::span<const double> p, std::span<const double> p_hat) {
    if (p.size() != p_hat.size())
        throw DataError("pra: lists must have equal length");
    if (p.size() < 2)
        throw DataError("pra: needs at least two entries");

    auto sign = [](double d) { return d > 0 ? 1 : (d < 0 ? -1 : 0); };
    std::size_t agree = 0, total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = i + 1; j < p.size(); ++j) {
            ++total;
            agree += sign(p[i] - p[j]) == sign(p_hat[i] - p_hat[j]);
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

GraspRates grasp_rates(std::span<const std::pair<bool, bool>> trials) {
    if (trials.empty())
        throw DataError("grasp_rates: no trials");
    GraspRates rates;
    for (const auto& [picked_up, no_damage] : trials) {
        rates.pur += picked_up;
        rates.ndr += no_damage;
        rates.sr += picked_up && no_damage;
    }
    const double n = static_cast<double>(trials.size());
    rates.pur /= n;
    rates.ndr /= n;
    rates.sr /= n;
    return rates;
}

} // namespace gsprop
