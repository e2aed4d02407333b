#include "gsprop/ply.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsprop {

namespace {

constexpr const char* kRequired[] = {"x",       "y",       "z",     "opacity", "scale_0",
                                     "scale_1", "scale_2", "rot_0", "rot_1",   "rot_2",
                                     "rot_3",   "f_dc_0",  "f_dc_1", "f_dc_2"};

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

float logit(float y) {
    // Inverse of sigmoid, saturated so synthetic clouds with opacity 0 or 1
    // still serialize to finite raws.
    const float eps = 1e-7f;
    y = std::clamp(y, eps, 1.0f - eps);
    return std::log(y / (1.0f - y));
}

} // namespace

double GaussianCloud::extent() const {
    if (positions.empty())
        return 0.0;
    Eigen::Vector3f lo = positions.front(), hi = positions.front();
    for (const auto& p : positions) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).cast<double>().norm();
}

void GaussianCloud::validate() const {
    auto check_len = [&](std::size_t n, const char* what) {
        if (n != count)
            throw DataError(std::string(what) + " array length " + std::to_string(n) +
                            " != count " + std::to_string(count));
    };
    check_len(positions.size(), "positions");
    check_len(opacities.size(), "opacities");
    check_len(scales.size(), "scales");
    check_len(rotations.size(), "rotations");
    const std::size_t sh_per = static_cast<std::size_t>(3 * sh_dim(sh_degree));
    if (sh_coeffs.size() != count * sh_per)
        throw DataError("sh_coeffs length " + std::to_string(sh_coeffs.size()) + " != count*" +
                        std::to_string(sh_per));
    for (std::size_t i = 0; i < count; ++i) {
        if (!(opacities[i] >= 0.0f && opacities[i] <= 1.0f))
            throw DataError("opacity out of [0,1] at Gaussian " + std::to_string(i));
        if (!(scales[i].minCoeff() > 0.0f))
            throw DataError("nonpositive scale at Gaussian " + std::to_string(i));
        if (std::abs(rotations[i].norm() - 1.0f) > 1e-6f)
            throw DataError("non-unit rotation at Gaussian " + std::to_string(i));
    }
}

GaussianCloud parse_gaussian_ply(std::span<const std::byte> bytes) {
    auto table = std::make_shared<PlyTable>(read_ply(bytes));

    for (const char* name : kRequired)
        if (!table->has(name))
            throw ParseError(std::string("missing required vertex property '") + name + "'");

    // f_rest_* determines the SH degree: 3 * ((d+1)^2 - 1) rest coefficients.
    int n_rest = 0;
    while (table->has("f_rest_" + std::to_string(n_rest)))
        ++n_rest;
    int degree = 0;
    {
        int rest_per_channel = n_rest / 3;
        int dim = rest_per_channel + 1;
        while ((degree + 1) * (degree + 1) < dim)
            ++degree;
        if ((degree + 1) * (degree + 1) != dim || n_rest % 3 != 0)
            throw ParseError("f_rest_* count " + std::to_string(n_rest) +
                             " does not match any spherical-harmonic degree");
    }

    GaussianCloud cloud;
    cloud.count = table->count;
    cloud.sh_degree = degree;
    cloud.positions.resize(cloud.count);
    cloud.opacities.resize(cloud.count);
    cloud.scales.resize(cloud.count);
    cloud.rotations.resize(cloud.count);
    const int sh_per = 3 * GaussianCloud::sh_dim(degree);
    cloud.sh_coeffs.resize(cloud.count * static_cast<std::size_t>(sh_per));

    const PlyColumn* cx = table->find("x");
    const PlyColumn* cy = table->find("y");
    const PlyColumn* cz = table->find("z");
    const PlyColumn* cop = table->find("opacity");
    const PlyColumn* cs[3] = {table->find("scale_0"), table->find("scale_1"),
                              table->find("scale_2")};
    const PlyColumn* cr[4] = {table->find("rot_0"), table->find("rot_1"), table->find("rot_2"),
                              table->find("rot_3")};
    std::vector<const PlyColumn*> sh_cols;
    sh_cols.reserve(sh_per);
    for (int c = 0; c < 3; ++c)
        sh_cols.push_back(table->find("f_dc_" + std::to_string(c)));
    for (int r = 0; r < n_rest; ++r)
        sh_cols.push_back(table->find("f_rest_" + std::to_string(r)));

    for (std::size_t i = 0; i < cloud.count; ++i) {
        cloud.positions[i] = {cx->get<float>(i), cy->get<float>(i), cz->get<float>(i)};
        cloud.opacities[i] = sigmoid(cop->get<float>(i));
        cloud.scales[i] = {std::exp(cs[0]->get<float>(i)), std::exp(cs[1]->get<float>(i)),
                           std::exp(cs[2]->get<float>(i))};
        Eigen::Quaternionf q(cr[0]->get<float>(i), cr[1]->get<float>(i), cr[2]->get<float>(i),
                             cr[3]->get<float>(i));
        const float n = q.norm();
        cloud.rotations[i] = n > 0.0f ? Eigen::Quaternionf(q.coeffs() / n)
                                      : Eigen::Quaternionf::Identity();
        float* sh = cloud.sh_coeffs.data() + i * sh_per;
        for (int c = 0; c < sh_per; ++c)
            sh[c] = sh_cols[static_cast<std::size_t>(c)]->get<float>(i);
    }

    cloud.raw = std::move(table);
    return cloud;
}

std::vector<std::byte> write_gaussian_ply(const GaussianCloud& cloud,
                                          std::span<const ExtraField> extra) {
    PlyTable table;
    if (cloud.raw && cloud.raw->count == cloud.count) {
        table = *cloud.raw;
    } else {
        table.count = cloud.count;
        // Reserve up front: the column references below must stay valid.
        table.columns.reserve(11 + 3 * static_cast<std::size_t>(
                                       GaussianCloud::sh_dim(cloud.sh_degree)));
        auto add = [&](std::string name) -> PlyColumn& {
            table.columns.push_back({std::move(name), PlyType::f32, {}});
            auto& col = table.columns.back();
            col.bytes.reserve(cloud.count * sizeof(float));
            return col;
        };
        PlyColumn& x = add("x");
        PlyColumn& y = add("y");
        PlyColumn& z = add("z");
        const int sh_per = 3 * GaussianCloud::sh_dim(cloud.sh_degree);
        std::vector<PlyColumn*> sh_cols;
        for (int c = 0; c < 3; ++c)
            sh_cols.push_back(&add("f_dc_" + std::to_string(c)));
        for (int r = 0; r < sh_per - 3; ++r)
            sh_cols.push_back(&add("f_rest_" + std::to_string(r)));
        PlyColumn& op = add("opacity");
        PlyColumn* sc[3] = {&add("scale_0"), &add("scale_1"), &add("scale_2")};
        PlyColumn* rt[4] = {&add("rot_0"), &add("rot_1"), &add("rot_2"), &add("rot_3")};

        for (std::size_t i = 0; i < cloud.count; ++i) {
            x.push(cloud.positions[i].x());
            y.push(cloud.positions[i].y());
            z.push(cloud.positions[i].z());
            const float* sh = cloud.sh_coeffs.data() + i * static_cast<std::size_t>(sh_per);
            for (int c = 0; c < sh_per; ++c)
                sh_cols[static_cast<std::size_t>(c)]->push(sh[c]);
            op.push(logit(cloud.opacities[i]));
            for (int a = 0; a < 3; ++a)
                sc[a]->push(std::log(cloud.scales[i][a]));
            const Eigen::Quaternionf& q = cloud.rotations[i];
            rt[0]->push(q.w());
            rt[1]->push(q.x());
            rt[2]->push(q.y());
            rt[3]->push(q.z());
        }
    }

    for (const auto& field : extra) {
        if (table.find(field.name))
            throw DataError("extra field '" + field.name + "' collides with an existing property");
        PlyColumn col;
        col.name = field.name;
        if (const auto* fv = std::get_if<std::vector<float>>(&field.values)) {
            if (fv->size() != cloud.count)
                throw DataError("extra field '" + field.name + "' length " +
                                std::to_string(fv->size()) + " != count " +
                                std::to_string(cloud.count));
            col.type = PlyType::f32;
            for (float v : *fv)
                col.push(v);
        } else {
            const auto& iv = std::get<std::vector<std::int32_t>>(field.values);
            if (iv.size() != cloud.count)
                throw DataError("extra field '" + field.name + "' length " +
                                std::to_string(iv.size()) + " != count " +
                                std::to_string(cloud.count));
            col.type = PlyType::i32;
            for (std::int32_t v : iv)
                col.push(v);
        }
        table.columns.push_back(std::move(col));
    }

    return write_ply(table);
}

} // namespace gsprop
