#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gsprop/error.hpp"
#include "gsprop/gaussian_cloud.hpp"

namespace gsprop {

// Parses the standard 3DGS vertex schema (x,y,z, opacity, scale_0..2,
// rot_0..3, f_dc_0..2, optional f_rest_*) from a binary-little-endian or
// ascii PLY and applies the activations: sigmoid on opacity, exp on the log
// scales, normalization on the rot quaternion (stored w,x,y,z).
GaussianCloud parse_gaussian_ply(std::span<const std::byte> bytes);

// Extra per-Gaussian column appended to the vertex element on write.
struct ExtraField {
    std::string name;
    std::variant<std::vector<float>, std::vector<std::int32_t>> values;
};

// Inverse of parse_gaussian_ply. When the cloud still holds its original
// vertex table the base columns are emitted verbatim; otherwise they are
// rebuilt with the inverse activations (logit / log). Throws DataError when
// an extra field's length does not equal cloud.count or its name collides
// with an existing property.
std::vector<std::byte> write_gaussian_ply(const GaussianCloud& cloud,
                                          std::span<const ExtraField> extra = {});

// Reads back a vertex column by name (e.g. "material_id" from an annotated
// scene). Throws DataError when the cloud has no raw table or no such column.
template <typename T>
std::vector<T> extract_column(const GaussianCloud& cloud, std::string_view name) {
    if (!cloud.raw)
        throw DataError("cloud holds no vertex table to extract '" + std::string(name) + "' from");
    const PlyColumn* col = cloud.raw->find(name);
    if (!col)
        throw DataError("no vertex property named '" + std::string(name) + "'");
    std::vector<T> out(col->count());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = col->get<T>(i);
    return out;
}

} // namespace gsprop
