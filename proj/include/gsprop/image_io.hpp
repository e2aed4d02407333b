#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gsprop/grid.hpp"

namespace gsprop {

ImageRgb read_image_rgb(const std::filesystem::path& path);
void write_image_png(const std::filesystem::path& path, const ImageRgb& image);

// In-memory PNG, for data-URL image parts and fixtures.
std::vector<std::uint8_t> encode_png(const ImageRgb& image);
ImageRgb decode_image_rgb(std::span<const std::uint8_t> bytes);

// Integer label rasters are stored as single-channel 16-bit PNG; 8-bit files
// are accepted and widened on read.
LabelGrid read_label_png(const std::filesystem::path& path);
void write_label_png(const std::filesystem::path& path, const LabelGrid& labels);
std::vector<std::uint8_t> encode_label_png(const LabelGrid& labels);
LabelGrid decode_label_png(std::span<const std::uint8_t> bytes);

// Debug depth dumps: magic "GSDM", u32 width, u32 height, then row-major
// float32, all little-endian.
void write_depth_grid(const std::filesystem::path& path, const FloatGrid& depth);
FloatGrid read_depth_grid(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

} // namespace gsprop
