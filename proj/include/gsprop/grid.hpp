#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gsprop {

// Dense row-major raster. Pixel (x, y) has its sample point at the integer
// coordinates (x, y); the projection code follows the same convention.
template <typename T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Grid() = default;
    Grid(int w, int h, T fill = T{})
        : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }

    bool inside(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    std::size_t size() const { return data.size(); }

    bool operator==(const Grid&) const = default;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

using ImageRgb = Grid<Rgb>;
using LabelGrid = Grid<std::uint16_t>; // 0 = background / unassigned
using MaskBitmap = Grid<std::uint8_t>; // 0 or 1
using FloatGrid = Grid<float>;

} // namespace gsprop
