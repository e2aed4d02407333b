#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsprop/grid.hpp"

namespace gsprop {

struct SegmentMask {
    int segment_id = 0; // >= 1
    MaskBitmap bitmap;  // 1 inside the segment
    double predicted_iou = 1.0;
    double stability = 1.0;

    std::size_t area() const;

    // Tight bounding box of the set pixels; returns false for empty masks.
    bool bounding_box(int& x0, int& y0, int& x1, int& y1) const;
};

struct MaskSet {
    std::string view_id;
    int width = 0;
    int height = 0;
    std::vector<SegmentMask> masks; // segment_ids unique within the set
};

// One mask per nonzero label value.
MaskSet mask_set_from_labels(const LabelGrid& labels, std::string view_id);

// Flattens to a label raster. Overlapping pixels go to the mask with the
// higher predicted_iou, then the smaller segment_id.
LabelGrid labels_from_mask_set(const MaskSet& set);

// Reads a 16-bit integer label PNG plus an optional sidecar with
// `segment_id iou stability` lines. Missing sidecar entries default both
// scores to 1.0. Throws DataError on camera-dimension mismatch or duplicate
// sidecar ids.
MaskSet load_mask_set(const std::filesystem::path& label_png,
                      const std::optional<std::filesystem::path>& sidecar, std::string view_id,
                      int expect_width, int expect_height);

void save_mask_set(const std::filesystem::path& label_png, const std::filesystem::path& sidecar,
                   const MaskSet& set);

} // namespace gsprop
