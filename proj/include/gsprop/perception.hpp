#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsprop/grid.hpp"
#include "gsprop/masks.hpp"
#include "gsprop/material_library.hpp"

namespace gsprop {

struct MaskFilterParams {
    double iou_min = 0.88;
    double stability_min = 0.95;
    double overlap_max = 0.7;
};

// Drops masks below the score thresholds, then greedily suppresses overlaps:
// surviving masks are visited in descending predicted_iou and a mask is kept
// only while its pairwise IoU with every kept mask stays <= overlap_max.
// Output segment_ids are reassigned densely from 1; filtering an already
// filtered set is a no-op.
MaskSet filter_masks(const MaskSet& raw, const MaskFilterParams& params = {});

// Mask hierarchy ordered coarse to fine; returns the middle (part) level.
// A single-level hierarchy passes through; an empty one throws DataError.
const MaskSet& select_level(std::span<const MaskSet> hierarchy);

// Chat bundle for one query. Part queries carry exactly three images (full
// view, mask highlighted in red, tight crop); whole-object description
// queries carry one.
struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::vector<ImageRgb> images;
};

// The three part-query images. The original is returned untouched; the
// highlight blends 50% red inside the mask; the crop covers the mask bounding
// box with 5% padding (at least one pixel), background forced to white.
// Throws DataError on an empty mask or dimension mismatch.
std::vector<ImageRgb> compose_triptych(const ImageRgb& image, const MaskBitmap& mask);

struct PromptParams {
    // Candidate count at which the prompt lists materials grouped by family
    // instead of flat, to bound token usage.
    std::size_t group_by_family_above = 40;
};

// Two-stage part instruction: describe the part, then pick a material
// strictly from the candidate list and state density, Young's modulus and
// Poisson ratio inside the fenced machine-readable block.
PromptBundle build_part_prompt(const std::string& object_description,
                               const MaterialLibrary& library, const PromptParams& params = {});

PromptBundle build_describe_prompt();

// Fields recovered from the fenced answer block:
// material: <id>; density: <kg/m3>; youngs_modulus: <Pa>; poisson: <val>
struct ParsedAnswer {
    std::string material_text;
    std::optional<double> density;
    std::optional<double> youngs_modulus;
    std::optional<double> poisson;
};

// Nullopt when the reply carries no parseable fenced block.
std::optional<ParsedAnswer> parse_fenced_answer(std::string_view reply);

struct SegmentAnnotation {
    std::string view_id;
    int segment_id = 0;
    std::string material_id; // resolved library key; empty when unresolved
    std::string raw_material_text;
    std::optional<double> quoted_density;
    std::optional<double> quoted_youngs_modulus;
    std::optional<double> quoted_poisson;
    double confidence = 1.0;

    bool resolved() const { return !material_id.empty(); }
};

} // namespace gsprop
