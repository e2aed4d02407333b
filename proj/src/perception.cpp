#include "gsprop/perception.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "gsprop/error.hpp"

namespace gsprop {

namespace {

double pairwise_iou(const MaskBitmap& a, const MaskBitmap& b) {
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const bool in_a = a.data[i] != 0;
        const bool in_b = b.data[i] != 0;
        inter += in_a && in_b;
        uni += in_a || in_b;
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

MaskSet filter_masks(const MaskSet& raw, const MaskFilterParams& params) {
    MaskSet out;
    out.view_id = raw.view_id;
    out.width = raw.width;
    out.height = raw.height;

    std::vector<const SegmentMask*> candidates;
    for (const auto& m : raw.masks) {
        if (m.predicted_iou < params.iou_min || m.stability < params.stability_min)
            continue;
        candidates.push_back(&m);
    }
    // Greedy suppression in descending predicted_iou; segment_id breaks score
    // ties so the pass is deterministic.
    std::sort(candidates.begin(), candidates.end(),
              [](const SegmentMask* a, const SegmentMask* b) {
                  if (a->predicted_iou != b->predicted_iou)
                      return a->predicted_iou > b->predicted_iou;
                  return a->segment_id < b->segment_id;
              });
    std::vector<const SegmentMask*> kept;
    for (const SegmentMask* cand : candidates) {
        bool suppressed = false;
        for (const SegmentMask* k : kept) {
            if (pairwise_iou(cand->bitmap, k->bitmap) > params.overlap_max) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed)
            kept.push_back(cand);
    }
    // Stable output order and dense ids from 1, keyed by the original ids.
    std::sort(kept.begin(), kept.end(), [](const SegmentMask* a, const SegmentMask* b) {
        return a->segment_id < b->segment_id;
    });
    int next_id = 1;
    for (const SegmentMask* m : kept) {
        SegmentMask copy = *m;
        copy.segment_id = next_id++;
        out.masks.push_back(std::move(copy));
    }
    return out;
}

const MaskSet& select_level(std::span<const MaskSet> hierarchy) {
    if (hierarchy.empty())
        throw DataError("select_level: empty mask hierarchy");
    return hierarchy[hierarchy.size() / 2];
}

std::vector<ImageRgb> compose_triptych(const ImageRgb& image, const MaskBitmap& mask) {
    if (mask.width != image.width || mask.height != image.height)
        throw DataError("compose_triptych: mask dimensions do not match the image");

    int x0, y0, x1, y1;
    {
        SegmentMask probe;
        probe.bitmap = mask;
        if (!probe.bounding_box(x0, y0, x1, y1))
            throw DataError("compose_triptych: empty mask");
    }

    ImageRgb highlighted = image;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            if (!mask.at(x, y))
                continue;
            Rgb& px = highlighted.at(x, y);
            px.r = static_cast<std::uint8_t>(std::lround(0.5 * px.r + 0.5 * 255.0));
            px.g = static_cast<std::uint8_t>(std::lround(0.5 * px.g));
            px.b = static_cast<std::uint8_t>(std::lround(0.5 * px.b));
        }
    }

    // 5% padding of the box extent, at least one pixel, clamped to bounds.
    const int pad_x = std::max(1, static_cast<int>(std::lround(0.05 * (x1 - x0 + 1))));
    const int pad_y = std::max(1, static_cast<int>(std::lround(0.05 * (y1 - y0 + 1))));
    const int cx0 = std::max(0, x0 - pad_x);
    const int cy0 = std::max(0, y0 - pad_y);
    const int cx1 = std::min(image.width - 1, x1 + pad_x);
    const int cy1 = std::min(image.height - 1, y1 + pad_y);

    ImageRgb crop(cx1 - cx0 + 1, cy1 - cy0 + 1, Rgb{255, 255, 255});
    for (int y = cy0; y <= cy1; ++y)
        for (int x = cx0; x <= cx1; ++x)
            if (mask.at(x, y))
                crop.at(x - cx0, y - cy0) = image.at(x, y);

    return {image, std::move(highlighted), std::move(crop)};
}

namespace {

constexpr const char* kSystemText =
    "You are a careful materials analyst. You identify what physical material "
    "an object part is made of from photographs and report standard physical "
    "properties for it.";

constexpr const char* kAnswerContract =
    "Finish with exactly one fenced code block of the form:\n"
    "```\n"
    "material: <id>; density: <kg/m3>; youngs_modulus: <Pa>; poisson: <val>\n"
    "```\n"
    "where <id> is copied verbatim from the candidate list.";

} // namespace

PromptBundle build_part_prompt(const std::string& object_description,
                               const MaterialLibrary& library, const PromptParams& params) {
    if (library.records().empty())
        throw DataError("build_part_prompt: empty candidate list");

    std::ostringstream user;
    user << "You are looking at one object. " ;
    if (!object_description.empty())
        user << "Overall description: " << object_description << "\n\n";
    user << "Three images follow: the full object, the same view with one part "
            "highlighted in red, and a close crop of that part.\n\n"
         << "Step 1: briefly describe the highlighted part (shape, texture, color, "
            "context within the object).\n"
         << "Step 2: identify the material of the part, choosing strictly from the "
            "candidate list below, and state its mass density, Young's modulus and "
            "Poisson's ratio.\n\n"
         << "Candidates:\n";

    if (library.records().size() > params.group_by_family_above) {
        for (const auto& [family, ids] : library.families()) {
            user << "- " << family << ": ";
            for (std::size_t i = 0; i < ids.size(); ++i)
                user << (i ? ", " : "") << ids[i];
            user << "\n";
        }
    } else {
        for (const auto& rec : library.records())
            user << "- " << rec.material_id << "\n";
    }
    user << "\n" << kAnswerContract;

    PromptBundle bundle;
    bundle.system_text = kSystemText;
    bundle.user_text = user.str();
    return bundle;
}

PromptBundle build_describe_prompt() {
    PromptBundle bundle;
    bundle.system_text = kSystemText;
    bundle.user_text =
        "Briefly describe the object in the image: what it is, its main parts, "
        "and anything notable about the materials they appear to be made of. "
        "Answer in at most three sentences.";
    return bundle;
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return std::string(s.substr(b, e - b));
}

std::optional<double> parse_double(std::string_view s) {
    try {
        std::size_t used = 0;
        const std::string str = trim(s);
        const double v = std::stod(str, &used);
        if (used == 0)
            return std::nullopt;
        return v;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

} // namespace

std::optional<ParsedAnswer> parse_fenced_answer(std::string_view reply) {
    // Last fenced block wins: the reply may quote the contract before the
    // actual answer.
    std::size_t search = 0;
    std::optional<ParsedAnswer> parsed;
    for (;;) {
        const std::size_t open = reply.find("```", search);
        if (open == std::string_view::npos)
            break;
        std::size_t body = open + 3;
        // Skip a language tag on the fence line.
        const std::size_t eol = reply.find('\n', body);
        const std::size_t close = reply.find("```", body);
        if (close == std::string_view::npos)
            break;
        if (eol != std::string_view::npos && eol < close)
            body = eol + 1;
        const std::string_view block = reply.substr(body, close - body);
        search = close + 3;

        ParsedAnswer candidate;
        bool has_material = false;
        std::size_t pos = 0;
        while (pos < block.size()) {
            std::size_t end = block.find_first_of(";\n", pos);
            if (end == std::string_view::npos)
                end = block.size();
            const std::string_view item = block.substr(pos, end - pos);
            pos = end + 1;
            const std::size_t colon = item.find(':');
            if (colon == std::string_view::npos)
                continue;
            std::string key = trim(item.substr(0, colon));
            std::transform(key.begin(), key.end(), key.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            const std::string_view value = item.substr(colon + 1);
            if (key == "material") {
                candidate.material_text = trim(value);
                has_material = !candidate.material_text.empty();
            } else if (key == "density") {
                candidate.density = parse_double(value);
            } else if (key == "youngs_modulus" || key == "young's modulus") {
                candidate.youngs_modulus = parse_double(value);
            } else if (key == "poisson") {
                candidate.poisson = parse_double(value);
            }
        }
        if (has_material)
            parsed = std::move(candidate);
    }
    return parsed;
}

} // namespace gsprop
