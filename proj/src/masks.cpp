#include "gsprop/masks.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "gsprop/error.hpp"
#include "gsprop/image_io.hpp"

namespace gsprop {

std::size_t SegmentMask::area() const {
    std::size_t n = 0;
    for (std::uint8_t v : bitmap.data)
        n += v != 0;
    return n;
}

bool SegmentMask::bounding_box(int& x0, int& y0, int& x1, int& y1) const {
    x0 = bitmap.width;
    y0 = bitmap.height;
    x1 = -1;
    y1 = -1;
    for (int y = 0; y < bitmap.height; ++y) {
        for (int x = 0; x < bitmap.width; ++x) {
            if (!bitmap.at(x, y))
                continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    return x1 >= 0;
}

MaskSet mask_set_from_labels(const LabelGrid& labels, std::string view_id) {
    MaskSet set;
    set.view_id = std::move(view_id);
    set.width = labels.width;
    set.height = labels.height;

    std::map<std::uint16_t, std::size_t> index; // label -> mask slot
    for (int y = 0; y < labels.height; ++y) {
        for (int x = 0; x < labels.width; ++x) {
            const std::uint16_t label = labels.at(x, y);
            if (label == 0)
                continue;
            auto [it, fresh] = index.try_emplace(label, set.masks.size());
            if (fresh) {
                SegmentMask m;
                m.segment_id = label;
                m.bitmap = MaskBitmap(labels.width, labels.height, 0);
                set.masks.push_back(std::move(m));
            }
            set.masks[it->second].bitmap.at(x, y) = 1;
        }
    }
    std::sort(set.masks.begin(), set.masks.end(),
              [](const SegmentMask& a, const SegmentMask& b) { return a.segment_id < b.segment_id; });
    return set;
}

LabelGrid labels_from_mask_set(const MaskSet& set) {
    LabelGrid out(set.width, set.height, 0);
    std::vector<const SegmentMask*> order;
    order.reserve(set.masks.size());
    for (const auto& m : set.masks) {
        if (m.segment_id < 1 || m.segment_id > 0xffff)
            throw DataError("segment id " + std::to_string(m.segment_id) +
                            " does not fit the 16-bit label raster");
        order.push_back(&m);
    }
    // Painted in ascending precedence so the preferred mask lands last.
    std::sort(order.begin(), order.end(), [](const SegmentMask* a, const SegmentMask* b) {
        if (a->predicted_iou != b->predicted_iou)
            return a->predicted_iou < b->predicted_iou;
        return a->segment_id > b->segment_id;
    });
    for (const SegmentMask* m : order) {
        for (int y = 0; y < set.height; ++y)
            for (int x = 0; x < set.width; ++x)
                if (m->bitmap.at(x, y))
                    out.at(x, y) = static_cast<std::uint16_t>(m->segment_id);
    }
    return out;
}

MaskSet load_mask_set(const std::filesystem::path& label_png,
                      const std::optional<std::filesystem::path>& sidecar, std::string view_id,
                      int expect_width, int expect_height) {
    LabelGrid labels = read_label_png(label_png);
    if (labels.width != expect_width || labels.height != expect_height)
        throw DataError("mask '" + label_png.string() + "' is " + std::to_string(labels.width) +
                        "x" + std::to_string(labels.height) + " but the camera expects " +
                        std::to_string(expect_width) + "x" + std::to_string(expect_height));

    MaskSet set = mask_set_from_labels(labels, std::move(view_id));

    if (sidecar && std::filesystem::exists(*sidecar)) {
        std::ifstream in(*sidecar);
        if (!in)
            throw DataError("cannot open mask sidecar: " + sidecar->string());
        std::map<int, std::pair<double, double>> meta;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            std::istringstream ls(line);
            int id;
            double iou, stability;
            if (!(ls >> id >> iou >> stability))
                throw DataError("malformed sidecar line '" + line + "' in " + sidecar->string());
            if (!meta.emplace(id, std::make_pair(iou, stability)).second)
                throw DataError("duplicate segment id " + std::to_string(id) + " in " +
                                sidecar->string());
        }
        for (auto& m : set.masks) {
            if (auto it = meta.find(m.segment_id); it != meta.end()) {
                m.predicted_iou = it->second.first;
                m.stability = it->second.second;
            }
        }
    }
    return set;
}

void save_mask_set(const std::filesystem::path& label_png, const std::filesystem::path& sidecar,
                   const MaskSet& set) {
    write_label_png(label_png, labels_from_mask_set(set));
    std::ofstream out(sidecar);
    if (!out)
        throw DataError("cannot write mask sidecar: " + sidecar.string());
    for (const auto& m : set.masks) {
        std::ostringstream line;
        line.precision(17);
        line << m.segment_id << ' ' << m.predicted_iou << ' ' << m.stability << '\n';
        out << line.str();
    }
}

} // namespace gsprop
