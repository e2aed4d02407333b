#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gsprop {

// The ten evaluation family labels, in canonical ordinal order (1-based).
// Families beyond these are extensions and get ordinals 11+ in library order.
inline constexpr std::array<std::string_view, 10> kEvaluationFamilies = {
    "wood", "metal",  "plastic", "glass",    "fabric",
    "foam", "marble", "ceramic", "concrete", "leather"};

struct ValueRange {
    double min = 0, max = 0, nominal = 0;
};

enum class ShoreScale { A, D };

struct ShoreHardness {
    ShoreScale scale = ShoreScale::A;
    double min = 0, max = 0; // on the native scale

    // Midpoint on the unified 0-200 comparison axis (Shore D shifted +100).
    double unified_midpoint() const {
        const double mid = 0.5 * (min + max);
        return scale == ShoreScale::D ? mid + 100.0 : mid;
    }
};

struct MaterialRecord {
    std::string material_id; // lowercase, unique
    std::string family;
    bool family_default = false;
    ValueRange density;        // kg/m^3
    ValueRange youngs_modulus; // Pa
    double poisson_ratio = 0;  // (-1, 0.5)
    double friction_mu = 0;    // against the gripper-tip surface
    double yield_stress = 0;   // Pa
    ShoreHardness shore;
    std::string provenance;
};

class MaterialLibrary {
public:
    // Parses the line-oriented library format (see data/materials.txt).
    // Throws ParseError on schema violations and DataError on range
    // violations, duplicate ids, and missing family defaults.
    static MaterialLibrary load(std::string_view text);
    static MaterialLibrary load_file(const std::filesystem::path& path);

    // Exact id match, else case/whitespace-normalized match, else family-name
    // match returning the family's default record. nullptr when nothing
    // matches.
    const MaterialRecord* resolve(std::string_view name) const;

    const MaterialRecord& record(std::string_view material_id) const;
    const std::string& family_of(std::string_view material_id) const;

    // Dense 1-based material ordinal in library file order; 0 is reserved for
    // "unlabeled". Maps and property fields store these.
    std::uint16_t ordinal_of(std::string_view material_id) const;
    const MaterialRecord& by_ordinal(std::uint16_t ordinal) const;

    // 1-based family ordinal: canonical families 1..10, extensions beyond.
    std::uint16_t family_ordinal(std::string_view family) const;
    const std::string& family_by_ordinal(std::uint16_t ordinal) const;
    std::size_t family_count() const { return family_order_.size(); }

    const std::vector<MaterialRecord>& records() const { return records_; }
    const std::map<std::string, std::vector<std::string>>& families() const { return families_; }

    // Canonical snapshot text; reloads to an equivalent library.
    std::string serialize() const;

private:
    std::vector<MaterialRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::map<std::string, std::vector<std::string>> families_;
    std::map<std::string, std::size_t> family_default_;
    std::vector<std::string> family_order_; // ordinal - 1 -> family name
};

} // namespace gsprop
