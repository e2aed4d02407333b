#include "gsprop/material_library.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "gsprop/error.hpp"

namespace gsprop {

namespace {

std::string normalize(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back('_');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

double parse_number(const std::string& tok, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size())
            throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("invalid number '" + tok + "' in " + where);
    }
}

void check_range(const ValueRange& r, const std::string& field, const std::string& id) {
    if (!(r.min <= r.nominal && r.nominal <= r.max))
        throw DataError("material '" + id + "': " + field + " violates min <= nominal <= max (" +
                        std::to_string(r.min) + ", " + std::to_string(r.nominal) + ", " +
                        std::to_string(r.max) + ")");
}

} // namespace

MaterialLibrary MaterialLibrary::load(std::string_view text) {
    MaterialLibrary lib;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool version_seen = false;

    MaterialRecord current;
    bool in_record = false;
    bool has_density = false, has_youngs = false, has_poisson = false, has_friction = false,
         has_yield = false, has_shore = false;

    auto finish_record = [&] {
        const std::string& id = current.material_id;
        if (current.family.empty())
            throw ParseError("material '" + id + "': missing family");
        if (!has_density || !has_youngs || !has_poisson || !has_friction || !has_yield ||
            !has_shore)
            throw ParseError("material '" + id + "': record is missing required fields");
        check_range(current.density, "density", id);
        check_range(current.youngs_modulus, "youngs_modulus", id);
        if (!(current.density.min > 0))
            throw DataError("material '" + id + "': density must be positive");
        if (!(current.youngs_modulus.min > 0))
            throw DataError("material '" + id + "': youngs_modulus must be positive");
        if (!(current.poisson_ratio > -1.0 && current.poisson_ratio < 0.5))
            throw DataError("material '" + id + "': poisson_ratio outside (-1, 0.5)");
        if (!(current.friction_mu > 0))
            throw DataError("material '" + id + "': friction must be positive");
        if (!(current.yield_stress > 0))
            throw DataError("material '" + id + "': yield_stress must be positive");
        if (current.shore.min > current.shore.max)
            throw DataError("material '" + id + "': shore range inverted");
        if (!lib.index_.emplace(id, lib.records_.size()).second)
            throw DataError("duplicate material id '" + id + "'");
        lib.families_[current.family].push_back(id);
        if (current.family_default) {
            if (!lib.family_default_.emplace(current.family, lib.records_.size()).second)
                throw DataError("family '" + current.family + "' declares two default records");
        }
        lib.records_.push_back(std::move(current));
        current = {};
        has_density = has_youngs = has_poisson = has_friction = has_yield = has_shore = false;
        in_record = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            continue;
        const std::string where = "line " + std::to_string(line_no);

        if (key == "schema_version") {
            int v = 0;
            if (!(ls >> v) || v != 1)
                throw ParseError("unsupported material library schema_version at " + where);
            version_seen = true;
        } else if (key == "material") {
            if (in_record)
                throw ParseError("nested material record at " + where);
            if (!(ls >> current.material_id))
                throw ParseError("material without id at " + where);
            if (current.material_id != normalize(current.material_id))
                throw ParseError("material id '" + current.material_id +
                                 "' must be lowercase with no spaces at " + where);
            in_record = true;
        } else if (key == "end") {
            if (!in_record)
                throw ParseError("'end' outside a material record at " + where);
            finish_record();
        } else if (in_record) {
            if (key == "family") {
                if (!(ls >> current.family))
                    throw ParseError("missing family name at " + where);
            } else if (key == "default") {
                current.family_default = true;
            } else if (key == "density" || key == "youngs_modulus") {
                std::string a, b, c;
                if (!(ls >> a >> b >> c))
                    throw ParseError("expected 'min max nominal' for " + key + " at " + where);
                ValueRange r{parse_number(a, where), parse_number(b, where),
                             parse_number(c, where)};
                if (key == "density") {
                    current.density = r;
                    has_density = true;
                } else {
                    current.youngs_modulus = r;
                    has_youngs = true;
                }
            } else if (key == "poisson") {
                std::string a;
                if (!(ls >> a))
                    throw ParseError("missing poisson value at " + where);
                current.poisson_ratio = parse_number(a, where);
                has_poisson = true;
            } else if (key == "friction") {
                std::string a;
                if (!(ls >> a))
                    throw ParseError("missing friction value at " + where);
                current.friction_mu = parse_number(a, where);
                has_friction = true;
            } else if (key == "yield_stress") {
                std::string a;
                if (!(ls >> a))
                    throw ParseError("missing yield_stress value at " + where);
                current.yield_stress = parse_number(a, where);
                has_yield = true;
            } else if (key == "shore") {
                std::string scale, a, b;
                if (!(ls >> scale >> a >> b))
                    throw ParseError("expected 'shore A|D min max' at " + where);
                if (scale == "A")
                    current.shore.scale = ShoreScale::A;
                else if (scale == "D")
                    current.shore.scale = ShoreScale::D;
                else
                    throw ParseError("unknown shore scale '" + scale + "' at " + where);
                current.shore.min = parse_number(a, where);
                current.shore.max = parse_number(b, where);
                has_shore = true;
            } else if (key == "provenance") {
                std::string rest;
                std::getline(ls, rest);
                const auto start = rest.find_first_not_of(" \t");
                current.provenance = start == std::string::npos ? "" : rest.substr(start);
            } else {
                throw ParseError("unknown record field '" + key + "' at " + where);
            }
        } else {
            throw ParseError("unexpected token '" + key + "' outside a record at " + where);
        }
    }
    if (in_record)
        throw ParseError("unterminated material record '" + current.material_id + "'");
    if (!version_seen)
        throw ParseError("material library missing schema_version");
    if (lib.records_.empty())
        throw ParseError("material library contains no records");

    // Family ordinals: the canonical ten first, then extensions as seen.
    for (std::string_view fam : kEvaluationFamilies)
        lib.family_order_.emplace_back(fam);
    for (const auto& rec : lib.records_) {
        if (std::find(lib.family_order_.begin(), lib.family_order_.end(), rec.family) ==
            lib.family_order_.end())
            lib.family_order_.push_back(rec.family);
    }
    // Every family needs a default for family-name resolution; the first
    // record of the family serves when none is flagged.
    for (const auto& [family, ids] : lib.families_) {
        if (!lib.family_default_.count(family))
            lib.family_default_[family] = lib.index_.at(ids.front());
    }
    return lib;
}

MaterialLibrary MaterialLibrary::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open material library: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load(ss.str());
}

const MaterialRecord* MaterialLibrary::resolve(std::string_view name) const {
    if (auto it = index_.find(std::string(name)); it != index_.end())
        return &records_[it->second];
    const std::string norm = normalize(name);
    if (auto it = index_.find(norm); it != index_.end())
        return &records_[it->second];
    if (auto it = family_default_.find(norm); it != family_default_.end())
        return &records_[it->second];
    return nullptr;
}

const MaterialRecord& MaterialLibrary::record(std::string_view material_id) const {
    auto it = index_.find(std::string(material_id));
    if (it == index_.end())
        throw DataError("unknown material id '" + std::string(material_id) + "'");
    return records_[it->second];
}

const std::string& MaterialLibrary::family_of(std::string_view material_id) const {
    return record(material_id).family;
}

std::uint16_t MaterialLibrary::ordinal_of(std::string_view material_id) const {
    auto it = index_.find(std::string(material_id));
    if (it == index_.end())
        throw DataError("unknown material id '" + std::string(material_id) + "'");
    return static_cast<std::uint16_t>(it->second + 1);
}

const MaterialRecord& MaterialLibrary::by_ordinal(std::uint16_t ordinal) const {
    if (ordinal == 0 || ordinal > records_.size())
        throw DataError("material ordinal " + std::to_string(ordinal) + " out of range");
    return records_[ordinal - 1];
}

std::uint16_t MaterialLibrary::family_ordinal(std::string_view family) const {
    auto it = std::find(family_order_.begin(), family_order_.end(), family);
    if (it == family_order_.end())
        throw DataError("unknown family '" + std::string(family) + "'");
    return static_cast<std::uint16_t>(it - family_order_.begin() + 1);
}

const std::string& MaterialLibrary::family_by_ordinal(std::uint16_t ordinal) const {
    if (ordinal == 0 || ordinal > family_order_.size())
        throw DataError("family ordinal " + std::to_string(ordinal) + " out of range");
    return family_order_[ordinal - 1];
}

std::string MaterialLibrary::serialize() const {
    std::ostringstream out;
    out.precision(17);
    out << "schema_version 1\n";
    for (const auto& r : records_) {
        out << "\nmaterial " << r.material_id << "\n";
        out << "  family " << r.family << "\n";
        if (r.family_default)
            out << "  default\n";
        out << "  density " << r.density.min << ' ' << r.density.max << ' ' << r.density.nominal
            << "\n";
        out << "  youngs_modulus " << r.youngs_modulus.min << ' ' << r.youngs_modulus.max << ' '
            << r.youngs_modulus.nominal << "\n";
        out << "  poisson " << r.poisson_ratio << "\n";
        out << "  friction " << r.friction_mu << "\n";
        out << "  yield_stress " << r.yield_stress << "\n";
        out << "  shore " << (r.shore.scale == ShoreScale::A ? 'A' : 'D') << ' ' << r.shore.min
            << ' ' << r.shore.max << "\n";
        if (!r.provenance.empty())
            out << "  provenance " << r.provenance << "\n";
        out << "end\n";
    }
    return out.str();
}

} // namespace gsprop
