#include "gsprop/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gsprop/error.hpp"

namespace gsprop {

namespace {

std::string interpolate_env(const std::string& value) {
    std::string out;
    std::size_t pos = 0;
    while (pos < value.size()) {
        const std::size_t open = value.find("${", pos);
        if (open == std::string::npos) {
            out += value.substr(pos);
            break;
        }
        out += value.substr(pos, open - pos);
        const std::size_t close = value.find('}', open + 2);
        if (close == std::string::npos)
            throw ParseError("config: unterminated ${...} reference in '" + value + "'");
        const std::string name = value.substr(open + 2, close - open - 2);
        const char* env = std::getenv(name.c_str());
        if (!env)
            throw DataError("config references unset environment variable " + name);
        out += env;
        pos = close + 1;
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& v, const std::string& key) {
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw ParseError("config: invalid number '" + v + "' for " + key);
    }
}

int to_int(const std::string& v, const std::string& key) {
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        throw ParseError("config: invalid integer '" + v + "' for " + key);
    }
}

bool to_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ParseError("config: invalid boolean '" + v + "' for " + key);
}

Eigen::Vector3d to_vec3(const std::string& v, const std::string& key) {
    Eigen::Vector3d out;
    std::istringstream in(v);
    std::string tok;
    for (int i = 0; i < 3; ++i) {
        if (!std::getline(in, tok, ','))
            throw ParseError("config: expected 'x,y,z' for " + key);
        out[i] = to_double(trim(tok), key);
    }
    return out;
}

std::filesystem::path to_path(const std::string& v, const std::filesystem::path& base) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base / p;
}

} // namespace

void PipelineConfig::validate() const {
    auto in_unit = [](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0))
            throw DataError(std::string("config: ") + name + " must lie in [0, 1]");
    };
    in_unit(iou_min, "iou_min");
    in_unit(stability_min, "stability_min");
    in_unit(overlap_max, "overlap_max");
    in_unit(front_threshold, "front_threshold");
    in_unit(min_segment_area_frac, "min_segment_area_frac");
    if (!(tol_rel >= 0))
        throw DataError("config: tol_rel must be nonnegative");
    if (!(voxel_size > 0))
        throw DataError("config: voxel_size must be positive");
    if (views < 1)
        throw DataError("config: views must be >= 1");
    if (workers < 1)
        throw DataError("config: workers must be >= 1");
    if (propagate_k < 1)
        throw DataError("config: propagate_k must be >= 1");
    if (scene.empty())
        throw DataError("config: scene path is required");
    if (cameras.empty())
        throw DataError("config: cameras path is required");
    if (output_dir.empty())
        throw DataError("config: output_dir is required");
}

PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    PipelineConfig cfg;
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty())
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = interpolate_env(trim(stripped.substr(eq + 1)));
        if (value.empty())
            continue; // empty assignment keeps the default

        if (key == "scene")
            cfg.scene = to_path(value, base_dir);
        else if (key == "cameras")
            cfg.cameras = to_path(value, base_dir);
        else if (key == "cameras_format") {
            if (value == "auto")
                cfg.cameras_format = CameraFormat::auto_detect;
            else if (value == "transforms_json")
                cfg.cameras_format = CameraFormat::transforms_json;
            else if (value == "colmap_text")
                cfg.cameras_format = CameraFormat::colmap_text;
            else
                throw ParseError("config: unknown cameras_format '" + value + "'");
        } else if (key == "images_dir")
            cfg.images_dir = to_path(value, base_dir);
        else if (key == "masks_dir")
            cfg.masks_dir = to_path(value, base_dir);
        else if (key == "fixtures_dir")
            cfg.fixtures_dir = to_path(value, base_dir);
        else if (key == "library")
            cfg.library = to_path(value, base_dir);
        else if (key == "gripper")
            cfg.gripper = to_path(value, base_dir);
        else if (key == "output_dir")
            cfg.output_dir = to_path(value, base_dir);
        else if (key == "provider") {
            if (value == "fixture")
                cfg.provider = ProviderMode::fixture;
            else if (value == "live")
                cfg.provider = ProviderMode::live;
            else
                throw ParseError("config: unknown provider '" + value + "'");
        } else if (key == "views")
            cfg.views = to_int(value, key);
        else if (key == "workers")
            cfg.workers = to_int(value, key);
        else if (key == "dump_intermediates")
            cfg.dump_intermediates = to_bool(value, key);
        else if (key == "iou_min")
            cfg.iou_min = to_double(value, key);
        else if (key == "stability_min")
            cfg.stability_min = to_double(value, key);
        else if (key == "overlap_max")
            cfg.overlap_max = to_double(value, key);
        else if (key == "tol_rel")
            cfg.tol_rel = to_double(value, key);
        else if (key == "front_threshold")
            cfg.front_threshold = to_double(value, key);
        else if (key == "voxel_size")
            cfg.voxel_size = to_double(value, key);
        else if (key == "min_segment_area_frac")
            cfg.min_segment_area_frac = to_double(value, key);
        else if (key == "propagate_k")
            cfg.propagate_k = to_int(value, key);
        else if (key == "eval_view")
            cfg.eval_view = value;
        else if (key == "gt_labels")
            cfg.gt_labels = to_path(value, base_dir);
        else if (key == "gt_legend")
            cfg.gt_legend = to_path(value, base_dir);
        else if (key == "grasp_contact")
            cfg.grasp_contact = to_vec3(value, key);
        else if (key == "grasp_axis")
            cfg.grasp_axis = to_vec3(value, key);
        else if (key == "surface_area")
            cfg.surface_area = to_double(value, key);
        else if (key == "thickness")
            cfg.thickness = to_double(value, key);
        else if (key == "kappa_max")
            cfg.kappa_max = to_double(value, key);
        else if (key == "hardness_view")
            cfg.hardness_view = value;
        else if (key == "hardness_points") {
            std::istringstream points(value);
            std::string pair;
            while (std::getline(points, pair, ';')) {
                const auto comma = pair.find(',');
                if (comma == std::string::npos)
                    throw ParseError("config: hardness_points expects 'u,v;u,v'");
                cfg.hardness_points.emplace_back(to_int(trim(pair.substr(0, comma)), key),
                                                 to_int(trim(pair.substr(comma + 1)), key));
            }
        } else if (key == "lmm_base_url")
            cfg.lmm.base_url = value;
        else if (key == "lmm_model")
            cfg.lmm.model = value;
        else if (key == "lmm_token_env")
            cfg.lmm.token_env = value;
        else if (key == "lmm_max_in_flight")
            cfg.lmm.max_in_flight = to_int(value, key);
        else if (key == "lmm_requests_per_s")
            cfg.lmm.requests_per_s = to_double(value, key);
        else if (key == "seg_base_url")
            cfg.seg.base_url = value;
        else if (key == "seg_token_env")
            cfg.seg.token_env = value;
        else if (key == "points_per_side")
            cfg.seg.points_per_side = to_int(value, key);
        else
            throw ParseError("config line " + std::to_string(line_no) + ": unknown key '" + key +
                             "'");
    }
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

} // namespace gsprop
