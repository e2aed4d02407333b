#include "gsprop/camera.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>

#include <Eigen/Geometry>
#include <json.hpp>

#include "gsprop/error.hpp"

namespace gsprop {

namespace {

constexpr double kOrthoTol = 1e-4;

void check_orthonormal(const Eigen::Matrix3d& r, const std::string& where) {
    const Eigen::Matrix3d err = r.transpose() * r - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > kOrthoTol)
        throw DataError("non-orthonormal rotation in " + where);
}

std::string stem_of(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

} // namespace

void CameraModel::validate() const {
    if (width <= 0 || height <= 0)
        throw DataError("camera '" + view_id + "': nonpositive image dimensions");
    check_orthonormal(rotation, "camera '" + view_id + "'");
    const auto& k = intrinsics;
    if (k(1, 0) != 0.0 || k(2, 0) != 0.0 || k(2, 1) != 0.0 || k(2, 2) != 1.0)
        throw DataError("camera '" + view_id + "': K must be upper-triangular with K(2,2)=1");
}

std::vector<CameraModel> parse_cameras_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid camera JSON: ") + e.what());
    }

    auto field = [](const nlohmann::json& obj, const char* key) -> const nlohmann::json* {
        auto it = obj.find(key);
        return it == obj.end() ? nullptr : &*it;
    };
    auto require_num = [&](const nlohmann::json& frame, const nlohmann::json& root,
                           const char* key) -> double {
        if (const auto* v = field(frame, key); v && v->is_number())
            return v->get<double>();
        if (const auto* v = field(root, key); v && v->is_number())
            return v->get<double>();
        throw ParseError(std::string("camera JSON missing field '") + key + "'");
    };

    const auto* frames = field(doc, "frames");
    if (!frames || !frames->is_array())
        throw ParseError("camera JSON missing 'frames' array");

    std::vector<CameraModel> cams;
    cams.reserve(frames->size());
    int index = 0;
    for (const auto& frame : *frames) {
        CameraModel cam;
        if (const auto* fp = field(frame, "file_path"); fp && fp->is_string())
            cam.view_id = stem_of(fp->get<std::string>());
        else
            cam.view_id = "frame_" + std::to_string(index);
        ++index;

        const double fx = require_num(frame, doc, "fl_x");
        const double fy = require_num(frame, doc, "fl_y");
        const double cx = require_num(frame, doc, "cx");
        const double cy = require_num(frame, doc, "cy");
        cam.width = static_cast<int>(require_num(frame, doc, "w"));
        cam.height = static_cast<int>(require_num(frame, doc, "h"));
        cam.intrinsics << fx, 0, cx, 0, fy, cy, 0, 0, 1;

        const auto* tm = field(frame, "transform_matrix");
        if (!tm || !tm->is_array() || tm->size() != 4)
            throw ParseError("frame '" + cam.view_id + "': missing 4x4 transform_matrix");
        Eigen::Matrix4d c2w;
        for (int r = 0; r < 4; ++r) {
            const auto& row = (*tm)[static_cast<std::size_t>(r)];
            if (!row.is_array() || row.size() != 4)
                throw ParseError("frame '" + cam.view_id + "': transform_matrix row " +
                                 std::to_string(r) + " is not length 4");
            for (int c = 0; c < 4; ++c)
                c2w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }

        const Eigen::Matrix3d r_c2w = c2w.topLeftCorner<3, 3>();
        check_orthonormal(r_c2w, "frame '" + cam.view_id + "'");
        cam.rotation = r_c2w.transpose();
        cam.translation = -cam.rotation * c2w.topRightCorner<3, 1>();
        cam.validate();
        cams.push_back(std::move(cam));
    }

    std::sort(cams.begin(), cams.end(),
              [](const CameraModel& a, const CameraModel& b) { return a.view_id < b.view_id; });
    return cams;
}

namespace {

struct ColmapIntrinsics {
    Eigen::Matrix3d k;
    int width = 0, height = 0;
};

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

} // namespace

std::vector<CameraModel> parse_cameras_colmap(std::string_view cameras_txt,
                                              std::string_view images_txt) try {
    std::map<int, ColmapIntrinsics> intrinsics;
    {
        std::istringstream in{std::string(cameras_txt)};
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#')
                continue;
            auto tok = tokenize(line);
            if (tok.size() < 4)
                throw ParseError("cameras.txt: malformed line '" + line + "'");
            ColmapIntrinsics ci;
            const int cam_id = std::stoi(tok[0]);
            const std::string& model = tok[1];
            ci.width = std::stoi(tok[2]);
            ci.height = std::stoi(tok[3]);
            double fx, fy, cx, cy;
            if (model == "PINHOLE" && tok.size() >= 8) {
                fx = std::stod(tok[4]);
                fy = std::stod(tok[5]);
                cx = std::stod(tok[6]);
                cy = std::stod(tok[7]);
            } else if (model == "SIMPLE_PINHOLE" && tok.size() >= 7) {
                fx = fy = std::stod(tok[4]);
                cx = std::stod(tok[5]);
                cy = std::stod(tok[6]);
            } else {
                throw ParseError("cameras.txt: unsupported camera model '" + model + "'");
            }
            ci.k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
            intrinsics[cam_id] = ci;
        }
    }
    if (intrinsics.empty())
        throw ParseError("cameras.txt: no camera entries");

    std::vector<CameraModel> cams;
    {
        std::istringstream in{std::string(images_txt)};
        std::string line;
        bool expect_points = false;
        while (std::getline(in, line)) {
            if (!line.empty() && line[0] == '#')
                continue;
            if (expect_points) {
                // POINTS2D line that follows every image entry (possibly
                // empty); skipped.
                expect_points = false;
                continue;
            }
            if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
                continue;
            auto tok = tokenize(line);
            if (tok.size() < 10)
                throw ParseError("images.txt: malformed image line '" + line + "'");
            CameraModel cam;
            const double qw = std::stod(tok[1]), qx = std::stod(tok[2]), qy = std::stod(tok[3]),
                         qz = std::stod(tok[4]);
            Eigen::Quaterniond q(qw, qx, qy, qz);
            if (q.norm() == 0.0)
                throw ParseError("images.txt: zero quaternion for image " + tok[0]);
            q.normalize();
            cam.rotation = q.toRotationMatrix();
            cam.translation = {std::stod(tok[5]), std::stod(tok[6]), std::stod(tok[7])};
            const int cam_id = std::stoi(tok[8]);
            auto it = intrinsics.find(cam_id);
            if (it == intrinsics.end())
                throw ParseError("images.txt references unknown camera id " + tok[8]);
            cam.intrinsics = it->second.k;
            cam.width = it->second.width;
            cam.height = it->second.height;
            cam.view_id = stem_of(tok[9]);
            cam.validate();
            cams.push_back(std::move(cam));
            expect_points = true;
        }
    }
    if (cams.empty())
        throw ParseError("images.txt: no image entries");

    std::sort(cams.begin(), cams.end(),
              [](const CameraModel& a, const CameraModel& b) { return a.view_id < b.view_id; });
    return cams;
} catch (const std::invalid_argument&) {
    throw ParseError("COLMAP text: non-numeric field");
} catch (const std::out_of_range&) {
    throw ParseError("COLMAP text: numeric field out of range");
}

} // namespace gsprop
