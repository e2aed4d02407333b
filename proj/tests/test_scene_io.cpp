#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gsprop/camera.hpp"
#include "gsprop/error.hpp"
#include "gsprop/image_io.hpp"
#include "gsprop/masks.hpp"
#include "gsprop/ply.hpp"

#include "support/synthetic.hpp"

using namespace gsprop;

namespace {

std::span<const std::byte> as_bytes(const std::string& s) {
    return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

// Hand-built ascii PLY with the standard 3DGS schema.
std::string ascii_gaussian_ply(const std::vector<std::array<float, 14>>& rows) {
    std::ostringstream out;
    out << "ply\nformat ascii 1.0\nelement vertex " << rows.size() << "\n";
    for (const char* p : {"x", "y", "z", "f_dc_0", "f_dc_1", "f_dc_2", "opacity", "scale_0",
                          "scale_1", "scale_2", "rot_0", "rot_1", "rot_2", "rot_3"})
        out << "property float " << p << "\n";
    out << "end_header\n";
    out.precision(9);
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? " " : "") << row[i];
        out << "\n";
    }
    return out.str();
}

} // namespace

TEST_CASE("parse_gaussian_ply applies the activations") {
    // raw opacity 0 -> sigmoid gives 0.5; raw log-scale 0 -> exp gives 1
    const std::string ply =
        ascii_gaussian_ply({{1.0f, 2.0f, 3.0f, 0.1f, 0.2f, 0.3f, /*opacity*/ 0.0f,
                             /*scales*/ 0.0f, 0.0f, 0.0f, /*rot*/ 2.0f, 0.0f, 0.0f, 0.0f}});
    const GaussianCloud cloud = parse_gaussian_ply(as_bytes(ply));
    REQUIRE(cloud.count == 1);
    CHECK(cloud.opacities[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(cloud.scales[0].x() == doctest::Approx(1.0));
    CHECK(cloud.scales[0].y() == doctest::Approx(1.0));
    CHECK(cloud.scales[0].z() == doctest::Approx(1.0));
    // rot (2,0,0,0) normalizes to identity
    CHECK(cloud.rotations[0].w() == doctest::Approx(1.0));
    CHECK(std::abs(cloud.rotations[0].norm() - 1.0f) <= 1e-6f);
    CHECK(cloud.positions[0] == Eigen::Vector3f(1, 2, 3));
    CHECK(cloud.sh_degree == 0);
}

TEST_CASE("parse -> write -> parse is bit-identical") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<float> val(-2.0f, 2.0f);
    std::vector<std::array<float, 14>> rows(17);
    for (auto& row : rows)
        for (auto& x : row)
            x = val(rng);
    const std::string ascii = ascii_gaussian_ply(rows);

    const GaussianCloud first = parse_gaussian_ply(as_bytes(ascii));
    const auto written = write_gaussian_ply(first);
    const GaussianCloud second = parse_gaussian_ply(written);
    const auto rewritten = write_gaussian_ply(second);

    REQUIRE(second.count == first.count);
    CHECK(std::memcmp(first.positions.data(), second.positions.data(),
                      first.count * sizeof(Eigen::Vector3f)) == 0);
    CHECK(std::memcmp(first.opacities.data(), second.opacities.data(),
                      first.count * sizeof(float)) == 0);
    CHECK(std::memcmp(first.scales.data(), second.scales.data(),
                      first.count * sizeof(Eigen::Vector3f)) == 0);
    CHECK(first.sh_coeffs == second.sh_coeffs);
    CHECK(written == rewritten); // byte-for-byte stable once binary
}

TEST_CASE("unknown vertex properties ride through the round trip verbatim") {
    std::ostringstream out;
    out << "ply\nformat ascii 1.0\nelement vertex 2\n";
    for (const char* p : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2",
                          "opacity", "scale_0", "scale_1", "scale_2", "rot_0", "rot_1", "rot_2",
                          "rot_3"})
        out << "property float " << p << "\n";
    out << "property uchar flags\nend_header\n";
    out << "1 2 3 0.5 0.5 0 0.1 0.2 0.3 0 0 0 0 1 0 0 0 7\n";
    out << "4 5 6 0 1 0 0.4 0.5 0.6 1 0 0 0 1 0 0 0 9\n";
    const std::string text = out.str();

    const GaussianCloud cloud = parse_gaussian_ply(
        {reinterpret_cast<const std::byte*>(text.data()), text.size()});
    const auto written = write_gaussian_ply(cloud);
    const GaussianCloud back = parse_gaussian_ply(written);
    CHECK(extract_column<float>(back, "nx") == std::vector<float>{0.5f, 0.0f});
    CHECK(extract_column<int>(back, "flags") == std::vector<int>{7, 9});
    CHECK(write_gaussian_ply(back) == written);
}

TEST_CASE("write_gaussian_ply extra fields") {
    SUBCASE("empty cloud writes a valid zero-vertex file") {
        GaussianCloud empty;
        const auto bytes = write_gaussian_ply(empty);
        const GaussianCloud back = parse_gaussian_ply(bytes);
        CHECK(back.count == 0);
    }
    SUBCASE("material_id column survives a round trip") {
        auto cloud = testing::make_cloud(
            {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, 0.1f, 0.9f);
        ExtraField field{"material_id", std::vector<std::int32_t>{3, 1, 2}};
        const auto bytes = write_gaussian_ply(cloud, {&field, 1});
        const GaussianCloud back = parse_gaussian_ply(bytes);
        REQUIRE(back.count == 3);
        CHECK(extract_column<std::int32_t>(back, "material_id") ==
              std::vector<std::int32_t>{3, 1, 2});
    }
    SUBCASE("length mismatch is rejected") {
        auto cloud = testing::make_cloud({{0, 0, 0}}, 0.1f, 0.9f);
        ExtraField field{"material_id", std::vector<std::int32_t>{1, 2}};
        CHECK_THROWS_AS((void)write_gaussian_ply(cloud, {&field, 1}), DataError);
    }
}

TEST_CASE("parse_gaussian_ply error reporting") {
    SUBCASE("malformed header") {
        CHECK_THROWS_AS((void)parse_gaussian_ply(as_bytes("not a ply\n")), ParseError);
    }
    SUBCASE("missing required property") {
        std::string ply = "ply\nformat ascii 1.0\nelement vertex 0\n"
                          "property float x\nproperty float y\nproperty float z\n"
                          "end_header\n";
        try {
            (void)parse_gaussian_ply(as_bytes(ply));
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("opacity") != std::string::npos);
        }
    }
    SUBCASE("truncated payload names offset and property") {
        auto cloud = testing::make_cloud({{0, 0, 0}, {1, 1, 1}}, 0.1f, 0.9f);
        auto bytes = write_gaussian_ply(cloud);
        bytes.resize(bytes.size() - 7);
        try {
            (void)parse_gaussian_ply(bytes);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.offset() != ParseError::npos);
            CHECK(std::string(e.what()).find("vertex 1") != std::string::npos);
        }
    }
}

TEST_CASE("parse_cameras transforms JSON") {
    SUBCASE("identity pose") {
        const char* json = R"({
            "fl_x": 100, "fl_y": 100, "cx": 50, "cy": 50, "w": 100, "h": 100,
            "frames": [{"file_path": "images/r_0.png",
                        "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}]
        })";
        const auto cams = parse_cameras_json(json);
        REQUIRE(cams.size() == 1);
        CHECK(cams[0].view_id == "r_0");
        CHECK(cams[0].intrinsics(0, 0) == 100);
        CHECK(cams[0].intrinsics(0, 2) == 50);
        CHECK(cams[0].rotation.isApprox(Eigen::Matrix3d::Identity()));
        CHECK(cams[0].translation.norm() == 0.0);
    }
    SUBCASE("camera-to-world translation is inverted") {
        const char* json = R"({
            "fl_x": 100, "fl_y": 100, "cx": 50, "cy": 50, "w": 100, "h": 100,
            "frames": [{"file_path": "r_1.png",
                        "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,-2],[0,0,0,1]]}]
        })";
        const auto cams = parse_cameras_json(json);
        REQUIRE(cams.size() == 1);
        CHECK(cams[0].translation.isApprox(Eigen::Vector3d(0, 0, 2)));
    }
    SUBCASE("two frames get distinct view ids") {
        const char* json = R"({
            "fl_x": 10, "fl_y": 10, "cx": 5, "cy": 5, "w": 10, "h": 10,
            "frames": [
              {"file_path": "a.png", "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]},
              {"file_path": "b.png", "transform_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,3],[0,0,0,1]]}]
        })";
        const auto cams = parse_cameras_json(json);
        REQUIRE(cams.size() == 2);
        CHECK(cams[0].view_id != cams[1].view_id);
    }
    SUBCASE("non-orthonormal rotation is rejected") {
        const char* json = R"({
            "fl_x": 10, "fl_y": 10, "cx": 5, "cy": 5, "w": 10, "h": 10,
            "frames": [{"file_path": "a.png",
                        "transform_matrix": [[1,0.01,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}]
        })";
        CHECK_THROWS_AS((void)parse_cameras_json(json), DataError);
    }
    SUBCASE("missing fields are reported") {
        CHECK_THROWS_AS((void)parse_cameras_json(R"({"frames": [{"file_path": "a.png"}]})"),
                        ParseError);
        CHECK_THROWS_AS((void)parse_cameras_json("[1,2"), ParseError);
    }
}

TEST_CASE("parse_cameras COLMAP text") {
    const char* cameras_txt = "# cameras\n1 PINHOLE 100 100 100.0 100.0 50.0 50.0\n";
    const char* images_txt =
        "# images\n"
        "1 1 0 0 0 0 0 0 1 r_0.png\n"
        "\n"
        "2 1 0 0 0 0.5 0 2 1 r_1.png\n"
        "\n";
    const auto cams = parse_cameras_colmap(cameras_txt, images_txt);
    REQUIRE(cams.size() == 2);
    CHECK(cams[0].view_id == "r_0");
    CHECK(cams[1].view_id == "r_1");
    // COLMAP is already world-to-camera: translations are stored as-is.
    CHECK(cams[1].translation.isApprox(Eigen::Vector3d(0.5, 0, 2)));
    CHECK(cams[0].intrinsics(1, 1) == 100.0);

    CHECK_THROWS_AS((void)parse_cameras_colmap("1 FISHEYE 10 10 1 1 1 1\n", images_txt),
                    ParseError);
    CHECK_THROWS_AS((void)parse_cameras_colmap(cameras_txt, "1 1 0 0 0 0 0 0 9 r.png\n\n"),
                    ParseError);
}

TEST_CASE("camera rotations stay orthonormal within 1e-4") {
    // Slightly noisy but within-tolerance rotation passes through.
    Eigen::Matrix3d r = Eigen::AngleAxisd(0.4, Eigen::Vector3d(1, 2, 3).normalized())
                            .toRotationMatrix();
    r(0, 1) += 5e-5;
    std::ostringstream json;
    json << R"({"fl_x":10,"fl_y":10,"cx":5,"cy":5,"w":10,"h":10,"frames":[{"file_path":"a.png","transform_matrix":[)";
    for (int row = 0; row < 4; ++row) {
        json << (row ? ",[" : "[");
        for (int col = 0; col < 4; ++col) {
            double v = (row < 3 && col < 3) ? r(row, col) : (row == 3 && col == 3 ? 1.0 : 0.0);
            json << (col ? "," : "") << v;
        }
        json << "]";
    }
    json << R"(]}]})";
    const auto cams = parse_cameras_json(json.str());
    REQUIRE(cams.size() == 1);
    const Eigen::Matrix3d err =
        cams[0].rotation.transpose() * cams[0].rotation - Eigen::Matrix3d::Identity();
    CHECK(err.cwiseAbs().maxCoeff() <= 1e-4);
}

TEST_CASE("load_mask_set") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gsprop_mask_test";
    fs::create_directories(dir);

    SUBCASE("all-zero label image yields an empty set") {
        LabelGrid labels(8, 8, 0);
        write_label_png(dir / "empty.png", labels);
        const MaskSet set = load_mask_set(dir / "empty.png", std::nullopt, "v", 8, 8);
        CHECK(set.masks.empty());
    }
    SUBCASE("two labels yield two masks; sidecar metadata is applied") {
        LabelGrid labels(8, 8, 0);
        labels.at(1, 1) = 1;
        labels.at(2, 1) = 1;
        labels.at(5, 5) = 2;
        write_label_png(dir / "two.png", labels);
        {
            std::ofstream meta(dir / "two.meta");
            meta << "1 0.9 0.97\n";
        }
        const MaskSet set = load_mask_set(dir / "two.png", dir / "two.meta", "v", 8, 8);
        REQUIRE(set.masks.size() == 2);
        CHECK(set.masks[0].segment_id == 1);
        CHECK(set.masks[0].area() == 2);
        CHECK(set.masks[0].predicted_iou == doctest::Approx(0.9));
        CHECK(set.masks[0].stability == doctest::Approx(0.97));
        // missing metadata defaults to 1.0
        CHECK(set.masks[1].predicted_iou == doctest::Approx(1.0));
        CHECK(set.masks[1].stability == doctest::Approx(1.0));
    }
    SUBCASE("camera dimension mismatch is rejected") {
        LabelGrid labels(64, 64, 1);
        write_label_png(dir / "small.png", labels);
        CHECK_THROWS_AS((void)load_mask_set(dir / "small.png", std::nullopt, "v", 128, 128),
                        DataError);
    }
    SUBCASE("duplicate sidecar ids are rejected") {
        LabelGrid labels(4, 4, 1);
        write_label_png(dir / "dup.png", labels);
        {
            std::ofstream meta(dir / "dup.meta");
            meta << "1 0.9 0.9\n1 0.8 0.8\n";
        }
        CHECK_THROWS_AS((void)load_mask_set(dir / "dup.png", dir / "dup.meta", "v", 4, 4),
                        DataError);
    }

    fs::remove_all(dir);
}

TEST_CASE("label png round trip is exact for 16-bit values") {
    LabelGrid labels(16, 4, 0);
    labels.at(0, 0) = 1;
    labels.at(15, 3) = 40000;
    labels.at(7, 2) = 257;
    const auto bytes = encode_label_png(labels);
    CHECK(decode_label_png(bytes) == labels);
}
