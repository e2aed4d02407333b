#pragma once

#include <Eigen/Core>
#include <string>
#include <string_view>
#include <vector>

namespace gsprop {

// Pinhole camera. Extrinsics are always world-to-camera: x_cam = R*x + t.
struct CameraModel {
    std::string view_id;
    Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity(); // K, pixels
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();   // R
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();    // t, meters
    int width = 0;
    int height = 0;

    // Throws DataError unless R is orthonormal within 1e-4, K is
    // upper-triangular with K(2,2)=1, and the dimensions are positive.
    void validate() const;
};

enum class CameraFormat { auto_detect, transforms_json, colmap_text };

// transforms-style JSON document: shared or per-frame fl_x/fl_y/cx/cy/w/h and
// a 4x4 camera-to-world transform_matrix per frame. Camera-to-world poses are
// inverted so the stored extrinsics are world-to-camera. Views are sorted by
// view_id (the frame file_path stem).
std::vector<CameraModel> parse_cameras_json(std::string_view text);

// COLMAP cameras.txt / images.txt text pair (PINHOLE or SIMPLE_PINHOLE).
// COLMAP poses are already world-to-camera.
std::vector<CameraModel> parse_cameras_colmap(std::string_view cameras_txt,
                                              std::string_view images_txt);

} // namespace gsprop
