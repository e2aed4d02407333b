#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <memory>
#include <vector>

#include "gsprop/ply_table.hpp"

namespace gsprop {

// A 3D Gaussian Splatting scene. Stored values are physical: opacities are
// post-sigmoid, scales post-exp, rotations normalized.
struct GaussianCloud {
    std::size_t count = 0;
    std::vector<Eigen::Vector3f> positions;    // meters, scene frame
    std::vector<float> opacities;              // [0, 1]
    std::vector<Eigen::Vector3f> scales;       // per-axis std-dev, > 0
    std::vector<Eigen::Quaternionf> rotations; // unit quaternions
    int sh_degree = 0;
    std::vector<float> sh_coeffs; // count x 3*sh_dim(sh_degree), dc first, row-major

    // Vertex table as read from disk. Lets write_gaussian_ply emit the exact
    // original bytes and carries vertex properties we do not interpret.
    std::shared_ptr<const PlyTable> raw;

    static int sh_dim(int degree) { return (degree + 1) * (degree + 1); }

    // Axis-aligned bounding-box diagonal of the centers; 0 for empty clouds.
    double extent() const;

    // Throws DataError when a per-Gaussian array length or value invariant is
    // violated (opacity outside [0,1], nonpositive scale, non-unit rotation).
    void validate() const;
};

} // namespace gsprop
