#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gsprop/depth_render.hpp"
#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/material_library.hpp"
#include "gsprop/property_field.hpp"

namespace gsprop {

inline constexpr double kGravity = 9.8; // m/s^2

struct Part {
    int part_id = 0;            // 1-based
    std::uint16_t material = 0; // library ordinal
    double volume = 0;          // m^3
    std::vector<std::int32_t> gaussians;
};

// Force-bearing surface geometry: contact area A, thickness d, maximum
// allowable bending curvature kappa_max.
struct SurfaceSpec {
    double area = 0;      // m^2
    double thickness = 0; // m
    double kappa_max = 0; // 1/m
};

struct PartDecomposition {
    std::vector<Part> parts;
    int force_bearing_part = 0; // part_id of s; 0 = unset
    SurfaceSpec surface;
    double voxel_size = 0;

    const Part& part(int part_id) const;
};

struct VolumeParams {
    double voxel_size = 0.005; // m
    int knn = 8;
    // Same-material neighbor edges longer than cutoff_factor x median
    // nearest-neighbor spacing do not join parts.
    double cutoff_factor = 3.0;
    int workers = 1;
};

// Groups Gaussians into parts (connected components of the same-material
// k-NN graph) and measures each part's volume: voxels occupied by at least
// one center, after a radius-1 morphological closing, times voxel_size^3.
PartDecomposition estimate_volumes(const GaussianCloud& cloud, const PropertyField& field,
                                   const VolumeParams& params = {});

// Sum of nominal density x volume over the parts, kg.
double estimate_mass(const PartDecomposition& parts, const MaterialLibrary& library);

struct HardnessSample {
    std::string material_id;
    ShoreScale scale = ShoreScale::A;
    double native_mid = 0; // midpoint on the native scale
    double unified = 0;    // on the 0-200 comparison axis
};

// Shore hardness of the front surface at a pixel, from the depth render's
// surface Gaussian. Throws DataError on background pixels (depth +inf).
HardnessSample hardness_at(int u, int v, const GaussianCloud& cloud, const PropertyField& field,
                           const DepthMap& depth_map, const MaterialLibrary& library);

// Minimum no-slip grasp force at lifting angle theta (radians, 0 = upward):
// sum_i 0.5 rho(i) V(i) g (cos(theta)/mu(s) - sin(theta)), clamped at 0.
// mu(s) is the friction of the force-bearing part's material.
double f_min(const PartDecomposition& parts, const MaterialLibrary& library, double theta);

// Maximum no-damage force: min(A*sigma_y, 0.5*A*E*d*kappa_max) for the
// force-bearing material. Throws DataError on nonpositive inputs.
double f_max(const SurfaceSpec& surface, const MaterialRecord& bearing_material);

struct GripperProfile {
    double force_lo = 0, force_hi = 0; // Newtons, gripper range G
    double eta = 0.1;                  // command margin in [0, 1]
    double theta = 0;                  // lifting angle, radians
    int poly_degree = 5;
    double input_lo = 15, input_hi = 100; // enabled normalized input range
    std::optional<double> surface_area;   // default A override
    std::optional<double> kappa_max;      // default curvature override
    std::vector<std::pair<double, double>> calibration; // (N_GF, Newtons)

    static GripperProfile load(std::string_view text);
    static GripperProfile load_file(const std::filesystem::path& path);
    void validate() const;
};

struct GraspPlan {
    double f_min_n = 0;
    double f_max_n = 0;
    double f_bar = 0;
    double f_star = 0;
    bool feasible = false; // f_min < f_max
    double lower_bound = 0, upper_bound = 0; // the margined clip interval used
    double normalized_command = 0;           // N_GF; 0 until calibration runs
};

// Margin-clipped midpoint: F* = clip(F_bar, clip(F_min,G)+eta*dF,
// clip(F_max,G)-eta*dF) when feasible, else clip(F_bar, G), with
// dF = max(0, clip(F_max,G)-clip(F_min,G)). Margins that cross (eta > 0.5)
// collapse to the midpoint of the clipped interval.
GraspPlan f_star(double fmin, double fmax, const GripperProfile& gripper);

// Least-squares polynomial force curve over the calibration samples,
// validated monotone over the enabled input range so inversion is
// well-defined.
class ForceCalibration {
public:
    static ForceCalibration fit(const GripperProfile& gripper);

    double force_at(double n_gf) const;
    // N_GF achieving the force, clamped to the enabled range (bisection).
    double invert(double force) const;

private:
    std::vector<double> coeffs_; // on the domain mapped to [-1, 1]
    double input_lo_ = 0, input_hi_ = 0;
};

double to_normalized_command(double force, const GripperProfile& gripper);

struct GraspOverrides {
    std::optional<double> area;
    std::optional<double> thickness;
    std::optional<double> kappa_max;
    std::optional<Eigen::Vector3d> contact_point; // default: cloud centroid
    Eigen::Vector3d grasp_axis{1, 0, 0};          // gripper closing direction
    std::optional<int> force_part;                // force part_id directly
};

struct GraspReport {
    PartDecomposition decomposition;
    double mass = 0;
    double mu_s = 0;
    double yield_branch = 0;   // A * sigma_y
    double bending_branch = 0; // 0.5 * A * E * d * kappa_max
    GraspPlan plan;
    // Uncertainty bands from the ranged records: f_min at the density range
    // endpoints, f_max at the Young's-modulus endpoints.
    double f_min_lo = 0, f_min_hi = 0;
    double f_max_lo = 0, f_max_hi = 0;

    std::string render_text(const MaterialLibrary& library) const;
};

// Full pipeline: part decomposition, force-bearing part selection (nearest
// part to the contact point unless overridden), thickness from the part's
// voxel-slab extent along the grasp axis (unless overridden), then f_min,
// f_max, f_star and the normalized command when calibration data is present.
GraspReport plan_grasp(const GaussianCloud& cloud, const PropertyField& field,
                       const MaterialLibrary& library, const GripperProfile& gripper,
                       const GraspOverrides& overrides = {}, const VolumeParams& volume = {});

} // namespace gsprop
