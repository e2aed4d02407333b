#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "gsprop/error.hpp"
#include "gsprop/physics.hpp"

namespace gsprop {

double f_min(const PartDecomposition& parts, const MaterialLibrary& library, double theta) {
    if (parts.parts.empty())
        return 0.0;
    if (parts.force_bearing_part == 0)
        throw DataError("f_min: no force-bearing part selected");
    const Part& bearing = parts.part(parts.force_bearing_part);
    const double mu = library.by_ordinal(bearing.material).friction_mu;
    if (!(mu > 0))
        throw DataError("f_min: nonpositive friction coefficient");

    double force = 0;
    for (const auto& part : parts.parts) {
        const double rho = library.by_ordinal(part.material).density.nominal;
        force += 0.5 * rho * part.volume * kGravity *
                 (std::cos(theta) / mu - std::sin(theta));
    }
    // A negative balance means gravity is carried axially; the minimum
    // squeeze cannot go below zero.
    return std::max(0.0, force);
}

double f_max(const SurfaceSpec& surface, const MaterialRecord& bearing_material) {
    if (!(surface.area > 0) || !(surface.thickness > 0) || !(surface.kappa_max > 0))
        throw DataError("f_max: surface area, thickness and kappa_max must be positive");
    const double e = bearing_material.youngs_modulus.nominal;
    const double sigma_y = bearing_material.yield_stress;
    if (!(e > 0) || !(sigma_y > 0))
        throw DataError("f_max: material moduli must be positive");
    const double yield_branch = surface.area * sigma_y;
    const double bending_branch =
        0.5 * surface.area * e * surface.thickness * surface.kappa_max;
    return std::min(yield_branch, bending_branch);
}

namespace {

double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

} // namespace

GraspPlan f_star(double fmin, double fmax, const GripperProfile& gripper) {
    gripper.validate();
    GraspPlan plan;
    plan.f_min_n = fmin;
    plan.f_max_n = fmax;
    plan.f_bar = 0.5 * (fmin + fmax);

    const double cmin = clip(fmin, gripper.force_lo, gripper.force_hi);
    const double cmax = clip(fmax, gripper.force_lo, gripper.force_hi);
    const double delta = std::max(0.0, cmax - cmin);

    if (fmin < fmax) {
        plan.feasible = true;
        plan.lower_bound = cmin + gripper.eta * delta;
        plan.upper_bound = cmax - gripper.eta * delta;
        if (plan.lower_bound <= plan.upper_bound)
            plan.f_star = clip(plan.f_bar, plan.lower_bound, plan.upper_bound);
        else
            plan.f_star = 0.5 * (cmin + cmax); // margins crossed (eta > 1/2)
    } else {
        plan.feasible = false;
        plan.lower_bound = gripper.force_lo;
        plan.upper_bound = gripper.force_hi;
        plan.f_star = clip(plan.f_bar, gripper.force_lo, gripper.force_hi);
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Gripper profile

void GripperProfile::validate() const {
    if (!(force_lo > 0) || !(force_lo < force_hi))
        throw DataError("gripper: force_range must satisfy 0 < lo < hi");
    if (!(eta >= 0 && eta <= 1))
        throw DataError("gripper: eta must lie in [0, 1]");
    if (poly_degree < 1)
        throw DataError("gripper: poly_degree must be >= 1");
    if (!(input_lo < input_hi))
        throw DataError("gripper: enabled_range must satisfy lo < hi");
    for (const auto& [n, force] : calibration) {
        if (n < input_lo || n > input_hi)
            throw DataError("gripper: calibration input " + std::to_string(n) +
                            " outside the enabled range");
        (void)force;
    }
}

GripperProfile GripperProfile::load(std::string_view text) {
    GripperProfile g;
    std::istringstream in{std::string(text)};
    std::string line;
    bool in_calibration = false;
    bool version_seen = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key))
            continue;
        const std::string where = "gripper profile line " + std::to_string(line_no);
        if (in_calibration) {
            if (key == "end") {
                in_calibration = false;
                continue;
            }
            double n, force;
            try {
                n = std::stod(key);
            } catch (const std::exception&) {
                throw ParseError("invalid calibration row at " + where);
            }
            if (!(ls >> force))
                throw ParseError("invalid calibration row at " + where);
            g.calibration.emplace_back(n, force);
            continue;
        }
        if (key == "schema_version") {
            int v = 0;
            if (!(ls >> v) || v != 1)
                throw ParseError("unsupported gripper schema_version at " + where);
            version_seen = true;
        } else if (key == "force_range") {
            if (!(ls >> g.force_lo >> g.force_hi))
                throw ParseError("expected 'force_range lo hi' at " + where);
        } else if (key == "eta") {
            if (!(ls >> g.eta))
                throw ParseError("expected 'eta value' at " + where);
        } else if (key == "theta") {
            if (!(ls >> g.theta))
                throw ParseError("expected 'theta radians' at " + where);
        } else if (key == "poly_degree") {
            if (!(ls >> g.poly_degree))
                throw ParseError("expected 'poly_degree n' at " + where);
        } else if (key == "enabled_range") {
            if (!(ls >> g.input_lo >> g.input_hi))
                throw ParseError("expected 'enabled_range lo hi' at " + where);
        } else if (key == "surface_area") {
            double v;
            if (!(ls >> v))
                throw ParseError("expected 'surface_area m2' at " + where);
            g.surface_area = v;
        } else if (key == "kappa_max") {
            double v;
            if (!(ls >> v))
                throw ParseError("expected 'kappa_max 1_per_m' at " + where);
            g.kappa_max = v;
        } else if (key == "calibration") {
            in_calibration = true;
        } else {
            throw ParseError("unknown gripper field '" + key + "' at " + where);
        }
    }
    if (in_calibration)
        throw ParseError("gripper profile: unterminated calibration block");
    if (!version_seen)
        throw ParseError("gripper profile missing schema_version");
    g.validate();
    return g;
}

GripperProfile GripperProfile::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open gripper profile: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return load(ss.str());
}

// ---------------------------------------------------------------------------
// Calibration fit and inversion

ForceCalibration ForceCalibration::fit(const GripperProfile& gripper) {
    const int degree = gripper.poly_degree;
    const auto& samples = gripper.calibration;
    if (static_cast<int>(samples.size()) < degree + 1)
        throw DataError("calibration fit needs at least " + std::to_string(degree + 1) +
                        " samples, got " + std::to_string(samples.size()));

    ForceCalibration cal;
    cal.input_lo_ = gripper.input_lo;
    cal.input_hi_ = gripper.input_hi;

    // Least squares on the domain mapped to [-1, 1] for conditioning.
    Eigen::MatrixXd a(samples.size(), degree + 1);
    Eigen::VectorXd b(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double t =
            2.0 * (samples[i].first - cal.input_lo_) / (cal.input_hi_ - cal.input_lo_) - 1.0;
        double power = 1.0;
        for (int d = 0; d <= degree; ++d) {
            a(static_cast<Eigen::Index>(i), d) = power;
            power *= t;
        }
        b(static_cast<Eigen::Index>(i)) = samples[i].second;
    }
    const Eigen::VectorXd coeffs = a.colPivHouseholderQr().solve(b);
    cal.coeffs_.assign(coeffs.data(), coeffs.data() + coeffs.size());

    // Inversion needs a monotone curve over the enabled range.
    const int probes = 512;
    double prev = cal.force_at(cal.input_lo_);
    double span = prev;
    for (int i = 1; i <= probes; ++i) {
        const double n = cal.input_lo_ + (cal.input_hi_ - cal.input_lo_) * i / probes;
        const double f = cal.force_at(n);
        span = std::max(span, std::abs(f));
        if (f < prev - 1e-9 * std::max(1.0, span))
            throw DataError("calibration fit is not monotone over the enabled range; "
                            "reduce poly_degree or recalibrate");
        prev = f;
    }
    return cal;
}

double ForceCalibration::force_at(double n_gf) const {
    const double t = 2.0 * (n_gf - input_lo_) / (input_hi_ - input_lo_) - 1.0;
    double value = 0.0;
    double power = 1.0;
    for (double c : coeffs_) {
        value += c * power;
        power *= t;
    }
    return value;
}

double ForceCalibration::invert(double force) const {
    const double f_lo = force_at(input_lo_);
    const double f_hi = force_at(input_hi_);
    if (force <= f_lo)
        return input_lo_;
    if (force >= f_hi)
        return input_hi_;
    double lo = input_lo_, hi = input_hi_;
    for (int i = 0; i < 200 && hi - lo > 1e-9; ++i) {
        const double mid = 0.5 * (lo + hi);
        (force_at(mid) < force ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double to_normalized_command(double force, const GripperProfile& gripper) {
    return ForceCalibration::fit(gripper).invert(force);
}

// ---------------------------------------------------------------------------
// plan_grasp

GraspReport plan_grasp(const GaussianCloud& cloud, const PropertyField& field,
                       const MaterialLibrary& library, const GripperProfile& gripper,
                       const GraspOverrides& overrides, const VolumeParams& volume) {
    gripper.validate();
    if (field.size() != cloud.count)
        throw DataError("plan_grasp: property field length does not match the cloud");
    if (field.resolved_count() != field.size())
        throw DataError("plan_grasp: field has unresolved Gaussians; run propagation first");

    GraspReport report;
    report.decomposition = estimate_volumes(cloud, field, volume);
    PartDecomposition& parts = report.decomposition;

    // Force-bearing part: nearest part to the grasp contact point.
    if (overrides.force_part) {
        parts.force_bearing_part = parts.part(*overrides.force_part).part_id;
    } else {
        Eigen::Vector3f contact;
        if (overrides.contact_point) {
            contact = overrides.contact_point->cast<float>();
        } else {
            Eigen::Vector3f sum = Eigen::Vector3f::Zero();
            for (const auto& p : cloud.positions)
                sum += p;
            contact = sum / static_cast<float>(cloud.count);
        }
        double best = std::numeric_limits<double>::infinity();
        for (const auto& part : parts.parts) {
            for (std::int32_t g : part.gaussians) {
                const double d =
                    (cloud.positions[static_cast<std::size_t>(g)] - contact).norm();
                if (d < best) {
                    best = d;
                    parts.force_bearing_part = part.part_id;
                }
            }
        }
    }
    const Part& bearing = parts.part(parts.force_bearing_part);
    const MaterialRecord& bearing_material = library.by_ordinal(bearing.material);

    // Surface spec: overrides > gripper profile defaults > estimated.
    SurfaceSpec& surface = parts.surface;
    if (overrides.area)
        surface.area = *overrides.area;
    else if (gripper.surface_area)
        surface.area = *gripper.surface_area;
    else
        throw DataError("plan_grasp: force-bearing surface area unknown (set surface_area "
                        "in the gripper profile or override it)");

    if (overrides.kappa_max)
        surface.kappa_max = *overrides.kappa_max;
    else if (gripper.kappa_max)
        surface.kappa_max = *gripper.kappa_max;
    else
        throw DataError("plan_grasp: kappa_max unknown (set it in the gripper profile or "
                        "override it)");

    if (overrides.thickness) {
        surface.thickness = *overrides.thickness;
    } else {
        // Voxel-slab extent of the force-bearing part along the grasp axis.
        const Eigen::Vector3f axis = overrides.grasp_axis.normalized().cast<float>();
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (std::int32_t g : bearing.gaussians) {
            const double s = cloud.positions[static_cast<std::size_t>(g)].dot(axis);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        const double h = parts.voxel_size;
        surface.thickness =
            (std::floor(hi / h) - std::floor(lo / h) + 1.0) * h;
    }

    report.mass = estimate_mass(parts, library);
    report.mu_s = bearing_material.friction_mu;
    report.yield_branch = surface.area * bearing_material.yield_stress;
    report.bending_branch = 0.5 * surface.area * bearing_material.youngs_modulus.nominal *
                            surface.thickness * surface.kappa_max;

    const double fmin = f_min(parts, library, gripper.theta);
    const double fmax = f_max(surface, bearing_material);
    report.plan = f_star(fmin, fmax, gripper);
    if (!gripper.calibration.empty())
        report.plan.normalized_command = to_normalized_command(report.plan.f_star, gripper);

    // Uncertainty bands: density range endpoints for f_min, Young's-modulus
    // endpoints for the bending branch of f_max.
    auto fmin_at = [&](bool upper) {
        double force = 0;
        for (const auto& part : parts.parts) {
            const ValueRange& rho = library.by_ordinal(part.material).density;
            force += 0.5 * (upper ? rho.max : rho.min) * part.volume * kGravity *
                     (std::cos(gripper.theta) / report.mu_s - std::sin(gripper.theta));
        }
        return std::max(0.0, force);
    };
    report.f_min_lo = fmin_at(false);
    report.f_min_hi = fmin_at(true);
    auto fmax_at = [&](double e) {
        return std::min(report.yield_branch,
                        0.5 * surface.area * e * surface.thickness * surface.kappa_max);
    };
    report.f_max_lo = fmax_at(bearing_material.youngs_modulus.min);
    report.f_max_hi = fmax_at(bearing_material.youngs_modulus.max);
    return report;
}

std::string GraspReport::render_text(const MaterialLibrary& library) const {
    std::ostringstream out;
    out.precision(6);
    out << "grasp plan\n==========\n\n";
    out << "parts (" << decomposition.parts.size() << "):\n";
    for (const auto& part : decomposition.parts) {
        const MaterialRecord& rec = library.by_ordinal(part.material);
        out << "  part " << part.part_id << (part.part_id == decomposition.force_bearing_part
                                                 ? " [force-bearing]"
                                                 : "")
            << ": material=" << rec.material_id << " gaussians=" << part.gaussians.size()
            << " volume_m3=" << part.volume
            << " mass_kg=" << rec.density.nominal * part.volume << "\n";
    }
    out << "\ntotal mass_kg: " << mass << "\n";
    out << "mu(s): " << mu_s << "\n";
    out << "surface: area_m2=" << decomposition.surface.area
        << " thickness_m=" << decomposition.surface.thickness
        << " kappa_max=" << decomposition.surface.kappa_max << "\n";
    out << "f_max branches: yield=" << yield_branch << " bending=" << bending_branch
        << " -> chosen=" << (yield_branch <= bending_branch ? "yield" : "bending") << "\n\n";
    out << "f_min_n: " << plan.f_min_n << " (density-range band [" << f_min_lo << ", " << f_min_hi
        << "])\n";
    out << "f_max_n: " << plan.f_max_n << " (modulus-range band [" << f_max_lo << ", " << f_max_hi
        << "])\n";
    out << "f_bar_n: " << plan.f_bar << "\n";
    out << "clip interval: [" << plan.lower_bound << ", " << plan.upper_bound << "]\n";
    out << "feasible: " << (plan.feasible ? "yes" : "no") << "\n";
    out << "f_star_n: " << plan.f_star << "\n";
    if (plan.normalized_command > 0)
        out << "normalized_command: " << plan.normalized_command << "\n";
    return out.str();
}

} // namespace gsprop
