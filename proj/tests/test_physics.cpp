#include <doctest.h>

#include <cmath>
#include <random>

#include "gsprop/error.hpp"
#include "gsprop/physics.hpp"

#include "support/synthetic.hpp"

using namespace gsprop;
using gsprop::testing::make_cloud;

namespace {

// rho=1000, mu=0.5, E=1e9, sigma_y=5e7: the hand-arithmetic material.
const char* kPhysicsLibrary = R"(schema_version 1
material testblock
  family plastic
  default
  density 1000 1000 1000
  youngs_modulus 1e9 1e9 1e9
  poisson 0.3
  friction 0.5
  yield_stress 5e7
  shore A 60 80
end
material hardblock
  family metal
  default
  density 2000 2000 2000
  youngs_modulus 2e9 2e9 2e9
  poisson 0.3
  friction 0.4
  yield_stress 1e8
  shore D 40 60
end
)";

PartDecomposition one_part(std::uint16_t material, double volume) {
    PartDecomposition parts;
    parts.parts.push_back({1, material, volume, {}});
    parts.force_bearing_part = 1;
    return parts;
}

GripperProfile basic_gripper(double lo = 1, double hi = 40, double eta = 0.1) {
    GripperProfile g;
    g.force_lo = lo;
    g.force_hi = hi;
    g.eta = eta;
    return g;
}

GripperProfile linear_gripper(double slope = 0.4) {
    GripperProfile g = basic_gripper();
    for (int n = 15; n <= 100; n += 5)
        g.calibration.emplace_back(n, slope * n);
    return g;
}

PropertyField uniform_field(std::size_t count, std::uint16_t material,
                            const MaterialLibrary& lib) {
    PropertyField field = PropertyField::make(count);
    for (std::size_t i = 0; i < count; ++i) {
        field.material[i] = material;
        field.provenance[i] = Provenance::voted;
        field.observation_count[i] = 1;
    }
    field.resolve_scalars(lib);
    return field;
}

} // namespace

TEST_CASE("f_min hand values") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    const std::uint16_t block = lib.ordinal_of("testblock");

    SUBCASE("1 kg at theta 0 with mu 0.5 needs exactly 9.8 N") {
        // rho*V = 1000 * 0.001 = 1 kg
        const double f = f_min(one_part(block, 0.001), lib, 0.0);
        CHECK(f == 9.8);
    }
    SUBCASE("vertical lift clamps to zero") {
        CHECK(f_min(one_part(block, 0.001), lib, M_PI / 2) == 0.0);
    }
    SUBCASE("massless object needs no force") {
        PartDecomposition parts = one_part(block, 1e-30);
        CHECK(f_min(parts, lib, 0.0) == doctest::Approx(0.0));
        PartDecomposition empty;
        CHECK(f_min(empty, lib, 0.0) == 0.0);
    }
    SUBCASE("parts sum with the force-bearing part's friction") {
        PartDecomposition parts = one_part(block, 0.001);
        parts.parts.push_back({2, lib.ordinal_of("hardblock"), 0.001, {}});
        // m1=1, m2=2, mu(s)=0.5 -> 0.5*3*9.8*2 = 29.4
        CHECK(f_min(parts, lib, 0.0) == doctest::Approx(29.4));
    }
    SUBCASE("a decomposition without a force-bearing part is rejected") {
        PartDecomposition parts = one_part(block, 0.001);
        parts.force_bearing_part = 0;
        CHECK_THROWS_AS((void)f_min(parts, lib, 0.0), DataError);
    }
}

TEST_CASE("f_min properties") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    const std::uint16_t block = lib.ordinal_of("testblock");
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> vol(1e-5, 1e-2);
    std::uniform_real_distribution<double> theta(0.0, M_PI / 2);

    SUBCASE("nonnegative and monotone in volume") {
        for (int trial = 0; trial < 1000; ++trial) {
            const double v1 = vol(rng), v2 = vol(rng), th = theta(rng);
            const double f1 = f_min(one_part(block, v1), lib, th);
            const double f2 = f_min(one_part(block, v1 + v2), lib, th);
            CHECK(f1 >= 0.0);
            CHECK(f2 >= f1);
        }
    }
    SUBCASE("linear in a global density scale") {
        // Same record with density scaled by c scales f_min by exactly c.
        const char* scaled = R"(schema_version 1
material testblock
  family plastic
  density 3000 3000 3000
  youngs_modulus 1e9 1e9 1e9
  poisson 0.3
  friction 0.5
  yield_stress 5e7
  shore A 60 80
end
)";
        const MaterialLibrary lib3 = MaterialLibrary::load(scaled);
        for (int trial = 0; trial < 100; ++trial) {
            const double v = vol(rng), th = theta(rng);
            const double base = f_min(one_part(block, v), lib, th);
            const double tripled = f_min(one_part(lib3.ordinal_of("testblock"), v), lib3, th);
            CHECK(tripled == doctest::Approx(3.0 * base).epsilon(1e-12));
        }
    }
}

TEST_CASE("f_max hand values and properties") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    const MaterialRecord& block = lib.record("testblock");

    SUBCASE("bending branch wins the published surface constants") {
        // A=0.00011, E=1e9, d=0.002, kappa=0.5, sigma_y=5e7
        const double f = f_max({0.00011, 0.002, 0.5}, block);
        CHECK(f == doctest::Approx(55.0).epsilon(1e-9));
    }
    SUBCASE("yield branch governs when sigma_y is small") {
        MaterialRecord weak = block;
        weak.yield_stress = 1e4; // A*sigma_y = 1.1 N
        const double f = f_max({0.00011, 0.002, 0.5}, weak);
        CHECK(f == doctest::Approx(1.1).epsilon(1e-12));
    }
    SUBCASE("nonpositive inputs are rejected") {
        CHECK_THROWS_AS((void)f_max({0.0, 0.002, 0.5}, block), DataError);
        CHECK_THROWS_AS((void)f_max({0.00011, 0.0, 0.5}, block), DataError);
        CHECK_THROWS_AS((void)f_max({0.00011, 0.002, 0.0}, block), DataError);
    }
    SUBCASE("monotone nondecreasing in every input") {
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> scale(1.0, 3.0);
        for (int trial = 0; trial < 1000; ++trial) {
            SurfaceSpec s{1e-4 * scale(rng), 1e-3 * scale(rng), 0.3 * scale(rng)};
            MaterialRecord m = block;
            m.yield_stress = 1e6 * scale(rng);
            m.youngs_modulus.nominal = 1e8 * scale(rng);
            const double base = f_max(s, m);
            SurfaceSpec bigger = s;
            bigger.area *= 1.1;
            CHECK(f_max(bigger, m) >= base);
            bigger = s;
            bigger.thickness *= 1.3;
            CHECK(f_max(bigger, m) >= base);
            bigger = s;
            bigger.kappa_max *= 1.2;
            CHECK(f_max(bigger, m) >= base);
            MaterialRecord stronger = m;
            stronger.yield_stress *= 1.5;
            CHECK(f_max(s, stronger) >= base);
            stronger = m;
            stronger.youngs_modulus.nominal *= 2.0;
            CHECK(f_max(s, stronger) >= base);
        }
    }
}

TEST_CASE("f_star hand values") {
    SUBCASE("feasible interval with margin") {
        const GraspPlan plan = f_star(2, 10, basic_gripper());
        CHECK(plan.feasible);
        CHECK(plan.lower_bound == doctest::Approx(2.8));
        CHECK(plan.upper_bound == doctest::Approx(9.2));
        CHECK(plan.f_bar == doctest::Approx(6.0));
        CHECK(plan.f_star == doctest::Approx(6.0));
    }
    SUBCASE("infeasible interval clips the midpoint to the gripper range") {
        const GraspPlan plan = f_star(50, 10, basic_gripper());
        CHECK(!plan.feasible);
        CHECK(plan.f_bar == doctest::Approx(30.0));
        CHECK(plan.f_star == doctest::Approx(30.0));
    }
    SUBCASE("degenerate interval takes the infeasible branch") {
        const GraspPlan plan = f_star(5, 5, basic_gripper());
        CHECK(!plan.feasible);
        CHECK(plan.f_star == doctest::Approx(5.0));
    }
}

TEST_CASE("f_star properties on random parameterizations") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> force(0.0, 100.0);
    std::uniform_real_distribution<double> eta(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        double lo = force(rng) + 0.1, hi = force(rng) + 0.2;
        if (lo > hi)
            std::swap(lo, hi);
        if (lo == hi)
            hi += 0.1;
        GripperProfile g = basic_gripper(lo, hi, eta(rng));
        const double fmin = force(rng), fmax = force(rng);
        const GraspPlan plan = f_star(fmin, fmax, g);
        // F* always lies within the gripper range.
        CHECK(plan.f_star >= lo - 1e-12);
        CHECK(plan.f_star <= hi + 1e-12);
        // In the feasible branch with a non-degenerate margined interval,
        // F* respects both eta margins.
        if (plan.feasible && plan.lower_bound <= plan.upper_bound) {
            CHECK(plan.f_star >= plan.lower_bound - 1e-12);
            CHECK(plan.f_star <= plan.upper_bound + 1e-12);
        }
    }
}

TEST_CASE("calibration fit and inversion") {
    SUBCASE("exactly linear calibration inverts exactly") {
        const GripperProfile g = linear_gripper(0.4);
        CHECK(to_normalized_command(20.0, g) == doctest::Approx(50.0).epsilon(0.1 / 50.0));
    }
    SUBCASE("forces above the calibrated maximum clamp to 100") {
        const GripperProfile g = linear_gripper(0.4); // max force 40 N
        CHECK(to_normalized_command(45.0, g) == doctest::Approx(100.0));
    }
    SUBCASE("forces below the enabling threshold clamp to 15") {
        const GripperProfile g = linear_gripper(0.4); // force at 15 is 6 N
        CHECK(to_normalized_command(2.0, g) == doctest::Approx(15.0));
    }
    SUBCASE("too few samples are rejected") {
        GripperProfile g = basic_gripper();
        g.calibration = {{15, 6}, {40, 16}, {100, 40}};
        CHECK_THROWS_AS((void)ForceCalibration::fit(g), DataError);
    }
    SUBCASE("non-monotone curves are rejected") {
        GripperProfile g = basic_gripper();
        for (int n = 15; n <= 100; n += 5) {
            const double x = (n - 60.0) / 40.0;
            g.calibration.emplace_back(n, 30.0 - 25.0 * x * x); // peak at 60
        }
        CHECK_THROWS_AS((void)ForceCalibration::fit(g), DataError);
    }
    SUBCASE("round trip on random monotone curves stays within 1% of F_hi") {
        std::mt19937 rng(77);
        std::uniform_real_distribution<double> coeff(0.05, 0.5);
        std::uniform_real_distribution<double> pick(0.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            // Increasing polynomial: positive odd-power coefficients.
            const double c1 = coeff(rng), c3 = coeff(rng) * 0.3, c5 = coeff(rng) * 0.1;
            GripperProfile g = basic_gripper();
            for (int n = 15; n <= 100; n += 5) {
                const double t = 2.0 * (n - 15.0) / 85.0 - 1.0;
                const double f =
                    20.0 + 18.0 * (c1 * t + c3 * t * t * t + c5 * std::pow(t, 5));
                g.calibration.emplace_back(n, f);
            }
            const ForceCalibration cal = ForceCalibration::fit(g);
            const double f_lo = cal.force_at(15), f_hi_cal = cal.force_at(100);
            for (int probe = 0; probe < 20; ++probe) {
                const double target = f_lo + (f_hi_cal - f_lo) * pick(rng);
                const double n = cal.invert(target);
                CHECK(std::abs(cal.force_at(n) - target) <= 0.01 * g.force_hi);
            }
        }
    }
}

TEST_CASE("gripper profile parsing") {
    const char* text = R"(# example profile
schema_version 1
force_range 1 40
eta 0.1
theta 0
poly_degree 5
enabled_range 15 100
surface_area 0.00011
kappa_max 0.5
calibration
  15 2.1
  30 7.9
  45 14.2
  60 21.0
  75 28.1
  90 34.6
  100 39.2
end
)";
    const GripperProfile g = GripperProfile::load(text);
    CHECK(g.force_hi == 40);
    CHECK(g.eta == doctest::Approx(0.1));
    CHECK(g.calibration.size() == 7);
    CHECK(g.surface_area == doctest::Approx(0.00011));

    SUBCASE("calibration inputs outside the enabled range are rejected") {
        GripperProfile bad = g;
        bad.calibration.emplace_back(5.0, 1.0);
        CHECK_THROWS_AS(bad.validate(), DataError);
    }
    SUBCASE("eta outside [0,1] is rejected") {
        GripperProfile bad = g;
        bad.eta = 1.5;
        CHECK_THROWS_AS(bad.validate(), DataError);
    }
}

TEST_CASE("the shipped example gripper profile loads and fits monotone") {
    const GripperProfile g =
        GripperProfile::load_file(std::string(GSPROP_SOURCE_DIR) + "/data/gripper_example.txt");
    CHECK(g.force_hi == 40);
    CHECK(g.surface_area == doctest::Approx(0.00011));
    CHECK(g.kappa_max == doctest::Approx(0.5));
    const ForceCalibration cal = ForceCalibration::fit(g);
    CHECK(cal.force_at(100) <= 40.5);
    CHECK(cal.invert(20.0) > 15.0);
}

TEST_CASE("estimate_volumes") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    const std::uint16_t block = lib.ordinal_of("testblock");

    SUBCASE("0.1 m cube sampled densely comes out at 0.001 m^3") {
        const auto points = testing::cube_volume({0, 0, 0}, 0.1f, 32, 11);
        const auto cloud = make_cloud(points, 0.002f, 0.9f);
        const PropertyField field = uniform_field(cloud.count, block, lib);
        const auto parts = estimate_volumes(cloud, field, {0.005, 8, 3.0, 1});
        REQUIRE(parts.parts.size() == 1);
        CHECK(parts.parts[0].volume == doctest::Approx(0.001).epsilon(0.05));
    }
    SUBCASE("a single Gaussian occupies one voxel") {
        const auto cloud = make_cloud({{0.2f, 0.3f, -0.1f}}, 0.01f, 0.9f);
        const PropertyField field = uniform_field(1, block, lib);
        const auto parts = estimate_volumes(cloud, field, {0.005, 8, 3.0, 1});
        REQUIRE(parts.parts.size() == 1);
        CHECK(parts.parts[0].volume == doctest::Approx(0.005 * 0.005 * 0.005));
    }
    SUBCASE("disjoint same-material clusters split into two parts") {
        auto points = testing::cube_volume({0, 0, 0}, 0.05f, 6, 1);
        const auto far = testing::cube_volume({1, 0, 0}, 0.05f, 6, 2);
        points.insert(points.end(), far.begin(), far.end());
        const auto cloud = make_cloud(points, 0.005f, 0.9f);
        const PropertyField field = uniform_field(cloud.count, block, lib);
        const auto parts = estimate_volumes(cloud, field, {0.01, 8, 3.0, 1});
        CHECK(parts.parts.size() == 2);
    }
    SUBCASE("an empty field is an error") {
        const auto cloud = make_cloud({{0, 0, 0}}, 0.01f, 0.9f);
        const PropertyField field = PropertyField::make(1);
        CHECK_THROWS_AS((void)estimate_volumes(cloud, field, {}), DataError);
    }
}

TEST_CASE("estimate_mass") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    const std::uint16_t block = lib.ordinal_of("testblock");   // rho 1000
    const std::uint16_t hard = lib.ordinal_of("hardblock");    // rho 2000

    SUBCASE("single aluminum-density part") {
        const MaterialLibrary seed =
            MaterialLibrary::load_file(std::string(GSPROP_SOURCE_DIR) + "/data/materials.txt");
        const auto parts = one_part(seed.ordinal_of("aluminum"), 0.001);
        CHECK(estimate_mass(parts, seed) == doctest::Approx(2.7));
    }
    SUBCASE("zero parts weigh nothing") {
        CHECK(estimate_mass(PartDecomposition{}, lib) == 0.0);
    }
    SUBCASE("mass is additive over parts") {
        PartDecomposition parts = one_part(block, 0.001); // 1 kg
        parts.parts.push_back({2, hard, 0.001, {}});      // 2 kg
        CHECK(estimate_mass(parts, lib) == doctest::Approx(3.0));
    }
    SUBCASE("unresolved materials are an error") {
        PartDecomposition parts = one_part(0, 0.001);
        CHECK_THROWS_AS((void)estimate_mass(parts, lib), DataError);
    }
}

TEST_CASE("hardness_at") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    // Two Gaussians at different pixels; testblock is Shore A 60-80,
    // hardblock Shore D 40-60.
    const auto cloud = make_cloud({{0, 0, 2}, {0.4f, 0, 1}}, 0.05f, 0.999f);
    PropertyField field = PropertyField::make(2);
    field.material = {lib.ordinal_of("testblock"), lib.ordinal_of("hardblock")};
    field.provenance = {Provenance::voted, Provenance::voted};
    field.observation_count = {1, 1};
    const CameraModel cam = gsprop::testing::simple_camera();
    const DepthMap depth = render_depth(cloud, cam);

    const HardnessSample soft = hardness_at(50, 50, cloud, field, depth, lib);
    CHECK(soft.scale == ShoreScale::A);
    CHECK(soft.unified == doctest::Approx(70.0));

    const HardnessSample hard = hardness_at(90, 50, cloud, field, depth, lib);
    CHECK(hard.scale == ShoreScale::D);
    CHECK(hard.native_mid == doctest::Approx(50.0));
    CHECK(hard.unified == doctest::Approx(150.0));

    CHECK_THROWS_AS((void)hardness_at(5, 5, cloud, field, depth, lib), DataError);    // empty
    CHECK_THROWS_AS((void)hardness_at(-1, 5, cloud, field, depth, lib), DataError);   // outside
}

TEST_CASE("plan_grasp composes the stages") {
    const MaterialLibrary lib = MaterialLibrary::load(kPhysicsLibrary);
    // 0.1 m cube of rho=1000 -> exactly 1 kg at h=0.005.
    const auto points = testing::cube_volume({0, 0, 0}, 0.1f, 32, 21);
    const auto cloud = make_cloud(points, 0.002f, 0.9f);
    const PropertyField field = uniform_field(cloud.count, lib.ordinal_of("testblock"), lib);

    GripperProfile g = linear_gripper(0.4);
    g.theta = 0.0;
    GraspOverrides overrides;
    overrides.area = 0.00011;
    overrides.thickness = 0.002;
    overrides.kappa_max = 0.5;

    const GraspReport report = plan_grasp(cloud, field, lib, g, overrides, {0.005, 8, 3.0, 1});
    CHECK(report.mass == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(report.plan.f_min_n == doctest::Approx(9.8).epsilon(1e-9));
    CHECK(report.plan.f_max_n == doctest::Approx(55.0).epsilon(1e-9));
    // F_bar = 32.4; margins (9.8 + 0.1*30.2, 40 - 0.1*30.2) = (12.82, 36.98).
    CHECK(report.plan.f_star == doctest::Approx(32.4).epsilon(1e-9));
    // Linear calibration F = 0.4 N: N = 81.
    CHECK(report.plan.normalized_command == doctest::Approx(81.0).epsilon(1e-6));

    const std::string text = report.render_text(lib);
    CHECK(text.find("force-bearing") != std::string::npos);
    CHECK(text.find("f_star_n") != std::string::npos);

    SUBCASE("estimated thickness spans the cube when not overridden") {
        GraspOverrides est = overrides;
        est.thickness.reset();
        const GraspReport r2 = plan_grasp(cloud, field, lib, g, est, {0.005, 8, 3.0, 1});
        CHECK(r2.decomposition.surface.thickness == doctest::Approx(0.1).epsilon(0.06));
    }
    SUBCASE("unresolved fields are rejected") {
        PropertyField holes = field;
        holes.material[0] = 0;
        holes.provenance[0] = Provenance::unresolved;
        CHECK_THROWS_AS((void)plan_grasp(cloud, holes, lib, g, overrides), DataError);
    }
}
