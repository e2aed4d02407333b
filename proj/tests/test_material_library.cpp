#include <doctest.h>

#include "gsprop/error.hpp"
#include "gsprop/material_library.hpp"

#include "support/synthetic.hpp"

using namespace gsprop;

#ifndef GSPROP_SOURCE_DIR
#error "GSPROP_SOURCE_DIR must point at the repository root"
#endif

static MaterialLibrary seed_library() {
    return MaterialLibrary::load_file(std::string(GSPROP_SOURCE_DIR) + "/data/materials.txt");
}

TEST_CASE("seed library carries the cited densities") {
    const MaterialLibrary lib = seed_library();
    CHECK(lib.record("aluminum").density.nominal == doctest::Approx(2700));
    CHECK(lib.record("steel").density.min == doctest::Approx(7750));
    CHECK(lib.record("steel").density.max == doctest::Approx(8050));
    CHECK(lib.record("copper").density.min == doctest::Approx(8920));
    CHECK(lib.record("copper").density.max == doctest::Approx(8960));
    CHECK(lib.record("glass").density.min == doctest::Approx(2200));
    CHECK(lib.record("glass").density.max == doctest::Approx(2500));
    CHECK(lib.record("concrete").density.min == doctest::Approx(2300));
    CHECK(lib.record("concrete").density.max == doctest::Approx(2500));
}

TEST_CASE("seed library populates every evaluation family") {
    const MaterialLibrary lib = seed_library();
    for (std::string_view family : kEvaluationFamilies) {
        INFO("family ", family);
        const MaterialRecord* rec = lib.resolve(family);
        REQUIRE(rec != nullptr);
        CHECK(rec->family == family);
        CHECK(rec->density.nominal > 0);
        CHECK(rec->youngs_modulus.nominal > 0);
        CHECK(rec->friction_mu > 0);
        CHECK(rec->yield_stress > 0);
        CHECK(rec->shore.max >= rec->shore.min);
        CHECK(!rec->provenance.empty());
    }
}

TEST_CASE("resolve") {
    const MaterialLibrary lib = seed_library();
    SUBCASE("normalizes case and whitespace") {
        const MaterialRecord* rec = lib.resolve("Aluminum ");
        REQUIRE(rec != nullptr);
        CHECK(rec->material_id == "aluminum");
    }
    SUBCASE("polyethylene density range") {
        const MaterialRecord* rec = lib.resolve("polyethylene");
        REQUIRE(rec != nullptr);
        CHECK(rec->density.min == doctest::Approx(930));
        CHECK(rec->density.max == doctest::Approx(970));
    }
    SUBCASE("unknown names return not-found") { CHECK(lib.resolve("unobtainium") == nullptr); }
    SUBCASE("family names resolve to the family's default record") {
        const MaterialRecord* rec = lib.resolve("metal");
        REQUIRE(rec != nullptr);
        CHECK(rec->family == "metal");
        CHECK(rec->family_default);
    }
    SUBCASE("resolve is total over the key set") {
        for (const auto& rec : lib.records()) {
            const MaterialRecord* hit = lib.resolve(rec.material_id);
            REQUIRE(hit != nullptr);
            CHECK(hit == &lib.record(rec.material_id));
        }
    }
}

TEST_CASE("family_of") {
    const MaterialLibrary lib = seed_library();
    CHECK(lib.family_of("copper") == "metal");
    CHECK(lib.family_of("glass") == "glass");
    CHECK(lib.family_of("polyethylene") == "plastic");
    CHECK_THROWS_AS((void)lib.family_of("unobtainium"), DataError);
}

TEST_CASE("every record maps into a declared family with a valid ordinal") {
    const MaterialLibrary lib = seed_library();
    for (const auto& rec : lib.records()) {
        const auto& ids = lib.families().at(rec.family);
        CHECK(std::find(ids.begin(), ids.end(), rec.material_id) != ids.end());
        const std::uint16_t fam = lib.family_ordinal(rec.family);
        CHECK(fam >= 1);
        CHECK(lib.family_by_ordinal(fam) == rec.family);
        CHECK(lib.by_ordinal(lib.ordinal_of(rec.material_id)).material_id == rec.material_id);
    }
    // canonical families occupy ordinals 1..10 in order
    for (std::size_t i = 0; i < kEvaluationFamilies.size(); ++i)
        CHECK(lib.family_ordinal(kEvaluationFamilies[i]) == i + 1);
}

TEST_CASE("load rejects invalid libraries") {
    SUBCASE("range violation") {
        const char* text = R"(schema_version 1
material bad
  family metal
  density 100 50 75
  youngs_modulus 1e9 2e9 1.5e9
  poisson 0.3
  friction 0.5
  yield_stress 1e7
  shore A 10 20
end
)";
        CHECK_THROWS_AS((void)MaterialLibrary::load(text), DataError);
    }
    SUBCASE("duplicate id") {
        std::string text = "schema_version 1\n";
        for (int i = 0; i < 2; ++i)
            text += R"(material dup
  family metal
  density 1 2 1.5
  youngs_modulus 1e9 2e9 1.5e9
  poisson 0.3
  friction 0.5
  yield_stress 1e7
  shore A 10 20
end
)";
        CHECK_THROWS_AS((void)MaterialLibrary::load(text), DataError);
    }
    SUBCASE("missing fields") {
        const char* text = "schema_version 1\nmaterial thin\n  family wood\nend\n";
        CHECK_THROWS_AS((void)MaterialLibrary::load(text), ParseError);
    }
    SUBCASE("missing schema version") {
        CHECK_THROWS_AS((void)MaterialLibrary::load("material x\nend\n"), ParseError);
    }
    SUBCASE("poisson outside the open interval") {
        const char* text = R"(schema_version 1
material bad
  family metal
  density 1 2 1.5
  youngs_modulus 1e9 2e9 1.5e9
  poisson 0.5
  friction 0.5
  yield_stress 1e7
  shore A 10 20
end
)";
        CHECK_THROWS_AS((void)MaterialLibrary::load(text), DataError);
    }
}

TEST_CASE("serialize round-trips to an equivalent library") {
    const MaterialLibrary lib = seed_library();
    const MaterialLibrary again = MaterialLibrary::load(lib.serialize());
    REQUIRE(again.records().size() == lib.records().size());
    for (std::size_t i = 0; i < lib.records().size(); ++i) {
        const auto& a = lib.records()[i];
        const auto& b = again.records()[i];
        CHECK(a.material_id == b.material_id);
        CHECK(a.family == b.family);
        CHECK(a.density.nominal == b.density.nominal);
        CHECK(a.youngs_modulus.max == b.youngs_modulus.max);
        CHECK(a.shore.unified_midpoint() == b.shore.unified_midpoint());
    }
}

TEST_CASE("shore unified axis shifts D by +100") {
    ShoreHardness a{ShoreScale::A, 60, 80};
    CHECK(a.unified_midpoint() == doctest::Approx(70));
    ShoreHardness d{ShoreScale::D, 40, 60};
    CHECK(d.unified_midpoint() == doctest::Approx(150));
}
