#pragma once

#include <cstdint>
#include <vector>

#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/material_library.hpp"

namespace gsprop {

enum class Provenance : std::uint8_t { unresolved = 0, voted = 1, propagated = 2 };

// Per-Gaussian material assignment with resolved scalar properties.
struct PropertyField {
    std::vector<std::uint16_t> material; // library ordinal, 0 = unresolved
    std::vector<Provenance> provenance;
    std::vector<std::int32_t> source;            // propagated: donor Gaussian; else -1
    std::vector<std::uint16_t> observation_count; // votes backing a `voted` entry

    // Nominal scalars from the assigned MaterialRecord; 0 where unresolved.
    std::vector<float> density;
    std::vector<float> youngs_modulus;
    std::vector<float> poisson_ratio;
    std::vector<float> friction;
    std::vector<float> yield_stress;

    std::size_t size() const { return material.size(); }
    static PropertyField make(std::size_t count);

    std::size_t resolved_count() const;

    // Fills the scalar arrays from the library nominals.
    void resolve_scalars(const MaterialLibrary& library);

    // Throws DataError when array lengths disagree, a `voted` entry has no
    // observations, or a `propagated` entry names no source.
    void validate() const;
};

// Assigns each unresolved Gaussian the majority material among its k nearest
// resolved neighbors; provenance becomes `propagated` with the nearest donor
// of the winning material recorded. A fully resolved field is returned
// unchanged; a field with no resolved Gaussian at all throws DataError.
PropertyField propagate(PropertyField field, const GaussianCloud& cloud, int k = 8,
                        int workers = 1);

} // namespace gsprop
