#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gsprop/gaussian_cloud.hpp"
#include "gsprop/material_library.hpp"
#include "gsprop/physics.hpp"
#include "gsprop/property_field.hpp"

namespace gsprop {

struct SceneProvenance {
    std::vector<std::string> views; // view_ids that fed the lift
    std::string config_hash;        // content hash of config + inputs
    std::string timestamp;          // ISO-8601
};

struct AnnotatedScene {
    const GaussianCloud* cloud = nullptr;
    const PropertyField* field = nullptr;
    const MaterialLibrary* library = nullptr;
    SceneProvenance provenance;

    // Throws DataError on length mismatch, ordinals outside the library, or
    // unresolved Gaussians (the exporter requires propagation to have run).
    void validate() const;
};

// Base PLY plus per-vertex material_id (int) and density, youngs_modulus,
// poisson_ratio scalars, so simulators can consume particles without the
// library.
std::vector<std::byte> export_annotated_ply(const AnnotatedScene& scene);

// Versioned sidecar: provenance plus the full library snapshot.
std::string export_manifest(const AnnotatedScene& scene);

// Per-material counts, per-part volumes and masses when a decomposition is
// supplied, and a property histogram.
std::string export_summary(const AnnotatedScene& scene,
                           const PartDecomposition* parts = nullptr);

// Rebuilds the property field of an annotated PLY from its material_id
// column, re-resolving scalars against the library.
PropertyField field_from_annotated(const GaussianCloud& cloud, const MaterialLibrary& library);

} // namespace gsprop
