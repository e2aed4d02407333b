#include "gsprop/export_scene.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "gsprop/error.hpp"
#include "gsprop/ply.hpp"

namespace gsprop {

void AnnotatedScene::validate() const {
    if (!cloud || !field || !library)
        throw DataError("annotated scene is missing cloud, field or library");
    if (field->size() != cloud->count)
        throw DataError("field length " + std::to_string(field->size()) + " != cloud count " +
                        std::to_string(cloud->count));
    for (std::size_t i = 0; i < field->size(); ++i) {
        if (field->material[i] == 0)
            throw DataError("Gaussian " + std::to_string(i) +
                            " is unresolved; run propagation before export");
        if (field->material[i] > library->records().size())
            throw DataError("Gaussian " + std::to_string(i) +
                            " has a material ordinal outside the library snapshot");
    }
}

std::vector<std::byte> export_annotated_ply(const AnnotatedScene& scene) {
    scene.validate();
    const std::size_t n = scene.cloud->count;

    // Re-exporting an imported annotated scene: drop the previous annotation
    // columns so the fresh field values replace them instead of colliding.
    GaussianCloud cloud = *scene.cloud;
    if (cloud.raw) {
        auto stripped = std::make_shared<PlyTable>(*cloud.raw);
        std::erase_if(stripped->columns, [](const PlyColumn& c) {
            return c.name == "material_id" || c.name == "density" ||
                   c.name == "youngs_modulus" || c.name == "poisson_ratio";
        });
        cloud.raw = std::move(stripped);
    }

    std::vector<std::int32_t> material(n);
    for (std::size_t i = 0; i < n; ++i)
        material[i] = scene.field->material[i];

    const std::vector<ExtraField> extra = {
        {"material_id", std::move(material)},
        {"density", scene.field->density},
        {"youngs_modulus", scene.field->youngs_modulus},
        {"poisson_ratio", scene.field->poisson_ratio},
    };
    return write_gaussian_ply(cloud, extra);
}

std::string export_manifest(const AnnotatedScene& scene) {
    scene.validate();
    std::ostringstream out;
    out << "gsprop_manifest_version 1\n";
    out << "config_hash " << scene.provenance.config_hash << "\n";
    out << "timestamp " << scene.provenance.timestamp << "\n";
    out << "gaussians " << scene.cloud->count << "\n";
    out << "views";
    for (const auto& view : scene.provenance.views)
        out << ' ' << view;
    out << "\n";
    out << "library_snapshot_begin\n";
    out << scene.library->serialize();
    out << "library_snapshot_end\n";
    return out.str();
}

std::string export_summary(const AnnotatedScene& scene, const PartDecomposition* parts) {
    if (!scene.cloud || !scene.field || !scene.library)
        throw DataError("annotated scene is missing cloud, field or library");

    std::ostringstream out;
    out.precision(6);
    out << "scene summary\n=============\n\n";
    out << "gaussians: " << scene.cloud->count << "\n\n";

    std::map<std::uint16_t, std::size_t> counts;
    std::size_t unresolved = 0;
    for (std::uint16_t m : scene.field->material) {
        if (m == 0)
            ++unresolved;
        else
            ++counts[m];
    }
    out << "material counts:\n";
    out << "  material gaussians\n";
    for (const auto& [ordinal, count] : counts)
        out << "  " << scene.library->by_ordinal(ordinal).material_id << " " << count << "\n";
    if (unresolved)
        out << "  (unresolved) " << unresolved << "\n";

    if (parts) {
        out << "\nparts:\n";
        out << "  part material volume_m3 mass_kg\n";
        for (const auto& part : parts->parts) {
            const MaterialRecord& rec = scene.library->by_ordinal(part.material);
            out << "  " << part.part_id << " " << rec.material_id << " " << part.volume << " "
                << rec.density.nominal * part.volume << "\n";
        }
    }

    if (!counts.empty()) {
        out << "\nproperty ranges over assigned Gaussians:\n";
        auto minmax = [&](const std::vector<float>& values) {
            float lo = 0, hi = 0;
            bool first = true;
            for (std::size_t i = 0; i < values.size(); ++i) {
                if (scene.field->material[i] == 0)
                    continue;
                if (first) {
                    lo = hi = values[i];
                    first = false;
                } else {
                    lo = std::min(lo, values[i]);
                    hi = std::max(hi, values[i]);
                }
            }
            return std::make_pair(lo, hi);
        };
        const auto [rho_lo, rho_hi] = minmax(scene.field->density);
        const auto [e_lo, e_hi] = minmax(scene.field->youngs_modulus);
        out << "  density_kg_m3 [" << rho_lo << ", " << rho_hi << "]\n";
        out << "  youngs_modulus_pa [" << e_lo << ", " << e_hi << "]\n";

        out << "\nprovenance histogram:\n";
        std::size_t voted = 0, propagated = 0;
        for (Provenance p : scene.field->provenance) {
            voted += p == Provenance::voted;
            propagated += p == Provenance::propagated;
        }
        out << "  voted " << voted << "\n  propagated " << propagated << "\n  unresolved "
            << unresolved << "\n";
    }
    return out.str();
}

PropertyField field_from_annotated(const GaussianCloud& cloud, const MaterialLibrary& library) {
    const auto material = extract_column<std::int32_t>(cloud, "material_id");
    PropertyField field = PropertyField::make(cloud.count);
    for (std::size_t i = 0; i < cloud.count; ++i) {
        if (material[i] <= 0 ||
            static_cast<std::size_t>(material[i]) > library.records().size())
            throw DataError("annotated scene names material ordinal " +
                            std::to_string(material[i]) + " at Gaussian " + std::to_string(i) +
                            " which the library snapshot does not carry");
        field.material[i] = static_cast<std::uint16_t>(material[i]);
        field.provenance[i] = Provenance::voted;
        field.observation_count[i] = 1;
    }
    field.resolve_scalars(library);
    return field;
}

} // namespace gsprop
