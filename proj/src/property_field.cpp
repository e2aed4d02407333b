#include "gsprop/property_field.hpp"

#include <algorithm>

#include "gsprop/error.hpp"
#include "gsprop/knn.hpp"
#include "gsprop/parallel.hpp"
#include "gsprop/voting.hpp"

namespace gsprop {

PropertyField PropertyField::make(std::size_t count) {
    PropertyField f;
    f.material.assign(count, 0);
    f.provenance.assign(count, Provenance::unresolved);
    f.source.assign(count, -1);
    f.observation_count.assign(count, 0);
    f.density.assign(count, 0.0f);
    f.youngs_modulus.assign(count, 0.0f);
    f.poisson_ratio.assign(count, 0.0f);
    f.friction.assign(count, 0.0f);
    f.yield_stress.assign(count, 0.0f);
    return f;
}

std::size_t PropertyField::resolved_count() const {
    return static_cast<std::size_t>(
        std::count_if(material.begin(), material.end(), [](std::uint16_t m) { return m != 0; }));
}

void PropertyField::resolve_scalars(const MaterialLibrary& library) {
    for (std::size_t i = 0; i < material.size(); ++i) {
        if (material[i] == 0) {
            density[i] = youngs_modulus[i] = poisson_ratio[i] = friction[i] = yield_stress[i] =
                0.0f;
            continue;
        }
        const MaterialRecord& rec = library.by_ordinal(material[i]);
        density[i] = static_cast<float>(rec.density.nominal);
        youngs_modulus[i] = static_cast<float>(rec.youngs_modulus.nominal);
        poisson_ratio[i] = static_cast<float>(rec.poisson_ratio);
        friction[i] = static_cast<float>(rec.friction_mu);
        yield_stress[i] = static_cast<float>(rec.yield_stress);
    }
}

void PropertyField::validate() const {
    const std::size_t n = material.size();
    if (provenance.size() != n || source.size() != n || observation_count.size() != n ||
        density.size() != n || youngs_modulus.size() != n || poisson_ratio.size() != n ||
        friction.size() != n || yield_stress.size() != n)
        throw DataError("property field arrays have inconsistent lengths");
    for (std::size_t i = 0; i < n; ++i) {
        if (provenance[i] == Provenance::voted && observation_count[i] == 0)
            throw DataError("voted Gaussian " + std::to_string(i) + " has no observations");
        if (provenance[i] == Provenance::propagated && source[i] < 0)
            throw DataError("propagated Gaussian " + std::to_string(i) + " names no source");
        if ((provenance[i] == Provenance::unresolved) != (material[i] == 0))
            throw DataError("provenance/material mismatch at Gaussian " + std::to_string(i));
    }
}

PropertyField propagate(PropertyField field, const GaussianCloud& cloud, int k, int workers) {
    if (field.size() != cloud.count)
        throw DataError("property field length does not match the cloud");

    std::vector<int> resolved;
    std::vector<std::size_t> unresolved;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field.material[i] != 0)
            resolved.push_back(static_cast<int>(i));
        else
            unresolved.push_back(i);
    }
    if (unresolved.empty())
        return field; // fixed point
    if (resolved.empty())
        throw DataError("cannot propagate: no Gaussian has a resolved material");

    std::vector<Eigen::Vector3f> resolved_positions;
    resolved_positions.reserve(resolved.size());
    for (int idx : resolved)
        resolved_positions.push_back(cloud.positions[static_cast<std::size_t>(idx)]);
    const KdTree3 tree(resolved_positions);

    std::vector<std::size_t> material_counts;
    for (std::uint16_t m : field.material)
        if (m != 0) {
            if (m >= material_counts.size())
                material_counts.resize(m + 1, 0);
            ++material_counts[m];
        }

    parallel_for(unresolved.size(), workers, [&](std::size_t u) {
        const std::size_t i = unresolved[u];
        const auto neighbors = tree.nearest(cloud.positions[i], k);
        std::vector<Observation> obs;
        obs.reserve(neighbors.size());
        for (int n : neighbors)
            obs.emplace_back(0, field.material[static_cast<std::size_t>(resolved[n])]);
        const std::uint16_t winner = vote(obs, material_counts);
        if (winner == 0)
            return;
        field.material[i] = winner;
        field.provenance[i] = Provenance::propagated;
        // Nearest donor of the winning material.
        for (int n : neighbors) {
            const int donor = resolved[n];
            if (field.material[static_cast<std::size_t>(donor)] == winner) {
                field.source[i] = donor;
                break;
            }
        }
    });
    return field;
}

} // namespace gsprop
