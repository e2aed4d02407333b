#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gsprop/error.hpp"
#include "gsprop/knn.hpp"
#include "gsprop/physics.hpp"

namespace gsprop {

const Part& PartDecomposition::part(int part_id) const {
    for (const auto& p : parts)
        if (p.part_id == part_id)
            return p;
    throw DataError("unknown part id " + std::to_string(part_id));
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a)
            a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b)
            parent[std::max(a, b)] = std::min(a, b);
    }
};

// Occupancy volume of one point set: voxels holding at least one point,
// closed morphologically with a radius-1 (3x3x3) structuring element.
double occupied_volume(const std::vector<Eigen::Vector3f>& points, double h) {
    Eigen::Vector3f lo = points.front(), hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    // One voxel of padding on each side so dilation stays in bounds.
    const int pad = 1;
    Eigen::Vector3i dims;
    Eigen::Vector3i base;
    for (int a = 0; a < 3; ++a) {
        base[a] = static_cast<int>(std::floor(lo[a] / h)) - pad;
        const int top = static_cast<int>(std::floor(hi[a] / h)) + pad;
        dims[a] = top - base[a] + 1;
    }
    const std::size_t total =
        static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
    if (total > (std::size_t(1) << 31))
        throw DataError("voxel grid too large; increase voxel_size");

    auto flat = [&](int x, int y, int z) {
        return (static_cast<std::size_t>(z) * dims.y() + y) * dims.x() + x;
    };

    std::vector<std::uint8_t> occ(total, 0);
    for (const auto& p : points) {
        const int x = static_cast<int>(std::floor(p.x() / h)) - base.x();
        const int y = static_cast<int>(std::floor(p.y() / h)) - base.y();
        const int z = static_cast<int>(std::floor(p.z() / h)) - base.z();
        occ[flat(x, y, z)] = 1;
    }

    std::vector<std::uint8_t> dilated(total, 0);
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x) {
                if (!occ[flat(x, y, z)])
                    continue;
                for (int dz = -1; dz <= 1; ++dz)
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int nx = x + dx, ny = y + dy, nz = z + dz;
                            if (nx >= 0 && nx < dims.x() && ny >= 0 && ny < dims.y() && nz >= 0 &&
                                nz < dims.z())
                                dilated[flat(nx, ny, nz)] = 1;
                        }
            }

    std::size_t closed_count = 0;
    for (int z = 0; z < dims.z(); ++z)
        for (int y = 0; y < dims.y(); ++y)
            for (int x = 0; x < dims.x(); ++x) {
                if (!dilated[flat(x, y, z)])
                    continue;
                bool keep = true;
                for (int dz = -1; dz <= 1 && keep; ++dz)
                    for (int dy = -1; dy <= 1 && keep; ++dy)
                        for (int dx = -1; dx <= 1 && keep; ++dx) {
                            const int nx = x + dx, ny = y + dy, nz = z + dz;
                            if (nx < 0 || nx >= dims.x() || ny < 0 || ny >= dims.y() || nz < 0 ||
                                nz >= dims.z() || !dilated[flat(nx, ny, nz)])
                                keep = false;
                        }
                closed_count += keep;
            }
    return static_cast<double>(closed_count) * h * h * h;
}

} // namespace

PartDecomposition estimate_volumes(const GaussianCloud& cloud, const PropertyField& field,
                                   const VolumeParams& params) {
    if (field.size() != cloud.count)
        throw DataError("property field length does not match the cloud");
    if (cloud.count == 0 || field.resolved_count() == 0)
        throw DataError("estimate_volumes: no resolved Gaussians");
    if (!(params.voxel_size > 0))
        throw DataError("estimate_volumes: voxel_size must be positive");

    // Indices per material ordinal.
    std::map<std::uint16_t, std::vector<int>> by_material;
    for (std::size_t i = 0; i < cloud.count; ++i) {
        if (field.material[i] != 0)
            by_material[field.material[i]].push_back(static_cast<int>(i));
    }

    PartDecomposition out;
    out.voxel_size = params.voxel_size;

    for (const auto& [material, indices] : by_material) {
        std::vector<Eigen::Vector3f> points;
        points.reserve(indices.size());
        for (int i : indices)
            points.push_back(cloud.positions[static_cast<std::size_t>(i)]);

        // Connected components over the same-material k-NN graph, with the
        // distance cutoff keeping far-apart clusters separate.
        UnionFind uf(indices.size());
        if (indices.size() > 1) {
            const KdTree3 tree(points);
            std::vector<float> nn(indices.size());
            for (std::size_t i = 0; i < indices.size(); ++i)
                nn[i] = tree.nearest_neighbor_distance(static_cast<int>(i));
            std::vector<float> sorted_nn = nn;
            std::nth_element(sorted_nn.begin(), sorted_nn.begin() + sorted_nn.size() / 2,
                             sorted_nn.end());
            const float cutoff =
                static_cast<float>(params.cutoff_factor) * sorted_nn[sorted_nn.size() / 2];
            for (std::size_t i = 0; i < indices.size(); ++i) {
                const auto neighbors = tree.nearest(points[i], params.knn, static_cast<int>(i));
                for (int n : neighbors) {
                    if ((points[static_cast<std::size_t>(n)] - points[i]).norm() <= cutoff)
                        uf.unite(static_cast<int>(i), n);
                }
            }
        }

        std::map<int, std::vector<int>> components; // root -> member set indices
        for (std::size_t i = 0; i < indices.size(); ++i)
            components[uf.find(static_cast<int>(i))].push_back(static_cast<int>(i));

        for (const auto& [root, members] : components) {
            Part part;
            part.part_id = static_cast<int>(out.parts.size()) + 1;
            part.material = material;
            std::vector<Eigen::Vector3f> part_points;
            part_points.reserve(members.size());
            for (int m : members) {
                part.gaussians.push_back(indices[static_cast<std::size_t>(m)]);
                part_points.push_back(points[static_cast<std::size_t>(m)]);
            }
            part.volume = occupied_volume(part_points, params.voxel_size);
            out.parts.push_back(std::move(part));
        }
    }
    return out;
}

double estimate_mass(const PartDecomposition& parts, const MaterialLibrary& library) {
    double mass = 0;
    for (const auto& part : parts.parts) {
        if (part.material == 0)
            throw DataError("part " + std::to_string(part.part_id) + " has unresolved material");
        mass += library.by_ordinal(part.material).density.nominal * part.volume;
    }
    return mass;
}

HardnessSample hardness_at(int u, int v, const GaussianCloud& cloud, const PropertyField& field,
                           const DepthMap& depth_map, const MaterialLibrary& library) {
    if (!depth_map.depth.inside(u, v))
        throw DataError("hardness_at: pixel outside the image");
    const std::int32_t index = depth_map.surface_index.at(u, v);
    if (index < 0)
        throw DataError("hardness_at: empty pixel (no surface)");
    if (field.size() != cloud.count)
        throw DataError("property field length does not match the cloud");
    const std::uint16_t ordinal = field.material[static_cast<std::size_t>(index)];
    if (ordinal == 0)
        throw DataError("hardness_at: surface Gaussian is unresolved");

    const MaterialRecord& rec = library.by_ordinal(ordinal);
    HardnessSample out;
    out.material_id = rec.material_id;
    out.scale = rec.shore.scale;
    out.native_mid = 0.5 * (rec.shore.min + rec.shore.max);
    out.unified = rec.shore.unified_midpoint();
    return out;
}

} // namespace gsprop
