// SPDX-License-Identifier: Apache-2.0
#pragma once

// Geometry write-back: masked vertices take their z from the inpainted
// height mosaic, then vertices are welded by distance and degenerate
// triangles dropped. Only masked vertices move (unless configured
// otherwise), so static surroundings stay bit-identical.

#include <tuple>
#include <unordered_map>

#include "dsmscrub/mask.hpp"
#include "dsmscrub/mosaic.hpp"

namespace dsmscrub {

struct RemeshConfig {
    double merge_distance = 0.4;        // meters
    bool replace_only_masked = true;
    double degenerate_area_epsilon = 1e-8;  // square meters
};

struct ReplaceStats {
    std::size_t changed_vertices = 0;
    std::size_t skipped_invalid = 0;  // replace-all mode only
};

namespace remesh_detail {

inline bool bilinear_height(const HeightMosaic& mosaic, double u, double v, double& out) {
    double fu = u - 0.5, fv = v - 0.5;
    int x0 = static_cast<int>(std::floor(fu));
    int y0 = static_cast<int>(std::floor(fv));
    double ax = fu - x0, ay = fv - y0;
    int xs[2] = {std::clamp(x0, 0, mosaic.width - 1), std::clamp(x0 + 1, 0, mosaic.width - 1)};
    int ys[2] = {std::clamp(y0, 0, mosaic.height - 1), std::clamp(y0 + 1, 0, mosaic.height - 1)};
    double wx[2] = {1.0 - ax, ax};
    double wy[2] = {1.0 - ay, ay};
    double acc = 0.0;
    for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i) {
            double w = wx[i] * wy[j];
            if (w == 0.0) continue;
            if (!mosaic.valid.get(xs[i], ys[j])) return false;
            acc += w * mosaic.at(xs[i], ys[j]);
        }
    out = acc;
    return true;
}

}  // namespace remesh_detail

/// Replaces the z of every vertex whose projected pixel is masked with a
/// bilinear sample of the height mosaic at the exact projected position.
/// x and y never change; unmasked vertices stay bit-identical.
inline TexturedMesh replace_elevations(const TexturedMesh& mesh, const HeightMosaic& mosaic,
                                       const MaskMosaic& mask, const OrthoCamera& cam,
                                       const RemeshConfig& cfg,
                                       ReplaceStats* stats = nullptr) {
    if (mosaic.width != cam.mosaic_width || mosaic.height != cam.mosaic_height ||
        mask.width() != cam.mosaic_width || mask.height() != cam.mosaic_height)
        throw ValidationError("replace_elevations: mosaic/mask/camera dimension mismatch");

    TexturedMesh out = mesh;
    ReplaceStats st;
    for (std::size_t i = 0; i < out.vertices.size(); ++i) {
        Vec3f& vert = out.vertices[i];
        double u, v;
        project_vertex(cam, vert, u, v);
        int px = std::clamp(static_cast<int>(std::floor(u)), 0, cam.mosaic_width - 1);
        int py = std::clamp(static_cast<int>(std::floor(v)), 0, cam.mosaic_height - 1);
        bool masked = mask.get(px, py);
        if (cfg.replace_only_masked && !masked) continue;

        double z;
        if (!remesh_detail::bilinear_height(mosaic, u, v, z)) {
            if (masked)
                throw ValidationError(cat("vertex ", i, " is masked but projects to invalid "
                                          "mosaic data at pixel (", px, ", ", py, ")"));
            ++st.skipped_invalid;
            continue;
        }
        float zf = static_cast<float>(z);
        if (zf != vert.z) ++st.changed_vertices;
        vert.z = zf;
    }
    if (stats) *stats = st;
    return out;
}

namespace remesh_detail {

struct UnionFind {
    std::vector<std::uint32_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
    }
    std::uint32_t find(std::uint32_t a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (a < b) parent[b] = a;  // lowest index becomes the root
        else
            parent[a] = b;
    }
};

inline double dist_sq(const Vec3f& a, const Vec3f& b) {
    double dx = static_cast<double>(a.x) - b.x;
    double dy = static_cast<double>(a.y) - b.y;
    double dz = static_cast<double>(a.z) - b.z;
    return dx * dx + dy * dy + dz * dz;
}

inline double triangle_area(const Vec3f& a, const Vec3f& b, const Vec3f& c) {
    double ux = static_cast<double>(b.x) - a.x, uy = static_cast<double>(b.y) - a.y,
           uz = static_cast<double>(b.z) - a.z;
    double vx = static_cast<double>(c.x) - a.x, vy = static_cast<double>(c.y) - a.y,
           vz = static_cast<double>(c.z) - a.z;
    double cx = uy * vz - uz * vy, cy = uz * vx - ux * vz, cz = ux * vy - uy * vx;
    return 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
}

inline std::uint64_t cell_key(std::int64_t cx, std::int64_t cy, std::int64_t cz) {
    std::uint64_t h = splitmix64(static_cast<std::uint64_t>(cx));
    h = splitmix64(h ^ static_cast<std::uint64_t>(cy));
    return splitmix64(h ^ static_cast<std::uint64_t>(cz));
}

/// Clusters by the transitive closure of "distance <= eps". Spatial hash
/// with cell size eps; only the 27 neighboring cells can hold partners.
/// `eligible`, when non-null, restricts merging to flagged vertices; the
/// rest stay singleton clusters.
inline std::vector<std::uint32_t> cluster_vertices(const std::vector<Vec3f>& verts, double eps,
                                                   const std::vector<std::uint8_t>* eligible) {
    UnionFind uf(verts.size());
    auto ok = [&](std::uint32_t i) { return !eligible || (*eligible)[i]; };
    if (eps == 0.0) {
        // Exactly coincident coordinates only.
        std::map<std::tuple<float, float, float>, std::uint32_t> first;
        for (std::uint32_t i = 0; i < verts.size(); ++i) {
            if (!ok(i)) continue;
            auto key = std::make_tuple(verts[i].x, verts[i].y, verts[i].z);
            auto [it, inserted] = first.emplace(key, i);
            if (!inserted) uf.unite(it->second, i);
        }
    } else {
        std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells;
        cells.reserve(verts.size());
        auto cell_of = [&](const Vec3f& v) {
            return std::array<std::int64_t, 3>{
                static_cast<std::int64_t>(std::floor(v.x / eps)),
                static_cast<std::int64_t>(std::floor(v.y / eps)),
                static_cast<std::int64_t>(std::floor(v.z / eps))};
        };
        for (std::uint32_t i = 0; i < verts.size(); ++i) {
            if (!ok(i)) continue;
            auto c = cell_of(verts[i]);
            cells[cell_key(c[0], c[1], c[2])].push_back(i);
        }
        const double eps_sq = eps * eps;
        for (std::uint32_t i = 0; i < verts.size(); ++i) {
            if (!ok(i)) continue;
            auto c = cell_of(verts[i]);
            for (std::int64_t dz = -1; dz <= 1; ++dz)
                for (std::int64_t dy = -1; dy <= 1; ++dy)
                    for (std::int64_t dx = -1; dx <= 1; ++dx) {
                        auto it = cells.find(cell_key(c[0] + dx, c[1] + dy, c[2] + dz));
                        if (it == cells.end()) continue;
                        for (std::uint32_t j : it->second)
                            if (j > i && dist_sq(verts[i], verts[j]) <= eps_sq)
                                uf.unite(i, j);
                    }
        }
    }
    std::vector<std::uint32_t> root(verts.size());
    for (std::uint32_t i = 0; i < verts.size(); ++i) root[i] = uf.find(i);
    return root;
}

}  // namespace remesh_detail

struct MergeStats {
    std::size_t merged_vertices = 0;
    std::size_t dropped_triangles = 0;
};

/// Welds vertices within merge_distance (transitive closure), collapsing
/// each cluster to its centroid; UVs come from the cluster's lowest-index
/// member. Triangles that end up with repeated indices or with area below
/// degenerate_area_epsilon are removed. When `eligible` is given, only the
/// flagged vertices participate in welding and the area filter only applies
/// to triangles touching them, so untouched geometry survives byte-for-byte
/// (the pipeline flags the mask-covered vertices here).
inline TexturedMesh merge_vertices(const TexturedMesh& mesh, const RemeshConfig& cfg,
                                   MergeStats* stats = nullptr,
                                   const std::vector<std::uint8_t>* eligible = nullptr) {
    if (cfg.merge_distance < 0) throw ConfigError("merge_distance must be >= 0");
    if (eligible && eligible->size() != mesh.vertices.size())
        throw ValidationError("merge_vertices: eligibility size mismatch");
    std::vector<std::uint32_t> root =
        remesh_detail::cluster_vertices(mesh.vertices, cfg.merge_distance, eligible);

    // Cluster roots are the lowest member index, so ordering new vertices by
    // root index keeps the output deterministic and stable.
    std::vector<std::uint32_t> new_index(mesh.vertices.size(), 0);
    std::vector<std::uint32_t> cluster_root;
    for (std::uint32_t i = 0; i < root.size(); ++i)
        if (root[i] == i) {
            new_index[i] = static_cast<std::uint32_t>(cluster_root.size());
            cluster_root.push_back(i);
        }
    for (std::uint32_t i = 0; i < root.size(); ++i) new_index[i] = new_index[root[i]];

    TexturedMesh out;
    out.textures = mesh.textures;
    out.material = mesh.material;
    std::size_t n_clusters = cluster_root.size();
    out.vertices.resize(n_clusters);
    out.uv0.resize(n_clusters);
    if (mesh.has_uv1()) out.uv1.resize(n_clusters);

    std::vector<double> sx(n_clusters, 0), sy(n_clusters, 0), sz(n_clusters, 0);
    std::vector<std::uint32_t> cnt(n_clusters, 0);
    for (std::uint32_t i = 0; i < mesh.vertices.size(); ++i) {
        std::uint32_t k = new_index[i];
        sx[k] += mesh.vertices[i].x;
        sy[k] += mesh.vertices[i].y;
        sz[k] += mesh.vertices[i].z;
        ++cnt[k];
    }
    for (std::size_t k = 0; k < n_clusters; ++k) {
        out.vertices[k] = {static_cast<float>(sx[k] / cnt[k]),
                           static_cast<float>(sy[k] / cnt[k]),
                           static_cast<float>(sz[k] / cnt[k])};
        out.uv0[k] = mesh.uv0[cluster_root[k]];
        if (mesh.has_uv1()) out.uv1[k] = mesh.uv1[cluster_root[k]];
    }

    MergeStats st;
    st.merged_vertices = mesh.vertices.size() - n_clusters;
    out.triangles.reserve(mesh.triangles.size());
    for (const Tri& t : mesh.triangles) {
        Tri m = {new_index[t[0]], new_index[t[1]], new_index[t[2]]};
        if (m[0] == m[1] || m[1] == m[2] || m[0] == m[2]) {
            ++st.dropped_triangles;
            continue;
        }
        bool touches_weld = !eligible || (*eligible)[t[0]] || (*eligible)[t[1]] ||
                            (*eligible)[t[2]];
        if (touches_weld &&
            remesh_detail::triangle_area(out.vertices[m[0]], out.vertices[m[1]],
                                         out.vertices[m[2]]) < cfg.degenerate_area_epsilon) {
            ++st.dropped_triangles;
            continue;
        }
        out.triangles.push_back(m);
    }
    if (stats) *stats = st;
    return out;
}

}  // namespace dsmscrub
