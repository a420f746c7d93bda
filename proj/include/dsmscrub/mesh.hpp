// SPDX-License-Identifier: Apache-2.0
#pragma once

// Textured-mesh data model. Coordinates are local meters, x east / y north /
// z up; georeferencing offsets belong in the run manifest, not here.

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "dsmscrub/raster.hpp"

namespace dsmscrub {

struct Material {
    std::string base_texture;        // key into TexturedMesh::textures, empty = none
    std::string inpaint_texture;
    std::string blend_mask_texture;

    friend bool operator==(const Material&, const Material&) = default;
};

/// Indexed triangle mesh with one or two UV sets and named textures.
/// Immutable by convention after load; stages that alter it work on a copy.
struct TexturedMesh {
    std::vector<Vec3f> vertices;
    std::vector<Tri> triangles;
    std::vector<Vec2f> uv0;
    std::vector<Vec2f> uv1;  // empty when absent
    std::map<std::string, RasterU8> textures;
    Material material;

    bool has_uv1() const { return !uv1.empty(); }
};

struct WorldBounds {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    double min_z = 0, max_z = 0;
};

/// Enforces the structural invariants: index ranges, UV set lengths, no
/// degenerate index triples. Throws ValidationError naming the first
/// offending triangle.
inline void validate_mesh(const TexturedMesh& mesh) {
    const std::size_t n = mesh.vertices.size();
    if (mesh.uv0.size() != n)
        throw ValidationError(cat("uv0 count ", mesh.uv0.size(), " != vertex count ", n));
    if (!mesh.uv1.empty() && mesh.uv1.size() != n)
        throw ValidationError(cat("uv1 count ", mesh.uv1.size(), " != vertex count ", n));
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k)
            if (tri[k] >= n)
                throw ValidationError(
                    cat("triangle ", t, " references vertex ", tri[k], " of ", n));
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw ValidationError(cat("triangle ", t, " repeats a vertex index"));
    }
    if (!mesh.material.base_texture.empty() &&
        !mesh.textures.count(mesh.material.base_texture))
        throw ValidationError(cat("material references missing texture '",
                                  mesh.material.base_texture, "'"));
}

inline WorldBounds compute_bounds(const TexturedMesh& mesh) {
    if (mesh.vertices.empty()) throw ValidationError("compute_bounds: empty mesh");
    WorldBounds b;
    b.min_x = b.min_y = b.min_z = std::numeric_limits<double>::infinity();
    b.max_x = b.max_y = b.max_z = -std::numeric_limits<double>::infinity();
    for (const Vec3f& v : mesh.vertices) {
        b.min_x = std::min(b.min_x, static_cast<double>(v.x));
        b.max_x = std::max(b.max_x, static_cast<double>(v.x));
        b.min_y = std::min(b.min_y, static_cast<double>(v.y));
        b.max_y = std::max(b.max_y, static_cast<double>(v.y));
        b.min_z = std::min(b.min_z, static_cast<double>(v.z));
        b.max_z = std::max(b.max_z, static_cast<double>(v.z));
    }
    return b;
}

/// Structured validation report; one line per check so it can be grepped.
inline std::string mesh_validation_report(const TexturedMesh& mesh) {
    std::string status = "ok";
    std::string detail;
    try {
        validate_mesh(mesh);
    } catch (const ValidationError& e) {
        status = "invalid";
        detail = e.what();
    }
    std::string out;
    out += cat("status: ", status, "\n");
    out += cat("vertices: ", mesh.vertices.size(), "\n");
    out += cat("triangles: ", mesh.triangles.size(), "\n");
    out += cat("uv_sets: ", mesh.has_uv1() ? 2 : 1, "\n");
    out += cat("textures: ", mesh.textures.size(), "\n");
    if (!mesh.vertices.empty()) {
        WorldBounds b = compute_bounds(mesh);
        out += cat("bounds_x: [", b.min_x, ", ", b.max_x, "]\n");
        out += cat("bounds_y: [", b.min_y, ", ", b.max_y, "]\n");
        out += cat("bounds_z: [", b.min_z, ", ", b.max_z, "]\n");
    }
    if (!detail.empty()) out += cat("error: ", detail, "\n");
    return out;
}

}  // namespace dsmscrub
