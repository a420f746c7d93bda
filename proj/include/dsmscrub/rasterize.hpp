// SPDX-License-Identifier: Apache-2.0
#pragma once

// Software rasterization of the mesh into per-patch color / height /
// triangle-id rasters. Coverage ties are resolved by a top-left fill rule so
// shared triangle edges rasterize each pixel exactly once; z ties break
// toward the lower triangle index. Edge functions are evaluated directly at
// absolute mosaic coordinates, which makes overlapping patches bit-exact on
// shared pixels.

#include <limits>

#include "dsmscrub/camera.hpp"
#include "dsmscrub/raster.hpp"

namespace dsmscrub {

constexpr std::uint32_t kNoTriangle = 0xFFFFFFFFu;

namespace rast_detail {

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// With v down and the triangle oriented so its signed area is positive, the
// interior lies on the positive side of each directed edge. A pixel center
// exactly on an edge counts as covered only for top edges (horizontal,
// pointing +u) and left edges (pointing -v).
inline bool edge_accepts(double w, double ax, double ay, double bx, double by) {
    if (w > 0) return true;
    if (w < 0) return false;
    return (ay == by && bx > ax) || (by < ay);
}

}  // namespace rast_detail

/// Scans every pixel whose center falls inside triangle (p0,p1,p2), limited
/// to the inclusive pixel-index window [x0,x1]x[y0,y1]. Vertices are
/// continuous coordinates in the same space as the pixel grid (centers at
/// +0.5). Emits (ix, iy, b0, b1, b2) with barycentrics in the original
/// vertex order. Degenerate (zero-area) triangles emit nothing.
template <typename F>
inline void rasterize_triangle(double u0, double v0, double u1, double v1, double u2,
                               double v2, int x0, int y0, int x1, int y1, F&& emit) {
    double area2 = rast_detail::edge(u0, v0, u1, v1, u2, v2);
    bool swapped = false;
    if (area2 == 0.0) return;
    if (area2 < 0.0) {
        std::swap(u1, u2);
        std::swap(v1, v2);
        area2 = -area2;
        swapped = true;
    }

    double lo_u = std::min({u0, u1, u2}), hi_u = std::max({u0, u1, u2});
    double lo_v = std::min({v0, v1, v2}), hi_v = std::max({v0, v1, v2});
    int ix0 = std::max(x0, static_cast<int>(std::ceil(lo_u - 0.5)));
    int ix1 = std::min(x1, static_cast<int>(std::floor(hi_u - 0.5)));
    int iy0 = std::max(y0, static_cast<int>(std::ceil(lo_v - 0.5)));
    int iy1 = std::min(y1, static_cast<int>(std::floor(hi_v - 0.5)));

    for (int iy = iy0; iy <= iy1; ++iy) {
        double cy = iy + 0.5;
        for (int ix = ix0; ix <= ix1; ++ix) {
            double cx = ix + 0.5;
            double w0 = rast_detail::edge(u1, v1, u2, v2, cx, cy);
            double w1 = rast_detail::edge(u2, v2, u0, v0, cx, cy);
            double w2 = rast_detail::edge(u0, v0, u1, v1, cx, cy);
            if (!rast_detail::edge_accepts(w0, u1, v1, u2, v2) ||
                !rast_detail::edge_accepts(w1, u2, v2, u0, v0) ||
                !rast_detail::edge_accepts(w2, u0, v0, u1, v1))
                continue;
            double b0 = w0 / area2, b1 = w1 / area2, b2 = w2 / area2;
            if (swapped) std::swap(b1, b2);
            emit(ix, iy, b0, b1, b2);
        }
    }
}

struct BevPatch {
    PatchRect rect;
    RasterU8 color;     // 3 channels; (0,0,0) where uncovered
    RasterU16 height;   // codec-encoded; 0 where uncovered
    RasterU32 tri_id;   // kNoTriangle where uncovered
    BinaryMask coverage;
};

namespace rast_detail {

inline void sample_base_texture(const RasterU8* tex, double tu, double tv,
                                std::uint8_t out[3]) {
    if (!tex || tex->empty()) {
        out[0] = out[1] = out[2] = 128;
        return;
    }
    double px = tu * tex->width();
    double py = tv * tex->height();
    for (int c = 0; c < 3; ++c) {
        int ch = tex->channels() == 1 ? 0 : c;
        double v = bilinear_at(*tex, px, py, ch);
        out[c] = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
    }
}

}  // namespace rast_detail

/// Renders the top surface of the mesh over one patch rect: per pixel the
/// triangle with maximum interpolated z wins, color comes from the winner's
/// base texture via interpolated uv0 with bilinear filtering.
inline BevPatch rasterize_patch(const TexturedMesh& mesh, const OrthoCamera& cam,
                                const PatchRect& rect) {
    BevPatch out;
    out.rect = rect;
    out.color = RasterU8(rect.width, rect.height, 3, 0);
    out.height = RasterU16(rect.width, rect.height, 1, 0);
    out.tri_id = RasterU32(rect.width, rect.height, 1, kNoTriangle);
    out.coverage = BinaryMask(rect.width, rect.height, 1, 0);

    std::vector<double> zbuf(static_cast<std::size_t>(rect.width) * rect.height,
                             -std::numeric_limits<double>::infinity());

    const int x1 = rect.x0 + rect.width - 1;
    const int y1 = rect.y0 + rect.height - 1;

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        const Vec3f& a = mesh.vertices[tri[0]];
        const Vec3f& b = mesh.vertices[tri[1]];
        const Vec3f& c = mesh.vertices[tri[2]];
        double u0, v0, u1, v1, u2, v2;
        cam.world_to_pixel(a.x, a.y, u0, v0);
        cam.world_to_pixel(b.x, b.y, u1, v1);
        cam.world_to_pixel(c.x, c.y, u2, v2);
        if (std::max({u0, u1, u2}) < rect.x0 || std::min({u0, u1, u2}) > x1 + 1 ||
            std::max({v0, v1, v2}) < rect.y0 || std::min({v0, v1, v2}) > y1 + 1)
            continue;

        rasterize_triangle(
            u0, v0, u1, v1, u2, v2, rect.x0, rect.y0, x1, y1,
            [&](int ix, int iy, double b0, double b1, double b2) {
                double z = b0 * a.z + b1 * b.z + b2 * c.z;
                std::size_t i = static_cast<std::size_t>(iy - rect.y0) * rect.width +
                                (ix - rect.x0);
                std::uint32_t cur = out.tri_id.data()[i];
                if (z > zbuf[i] || (z == zbuf[i] && static_cast<std::uint32_t>(t) < cur)) {
                    zbuf[i] = z;
                    out.tri_id.data()[i] = static_cast<std::uint32_t>(t);
                }
            });
    }

    const RasterU8* tex = nullptr;
    if (!mesh.material.base_texture.empty()) {
        auto it = mesh.textures.find(mesh.material.base_texture);
        if (it != mesh.textures.end()) tex = &it->second;
    }

    // Second pass: resolve attributes of each pixel's winning triangle.
    for (int iy = 0; iy < rect.height; ++iy) {
        for (int ix = 0; ix < rect.width; ++ix) {
            std::size_t i = static_cast<std::size_t>(iy) * rect.width + ix;
            std::uint32_t t = out.tri_id.data()[i];
            if (t == kNoTriangle) continue;
            out.coverage.data()[i] = 1;
            out.height.data()[i] = cam.codec.encode(zbuf[i]);

            const Tri& tri = mesh.triangles[t];
            double u0, v0, u1, v1, u2, v2;
            cam.world_to_pixel(mesh.vertices[tri[0]].x, mesh.vertices[tri[0]].y, u0, v0);
            cam.world_to_pixel(mesh.vertices[tri[1]].x, mesh.vertices[tri[1]].y, u1, v1);
            cam.world_to_pixel(mesh.vertices[tri[2]].x, mesh.vertices[tri[2]].y, u2, v2);
            double area2 = rast_detail::edge(u0, v0, u1, v1, u2, v2);
            double cx = rect.x0 + ix + 0.5, cy = rect.y0 + iy + 0.5;
            double b0 = rast_detail::edge(u1, v1, u2, v2, cx, cy) / area2;
            double b1 = rast_detail::edge(u2, v2, u0, v0, cx, cy) / area2;
            double b2 = rast_detail::edge(u0, v0, u1, v1, cx, cy) / area2;
            double tu = b0 * mesh.uv0[tri[0]].u + b1 * mesh.uv0[tri[1]].u +
                        b2 * mesh.uv0[tri[2]].u;
            double tv = b0 * mesh.uv0[tri[0]].v + b1 * mesh.uv0[tri[1]].v +
                        b2 * mesh.uv0[tri[2]].v;
            std::uint8_t rgb[3];
            rast_detail::sample_base_texture(tex, tu, tv, rgb);
            out.color.at(ix, iy, 0) = rgb[0];
            out.color.at(ix, iy, 1) = rgb[1];
            out.color.at(ix, iy, 2) = rgb[2];
        }
    }
    return out;
}

inline std::string patch_filename(int row, int col, const std::string& kind,
                                  const std::string& ext) {
    return cat("patch_", row, "_", col, "_", kind, ".", ext);
}

}  // namespace dsmscrub
