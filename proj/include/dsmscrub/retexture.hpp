// SPDX-License-Identifier: Apache-2.0
#pragma once

// Makes the inpainted color visible on the mesh. Default: a second UV set
// (planar BEV projection) plus an inpaint texture and a hard blend mask,
// with the shading contract
//     final = mix(base_tex(uv0), inpaint_tex(uv1), blend(uv1) / 255)
// Alternative: resample the original texture in place so masked texels take
// the inpainted color and no second UV set is needed.

#include "dsmscrub/mask.hpp"
#include "dsmscrub/mosaic.hpp"
#include "dsmscrub/rasterize.hpp"

namespace dsmscrub {

struct RetextureOptions {
    int max_texture_side = 8192;  // inpaint/blend textures are downscaled to fit
    int feather_px = 0;           // 0 = hard mask; >0 = linear ramp outside the mask
};

struct RetextureStats {
    std::size_t uv1_clamped = 0;        // vertices projecting outside the mosaic
    std::size_t skipped_triangles = 0;  // zero-UV-area triangles (resample mode)
    std::size_t rewritten_texels = 0;
};

namespace retex_detail {

inline RasterU8 downscale_bilinear(const RasterU8& src, int max_side) {
    int side = std::max(src.width(), src.height());
    if (side <= max_side) return src;
    double scale = static_cast<double>(max_side) / side;
    int w = std::max(1, static_cast<int>(std::lround(src.width() * scale)));
    int h = std::max(1, static_cast<int>(std::lround(src.height() * scale)));
    RasterU8 out(w, h, src.channels());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < src.channels(); ++c) {
                double sx = (x + 0.5) / w * src.width();
                double sy = (y + 0.5) / h * src.height();
                out.at(x, y, c) = static_cast<std::uint8_t>(
                    std::clamp<long>(std::lround(bilinear_at(src, sx, sy, c)), 0, 255));
            }
    return out;
}

/// Max-pooled mask downscale keeps the blend hard (0/255 only).
inline RasterU8 downscale_mask(const RasterU8& src, int max_side) {
    int side = std::max(src.width(), src.height());
    if (side <= max_side) return src;
    double scale = static_cast<double>(max_side) / side;
    int w = std::max(1, static_cast<int>(std::lround(src.width() * scale)));
    int h = std::max(1, static_cast<int>(std::lround(src.height() * scale)));
    RasterU8 out(w, h, 1, 0);
    for (int y = 0; y < src.height(); ++y)
        for (int x = 0; x < src.width(); ++x)
            if (src.at(x, y)) {
                int ox = std::min(w - 1, static_cast<int>(x * scale));
                int oy = std::min(h - 1, static_cast<int>(y * scale));
                out.at(ox, oy) = 255;
            }
    return out;
}

/// L1 distance transform (two-pass) used for the optional feather ramp.
inline std::vector<int> l1_distance(const MaskMosaic& mask) {
    const int w = mask.width(), h = mask.height();
    const int inf = w + h + 2;
    std::vector<int> d(static_cast<std::size_t>(w) * h, inf);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (mask.get(x, y)) {
                d[i] = 0;
                continue;
            }
            if (x > 0) d[i] = std::min(d[i], d[i - 1] + 1);
            if (y > 0) d[i] = std::min(d[i], d[i - w] + 1);
        }
    for (int y = h - 1; y >= 0; --y)
        for (int x = w - 1; x >= 0; --x) {
            std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (x + 1 < w) d[i] = std::min(d[i], d[i + 1] + 1);
            if (y + 1 < h) d[i] = std::min(d[i], d[i + w] + 1);
        }
    return d;
}

}  // namespace retex_detail

/// Attaches uv1 (planar BEV coordinates), the inpaint texture and the blend
/// mask. Vertices projecting outside the mosaic clamp to the edge and are
/// counted in stats for the manifest.
inline TexturedMesh build_blend_layer(const TexturedMesh& mesh, const OrthoCamera& cam,
                                      const RasterU8& color_mosaic, const MaskMosaic& mask,
                                      const RetextureOptions& opts = {},
                                      RetextureStats* stats = nullptr) {
    if (color_mosaic.width() != cam.mosaic_width || color_mosaic.height() != cam.mosaic_height ||
        mask.width() != cam.mosaic_width || mask.height() != cam.mosaic_height)
        throw ValidationError("build_blend_layer: mosaic/camera dimension mismatch");

    TexturedMesh out = mesh;
    RetextureStats st;
    out.uv1.resize(out.vertices.size());
    for (std::size_t i = 0; i < out.vertices.size(); ++i) {
        double u, v;
        project_vertex(cam, out.vertices[i], u, v);
        double tu = u / cam.mosaic_width;
        double tv = v / cam.mosaic_height;
        if (tu < 0 || tu > 1 || tv < 0 || tv > 1) ++st.uv1_clamped;
        out.uv1[i] = {static_cast<float>(std::clamp(tu, 0.0, 1.0)),
                      static_cast<float>(std::clamp(tv, 0.0, 1.0))};
    }

    RasterU8 blend(mask.width(), mask.height(), 1, 0);
    if (opts.feather_px <= 0) {
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x)
                if (mask.get(x, y)) blend.at(x, y) = 255;
    } else {
        std::vector<int> dist = retex_detail::l1_distance(mask);
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                int d = dist[static_cast<std::size_t>(y) * mask.width() + x];
                double t = 1.0 - static_cast<double>(d) / (opts.feather_px + 1);
                blend.at(x, y) = static_cast<std::uint8_t>(
                    std::clamp<long>(std::lround(255.0 * t), 0, 255));
            }
    }

    out.textures["inpaint"] = retex_detail::downscale_bilinear(color_mosaic, opts.max_texture_side);
    out.textures["blend"] = opts.feather_px <= 0
                                ? retex_detail::downscale_mask(blend, opts.max_texture_side)
                                : retex_detail::downscale_bilinear(blend, opts.max_texture_side);
    out.material.inpaint_texture = "inpaint";
    out.material.blend_mask_texture = "blend";
    if (stats) *stats = st;
    return out;
}

/// Rewrites the base texture in place: every texel covered in UV space whose
/// world point falls in the mask takes a bilinear sample of the inpainted
/// mosaic. Unmasked texels stay bit-identical; the output mesh has a single
/// texture and no uv1.
inline TexturedMesh resample_texture(const TexturedMesh& mesh, const OrthoCamera& cam,
                                     const RasterU8& color_mosaic, const MaskMosaic& mask,
                                     RetextureStats* stats = nullptr) {
    if (mesh.material.base_texture.empty())
        throw ValidationError("resample_texture: mesh has no base texture");
    if (color_mosaic.width() != cam.mosaic_width || color_mosaic.height() != cam.mosaic_height ||
        mask.width() != cam.mosaic_width || mask.height() != cam.mosaic_height)
        throw ValidationError("resample_texture: mosaic/camera dimension mismatch");

    TexturedMesh out = mesh;
    out.uv1.clear();
    out.material.inpaint_texture.clear();
    out.material.blend_mask_texture.clear();
    RasterU8& tex = out.textures.at(out.material.base_texture);
    const int tw = tex.width(), th = tex.height();

    RetextureStats st;
    for (const Tri& tri : mesh.triangles) {
        // Texel-space positions of the triangle's UV corners.
        double u0 = mesh.uv0[tri[0]].u * tw, v0 = mesh.uv0[tri[0]].v * th;
        double u1 = mesh.uv0[tri[1]].u * tw, v1 = mesh.uv0[tri[1]].v * th;
        double u2 = mesh.uv0[tri[2]].u * tw, v2 = mesh.uv0[tri[2]].v * th;
        if (rast_detail::edge(u0, v0, u1, v1, u2, v2) == 0.0) {
            ++st.skipped_triangles;
            continue;
        }
        const Vec3f& a = mesh.vertices[tri[0]];
        const Vec3f& b = mesh.vertices[tri[1]];
        const Vec3f& c = mesh.vertices[tri[2]];
        rasterize_triangle(u0, v0, u1, v1, u2, v2, 0, 0, tw - 1, th - 1,
                           [&](int ix, int iy, double b0, double b1, double b2) {
                               double wx = b0 * a.x + b1 * b.x + b2 * c.x;
                               double wy = b0 * a.y + b1 * b.y + b2 * c.y;
                               double mu, mv;
                               cam.world_to_pixel(wx, wy, mu, mv);
                               int px = static_cast<int>(std::floor(mu));
                               int py = static_cast<int>(std::floor(mv));
                               if (px < 0 || px >= mask.width() || py < 0 ||
                                   py >= mask.height())
                                   return;
                               if (!mask.get(px, py)) return;
                               for (int ch = 0; ch < tex.channels(); ++ch) {
                                   double s = bilinear_at(color_mosaic, mu, mv,
                                                          tex.channels() == 1 ? 0 : ch);
                                   tex.at(ix, iy, ch) = static_cast<std::uint8_t>(
                                       std::clamp<long>(std::lround(s), 0, 255));
                               }
                               ++st.rewritten_texels;
                           });
    }
    if (stats) *stats = st;
    return out;
}

}  // namespace dsmscrub
