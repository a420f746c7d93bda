// SPDX-License-Identifier: Apache-2.0
#pragma once

// Synthetic textured scenes with known ground truth: a parametric ground
// surface, axis-aligned box occluders, and exact class-id masks derived from
// the renderer's own top-surface ownership. Scenes are written in the same
// formats as real inputs, so the pipeline cannot tell them apart.

#include "dsmscrub/mask.hpp"
#include "dsmscrub/rasterize.hpp"

namespace dsmscrub {

enum class GroundKind { flat, ramp, sine };

struct GroundSpec {
    GroundKind kind = GroundKind::flat;
    double z0 = 0.0;
    double slope = 0.05;       // ramp: z = z0 + slope * x
    double amplitude = 1.0;    // sine
    double wavelength = 10.0;  // sine

    double z_at(double x, double y) const {
        switch (kind) {
            case GroundKind::flat: return z0;
            case GroundKind::ramp: return z0 + slope * x;
            case GroundKind::sine:
                return z0 + amplitude * std::sin(2.0 * M_PI * x / wavelength) *
                                std::cos(2.0 * M_PI * y / wavelength);
        }
        return z0;
    }
};

enum class TextureKind { checker, stripes, noise };

struct OccluderSpec {
    std::string class_name;
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;  // footprint, meters
    double height = 2.0;
};

struct SceneSpec {
    double extent_x = 20.0;
    double extent_y = 20.0;
    GroundSpec ground;
    std::vector<OccluderSpec> occluders;
    TextureKind texture = TextureKind::checker;
    double texture_period = 2.0;  // meters, checker/stripes
    std::uint64_t seed = 0;

    void validate() const {
        if (!(extent_x > 0) || !(extent_y > 0)) throw ConfigError("scene extent must be positive");
        for (const OccluderSpec& o : occluders) {
            if (!(o.height > 0)) throw ConfigError("occluder height must be positive");
            if (o.min_x < 0 || o.min_y < 0 || o.max_x > extent_x || o.max_y > extent_y ||
                o.min_x >= o.max_x || o.min_y >= o.max_y)
                throw ConfigError("occluder footprint outside scene extent");
        }
    }
};

struct SynthScene {
    TexturedMesh occluded;
    TexturedMesh clean;
    OrthoCamera camera;
    PatchGrid grid;
    std::vector<RasterU8> truth_masks;  // class-id rasters, one per grid patch
    ClassTable classes;
    std::size_t ground_triangles = 0;
    std::size_t triangles_per_box = 0;
};

namespace synth_detail {

inline void pattern_color(const SceneSpec& spec, double x, double y, bool occluder_region,
                          std::uint8_t rgb[3]) {
    if (occluder_region) {
        // Occluders always get per-texel noise: high-frequency content that
        // inpainting is expected to remove.
        std::uint64_t h = splitmix64(splitmix64(static_cast<std::uint64_t>(x * 97.0) ^
                                                (spec.seed + 1)) ^
                                     static_cast<std::uint64_t>(y * 131.0));
        rgb[0] = static_cast<std::uint8_t>(h & 0xff);
        rgb[1] = static_cast<std::uint8_t>((h >> 8) & 0xff);
        rgb[2] = static_cast<std::uint8_t>((h >> 16) & 0xff);
        return;
    }
    switch (spec.texture) {
        case TextureKind::checker: {
            long cell = static_cast<long>(std::floor(x / spec.texture_period)) +
                        static_cast<long>(std::floor(y / spec.texture_period));
            bool a = (cell % 2) == 0;
            rgb[0] = a ? 168 : 96;
            rgb[1] = a ? 172 : 104;
            rgb[2] = a ? 160 : 112;
            break;
        }
        case TextureKind::stripes: {
            bool a = (static_cast<long>(std::floor(x / spec.texture_period)) % 2) == 0;
            rgb[0] = a ? 180 : 70;
            rgb[1] = a ? 150 : 90;
            rgb[2] = a ? 120 : 130;
            break;
        }
        case TextureKind::noise: {
            std::uint64_t h = splitmix64(splitmix64(static_cast<std::uint64_t>(x * 97.0) ^
                                                    spec.seed) ^
                                         static_cast<std::uint64_t>(y * 131.0));
            rgb[0] = static_cast<std::uint8_t>(h & 0xff);
            rgb[1] = static_cast<std::uint8_t>((h >> 8) & 0xff);
            rgb[2] = static_cast<std::uint8_t>((h >> 16) & 0xff);
            break;
        }
    }
}

// Ground maps into the top half of the texture, boxes into the bottom half,
// so box surfaces carry their own (noise) pattern.
inline RasterU8 make_texture(const SceneSpec& spec, double gsd) {
    int tw = std::clamp(static_cast<int>(std::llround(spec.extent_x / gsd)), 32, 1024);
    int th_half = std::clamp(static_cast<int>(std::llround(spec.extent_y / gsd)), 32, 1024);
    RasterU8 tex(tw, th_half * 2, 3);
    for (int ty = 0; ty < th_half * 2; ++ty)
        for (int tx = 0; tx < tw; ++tx) {
            bool occluder_region = ty >= th_half;
            double wx = (tx + 0.5) / tw * spec.extent_x;
            double wy = (occluder_region ? ty - th_half + 0.5 : ty + 0.5) / th_half *
                        spec.extent_y;
            std::uint8_t rgb[3] = {0, 0, 0};
            pattern_color(spec, wx, wy, occluder_region, rgb);
            tex.at(tx, ty, 0) = rgb[0];
            tex.at(tx, ty, 1) = rgb[1];
            tex.at(tx, ty, 2) = rgb[2];
        }
    return tex;
}

inline Vec2f ground_uv(const SceneSpec& spec, double x, double y) {
    return {static_cast<float>(x / spec.extent_x),
            static_cast<float>(0.5 * (y / spec.extent_y))};
}

inline Vec2f box_uv(const SceneSpec& spec, double x, double y) {
    return {static_cast<float>(x / spec.extent_x),
            static_cast<float>(0.5 + 0.5 * (y / spec.extent_y))};
}

}  // namespace synth_detail

/// Builds the clean ground mesh, the occluded mesh (ground plus one box per
/// occluder), and per-patch class-id truth masks marking exactly the pixels
/// whose top surface is an occluder.
inline SynthScene generate_scene(const SceneSpec& spec, double gsd, int patch_px,
                                 double overlap) {
    spec.validate();
    if (!(gsd > 0)) throw ConfigError("gsd must be positive");

    SynthScene scene;
    scene.classes = default_class_table();
    std::map<std::string, std::uint8_t> class_id;
    for (const auto& [id, name] : scene.classes.names) class_id[name] = id;
    for (const OccluderSpec& o : spec.occluders)
        if (!class_id.count(o.class_name))
            throw ConfigError(cat("occluder class '", o.class_name, "' not in class table"));

    const long steps_x = std::max<long>(1, std::llround(spec.extent_x / gsd));
    const long steps_y = std::max<long>(1, std::llround(spec.extent_y / gsd));
    if ((steps_x + 1) * (steps_y + 1) > 100'000'000L)
        throw ConfigError("scene would exceed 1e8 vertices; raise gsd or shrink extent");
    const double dx = spec.extent_x / static_cast<double>(steps_x);
    const double dy = spec.extent_y / static_cast<double>(steps_y);

    TexturedMesh& clean = scene.clean;
    for (long j = 0; j <= steps_y; ++j)
        for (long i = 0; i <= steps_x; ++i) {
            double x = i * dx, y = j * dy;
            clean.vertices.push_back({static_cast<float>(x), static_cast<float>(y),
                                      static_cast<float>(spec.ground.z_at(x, y))});
            clean.uv0.push_back(synth_detail::ground_uv(spec, x, y));
        }
    auto vid = [&](long i, long j) { return static_cast<std::uint32_t>(j * (steps_x + 1) + i); };
    for (long j = 0; j < steps_y; ++j)
        for (long i = 0; i < steps_x; ++i) {
            clean.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i, j + 1)});
            clean.triangles.push_back({vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }
    clean.textures["base"] = synth_detail::make_texture(spec, gsd);
    clean.material.base_texture = "base";

    scene.ground_triangles = clean.triangles.size();
    scene.triangles_per_box = 10;

    TexturedMesh& occluded = scene.occluded;
    occluded = clean;
    for (const OccluderSpec& o : spec.occluders) {
        double corners[4][2] = {{o.min_x, o.min_y}, {o.max_x, o.min_y},
                                {o.max_x, o.max_y}, {o.min_x, o.max_y}};
        double top = -std::numeric_limits<double>::infinity();
        for (auto& c : corners) top = std::max(top, spec.ground.z_at(c[0], c[1]));
        top += o.height;

        auto add_vert = [&](double x, double y, double z) {
            occluded.vertices.push_back(
                {static_cast<float>(x), static_cast<float>(y), static_cast<float>(z)});
            occluded.uv0.push_back(synth_detail::box_uv(spec, x, y));
            return static_cast<std::uint32_t>(occluded.vertices.size() - 1);
        };
        // Four vertical side quads (degenerate in BEV) then the top face.
        for (int s = 0; s < 4; ++s) {
            const double* a = corners[s];
            const double* b = corners[(s + 1) % 4];
            std::uint32_t v0 = add_vert(a[0], a[1], spec.ground.z_at(a[0], a[1]));
            std::uint32_t v1 = add_vert(b[0], b[1], spec.ground.z_at(b[0], b[1]));
            std::uint32_t v2 = add_vert(b[0], b[1], top);
            std::uint32_t v3 = add_vert(a[0], a[1], top);
            occluded.triangles.push_back({v0, v1, v2});
            occluded.triangles.push_back({v0, v2, v3});
        }
        std::uint32_t t0 = add_vert(corners[0][0], corners[0][1], top);
        std::uint32_t t1 = add_vert(corners[1][0], corners[1][1], top);
        std::uint32_t t2 = add_vert(corners[2][0], corners[2][1], top);
        std::uint32_t t3 = add_vert(corners[3][0], corners[3][1], top);
        occluded.triangles.push_back({t0, t1, t2});
        occluded.triangles.push_back({t0, t2, t3});
    }
    validate_mesh(occluded);

    scene.camera = make_camera(compute_bounds(occluded), gsd);
    scene.grid = make_patch_grid(scene.camera, patch_px, overlap);

    scene.truth_masks.reserve(scene.grid.patches.size());
    for (const PatchRect& rect : scene.grid.patches) {
        BevPatch bev = rasterize_patch(occluded, scene.camera, rect);
        RasterU8 ids(rect.width, rect.height, 1, 0);
        for (std::size_t i = 0; i < ids.data().size(); ++i) {
            std::uint32_t t = bev.tri_id.data()[i];
            if (t == kNoTriangle || t < scene.ground_triangles) continue;
            std::size_t box = (t - scene.ground_triangles) / scene.triangles_per_box;
            ids.data()[i] = class_id.at(spec.occluders[box].class_name);
        }
        scene.truth_masks.push_back(std::move(ids));
    }
    return scene;
}

}  // namespace dsmscrub
