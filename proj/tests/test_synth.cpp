// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "dsmscrub/metrics.hpp"
#include "dsmscrub/synth.hpp"

using namespace dsmscrub;

namespace {

SceneSpec flat_scene(double extent = 10.0) {
    SceneSpec spec;
    spec.extent_x = extent;
    spec.extent_y = extent;
    spec.ground.kind = GroundKind::flat;
    spec.ground.z0 = 0.0;
    return spec;
}

}  // namespace

TEST_CASE("flat ground without occluders: occluded equals clean, masks empty") {
    SceneSpec spec = flat_scene();
    SynthScene scene = generate_scene(spec, 0.5, 16, 0.5);
    CHECK(scene.occluded.vertices == scene.clean.vertices);
    CHECK(scene.occluded.triangles == scene.clean.triangles);
    for (const RasterU8& m : scene.truth_masks)
        for (auto v : m.data()) REQUIRE(v == 0);
}

TEST_CASE("a 4x2 m box at gsd 0.5 marks exactly the footprint pixels") {
    SceneSpec spec = flat_scene(10.0);
    spec.occluders = {{"vehicle", 3.0, 4.0, 7.0, 6.0, 2.0}};
    SynthScene scene = generate_scene(spec, 0.5, 512, 0.5);
    REQUIRE(scene.grid.count() == 1);

    // Oracle: rasterize the footprint quad with the module's own fill rule
    // in mosaic pixel space.
    const OrthoCamera& cam = scene.camera;
    double u0, v0, u1, v1, u2, v2, u3, v3;
    cam.world_to_pixel(3.0, 4.0, u0, v0);
    cam.world_to_pixel(7.0, 4.0, u1, v1);
    cam.world_to_pixel(7.0, 6.0, u2, v2);
    cam.world_to_pixel(3.0, 6.0, u3, v3);
    std::set<std::pair<int, int>> expect;
    auto emit = [&](int x, int y, double, double, double) { expect.insert({x, y}); };
    rasterize_triangle(u0, v0, u1, v1, u2, v2, 0, 0, cam.mosaic_width - 1,
                       cam.mosaic_height - 1, emit);
    rasterize_triangle(u0, v0, u2, v2, u3, v3, 0, 0, cam.mosaic_width - 1,
                       cam.mosaic_height - 1, emit);
    CHECK(expect.size() == 32);  // (4/0.5) x (2/0.5) aligned to pixel borders

    const RasterU8& mask = scene.truth_masks[0];
    std::set<std::pair<int, int>> got;
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            if (mask.at(x, y)) {
                REQUIRE(mask.at(x, y) == 1);  // vehicle id
                got.insert({x, y});
            }
    REQUIRE(got == expect);
}

TEST_CASE("ramp ground renders within one quantum of the analytic surface") {
    SceneSpec spec = flat_scene(8.0);
    spec.ground.kind = GroundKind::ramp;
    spec.ground.z0 = 1.0;
    spec.ground.slope = 0.25;
    SynthScene scene = generate_scene(spec, 0.25, 512, 0.5);
    BevPatch bev = rasterize_patch(scene.clean, scene.camera, scene.grid.patches[0]);
    const double quantum = scene.camera.codec.quantum();
    std::size_t covered = 0;
    for (int y = 0; y < bev.rect.height; ++y)
        for (int x = 0; x < bev.rect.width; ++x) {
            if (!bev.coverage.at(x, y)) continue;
            ++covered;
            double wx, wy;
            scene.camera.pixel_to_world(bev.rect.x0 + x + 0.5, bev.rect.y0 + y + 0.5, wx, wy);
            double expect = 1.0 + 0.25 * wx;
            REQUIRE(std::abs(scene.camera.codec.decode(bev.height.at(x, y)) - expect) <=
                    quantum + 1e-9);
        }
    CHECK(covered > 500);
}

TEST_CASE("generation is deterministic for a fixed spec") {
    SceneSpec spec = flat_scene(6.0);
    spec.texture = TextureKind::noise;
    spec.seed = 42;
    spec.occluders = {{"vessel", 1.0, 1.0, 3.0, 2.0, 1.5}};
    SynthScene a = generate_scene(spec, 0.5, 8, 0.5);
    SynthScene b = generate_scene(spec, 0.5, 8, 0.5);
    CHECK(a.occluded.vertices == b.occluded.vertices);
    CHECK(a.occluded.triangles == b.occluded.triangles);
    CHECK(a.occluded.textures.at("base") == b.occluded.textures.at("base"));
    REQUIRE(a.truth_masks.size() == b.truth_masks.size());
    for (std::size_t i = 0; i < a.truth_masks.size(); ++i)
        REQUIRE(a.truth_masks[i] == b.truth_masks[i]);
}

TEST_CASE("truth mask covers exactly the pixels where heights differ (away from edges)") {
    SceneSpec spec = flat_scene(10.0);
    spec.occluders = {{"vehicle", 2.0, 2.0, 5.0, 4.0, 3.0},
                      {"vessel", 6.5, 6.0, 9.0, 9.0, 2.0}};
    SynthScene scene = generate_scene(spec, 0.5, 512, 0.5);
    const PatchRect& rect = scene.grid.patches[0];
    BevPatch occ = rasterize_patch(scene.occluded, scene.camera, rect);
    BevPatch cln = rasterize_patch(scene.clean, scene.camera, rect);
    const RasterU8& mask = scene.truth_masks[0];

    auto near_mask_edge = [&](int x, int y) {
        bool m = mask.at(x, y) != 0;
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= mask.width() || ny >= mask.height()) return true;
                if ((mask.at(nx, ny) != 0) != m) return true;
            }
        return false;
    };

    for (int y = 0; y < rect.height; ++y)
        for (int x = 0; x < rect.width; ++x) {
            if (!occ.coverage.at(x, y) || !cln.coverage.at(x, y)) continue;
            int diff = std::abs(static_cast<int>(occ.height.at(x, y)) -
                                static_cast<int>(cln.height.at(x, y)));
            if (diff > 1) REQUIRE(mask.at(x, y) != 0);  // mask superset of changes
            if (!near_mask_edge(x, y))
                REQUIRE((mask.at(x, y) != 0) == (diff > 1));  // equality off the boundary band
        }
}

TEST_CASE("scene validation rejects bad specs") {
    SceneSpec spec = flat_scene(5.0);
    spec.occluders = {{"vehicle", 4.0, 4.0, 6.0, 4.5, 1.0}};  // exceeds extent
    REQUIRE_THROWS_AS(generate_scene(spec, 0.5, 16, 0.5), ConfigError);
    spec = flat_scene(5.0);
    spec.occluders = {{"crane", 1, 1, 2, 2, 1.0}};  // unknown class
    REQUIRE_THROWS_AS(generate_scene(spec, 0.5, 16, 0.5), ConfigError);
    spec = flat_scene(5.0);
    REQUIRE_THROWS_AS(generate_scene(spec, 1e-6, 16, 0.5), ConfigError);  // > 1e8 vertices
}

TEST_CASE("boxes carry high-frequency texture, ground stays smooth") {
    SceneSpec spec = flat_scene(12.0);
    spec.texture = TextureKind::checker;
    spec.texture_period = 1000.0;  // effectively constant ground
    spec.occluders = {{"vessel", 3.0, 3.0, 9.0, 9.0, 3.0}};
    SynthScene scene = generate_scene(spec, 0.25, 512, 0.5);
    BevPatch bev = rasterize_patch(scene.occluded, scene.camera, scene.grid.patches[0]);
    const RasterU8& mask = scene.truth_masks[0];

    // Luminance variance inside the box footprint should dwarf the ground's.
    auto variance = [&](bool masked) {
        double sum = 0, sum2 = 0, n = 0;
        for (int y = 0; y < mask.height(); ++y)
            for (int x = 0; x < mask.width(); ++x) {
                if (!bev.coverage.at(x, y)) continue;
                if ((mask.at(x, y) != 0) != masked) continue;
                double l = luminance(bev.color.at(x, y, 0), bev.color.at(x, y, 1),
                                     bev.color.at(x, y, 2));
                sum += l;
                sum2 += l * l;
                ++n;
            }
        return n > 0 ? (sum2 / n - (sum / n) * (sum / n)) : 0.0;
    };
    CHECK(variance(true) > 100.0);
    CHECK(variance(false) < 1.0);
}
