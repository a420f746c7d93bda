// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dsmscrub/rasterize.hpp"
#include "test_support.hpp"

using namespace dsmscrub;

namespace {

TexturedMesh two_stacked_quads() {
    // Lower quad z=2 covers [0,8]x[0,8]; upper quad z=5 covers [4,12]x[0,8].
    TexturedMesh mesh;
    auto quad = [&](float x0, float y0, float x1, float y1, float z) {
        std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        mesh.vertices.insert(mesh.vertices.end(),
                             {{x0, y0, z}, {x1, y0, z}, {x1, y1, z}, {x0, y1, z}});
        for (int i = 0; i < 4; ++i) mesh.uv0.push_back({0.5f, 0.5f});
        mesh.triangles.push_back({base, base + 1, base + 2});
        mesh.triangles.push_back({base, base + 2, base + 3});
    };
    quad(0, 0, 8, 8, 2.f);
    quad(4, 0, 12, 8, 5.f);
    return mesh;
}

OrthoCamera camera_over(const TexturedMesh& mesh, double gsd) {
    return make_camera(compute_bounds(mesh), gsd);
}

}  // namespace

TEST_CASE("z-buffer takes the maximum height where quads overlap") {
    TexturedMesh mesh = two_stacked_quads();
    OrthoCamera cam = camera_over(mesh, 1.0);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch bev = rasterize_patch(mesh, cam, rect);

    // Pixel centered at world (6.5, 4.5) lies under both quads.
    double u, v;
    cam.world_to_pixel(6.5, 4.5, u, v);
    int px = static_cast<int>(u), py = static_cast<int>(v);
    REQUIRE(bev.coverage.at(px, py) == 1);
    CHECK(cam.codec.decode(bev.height.at(px, py)) == Catch::Approx(5.0).margin(0.001));
    CHECK(bev.tri_id.at(px, py) >= 2);  // one of the upper quad's triangles

    // Pixel only under the lower quad.
    cam.world_to_pixel(1.5, 4.5, u, v);
    CHECK(cam.codec.decode(bev.height.at(static_cast<int>(u), static_cast<int>(v))) ==
          Catch::Approx(2.0).margin(0.001));
    CHECK(bev.tri_id.at(static_cast<int>(u), static_cast<int>(v)) <= 1);
}

TEST_CASE("tilted plane rasterizes within one codec quantum of the analytic value") {
    // z = 0.01 x + 2 over a 20x20 m quad.
    TexturedMesh mesh;
    auto zf = [](float x) { return 0.01f * x + 2.f; };
    mesh.vertices = {{0, 0, zf(0)}, {20, 0, zf(20)}, {20, 20, zf(20)}, {0, 20, zf(0)}};
    mesh.uv0 = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    OrthoCamera cam = camera_over(mesh, 0.25);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch bev = rasterize_patch(mesh, cam, rect);

    const double quantum = cam.codec.quantum();
    std::size_t covered = 0;
    for (int y = 0; y < rect.height; ++y)
        for (int x = 0; x < rect.width; ++x) {
            if (!bev.coverage.at(x, y)) continue;
            ++covered;
            double wx, wy;
            cam.pixel_to_world(x + 0.5, y + 0.5, wx, wy);
            double expect = 0.01 * wx + 2.0;
            double got = cam.codec.decode(bev.height.at(x, y));
            REQUIRE(std::abs(got - expect) <= quantum);
        }
    CHECK(covered > 5000);
}

TEST_CASE("mesh entirely outside the rect leaves all pixels no-data") {
    TexturedMesh mesh = testsup::make_quad_mesh(1.f, 2.f);  // covers [0,2]^2
    OrthoCamera cam;
    cam.origin_x = 0;
    cam.origin_y = 100;
    cam.gsd = 0.5;
    cam.mosaic_width = 200;
    cam.mosaic_height = 200;
    cam.codec = {0, 10};
    PatchRect rect{0, 0, 100, 100, 50, 50};  // world x in [50,75], far from the quad
    BevPatch bev = rasterize_patch(mesh, cam, rect);
    for (auto t : bev.tri_id.data()) REQUIRE(t == kNoTriangle);
    for (auto c : bev.coverage.data()) REQUIRE(c == 0);
    for (auto h : bev.height.data()) REQUIRE(h == 0);
}

TEST_CASE("coverage invariant: sentinel iff no coverage iff no-data height") {
    TexturedMesh mesh = two_stacked_quads();
    OrthoCamera cam = camera_over(mesh, 0.5);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch bev = rasterize_patch(mesh, cam, rect);
    for (std::size_t i = 0; i < bev.coverage.data().size(); ++i) {
        bool covered = bev.coverage.data()[i] != 0;
        CHECK((bev.tri_id.data()[i] == kNoTriangle) == !covered);
    }
}

TEST_CASE("triangle submission order changes nothing (generic positions)") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<float> dp(0.f, 10.f);
    std::uniform_real_distribution<float> dz(0.f, 5.f);
    TexturedMesh mesh;
    for (int i = 0; i < 60; ++i) {
        std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        for (int k = 0; k < 3; ++k) {
            mesh.vertices.push_back({dp(rng), dp(rng), dz(rng)});
            mesh.uv0.push_back({0.5f, 0.5f});
        }
        mesh.triangles.push_back({base, base + 1, base + 2});
    }
    OrthoCamera cam = camera_over(mesh, 0.25);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch a = rasterize_patch(mesh, cam, rect);

    // Reverse the triangle list; vertex indices stay valid. Map ids back.
    TexturedMesh rev = mesh;
    std::reverse(rev.triangles.begin(), rev.triangles.end());
    BevPatch b = rasterize_patch(rev, cam, rect);
    const std::uint32_t n = static_cast<std::uint32_t>(mesh.triangles.size());
    for (std::size_t i = 0; i < a.tri_id.data().size(); ++i) {
        REQUIRE(a.height.data()[i] == b.height.data()[i]);
        std::uint32_t ta = a.tri_id.data()[i];
        std::uint32_t tb = b.tri_id.data()[i];
        REQUIRE((ta == kNoTriangle) == (tb == kNoTriangle));
        if (ta != kNoTriangle) REQUIRE(ta == n - 1 - tb);
    }
}

TEST_CASE("exact z ties break toward the lower triangle index") {
    TexturedMesh mesh = testsup::make_quad_mesh(3.f, 6.f);
    // Duplicate the quad's triangles; duplicates lose every tie.
    mesh.triangles.push_back(mesh.triangles[0]);
    mesh.triangles.push_back(mesh.triangles[1]);
    OrthoCamera cam = camera_over(mesh, 0.5);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch bev = rasterize_patch(mesh, cam, rect);
    for (auto t : bev.tri_id.data())
        if (t != kNoTriangle) REQUIRE(t <= 1);
}

TEST_CASE("grid-adjacent patches agree bit-exactly on overlap pixels") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<float> dp(0.f, 30.f);
    std::uniform_real_distribution<float> dz(0.f, 8.f);
    TexturedMesh mesh;
    for (int i = 0; i < 80; ++i) {
        std::uint32_t base = static_cast<std::uint32_t>(mesh.vertices.size());
        for (int k = 0; k < 3; ++k) {
            mesh.vertices.push_back({dp(rng), dp(rng), dz(rng)});
            mesh.uv0.push_back({dp(rng) / 30.f, dp(rng) / 30.f});
        }
        mesh.triangles.push_back({base, base + 1, base + 2});
    }
    OrthoCamera cam = camera_over(mesh, 0.25);
    PatchGrid grid = make_patch_grid(cam, 64, 0.5);
    REQUIRE(grid.cols >= 2);

    BevPatch p00 = rasterize_patch(mesh, cam, grid.at(0, 0));
    BevPatch p01 = rasterize_patch(mesh, cam, grid.at(0, 1));
    const PatchRect& a = grid.at(0, 0);
    const PatchRect& b = grid.at(0, 1);
    int x_lo = std::max(a.x0, b.x0), x_hi = std::min(a.x0 + a.width, b.x0 + b.width);
    int y_lo = std::max(a.y0, b.y0), y_hi = std::min(a.y0 + a.height, b.y0 + b.height);
    REQUIRE(x_lo < x_hi);
    std::size_t shared = 0;
    for (int y = y_lo; y < y_hi; ++y)
        for (int x = x_lo; x < x_hi; ++x) {
            ++shared;
            REQUIRE(p00.height.at(x - a.x0, y - a.y0) == p01.height.at(x - b.x0, y - b.y0));
            REQUIRE(p00.tri_id.at(x - a.x0, y - a.y0) == p01.tri_id.at(x - b.x0, y - b.y0));
            for (int c = 0; c < 3; ++c)
                REQUIRE(p00.color.at(x - a.x0, y - a.y0, c) ==
                        p01.color.at(x - b.x0, y - b.y0, c));
        }
    CHECK(shared > 0);
}

TEST_CASE("top-left rule: a shared edge rasterizes each pixel exactly once") {
    // Quad [0,4]x[0,4] split along the diagonal; pixel centers on the
    // diagonal must belong to exactly one triangle.
    std::vector<std::vector<int>> hits(4, std::vector<int>(4, 0));
    auto emit = [&](int x, int y, double, double, double) { hits[y][x] += 1; };
    rasterize_triangle(0, 0, 4, 0, 4, 4, 0, 0, 3, 3, emit);
    rasterize_triangle(0, 0, 4, 4, 0, 4, 0, 0, 3, 3, emit);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) REQUIRE(hits[y][x] == 1);
}

TEST_CASE("top-left rule: random shared-edge pairs never double-cover") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> d(0.0, 16.0);
    for (int trial = 0; trial < 200; ++trial) {
        double ax = d(rng), ay = d(rng), bx = d(rng), by = d(rng);
        double cx = d(rng), cy = d(rng), dx2 = d(rng), dy2 = d(rng);
        // Triangles (a,b,c) and (b,a,d) share edge ab.
        std::vector<std::vector<int>> hits(16, std::vector<int>(16, 0));
        auto emit = [&](int x, int y, double, double, double) { hits[y][x] += 1; };
        rasterize_triangle(ax, ay, bx, by, cx, cy, 0, 0, 15, 15, emit);
        rasterize_triangle(bx, by, ax, ay, dx2, dy2, 0, 0, 15, 15, emit);
        // Opposite sides of ab -> interiors disjoint; only edge pixels could
        // double-count if the fill rule were wrong.
        double side_c = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
        double side_d = (bx - ax) * (dy2 - ay) - (by - ay) * (dx2 - ax);
        if (side_c * side_d < 0)
            for (int y = 0; y < 16; ++y)
                for (int x = 0; x < 16; ++x) REQUIRE(hits[y][x] <= 1);
    }
}

TEST_CASE("color sampling follows the winning triangle's uv0") {
    // One quad textured with a two-tone texture: left half dark, right bright.
    TexturedMesh mesh = testsup::make_quad_mesh(0.f, 8.f);
    RasterU8 tex(8, 8, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int c = 0; c < 3; ++c) tex.at(x, y, c) = x < 4 ? 10 : 250;
    mesh.textures["base"] = tex;
    OrthoCamera cam = camera_over(mesh, 0.5);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch bev = rasterize_patch(mesh, cam, rect);
    double u, v;
    cam.world_to_pixel(1.0, 4.0, u, v);  // uv0.x = 1/8 -> dark half
    CHECK(bev.color.at(static_cast<int>(u), static_cast<int>(v), 0) < 60);
    cam.world_to_pixel(7.0, 4.0, u, v);  // uv0.x = 7/8 -> bright half
    CHECK(bev.color.at(static_cast<int>(u), static_cast<int>(v), 0) > 200);
}

TEST_CASE("mesh without a base texture renders mid-gray") {
    TexturedMesh mesh = testsup::make_quad_mesh(0.f, 4.f);
    mesh.textures.clear();
    mesh.material.base_texture.clear();
    OrthoCamera cam = camera_over(mesh, 0.5);
    PatchRect rect{0, 0, 0, 0, cam.mosaic_width, cam.mosaic_height};
    BevPatch bev = rasterize_patch(mesh, cam, rect);
    bool any = false;
    for (int y = 0; y < rect.height; ++y)
        for (int x = 0; x < rect.width; ++x)
            if (bev.coverage.at(x, y)) {
                any = true;
                CHECK(bev.color.at(x, y, 0) == 128);
            }
    REQUIRE(any);
}
