// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "dsmscrub/mesh.hpp"
#include "test_support.hpp"

using namespace dsmscrub;

TEST_CASE("validate_mesh accepts the unit quad") {
    TexturedMesh mesh = testsup::make_quad_mesh();
    REQUIRE_NOTHROW(validate_mesh(mesh));
}

TEST_CASE("validate_mesh rejects out-of-range indices naming the triangle") {
    TexturedMesh mesh = testsup::make_quad_mesh();
    mesh.triangles[1] = {0, 2, 7};
    try {
        validate_mesh(mesh);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("triangle 1") != std::string::npos);
        REQUIRE(msg.find("7") != std::string::npos);
    }
}

TEST_CASE("validate_mesh rejects repeated indices and uv length mismatch") {
    TexturedMesh mesh = testsup::make_quad_mesh();
    mesh.triangles[0] = {0, 0, 1};
    REQUIRE_THROWS_AS(validate_mesh(mesh), ValidationError);

    mesh = testsup::make_quad_mesh();
    mesh.uv0.pop_back();
    REQUIRE_THROWS_AS(validate_mesh(mesh), ValidationError);

    mesh = testsup::make_quad_mesh();
    mesh.uv1 = {{0, 0}};
    REQUIRE_THROWS_AS(validate_mesh(mesh), ValidationError);
}

TEST_CASE("compute_bounds on single vertex and unit cube corners") {
    TexturedMesh mesh;
    mesh.vertices = {{1, 2, 3}};
    mesh.uv0 = {{0, 0}};
    WorldBounds b = compute_bounds(mesh);
    CHECK(b.min_x == 1.0);
    CHECK(b.max_x == 1.0);
    CHECK(b.min_y == 2.0);
    CHECK(b.max_y == 2.0);
    CHECK(b.min_z == 3.0);
    CHECK(b.max_z == 3.0);

    mesh.vertices.clear();
    mesh.uv0.clear();
    for (int i = 0; i < 8; ++i) {
        mesh.vertices.push_back({static_cast<float>(i & 1), static_cast<float>((i >> 1) & 1),
                                 static_cast<float>((i >> 2) & 1)});
        mesh.uv0.push_back({0, 0});
    }
    b = compute_bounds(mesh);
    CHECK(b.min_x == 0.0);
    CHECK(b.max_x == 1.0);
    CHECK(b.min_y == 0.0);
    CHECK(b.max_y == 1.0);
    CHECK(b.min_z == 0.0);
    CHECK(b.max_z == 1.0);
}

TEST_CASE("compute_bounds of empty mesh is an error") {
    TexturedMesh mesh;
    REQUIRE_THROWS_AS(compute_bounds(mesh), ValidationError);
}

TEST_CASE("compute_bounds matches a linear scan on a random cloud") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<float> d(-100.f, 100.f);
    TexturedMesh mesh;
    for (int i = 0; i < 1000; ++i) {
        mesh.vertices.push_back({d(rng), d(rng), d(rng)});
        mesh.uv0.push_back({0, 0});
    }
    WorldBounds b = compute_bounds(mesh);
    double mnx = 1e300, mxx = -1e300, mny = 1e300, mxy = -1e300, mnz = 1e300, mxz = -1e300;
    for (const Vec3f& v : mesh.vertices) {
        mnx = std::min<double>(mnx, v.x);
        mxx = std::max<double>(mxx, v.x);
        mny = std::min<double>(mny, v.y);
        mxy = std::max<double>(mxy, v.y);
        mnz = std::min<double>(mnz, v.z);
        mxz = std::max<double>(mxz, v.z);
    }
    CHECK(b.min_x == mnx);
    CHECK(b.max_x == mxx);
    CHECK(b.min_y == mny);
    CHECK(b.max_y == mxy);
    CHECK(b.min_z == mnz);
    CHECK(b.max_z == mxz);

    // Every vertex is inside; shrinking any bound excludes at least one.
    for (const Vec3f& v : mesh.vertices) {
        CHECK(v.x >= b.min_x);
        CHECK(v.x <= b.max_x);
        CHECK(v.y >= b.min_y);
        CHECK(v.y <= b.max_y);
        CHECK(v.z >= b.min_z);
        CHECK(v.z <= b.max_z);
    }
    int on_min_x = 0;
    for (const Vec3f& v : mesh.vertices)
        if (static_cast<double>(v.x) == b.min_x) ++on_min_x;
    CHECK(on_min_x >= 1);
}

TEST_CASE("validation report is structured and greppable") {
    TexturedMesh mesh = testsup::make_quad_mesh();
    std::string rep = mesh_validation_report(mesh);
    CHECK(rep.find("status: ok") != std::string::npos);
    CHECK(rep.find("vertices: 4") != std::string::npos);
    CHECK(rep.find("triangles: 2") != std::string::npos);

    mesh.triangles[0] = {0, 1, 9};
    rep = mesh_validation_report(mesh);
    CHECK(rep.find("status: invalid") != std::string::npos);
    CHECK(rep.find("error:") != std::string::npos);
}
