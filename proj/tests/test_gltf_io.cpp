// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "dsmscrub/gltf_io.hpp"
#include "test_support.hpp"

using namespace dsmscrub;

namespace {

void check_geometry_equal(const TexturedMesh& a, const TexturedMesh& b) {
    REQUIRE(a.vertices.size() == b.vertices.size());
    REQUIRE(a.triangles.size() == b.triangles.size());
    REQUIRE(a.uv0.size() == b.uv0.size());
    REQUIRE(a.uv1.size() == b.uv1.size());
    CHECK(a.vertices == b.vertices);    // float bit-equality via operator==
    CHECK(a.triangles == b.triangles);
    CHECK(a.uv0 == b.uv0);
    CHECK(a.uv1 == b.uv1);
}

}  // namespace

TEST_CASE("unit quad saves and reloads with expected counts") {
    testsup::TempDir dir;
    TexturedMesh mesh = testsup::make_quad_mesh();
    save_mesh(mesh, dir.str("quad.gltf"));
    TexturedMesh loaded = load_mesh(dir.str("quad.gltf"));
    CHECK(loaded.vertices.size() == 4);
    CHECK(loaded.triangles.size() == 2);
    CHECK(loaded.textures.size() == 1);
    check_geometry_equal(mesh, loaded);
    CHECK(loaded.textures.at("base") == mesh.textures.at("base"));
    CHECK(loaded.material.base_texture == "base");
}

TEST_CASE("load -> save -> load is the identity on geometry") {
    testsup::TempDir dir;
    TexturedMesh mesh = testsup::make_quad_mesh();
    // Awkward float values must survive bit-exactly.
    mesh.vertices[1] = {0.1f, 1e-8f, -3.7e5f};
    mesh.uv0[2] = {0.333333343f, 0.99999994f};
    save_mesh(mesh, dir.str("a.gltf"));
    TexturedMesh first = load_mesh(dir.str("a.gltf"));
    save_mesh(first, dir.str("b.gltf"));
    TexturedMesh second = load_mesh(dir.str("b.gltf"));
    check_geometry_equal(first, second);
    check_geometry_equal(mesh, second);
}

TEST_CASE("uv1 and extra textures round-trip") {
    testsup::TempDir dir;
    TexturedMesh mesh = testsup::make_quad_mesh();
    mesh.uv1 = {{0, 0}, {0.5f, 0}, {0.5f, 0.5f}, {0, 0.5f}};
    mesh.textures["inpaint"] = testsup::make_texture_rgb(4, 4, 9);
    RasterU8 blend(4, 4, 1, 0);
    blend.at(1, 1) = 255;
    mesh.textures["blend"] = blend;
    mesh.material.inpaint_texture = "inpaint";
    mesh.material.blend_mask_texture = "blend";

    save_mesh(mesh, dir.str("m.gltf"));
    TexturedMesh loaded = load_mesh(dir.str("m.gltf"));
    check_geometry_equal(mesh, loaded);
    CHECK(loaded.material.inpaint_texture == "inpaint");
    CHECK(loaded.material.blend_mask_texture == "blend");
    CHECK(loaded.textures.at("blend") == blend);
}

TEST_CASE("large synthetic terrain round-trips bit-exactly") {
    testsup::TempDir dir;
    TexturedMesh mesh;
    const int n = 224;  // (n-1)^2 * 2 ~ 1e5 triangles
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> dz(-5.f, 40.f);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            mesh.vertices.push_back({i * 0.25f, j * 0.25f, dz(rng)});
            mesh.uv0.push_back({i / float(n - 1), j / float(n - 1)});
        }
    for (int j = 0; j + 1 < n; ++j)
        for (int i = 0; i + 1 < n; ++i) {
            std::uint32_t a = j * n + i, b = j * n + i + 1, c = (j + 1) * n + i,
                          d = (j + 1) * n + i + 1;
            mesh.triangles.push_back({a, b, c});
            mesh.triangles.push_back({b, d, c});
        }
    REQUIRE(mesh.triangles.size() >= 99000);
    save_mesh(mesh, dir.str("terrain.gltf"));
    TexturedMesh loaded = load_mesh(dir.str("terrain.gltf"));
    check_geometry_equal(mesh, loaded);
}

TEST_CASE("malformed file reports a parse error with byte offset") {
    testsup::TempDir dir;
    {
        std::ofstream f(dir.str("bad.gltf"));
        f << "{ \"asset\": { \"version\": \"2.0\" }, oops";
    }
    try {
        load_mesh(dir.str("bad.gltf"));
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("byte") != std::string::npos);
    }
}

TEST_CASE("file with out-of-range index fails validation naming the triangle") {
    testsup::TempDir dir;
    TexturedMesh mesh = testsup::make_quad_mesh();
    save_mesh(mesh, dir.str("q.gltf"));
    // Corrupt one index in the .bin: triangle 1, last corner -> 7.
    std::fstream bin(dir.str("q.bin"), std::ios::in | std::ios::out | std::ios::binary);
    REQUIRE(bin.good());
    bin.seekp(-4, std::ios::end);
    std::uint32_t bogus = 7;
    bin.write(reinterpret_cast<const char*>(&bogus), 4);
    bin.close();
    try {
        load_mesh(dir.str("q.gltf"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("triangle 1") != std::string::npos);
    }
}

TEST_CASE("missing file is an I/O error, unwritable path too") {
    testsup::TempDir dir;
    REQUIRE_THROWS_AS(load_mesh(dir.str("nope.gltf")), IoError);
    TexturedMesh mesh = testsup::make_quad_mesh();
    REQUIRE_THROWS_AS(save_mesh(mesh, dir.str("no_dir/quad.gltf")), IoError);
}

TEST_CASE("embedded base64 buffers and images load") {
    testsup::TempDir dir;
    // Hand-built minimal embedded file: one triangle, no texture.
    std::string bin;
    auto f32 = [&](float v) {
        char b[4];
        std::memcpy(b, &v, 4);
        bin.append(b, 4);
    };
    for (float v : {0.f, 0.f, 0.f, 1.f, 0.f, 0.f, 0.f, 1.f, 0.f}) f32(v);
    for (float v : {0.f, 0.f, 1.f, 0.f, 0.f, 1.f}) f32(v);
    for (std::uint32_t v : {0u, 1u, 2u}) {
        char b[4];
        std::memcpy(b, &v, 4);
        bin.append(b, 4);
    }
    nlohmann::json doc = {
        {"asset", {{"version", "2.0"}}},
        {"scene", 0},
        {"scenes", {{{"nodes", {0}}}}},
        {"nodes", {{{"mesh", 0}}}},
        {"buffers",
         {{{"uri", cat("data:application/octet-stream;base64,",
                       base64_encode(bin.data(), bin.size()))},
           {"byteLength", bin.size()}}}},
        {"bufferViews",
         {{{"buffer", 0}, {"byteOffset", 0}, {"byteLength", 36}},
          {{"buffer", 0}, {"byteOffset", 36}, {"byteLength", 24}},
          {{"buffer", 0}, {"byteOffset", 60}, {"byteLength", 12}}}},
        {"accessors",
         {{{"bufferView", 0}, {"componentType", 5126}, {"count", 3}, {"type", "VEC3"}},
          {{"bufferView", 1}, {"componentType", 5126}, {"count", 3}, {"type", "VEC2"}},
          {{"bufferView", 2}, {"componentType", 5125}, {"count", 3}, {"type", "SCALAR"}}}},
        {"meshes",
         {{{"primitives",
            {{{"attributes", {{"POSITION", 0}, {"TEXCOORD_0", 1}}}, {"indices", 2}}}}}}}};
    {
        std::ofstream f(dir.str("embedded.gltf"));
        f << doc.dump();
    }
    TexturedMesh mesh = load_mesh(dir.str("embedded.gltf"));
    CHECK(mesh.vertices.size() == 3);
    CHECK(mesh.triangles.size() == 1);
}
