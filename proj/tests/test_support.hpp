// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>

#include "dsmscrub/gltf_io.hpp"
#include "dsmscrub/mesh.hpp"

namespace testsup {

/// Unique scratch directory, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                dsmscrub::cat("dsmscrub_test_", ::getpid(), "_", counter.fetch_add(1));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }
    std::string str(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline dsmscrub::RasterU8 make_texture_rgb(int w, int h, std::uint32_t seed = 7) {
    dsmscrub::RasterU8 tex(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            std::uint64_t v = dsmscrub::splitmix64((static_cast<std::uint64_t>(y) << 32) ^ x ^ seed);
            tex.at(x, y, 0) = static_cast<std::uint8_t>(v & 0xff);
            tex.at(x, y, 1) = static_cast<std::uint8_t>((v >> 8) & 0xff);
            tex.at(x, y, 2) = static_cast<std::uint8_t>((v >> 16) & 0xff);
        }
    return tex;
}

/// Unit quad in the xy plane with one texture: 4 vertices, 2 triangles.
inline dsmscrub::TexturedMesh make_quad_mesh(float z = 0.f, float size = 1.f) {
    dsmscrub::TexturedMesh mesh;
    mesh.vertices = {{0, 0, z}, {size, 0, z}, {size, size, z}, {0, size, z}};
    mesh.uv0 = {{0, 1}, {1, 1}, {1, 0}, {0, 0}};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    mesh.textures["base"] = make_texture_rgb(8, 8);
    mesh.material.base_texture = "base";
    return mesh;
}

}  // namespace testsup
