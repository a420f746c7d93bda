// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dsmscrub/mosaic.hpp"

using namespace dsmscrub;

namespace {

PatchGrid grid_of(int mosaic_w, int mosaic_h, int patch, double overlap) {
    OrthoCamera cam;
    cam.mosaic_width = mosaic_w;
    cam.mosaic_height = mosaic_h;
    return make_patch_grid(cam, patch, overlap);
}

/// Brute-force ownership oracle: nearest patch center with ties to the
/// lower row, then lower column.
const PatchRect& owner_oracle(const PatchGrid& grid, int x, int y) {
    const PatchRect* best = nullptr;
    double best_d = 0;
    for (const PatchRect& r : grid.patches) {
        double cx = r.x0 + r.width / 2.0, cy = r.y0 + r.height / 2.0;
        double d = (x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy);
        if (!best || d < best_d ||
            (d == best_d && (r.row < best->row || (r.row == best->row && r.col < best->col)))) {
            best = &r;
            best_d = d;
        }
    }
    return *best;
}

}  // namespace

TEST_CASE("single-patch grid: mosaic equals the decoded patch") {
    PatchGrid grid = grid_of(32, 32, 32, 0.5);
    REQUIRE(grid.count() == 1);
    HeightCodec codec{0, 10};
    std::mt19937 rng(2);
    RasterU16 patch(32, 32, 1);
    for (auto& v : patch.data()) v = static_cast<std::uint16_t>(rng() % 65536);
    HeightMosaic hm = assemble_height_mosaic({patch}, {}, grid, codec, 32, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            REQUIRE(hm.valid.get(x, y));
            REQUIRE(hm.at(x, y) == static_cast<float>(codec.decode(patch.at(x, y))));
        }
}

TEST_CASE("identical overlapping patches: mosaic equals either") {
    PatchGrid grid = grid_of(48, 32, 32, 0.5);
    REQUIRE(grid.cols == 2);
    REQUIRE(grid.rows == 1);
    HeightCodec codec{0, 10};
    RasterU16 content(32, 32, 1);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) content.at(x, y) = static_cast<std::uint16_t>(x * 100 + y);
    // Patch values must agree on the overlap in mosaic space.
    RasterU16 left(32, 32, 1), right(32, 32, 1);
    const PatchRect& lr = grid.at(0, 0);
    const PatchRect& rr = grid.at(0, 1);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            left.at(x, y) = static_cast<std::uint16_t>((x + lr.x0) * 9 + y);
            right.at(x, y) = static_cast<std::uint16_t>((x + rr.x0) * 9 + y);
        }
    HeightMosaic hm = assemble_height_mosaic({left, right}, {}, grid, codec, 48, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 48; ++x)
            REQUIRE(hm.at(x, y) == static_cast<float>(codec.decode(
                                       static_cast<std::uint16_t>(x * 9 + y))));
}

TEST_CASE("differing patches: pixel ownership is nearest patch center") {
    PatchGrid grid = grid_of(80, 48, 32, 0.5);
    HeightCodec codec{0, 100};
    std::vector<RasterU16> patches;
    for (int i = 0; i < grid.count(); ++i)
        patches.push_back(RasterU16(32, 32, 1, static_cast<std::uint16_t>(1000 + i * 500)));
    HeightMosaic hm = assemble_height_mosaic(patches, {}, grid, codec, 80, 48);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 80; ++x) {
            const PatchRect& own = owner_oracle(grid, x, y);
            int idx = own.row * grid.cols + own.col;
            REQUIRE(hm.at(x, y) ==
                    static_cast<float>(codec.decode(static_cast<std::uint16_t>(1000 + idx * 500))));
            // The owner must actually contain the pixel.
            REQUIRE(x >= own.x0);
            REQUIRE(x < own.x0 + own.width);
            REQUIRE(y >= own.y0);
            REQUIRE(y < own.y0 + own.height);
        }
}

TEST_CASE("missing patch raster is an error naming the grid position") {
    PatchGrid grid = grid_of(48, 32, 32, 0.5);
    HeightCodec codec{0, 10};
    std::vector<RasterU16> patches(grid.count());
    patches[0] = RasterU16(32, 32, 1, 5);
    try {
        assemble_height_mosaic(patches, {}, grid, codec, 48, 32);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        CHECK(msg.find("row 0") != std::string::npos);
        CHECK(msg.find("col 1") != std::string::npos);
    }
}

TEST_CASE("coverage gaps carry over into mosaic validity") {
    PatchGrid grid = grid_of(32, 32, 32, 0.0);
    HeightCodec codec{0, 10};
    RasterU16 patch(32, 32, 1, 100);
    BinaryMask cov(32, 32, 1, 1);
    cov.at(3, 4) = 0;
    HeightMosaic hm = assemble_height_mosaic({patch}, {cov}, grid, codec, 32, 32);
    CHECK(!hm.valid.get(3, 4));
    CHECK(hm.valid.get(0, 0));
}

TEST_CASE("color mosaic uses the same ownership rule") {
    PatchGrid grid = grid_of(48, 32, 32, 0.5);
    std::vector<RasterU8> patches;
    for (int i = 0; i < grid.count(); ++i)
        patches.push_back(RasterU8(32, 32, 3, static_cast<std::uint8_t>(40 + i * 60)));
    RasterU8 mosaic = assemble_color_mosaic(patches, grid, 48, 32);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 48; ++x) {
            const PatchRect& own = owner_oracle(grid, x, y);
            int idx = own.row * grid.cols + own.col;
            REQUIRE(mosaic.at(x, y, 0) == static_cast<std::uint8_t>(40 + idx * 60));
        }
}
