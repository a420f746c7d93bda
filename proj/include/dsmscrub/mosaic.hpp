// SPDX-License-Identifier: Apache-2.0
#pragma once

// Reassembly of per-patch rasters into mosaic space. Where patches overlap,
// each mosaic pixel is owned by the patch whose center is nearest (ties go
// to the lower row, then lower column), which favors patch interiors where
// inpainting context is best. Patch centers form a separable grid, so the
// per-axis nearest center is the joint nearest center.

#include "dsmscrub/camera.hpp"
#include "dsmscrub/raster.hpp"

namespace dsmscrub {

struct PatchOwnership {
    std::vector<int> row_of_y;  // owning grid row per mosaic y
    std::vector<int> col_of_x;  // owning grid col per mosaic x
};

namespace mosaic_detail {

inline std::vector<int> axis_owner(int mosaic_dim, int count, auto center_of, auto origin_of,
                                   int patch_dim) {
    std::vector<int> owner(mosaic_dim, 0);
    for (int p = 0; p < mosaic_dim; ++p) {
        double pc = p + 0.5;
        int best = 0;
        double best_d = std::abs(pc - center_of(0));
        for (int i = 1; i < count; ++i) {
            double d = std::abs(pc - center_of(i));
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        owner[p] = best;
        // Nearest center always contains the pixel when stride <= patch size.
        (void)origin_of;
        (void)patch_dim;
    }
    return owner;
}

}  // namespace mosaic_detail

inline PatchOwnership build_patch_ownership(const PatchGrid& grid, int mosaic_width,
                                            int mosaic_height) {
    PatchOwnership own;
    auto col_center = [&](int c) { return grid.at(0, c).x0 + grid.patch_width / 2.0; };
    auto row_center = [&](int r) { return grid.at(r, 0).y0 + grid.patch_height / 2.0; };
    auto col_origin = [&](int c) { return grid.at(0, c).x0; };
    auto row_origin = [&](int r) { return grid.at(r, 0).y0; };
    own.col_of_x = mosaic_detail::axis_owner(mosaic_width, grid.cols, col_center, col_origin,
                                             grid.patch_width);
    own.row_of_y = mosaic_detail::axis_owner(mosaic_height, grid.rows, row_center, row_origin,
                                             grid.patch_height);
    return own;
}

/// Decoded elevations in meters with per-pixel validity.
struct HeightMosaic {
    int width = 0;
    int height = 0;
    std::vector<float> z;
    BitGrid valid;

    float at(int x, int y) const { return z[static_cast<std::size_t>(y) * width + x]; }
};

/// Stitches inpainted per-patch height rasters (indexed row-major by grid
/// position) into one decoded mosaic. `coverages` may be empty, meaning all
/// pixels carry data.
inline HeightMosaic assemble_height_mosaic(const std::vector<RasterU16>& patches,
                                           const std::vector<BinaryMask>& coverages,
                                           const PatchGrid& grid, const HeightCodec& codec,
                                           int mosaic_width, int mosaic_height) {
    if (patches.size() != static_cast<std::size_t>(grid.count()))
        throw ValidationError(cat("expected ", grid.count(), " height patches, got ",
                                  patches.size()));
    for (int i = 0; i < grid.count(); ++i)
        if (patches[i].empty())
            throw ValidationError(cat("missing height patch (row ", grid.patches[i].row,
                                      ", col ", grid.patches[i].col, ")"));

    PatchOwnership own = build_patch_ownership(grid, mosaic_width, mosaic_height);
    HeightMosaic out;
    out.width = mosaic_width;
    out.height = mosaic_height;
    out.z.assign(static_cast<std::size_t>(mosaic_width) * mosaic_height, 0.f);
    out.valid = BitGrid(mosaic_width, mosaic_height);

    for (int y = 0; y < mosaic_height; ++y) {
        int r = own.row_of_y[y];
        for (int x = 0; x < mosaic_width; ++x) {
            int c = own.col_of_x[x];
            const PatchRect& rect = grid.at(r, c);
            int px = x - rect.x0, py = y - rect.y0;
            std::size_t pidx = static_cast<std::size_t>(r) * grid.cols + c;
            bool ok = coverages.empty() || coverages[pidx].empty() ||
                      coverages[pidx].at(px, py) != 0;
            if (!ok) continue;
            out.z[static_cast<std::size_t>(y) * mosaic_width + x] =
                static_cast<float>(codec.decode(patches[pidx].at(px, py)));
            out.valid.set(x, y, true);
        }
    }
    return out;
}

/// Same ownership rule for the inpainted color patches.
inline RasterU8 assemble_color_mosaic(const std::vector<RasterU8>& patches,
                                      const PatchGrid& grid, int mosaic_width,
                                      int mosaic_height) {
    if (patches.size() != static_cast<std::size_t>(grid.count()))
        throw ValidationError(cat("expected ", grid.count(), " color patches, got ",
                                  patches.size()));
    for (int i = 0; i < grid.count(); ++i)
        if (patches[i].empty())
            throw ValidationError(cat("missing color patch (row ", grid.patches[i].row,
                                      ", col ", grid.patches[i].col, ")"));

    PatchOwnership own = build_patch_ownership(grid, mosaic_width, mosaic_height);
    RasterU8 out(mosaic_width, mosaic_height, 3, 0);
    for (int y = 0; y < mosaic_height; ++y) {
        int r = own.row_of_y[y];
        for (int x = 0; x < mosaic_width; ++x) {
            int c = own.col_of_x[x];
            const PatchRect& rect = grid.at(r, c);
            const RasterU8& src = patches[static_cast<std::size_t>(r) * grid.cols + c];
            for (int ch = 0; ch < 3; ++ch)
                out.at(x, y, ch) = src.at(x - rect.x0, y - rect.y0, src.channels() == 1 ? 0 : ch);
        }
    }
    return out;
}

}  // namespace dsmscrub
