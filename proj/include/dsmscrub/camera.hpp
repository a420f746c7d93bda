// SPDX-License-Identifier: Apache-2.0
#pragma once

// Orthographic bird's-eye camera and the overlapping patch layout.
// Continuous pixel coordinates run u right (east) and v down (south);
// (0,0) is the north-west mosaic corner and pixel (i,j) spans
// [i,i+1) x [j,j+1) with its sample point at (i+0.5, j+0.5).

#include <cmath>
#include <vector>

#include "dsmscrub/mesh.hpp"

namespace dsmscrub {

/// Linear 16-bit elevation quantization over a fixed z range.
struct HeightCodec {
    double z_min = 0.0;
    double z_max = 1.0;

    double quantum() const { return (z_max - z_min) / 65535.0; }

    std::uint16_t encode(double z) const {
        double t = (z - z_min) / (z_max - z_min);
        t = std::clamp(t, 0.0, 1.0);
        return static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
    double decode(std::uint16_t code) const {
        return z_min + (z_max - z_min) * (code / 65535.0);
    }
};

struct OrthoCamera {
    double origin_x = 0.0;  // world x of the mosaic's north-west corner
    double origin_y = 0.0;  // world y of the mosaic's north-west corner
    double gsd = 1.0;       // meters per pixel
    int mosaic_width = 0;
    int mosaic_height = 0;
    HeightCodec codec;

    void world_to_pixel(double x, double y, double& u, double& v) const {
        u = (x - origin_x) / gsd;
        v = (origin_y - y) / gsd;
    }
    void pixel_to_world(double u, double v, double& x, double& y) const {
        x = origin_x + u * gsd;
        y = origin_y - v * gsd;
    }
};

inline void project_vertex(const OrthoCamera& cam, const Vec3f& vert, double& u, double& v) {
    cam.world_to_pixel(vert.x, vert.y, u, v);
}

/// Camera spanning the bounds with at most one pixel of slack per edge.
/// The codec spans the z range padded by one quantum on either side; a
/// degenerate z range falls back to a 1 m span so encode stays defined.
inline OrthoCamera make_camera(const WorldBounds& bounds, double gsd) {
    if (!(gsd > 0)) throw ConfigError("gsd must be positive");
    if (!(bounds.max_x > bounds.min_x) || !(bounds.max_y > bounds.min_y))
        throw ConfigError("degenerate world bounds");
    OrthoCamera cam;
    cam.gsd = gsd;
    cam.origin_x = bounds.min_x;
    cam.origin_y = bounds.max_y;
    // The 1e-9 snap keeps exact multiples (e.g. 100 m / 0.5 m) from picking
    // up a spurious extra pixel through floating point noise.
    cam.mosaic_width =
        std::max(1, static_cast<int>(std::ceil((bounds.max_x - bounds.min_x) / gsd - 1e-9)));
    cam.mosaic_height =
        std::max(1, static_cast<int>(std::ceil((bounds.max_y - bounds.min_y) / gsd - 1e-9)));

    double z_range = bounds.max_z - bounds.min_z;
    if (z_range < 1e-9) z_range = 1.0;
    double pad = z_range / 65535.0;
    cam.codec = {bounds.min_z - pad, bounds.min_z - pad + z_range + 2 * pad};
    return cam;
}

struct PatchRect {
    int row = 0;
    int col = 0;
    int x0 = 0;  // mosaic-pixel origin
    int y0 = 0;
    int width = 0;
    int height = 0;

    friend bool operator==(const PatchRect&, const PatchRect&) = default;
};

struct PatchGrid {
    int patch_width = 0;   // actual per-patch size (clamped to the mosaic)
    int patch_height = 0;
    double overlap = 0.0;
    int rows = 0;
    int cols = 0;
    std::vector<PatchRect> patches;  // row-major

    const PatchRect& at(int row, int col) const {
        return patches[static_cast<std::size_t>(row) * cols + col];
    }
    int count() const { return rows * cols; }
};

/// Overlapping grid: stride = patch * (1 - overlap); the last row/col is
/// shifted inward so all rects keep full size. A patch larger than the
/// mosaic clamps to the mosaic (single patch on that axis).
inline PatchGrid make_patch_grid(const OrthoCamera& cam, int patch_px, double overlap) {
    if (patch_px < 8) throw ConfigError("patch size must be at least 8 px");
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("overlap must be in [0,1)");

    auto axis = [&](int mosaic, int& patch, int& count, int& stride) {
        patch = std::min(patch_px, mosaic);
        stride = std::max(1, static_cast<int>(std::llround(patch * (1.0 - overlap))));
        count = patch >= mosaic ? 1 : static_cast<int>((mosaic - patch + stride - 1) / stride) + 1;
    };

    PatchGrid grid;
    grid.overlap = overlap;
    int stride_x = 0, stride_y = 0;
    axis(cam.mosaic_width, grid.patch_width, grid.cols, stride_x);
    axis(cam.mosaic_height, grid.patch_height, grid.rows, stride_y);

    grid.patches.reserve(static_cast<std::size_t>(grid.rows) * grid.cols);
    for (int r = 0; r < grid.rows; ++r) {
        int y0 = (r == grid.rows - 1) ? cam.mosaic_height - grid.patch_height : r * stride_y;
        for (int c = 0; c < grid.cols; ++c) {
            int x0 = (c == grid.cols - 1) ? cam.mosaic_width - grid.patch_width : c * stride_x;
            grid.patches.push_back({r, c, x0, y0, grid.patch_width, grid.patch_height});
        }
    }
    return grid;
}

}  // namespace dsmscrub
