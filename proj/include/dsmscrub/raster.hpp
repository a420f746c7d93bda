// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dsmscrub/core.hpp"

namespace dsmscrub {

/// Row-major interleaved pixel grid. Channel count is dynamic (1 or 3 in
/// practice) so one template covers color, height, id and mask rasters.
template <typename T>
class Raster {
public:
    Raster() = default;
    Raster(int width, int height, int channels, T fill = T{})
        : width_(width),
          height_(height),
          channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {
        if (width < 0 || height < 0 || channels < 1)
            throw ValidationError("invalid raster shape");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    bool empty() const { return data_.empty(); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width_) * height_; }

    T& at(int x, int y, int c = 0) {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }
    const T& at(int x, int y, int c = 0) const {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
    }

    T* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_ * channels_; }
    const T* row(int y) const {
        return data_.data() + static_cast<std::size_t>(y) * width_ * channels_;
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Raster& other) const {
        return width_ == other.width_ && height_ == other.height_ &&
               channels_ == other.channels_;
    }

    friend bool operator==(const Raster& a, const Raster& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ &&
               a.channels_ == b.channels_ && a.data_ == b.data_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<T> data_;
};

using RasterU8 = Raster<std::uint8_t>;
using RasterU16 = Raster<std::uint16_t>;
using RasterU32 = Raster<std::uint32_t>;
using RasterF32 = Raster<float>;

/// Binary mask as a byte raster holding 0/1.
using BinaryMask = RasterU8;

inline std::size_t mask_count(const BinaryMask& m) {
    std::size_t n = 0;
    for (auto v : m.data()) n += (v != 0);
    return n;
}

inline bool mask_any(const BinaryMask& m) {
    for (auto v : m.data())
        if (v) return true;
    return false;
}

/// Packed one-bit-per-pixel grid for mosaic-scale fields.
class BitGrid {
public:
    BitGrid() = default;
    BitGrid(int width, int height)
        : width_(width),
          height_(height),
          words_((static_cast<std::size_t>(width) * height + 63) / 64, 0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    bool empty() const { return words_.empty(); }

    bool get(int x, int y) const {
        std::size_t i = static_cast<std::size_t>(y) * width_ + x;
        return (words_[i >> 6] >> (i & 63)) & 1u;
    }
    void set(int x, int y, bool v) {
        std::size_t i = static_cast<std::size_t>(y) * width_ + x;
        std::uint64_t bit = 1ull << (i & 63);
        if (v)
            words_[i >> 6] |= bit;
        else
            words_[i >> 6] &= ~bit;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (auto w : words_) n += static_cast<std::size_t>(__builtin_popcountll(w));
        return n;
    }
    bool any() const {
        for (auto w : words_)
            if (w) return true;
        return false;
    }

    void or_with(const BitGrid& other) {
        if (width_ != other.width_ || height_ != other.height_)
            throw ValidationError("bit grid dimension mismatch");
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    }

    friend bool operator==(const BitGrid& a, const BitGrid& b) {
        return a.width_ == b.width_ && a.height_ == b.height_ && a.words_ == b.words_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Bilinear sample with pixel centers at (i+0.5, j+0.5) and edge clamping.
/// (u, v) are continuous pixel coordinates; the sampled lattice is the grid
/// of pixel centers.
template <typename T>
inline double bilinear_at(const Raster<T>& img, double u, double v, int c = 0) {
    double fu = u - 0.5, fv = v - 0.5;
    int x0 = static_cast<int>(std::floor(fu));
    int y0 = static_cast<int>(std::floor(fv));
    double ax = fu - x0, ay = fv - y0;
    int x1 = x0 + 1, y1 = y0 + 1;
    x0 = std::clamp(x0, 0, img.width() - 1);
    x1 = std::clamp(x1, 0, img.width() - 1);
    y0 = std::clamp(y0, 0, img.height() - 1);
    y1 = std::clamp(y1, 0, img.height() - 1);
    double v00 = img.at(x0, y0, c), v10 = img.at(x1, y0, c);
    double v01 = img.at(x0, y1, c), v11 = img.at(x1, y1, c);
    return (v00 * (1 - ax) + v10 * ax) * (1 - ay) + (v01 * (1 - ax) + v11 * ax) * ay;
}

}  // namespace dsmscrub
