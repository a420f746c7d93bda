// SPDX-License-Identifier: Apache-2.0
#pragma once

// Occluder-mask handling: class-id ingestion, dilation, mosaic merge and
// re-extraction, LOD downsampling. Masks are exchanged as 8-bit class-id
// PNGs (0 = background); any detector that writes that format can feed the
// pipeline. Merging is a logical OR in mosaic pixel space, so patch
// processing order never matters.

#include <map>
#include <set>
#include <string>

#include "dsmscrub/camera.hpp"
#include "dsmscrub/image_io.hpp"
#include "dsmscrub/raster.hpp"

namespace dsmscrub {

struct ClassTable {
    std::map<std::uint8_t, std::string> names;  // class id (1..255) -> name
    std::set<std::string> selected;

    void validate() const {
        if (names.count(0)) throw ConfigError("class id 0 is reserved for background");
        for (const std::string& s : selected) {
            bool found = false;
            for (const auto& [id, name] : names) found |= (name == s);
            if (!found) throw ConfigError(cat("selected class '", s, "' not in class table"));
        }
    }

    bool is_selected(std::uint8_t id) const {
        auto it = names.find(id);
        return it != names.end() && selected.count(it->second) > 0;
    }
};

inline ClassTable default_class_table() {
    ClassTable t;
    t.names = {{1, "vehicle"}, {2, "vessel"}};
    t.selected = {"vehicle", "vessel"};
    return t;
}

using MaskMosaic = BitGrid;

/// Class-id raster -> binary mask of the selected classes. Unknown ids are
/// rejected so typos in the class table surface immediately.
inline BinaryMask ingest_patch_mask(const RasterU8& class_ids, const ClassTable& classes,
                                    const std::string& what = "mask") {
    if (class_ids.channels() != 1)
        throw ValidationError(cat(what, ": class-id raster must be single channel"));
    std::set<int> unknown;
    BinaryMask out(class_ids.width(), class_ids.height(), 1, 0);
    for (std::size_t i = 0; i < class_ids.data().size(); ++i) {
        std::uint8_t id = class_ids.data()[i];
        if (id == 0) continue;
        if (!classes.names.count(id)) {
            unknown.insert(id);
            continue;
        }
        out.data()[i] = classes.is_selected(id) ? 1 : 0;
    }
    if (!unknown.empty()) {
        std::string ids;
        for (int id : unknown) ids += cat(ids.empty() ? "" : ", ", id);
        throw ValidationError(cat(what, ": unknown class ids: ", ids));
    }
    return out;
}

inline BinaryMask ingest_patch_mask(const std::string& path, const ClassTable& classes,
                                    int expect_width, int expect_height) {
    RasterU8 ids = load_png8(path);
    if (ids.width() != expect_width || ids.height() != expect_height)
        throw ValidationError(cat(path, ": mask is ", ids.width(), "x", ids.height(),
                                  ", patch is ", expect_width, "x", expect_height));
    return ingest_patch_mask(ids, classes, path);
}

/// Binary dilation with a square kernel, separable (rows then columns).
inline BinaryMask dilate(const BinaryMask& mask, int kernel_px) {
    if (kernel_px < 1 || kernel_px % 2 == 0)
        throw ConfigError(cat("dilation kernel must be odd and >= 1, got ", kernel_px));
    if (kernel_px == 1) return mask;
    const int r = kernel_px / 2;
    const int w = mask.width(), h = mask.height();

    BinaryMask tmp(w, h, 1, 0);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = mask.row(y);
        std::uint8_t* dst = tmp.row(y);
        for (int x = 0; x < w; ++x) {
            if (!src[x]) continue;
            int a = std::max(0, x - r), b = std::min(w - 1, x + r);
            for (int i = a; i <= b; ++i) dst[i] = 1;
        }
    }
    BinaryMask out(w, h, 1, 0);
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* src = tmp.row(y);
        int a = std::max(0, y - r), b = std::min(h - 1, y + r);
        for (int x = 0; x < w; ++x) {
            if (!src[x]) continue;
            for (int j = a; j <= b; ++j) out.at(x, j) = 1;
        }
    }
    return out;
}

inline void merge_into_mosaic(MaskMosaic& mosaic, const BinaryMask& patch_mask,
                              const PatchRect& rect) {
    if (patch_mask.width() != rect.width || patch_mask.height() != rect.height)
        throw ValidationError("patch mask does not match rect dimensions");
    if (rect.x0 < 0 || rect.y0 < 0 || rect.x0 + rect.width > mosaic.width() ||
        rect.y0 + rect.height > mosaic.height())
        throw ValidationError("patch rect outside mosaic");
    for (int y = 0; y < rect.height; ++y) {
        const std::uint8_t* src = patch_mask.row(y);
        for (int x = 0; x < rect.width; ++x)
            if (src[x]) mosaic.set(rect.x0 + x, rect.y0 + y, true);
    }
}

inline BinaryMask extract_patch_mask(const MaskMosaic& mosaic, const PatchRect& rect) {
    if (rect.x0 < 0 || rect.y0 < 0 || rect.x0 + rect.width > mosaic.width() ||
        rect.y0 + rect.height > mosaic.height())
        throw ValidationError("patch rect outside mosaic");
    BinaryMask out(rect.width, rect.height, 1, 0);
    for (int y = 0; y < rect.height; ++y)
        for (int x = 0; x < rect.width; ++x)
            out.at(x, y) = mosaic.get(rect.x0 + x, rect.y0 + y) ? 1 : 0;
    return out;
}

/// OR-pooled downsampling for lower LODs; never loses an occluder pixel.
/// Output dimensions are ceil(dim / factor); partial border blocks pool
/// whatever source pixels exist.
inline BinaryMask downsample_mask(const BinaryMask& mask, int factor) {
    if (factor < 2 || (factor & (factor - 1)) != 0)
        throw ConfigError(cat("downsample factor must be a power of two >= 2, got ", factor));
    int ow = (mask.width() + factor - 1) / factor;
    int oh = (mask.height() + factor - 1) / factor;
    BinaryMask out(ow, oh, 1, 0);
    for (int y = 0; y < mask.height(); ++y) {
        const std::uint8_t* src = mask.row(y);
        std::uint8_t* dst = out.row(y / factor);
        for (int x = 0; x < mask.width(); ++x)
            if (src[x]) dst[x / factor] = 1;
    }
    return out;
}

inline void save_mask_binary(const std::string& path, const BinaryMask& mask) {
    RasterU8 img(mask.width(), mask.height(), 1, 0);
    for (std::size_t i = 0; i < mask.data().size(); ++i)
        img.data()[i] = mask.data()[i] ? 255 : 0;
    save_png8(path, img);
}

inline BinaryMask load_mask_binary(const std::string& path) {
    RasterU8 img = load_png8(path);
    if (img.channels() != 1) throw ParseError(cat(path, ": binary mask must be grayscale"));
    BinaryMask out(img.width(), img.height(), 1, 0);
    for (std::size_t i = 0; i < img.data().size(); ++i) out.data()[i] = img.data()[i] ? 1 : 0;
    return out;
}

}  // namespace dsmscrub
