// SPDX-License-Identifier: Apache-2.0
#pragma once

// PNG input/output (libpng) plus the raw little-endian triangle-id grid
// format. All pipeline rasters move through these functions, so encoding
// choices here (8-bit gray/RGB, 16-bit gray) are the interchange contract.

#include <png.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dsmscrub/raster.hpp"

namespace dsmscrub {

struct PngHeader {
    int width = 0;
    int height = 0;
    int bit_depth = 0;
    int channels = 0;
};

namespace detail {

struct PngReadCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    const std::string* mem = nullptr;  // set when reading from memory
    std::size_t mem_pos = 0;

    ~PngReadCtx() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

struct PngWriteCtx {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;

    ~PngWriteCtx() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
        if (fp) std::fclose(fp);
    }
};

inline void png_mem_read(png_structp png, png_bytep out, png_size_t n) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (ctx->mem_pos + n > ctx->mem->size()) png_error(png, "unexpected end of data");
    std::memcpy(out, ctx->mem->data() + ctx->mem_pos, n);
    ctx->mem_pos += n;
}

inline void begin_read(PngReadCtx& ctx, const std::string& what) {
    ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
    if (!ctx.png || !ctx.info) throw IoError(cat("libpng init failed for ", what));
}

}  // namespace detail

/// Reads width/height/depth/channels without decoding pixel data.
inline PngHeader probe_png(const std::string& path) {
    detail::PngReadCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError(cat("cannot open PNG: ", path));
    detail::begin_read(ctx, path);
    if (setjmp(png_jmpbuf(ctx.png))) throw ParseError(cat("malformed PNG: ", path));
    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);
    PngHeader h;
    h.width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    h.height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    h.bit_depth = png_get_bit_depth(ctx.png, ctx.info);
    h.channels = png_get_channels(ctx.png, ctx.info);
    return h;
}

namespace detail {

inline RasterU8 read_png8(PngReadCtx& ctx, const std::string& what) {
    if (setjmp(png_jmpbuf(ctx.png))) throw ParseError(cat("malformed PNG: ", what));
    png_read_info(ctx.png, ctx.info);
    int depth = png_get_bit_depth(ctx.png, ctx.info);
    int color = png_get_color_type(ctx.png, ctx.info);
    if (depth == 16)
        throw ParseError(cat("expected 8-bit PNG, got 16-bit: ", what));
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(ctx.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(ctx.png);
    if (png_get_valid(ctx.png, ctx.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(ctx.png);
    png_set_strip_alpha(ctx.png);
    png_read_update_info(ctx.png, ctx.info);

    int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    int ch = png_get_channels(ctx.png, ctx.info);
    if (ch != 1 && ch != 3)
        throw ParseError(cat("unsupported PNG channel count ", ch, ": ", what));

    RasterU8 out(w, h, ch);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = out.row(y);
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return out;
}

}  // namespace detail

/// Loads an 8-bit PNG as grayscale (1 channel) or RGB (3 channels).
/// Palette images expand to RGB, alpha is stripped.
inline RasterU8 load_png8(const std::string& path) {
    detail::PngReadCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError(cat("cannot open PNG: ", path));
    detail::begin_read(ctx, path);
    png_init_io(ctx.png, ctx.fp);
    return detail::read_png8(ctx, path);
}

inline RasterU8 load_png8_from_memory(const std::string& bytes, const std::string& what) {
    detail::PngReadCtx ctx;
    ctx.mem = &bytes;
    detail::begin_read(ctx, what);
    png_set_read_fn(ctx.png, &ctx, detail::png_mem_read);
    return detail::read_png8(ctx, what);
}

/// Loads a 16-bit grayscale PNG into host-endian values.
inline RasterU16 load_png16(const std::string& path) {
    detail::PngReadCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "rb");
    if (!ctx.fp) throw IoError(cat("cannot open PNG: ", path));
    detail::begin_read(ctx, path);
    if (setjmp(png_jmpbuf(ctx.png))) throw ParseError(cat("malformed PNG: ", path));
    png_init_io(ctx.png, ctx.fp);
    png_read_info(ctx.png, ctx.info);
    int depth = png_get_bit_depth(ctx.png, ctx.info);
    int color = png_get_color_type(ctx.png, ctx.info);
    if (depth != 16 || color != PNG_COLOR_TYPE_GRAY)
        throw ParseError(cat("expected 16-bit grayscale PNG: ", path));
    png_set_swap(ctx.png);  // PNG stores big-endian samples
    png_read_update_info(ctx.png, ctx.info);

    int w = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
    int h = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
    RasterU16 out(w, h, 1);
    std::vector<png_bytep> rows(h);
    for (int y = 0; y < h; ++y) rows[y] = reinterpret_cast<png_bytep>(out.row(y));
    png_read_image(ctx.png, rows.data());
    png_read_end(ctx.png, nullptr);
    return out;
}

inline void save_png8(const std::string& path, const RasterU8& img) {
    if (img.channels() != 1 && img.channels() != 3)
        throw ValidationError("save_png8 supports 1 or 3 channels");
    detail::PngWriteCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw IoError(cat("cannot write PNG: ", path));
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
    if (!ctx.png || !ctx.info) throw IoError(cat("libpng init failed for ", path));
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError(cat("PNG write failed: ", path));
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, img.width(), img.height(), 8,
                 img.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    for (int y = 0; y < img.height(); ++y)
        png_write_row(ctx.png, const_cast<png_bytep>(img.row(y)));
    png_write_end(ctx.png, nullptr);
}

inline void save_png16(const std::string& path, const RasterU16& img) {
    if (img.channels() != 1) throw ValidationError("save_png16 supports 1 channel");
    detail::PngWriteCtx ctx;
    ctx.fp = std::fopen(path.c_str(), "wb");
    if (!ctx.fp) throw IoError(cat("cannot write PNG: ", path));
    ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    ctx.info = ctx.png ? png_create_info_struct(ctx.png) : nullptr;
    if (!ctx.png || !ctx.info) throw IoError(cat("libpng init failed for ", path));
    if (setjmp(png_jmpbuf(ctx.png))) throw IoError(cat("PNG write failed: ", path));
    png_init_io(ctx.png, ctx.fp);
    png_set_IHDR(ctx.png, ctx.info, img.width(), img.height(), 16, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(ctx.png, ctx.info);
    png_set_swap(ctx.png);
    for (int y = 0; y < img.height(); ++y)
        png_write_row(ctx.png, reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(img.row(y))));
    png_write_end(ctx.png, nullptr);
}

// Triangle-id grid: 8-byte header (u32 width, u32 height, little-endian)
// followed by width*height little-endian u32 values.

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline void save_tri_id(const std::string& path, const RasterU32& grid) {
    if (grid.channels() != 1) throw ValidationError("tri-id grid must be single channel");
    std::string out;
    out.reserve(8 + grid.pixel_count() * 4);
    detail::put_u32le(out, static_cast<std::uint32_t>(grid.width()));
    detail::put_u32le(out, static_cast<std::uint32_t>(grid.height()));
    for (auto v : grid.data()) detail::put_u32le(out, v);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError(cat("cannot write tri-id grid: ", path));
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError(cat("short write: ", path));
}

inline RasterU32 load_tri_id(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(cat("cannot open tri-id grid: ", path));
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (bytes.size() < 8) throw ParseError(cat("truncated tri-id grid: ", path));
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    std::uint32_t w = detail::get_u32le(p);
    std::uint32_t h = detail::get_u32le(p + 4);
    if (bytes.size() != 8 + static_cast<std::size_t>(w) * h * 4)
        throw ParseError(cat("tri-id grid size mismatch: ", path));
    RasterU32 out(static_cast<int>(w), static_cast<int>(h), 1);
    for (std::size_t i = 0; i < out.data().size(); ++i)
        out.data()[i] = detail::get_u32le(p + 8 + i * 4);
    return out;
}

}  // namespace dsmscrub
