// SPDX-License-Identifier: Apache-2.0
#pragma once

// Mask-aware inpainting with pluggable backends: a harmonic (diffusion)
// fill, an exemplar fill, and an external subprocess protocol for deep
// models. Whatever the backend does, unmasked pixels are restored from the
// input by compositing, so only masked content can ever change. Height
// rasters are filled in decoded meters and re-encoded afterwards; the codec
// is a storage format, not a compute format.

#include <cmath>
#include <random>
#include <variant>

#include "dsmscrub/camera.hpp"
#include "dsmscrub/external_backend.hpp"
#include "dsmscrub/mask.hpp"
#include "dsmscrub/raster.hpp"

namespace dsmscrub {

enum class InpaintPass { color, height };
enum class BackendKind { harmonic, exemplar, external };

struct BackendSpec {
    BackendKind kind = BackendKind::harmonic;
    // harmonic: tolerance is in quantization steps of the working image
    // (one 8-bit level for color, one codec quantum for height).
    double tolerance = 1e-4;
    int max_iterations = 10000;
    // exemplar
    int patch_px = 9;
    int search_iterations = 2000;
    std::uint64_t seed = 0;
    // external
    std::string command;  // template with {image} {mask} {out} placeholders
    double timeout_s = 300.0;

    void validate() const {
        if (!(tolerance > 0)) throw ConfigError("harmonic tolerance must be positive");
        if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
        if (patch_px < 3 || patch_px % 2 == 0)
            throw ConfigError("exemplar patch size must be odd and >= 3");
        if (search_iterations < 1) throw ConfigError("search_iterations must be >= 1");
        if (kind == BackendKind::external) {
            for (const char* ph : {"{image}", "{mask}", "{out}"})
                if (command.find(ph) == std::string::npos)
                    throw ConfigError(cat("external command template missing ", ph));
            if (!(timeout_s > 0)) throw ConfigError("timeout must be positive");
        }
    }
};

struct HarmonicStats {
    int iterations = 0;
    double max_residual = 0.0;
    bool reached_tolerance = false;
};

namespace inpaint_detail {

struct WorkGrid {
    int w = 0, h = 0, ch = 0;
    std::vector<double> v;  // interleaved, double precision during iteration
    double& at(int x, int y, int c) {
        return v[(static_cast<std::size_t>(y) * w + x) * ch + c];
    }
    double neighbor_mean(int x, int y, int c) const {
        auto val = [&](int nx, int ny) {
            return v[(static_cast<std::size_t>(std::clamp(ny, 0, h - 1)) * w +
                      std::clamp(nx, 0, w - 1)) *
                         ch +
                     c];
        };
        return 0.25 * (val(x - 1, y) + val(x + 1, y) + val(x, y - 1) + val(x, y + 1));
    }
};

}  // namespace inpaint_detail

/// Red-black Gauss-Seidel solve of the discrete Laplace equation on the
/// masked pixels: each converges to the mean of its four neighbors, with
/// neighbors clamped at raster borders (Neumann boundary). Stops at
/// `tolerance` in max-residual norm or at `max_iterations`, whichever first.
inline RasterF32 harmonic_fill(const RasterF32& image, const BinaryMask& mask,
                               double tolerance, int max_iterations,
                               HarmonicStats* stats = nullptr) {
    if (image.width() != mask.width() || image.height() != mask.height())
        throw ValidationError("harmonic_fill: image/mask dimension mismatch");
    if (!(tolerance > 0)) throw ConfigError("harmonic tolerance must be positive");
    RasterF32 out = image;
    if (!mask_any(mask)) {
        if (stats) *stats = {0, 0.0, true};
        return out;
    }
    // A masked 4-connected component lacks boundary data only when it is the
    // whole raster; any smaller component borders an unmasked pixel.
    if (mask_count(mask) == mask.pixel_count())
        throw ValidationError("harmonic_fill: mask covers the entire raster, no boundary data");

    const int w = image.width(), h = image.height(), ch = image.channels();

    inpaint_detail::WorkGrid grid;
    grid.w = w;
    grid.h = h;
    grid.ch = ch;
    grid.v.assign(image.data().begin(), image.data().end());

    // Masked pixel lists split by parity for red-black sweeps.
    std::vector<std::pair<int, int>> sweep[2];
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (mask.at(x, y)) sweep[(x + y) & 1].emplace_back(x, y);

    // Initialize masked pixels with the mean of the unmasked pixels that
    // border the mask; constant surroundings then converge immediately.
    {
        std::vector<double> sum(ch, 0.0);
        std::size_t n = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (mask.at(x, y)) continue;
                bool boundary = (x > 0 && mask.at(x - 1, y)) || (x + 1 < w && mask.at(x + 1, y)) ||
                                (y > 0 && mask.at(x, y - 1)) || (y + 1 < h && mask.at(x, y + 1));
                if (!boundary) continue;
                ++n;
                for (int c = 0; c < ch; ++c) sum[c] += image.at(x, y, c);
            }
        if (n == 0)
            throw ValidationError("harmonic_fill: no unmasked pixel borders the mask");
        for (int parity = 0; parity < 2; ++parity)
            for (auto [x, y] : sweep[parity])
                for (int c = 0; c < ch; ++c) grid.at(x, y, c) = sum[c] / static_cast<double>(n);
    }

    HarmonicStats st;
    for (st.iterations = 1; st.iterations <= max_iterations; ++st.iterations) {
        for (int parity = 0; parity < 2; ++parity)
            for (auto [x, y] : sweep[parity])
                for (int c = 0; c < ch; ++c) grid.at(x, y, c) = grid.neighbor_mean(x, y, c);

        st.max_residual = 0.0;
        for (int parity = 0; parity < 2; ++parity)
            for (auto [x, y] : sweep[parity])
                for (int c = 0; c < ch; ++c)
                    st.max_residual =
                        std::max(st.max_residual,
                                 std::abs(grid.at(x, y, c) - grid.neighbor_mean(x, y, c)));
        if (st.max_residual <= tolerance) {
            st.reached_tolerance = true;
            break;
        }
    }
    for (int parity = 0; parity < 2; ++parity)
        for (auto [x, y] : sweep[parity])
            for (int c = 0; c < ch; ++c) out.at(x, y, c) = static_cast<float>(grid.at(x, y, c));
    if (stats) *stats = st;
    return out;
}

/// Exemplar fill: onion-peel from the mask boundary inward; each pixel is
/// copied from the source patch minimizing SSD over the currently-known
/// pixels of its window. Source patches contain no originally-masked
/// pixels. When the candidate count exceeds `search_iterations` a seeded
/// random subset is searched instead of all of them.
inline RasterF32 exemplar_fill(const RasterF32& image, const BinaryMask& mask, int patch_px,
                               int search_iterations, std::uint64_t seed) {
    if (image.width() != mask.width() || image.height() != mask.height())
        throw ValidationError("exemplar_fill: image/mask dimension mismatch");
    if (patch_px < 3 || patch_px % 2 == 0)
        throw ConfigError("exemplar patch size must be odd and >= 3");
    RasterF32 out = image;
    if (!mask_any(mask)) return out;
    if (mask_count(mask) == mask.pixel_count())
        throw ValidationError("exemplar_fill: mask covers the entire image");

    const int w = image.width(), h = image.height(), ch = image.channels();
    const int r = patch_px / 2;

    // Valid source centers: window in bounds and free of masked pixels.
    // Found via a summed-area table over the mask.
    std::vector<std::uint32_t> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            sat[(y + 1ull) * (w + 1) + (x + 1)] = mask.at(x, y) + sat[y * (w + 1ull) + (x + 1)] +
                                                  sat[(y + 1ull) * (w + 1) + x] -
                                                  sat[y * (w + 1ull) + x];
    auto window_masked = [&](int cx, int cy) {
        int x0 = cx - r, y0 = cy - r, x1 = cx + r + 1, y1 = cy + r + 1;
        return sat[static_cast<std::size_t>(y1) * (w + 1) + x1] -
               sat[static_cast<std::size_t>(y0) * (w + 1) + x1] -
               sat[static_cast<std::size_t>(y1) * (w + 1) + x0] +
               sat[static_cast<std::size_t>(y0) * (w + 1) + x0];
    };
    std::vector<std::pair<int, int>> sources;
    for (int y = r; y < h - r; ++y)
        for (int x = r; x < w - r; ++x)
            if (window_masked(x, y) == 0) sources.emplace_back(x, y);
    if (sources.empty())
        throw ValidationError("exemplar_fill: unmasked area smaller than one source patch");

    BinaryMask known(w, h, 1, 0);
    std::size_t unknown = 0;
    for (std::size_t i = 0; i < known.data().size(); ++i) {
        known.data()[i] = mask.data()[i] ? 0 : 1;
        unknown += mask.data()[i] ? 1 : 0;
    }

    std::mt19937_64 rng(seed);
    std::vector<std::pair<int, int>> ring;
    std::vector<std::array<int, 2>> offsets;
    while (unknown > 0) {
        ring.clear();
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (known.at(x, y)) continue;
                bool edge = (x > 0 && known.at(x - 1, y)) || (x + 1 < w && known.at(x + 1, y)) ||
                            (y > 0 && known.at(x, y - 1)) || (y + 1 < h && known.at(x, y + 1));
                if (edge) ring.emplace_back(x, y);
            }

        for (auto [tx, ty] : ring) {
            offsets.clear();
            for (int dy = -r; dy <= r; ++dy)
                for (int dx = -r; dx <= r; ++dx) {
                    int px = tx + dx, py = ty + dy;
                    if (px < 0 || px >= w || py < 0 || py >= h) continue;
                    if (known.at(px, py)) offsets.push_back({dx, dy});
                }

            auto cost_of = [&](int sx, int sy) {
                double cost = 0.0;
                for (const auto& o : offsets)
                    for (int c = 0; c < ch; ++c) {
                        double d = static_cast<double>(out.at(tx + o[0], ty + o[1], c)) -
                                   out.at(sx + o[0], sy + o[1], c);
                        cost += d * d;
                    }
                return cost;
            };

            double best_cost = std::numeric_limits<double>::infinity();
            std::pair<int, int> best = sources.front();
            if (sources.size() <= static_cast<std::size_t>(search_iterations)) {
                for (const auto& s : sources) {
                    double cost = cost_of(s.first, s.second);
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = s;
                    }
                }
            } else {
                std::uniform_int_distribution<std::size_t> pick(0, sources.size() - 1);
                for (int i = 0; i < search_iterations; ++i) {
                    const auto& s = sources[pick(rng)];
                    double cost = cost_of(s.first, s.second);
                    if (cost < best_cost) {
                        best_cost = cost;
                        best = s;
                    }
                }
            }

            for (int c = 0; c < ch; ++c) out.at(tx, ty, c) = out.at(best.first, best.second, c);
            known.at(tx, ty) = 1;
            --unknown;
        }
    }
    return out;
}

using InpaintImage = std::variant<RasterU8, RasterU16>;

struct InpaintRequest {
    InpaintPass pass = InpaintPass::color;
    InpaintImage image;
    BinaryMask mask;
    BinaryMask valid;   // optional coverage; empty = everything valid
    HeightCodec codec;  // height pass only
    BackendSpec backend;
    std::string workdir;  // scratch space for the external protocol
};

namespace inpaint_detail {

inline RasterF32 to_float(const RasterU8& img) {
    RasterF32 out(img.width(), img.height(), img.channels());
    for (std::size_t i = 0; i < img.data().size(); ++i)
        out.data()[i] = static_cast<float>(img.data()[i]);
    return out;
}

inline RasterF32 decode_height(const RasterU16& img, const HeightCodec& codec) {
    RasterF32 out(img.width(), img.height(), 1);
    for (std::size_t i = 0; i < img.data().size(); ++i)
        out.data()[i] = static_cast<float>(codec.decode(img.data()[i]));
    return out;
}

template <typename T>
inline void composite(Raster<T>& img, const Raster<T>& original, const BinaryMask& mask) {
    const int ch = img.channels();
    for (std::size_t i = 0; i < mask.data().size(); ++i)
        if (!mask.data()[i])
            for (int c = 0; c < ch; ++c)
                img.data()[i * ch + c] = original.data()[i * ch + c];
}

inline RasterF32 run_builtin(const RasterF32& work, const BinaryMask& mask,
                             const BackendSpec& spec, double quantum, HarmonicStats* stats) {
    if (spec.kind == BackendKind::harmonic)
        return harmonic_fill(work, mask, spec.tolerance * quantum, spec.max_iterations, stats);
    return exemplar_fill(work, mask, spec.patch_px, spec.search_iterations, spec.seed);
}

inline std::string scratch_file(const std::string& workdir, const char* tag,
                                const char* ext) {
    static std::atomic<std::uint64_t> counter{0};
    namespace fs = std::filesystem;
    fs::path dir = workdir.empty() ? fs::temp_directory_path() : fs::path(workdir);
    fs::create_directories(dir);
    return (dir / cat("inpaint_", ::getpid(), "_", counter.fetch_add(1), "_", tag, ext))
        .string();
}

}  // namespace inpaint_detail

/// Unified inpainting entry point. Output dimensions equal the input's and
/// unmasked pixels are bit-identical to the input for every backend.
inline InpaintImage inpaint(const InpaintRequest& req, HarmonicStats* stats = nullptr) {
    req.backend.validate();
    const bool is_height = req.pass == InpaintPass::height;
    const int iw = is_height ? std::get<RasterU16>(req.image).width()
                             : std::get<RasterU8>(req.image).width();
    const int ih = is_height ? std::get<RasterU16>(req.image).height()
                             : std::get<RasterU8>(req.image).height();
    if (iw != req.mask.width() || ih != req.mask.height())
        throw ValidationError("inpaint: image/mask dimension mismatch");

    if (is_height && !req.valid.empty()) {
        for (std::size_t i = 0; i < req.mask.data().size(); ++i)
            if (req.mask.data()[i] && !req.valid.data()[i])
                throw ValidationError(
                    "inpaint: masked height pixels without elevation data (no-data inside mask)");
    }

    if (!mask_any(req.mask)) return req.image;  // identity for every backend

    if (req.backend.kind == BackendKind::external) {
        namespace fs = std::filesystem;
        std::string img_path = inpaint_detail::scratch_file(req.workdir, "img", ".png");
        std::string mask_path = inpaint_detail::scratch_file(req.workdir, "mask", ".png");
        std::string out_path = inpaint_detail::scratch_file(req.workdir, "out", ".png");
        if (is_height)
            save_png16(img_path, std::get<RasterU16>(req.image));
        else
            save_png8(img_path, std::get<RasterU8>(req.image));
        save_mask_binary(mask_path, req.mask);

        InpaintImage result;
        try {
            ExternalImage loaded =
                run_external_backend(req.backend.command, req.backend.timeout_s, img_path,
                                     mask_path, out_path);
            if (is_height) {
                if (!std::holds_alternative<RasterU16>(loaded))
                    throw BackendError("external backend returned 8-bit output for height pass");
                RasterU16 out = std::get<RasterU16>(loaded);
                inpaint_detail::composite(out, std::get<RasterU16>(req.image), req.mask);
                result = std::move(out);
            } else {
                if (!std::holds_alternative<RasterU8>(loaded))
                    throw BackendError("external backend returned 16-bit output for color pass");
                RasterU8 out = std::get<RasterU8>(loaded);
                if (out.channels() != std::get<RasterU8>(req.image).channels())
                    throw BackendError("external backend changed channel count");
                inpaint_detail::composite(out, std::get<RasterU8>(req.image), req.mask);
                result = std::move(out);
            }
        } catch (...) {
            std::error_code ec;
            for (const auto& p : {img_path, mask_path, out_path}) fs::remove(p, ec);
            throw;
        }
        std::error_code ec;
        for (const auto& p : {img_path, mask_path, out_path}) fs::remove(p, ec);
        return result;
    }

    if (is_height) {
        const RasterU16& src = std::get<RasterU16>(req.image);
        RasterF32 work = inpaint_detail::decode_height(src, req.codec);
        RasterF32 filled = inpaint_detail::run_builtin(work, req.mask, req.backend,
                                                       req.codec.quantum(), stats);
        RasterU16 out = src;
        for (std::size_t i = 0; i < req.mask.data().size(); ++i)
            if (req.mask.data()[i]) out.data()[i] = req.codec.encode(filled.data()[i]);
        return out;
    }

    const RasterU8& src = std::get<RasterU8>(req.image);
    RasterF32 work = inpaint_detail::to_float(src);
    RasterF32 filled = inpaint_detail::run_builtin(work, req.mask, req.backend, 1.0, stats);
    RasterU8 out = src;
    const int ch = src.channels();
    for (std::size_t i = 0; i < req.mask.data().size(); ++i)
        if (req.mask.data()[i])
            for (int c = 0; c < ch; ++c)
                out.data()[i * ch + c] = static_cast<std::uint8_t>(
                    std::clamp<long>(std::lround(filled.data()[i * ch + c]), 0, 255));
    return out;
}

}  // namespace dsmscrub
