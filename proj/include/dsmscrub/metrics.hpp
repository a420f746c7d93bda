// SPDX-License-Identifier: Apache-2.0
#pragma once

// Evaluation measures: Shannon entropy and 1D earth mover distance over
// 256-bin intensity histograms (color via Rec.601 luminance, height via the
// upper 8 bits of the 16-bit codes), plus the normalized elevation-difference
// heatmap. Removing occluders removes high-frequency detail, which shows up
// as an entropy drop and a histogram shift the EMD quantifies.

#include <cmath>

#include "dsmscrub/inpaint.hpp"
#include "dsmscrub/raster.hpp"

namespace dsmscrub {

struct Histogram {
    std::vector<double> bins;
    double lo = 0.0;  // value range covered, inclusive-exclusive
    double hi = 256.0;
};

inline std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(0.299 * r + 0.587 * g + 0.114 * b));
}

inline Histogram histogram_color(const RasterU8& img) {
    if (img.empty()) throw ValidationError("histogram of empty image");
    Histogram h;
    h.bins.assign(256, 0.0);
    h.lo = 0.0;
    h.hi = 256.0;
    if (img.channels() == 3) {
        for (std::size_t i = 0; i < img.pixel_count(); ++i)
            h.bins[luminance(img.data()[i * 3], img.data()[i * 3 + 1],
                             img.data()[i * 3 + 2])] += 1.0;
    } else {
        for (auto v : img.data()) h.bins[v] += 1.0;
    }
    return h;
}

inline Histogram histogram_height(const RasterU16& img) {
    if (img.empty()) throw ValidationError("histogram of empty image");
    Histogram h;
    h.bins.assign(256, 0.0);
    h.lo = 0.0;
    h.hi = 65536.0;
    for (auto v : img.data()) h.bins[v >> 8] += 1.0;  // 256 equal-width bins
    return h;
}

/// H = -sum p log2 p over non-empty bins; 0 <= H <= log2(bins).
inline double shannon_entropy(const Histogram& h) {
    double total = 0.0;
    for (double b : h.bins) total += b;
    if (total <= 0.0) throw ValidationError("entropy of empty histogram");
    double H = 0.0;
    for (double b : h.bins) {
        if (b <= 0.0) continue;
        double p = b / total;
        H -= p * std::log2(p);
    }
    return H;
}

inline double shannon_entropy(const RasterU8& img) { return shannon_entropy(histogram_color(img)); }
inline double shannon_entropy(const RasterU16& img) {
    return shannon_entropy(histogram_height(img));
}

/// 1D earth mover distance between unit-normalized histograms, in bin-width
/// units: the L1 distance between the CDFs. Symmetric, zero iff the
/// normalized histograms are equal.
inline double emd_1d(const Histogram& a, const Histogram& b) {
    if (a.bins.size() != b.bins.size())
        throw ValidationError(cat("emd_1d: bin count mismatch (", a.bins.size(), " vs ",
                                  b.bins.size(), ")"));
    if (a.lo != b.lo || a.hi != b.hi) throw ValidationError("emd_1d: histogram domain mismatch");
    double ta = 0.0, tb = 0.0;
    for (double v : a.bins) ta += v;
    for (double v : b.bins) tb += v;
    if (ta <= 0.0 || tb <= 0.0) throw ValidationError("emd_1d: zero-mass histogram");
    double cum_a = 0.0, cum_b = 0.0, emd = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        cum_a += a.bins[i] / ta;
        cum_b += b.bins[i] / tb;
        emd += std::abs(cum_a - cum_b);
    }
    return emd;
}

namespace metrics_detail {

// Monotone false-color ramp: blue -> cyan -> green -> yellow -> red.
inline void heat_color(double t, std::uint8_t rgb[3]) {
    t = std::clamp(t, 0.0, 1.0);
    static const double stops[5][3] = {
        {0, 0, 255}, {0, 255, 255}, {0, 255, 0}, {255, 255, 0}, {255, 0, 0}};
    double s = t * 4.0;
    int k = std::min(3, static_cast<int>(s));
    double f = s - k;
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<std::uint8_t>(
            std::lround(stops[k][c] * (1.0 - f) + stops[k + 1][c] * f));
}

}  // namespace metrics_detail

/// Per masked pixel, |height difference| normalized by the maximum masked
/// difference is mapped through the ramp and composited over the source
/// color at fixed opacity. Differences are taken on the 16-bit codes; the
/// codec is linear so the normalization is identical in meters. Pixels with
/// zero difference (and all unmasked pixels) show the source color only.
inline RasterU8 elevation_diff_heatmap(const RasterU16& source_height,
                                       const RasterU16& inpainted_height,
                                       const BinaryMask& mask, const RasterU8& source_color) {
    if (!source_height.same_shape(inpainted_height) ||
        source_height.width() != mask.width() || source_height.height() != mask.height() ||
        source_color.width() != mask.width() || source_color.height() != mask.height())
        throw ValidationError("elevation_diff_heatmap: dimension mismatch");

    constexpr double kOpacity = 0.6;
    int max_diff = 0;
    for (std::size_t i = 0; i < mask.data().size(); ++i)
        if (mask.data()[i])
            max_diff = std::max(max_diff, std::abs(static_cast<int>(source_height.data()[i]) -
                                                   static_cast<int>(inpainted_height.data()[i])));

    RasterU8 out(mask.width(), mask.height(), 3);
    for (std::size_t i = 0; i < mask.data().size(); ++i) {
        std::uint8_t base[3];
        for (int c = 0; c < 3; ++c)
            base[c] = source_color.at(static_cast<int>(i % mask.width()),
                                      static_cast<int>(i / mask.width()),
                                      source_color.channels() == 1 ? 0 : c);
        int diff = std::abs(static_cast<int>(source_height.data()[i]) -
                            static_cast<int>(inpainted_height.data()[i]));
        if (!mask.data()[i] || diff == 0 || max_diff == 0) {
            for (int c = 0; c < 3; ++c) out.data()[i * 3 + c] = base[c];
            continue;
        }
        std::uint8_t heat[3];
        metrics_detail::heat_color(static_cast<double>(diff) / max_diff, heat);
        for (int c = 0; c < 3; ++c)
            out.data()[i * 3 + c] = static_cast<std::uint8_t>(
                std::lround(base[c] * (1.0 - kOpacity) + heat[c] * kOpacity));
    }
    return out;
}

struct PatchMetrics {
    int row = 0;
    int col = 0;
    InpaintPass pass = InpaintPass::color;
    double h_source = 0.0;
    double h_inpainted = 0.0;
    double emd = 0.0;
    std::size_t mask_pixels = 0;
};

struct PassAggregate {
    std::size_t count = 0;
    double mean_h_source = 0.0;
    double mean_h_inpainted = 0.0;
    double mean_emd = 0.0;
};

struct MetricsReport {
    std::vector<PatchMetrics> records;
    PassAggregate color;
    PassAggregate height;
};

inline MetricsReport aggregate(const std::vector<PatchMetrics>& records) {
    if (records.empty()) throw ValidationError("aggregate: no metric records");
    MetricsReport rep;
    rep.records = records;
    for (const PatchMetrics& r : records) {
        PassAggregate& agg = r.pass == InpaintPass::color ? rep.color : rep.height;
        ++agg.count;
        agg.mean_h_source += r.h_source;
        agg.mean_h_inpainted += r.h_inpainted;
        agg.mean_emd += r.emd;
    }
    for (PassAggregate* agg : {&rep.color, &rep.height})
        if (agg->count > 0) {
            agg->mean_h_source /= static_cast<double>(agg->count);
            agg->mean_h_inpainted /= static_cast<double>(agg->count);
            agg->mean_emd /= static_cast<double>(agg->count);
        }
    return rep;
}

/// Plain-text table, one column pair per pass.
inline std::string metrics_table(const MetricsReport& rep) {
    char buf[256];
    std::string out;
    out += "            |    Color    |   Position  |\n";
    std::snprintf(buf, sizeof buf, "H source    | %11.4f | %11.4f |\n", rep.color.mean_h_source,
                  rep.height.mean_h_source);
    out += buf;
    std::snprintf(buf, sizeof buf, "H inpainted | %11.4f | %11.4f |\n",
                  rep.color.mean_h_inpainted, rep.height.mean_h_inpainted);
    out += buf;
    std::snprintf(buf, sizeof buf, "EMD         | %11.4f | %11.4f |\n", rep.color.mean_emd,
                  rep.height.mean_emd);
    out += buf;
    out += cat("patches     | ", rep.color.count, " color, ", rep.height.count, " height\n");
    return out;
}

}  // namespace dsmscrub
