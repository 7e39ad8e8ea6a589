#pragma once

#include <array>
#include <initializer_list>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "veintex/features/feature_vector.hpp"
#include "veintex/image.hpp"

namespace veintex {

/// Orthonormal two-channel filter pair. The highpass is the quadrature mirror
/// of the lowpass: h[n] = (-1)^n g[L-1-n].
struct WaveletFilter {
    std::string name;
    std::vector<double> lowpass;
    std::vector<double> highpass;

    static WaveletFilter from_lowpass(std::string name, std::vector<double> lowpass) {
        std::vector<double> highpass(lowpass.size());
        const std::size_t L = lowpass.size();
        for (std::size_t n = 0; n < L; ++n) highpass[n] = (n % 2 == 0 ? 1.0 : -1.0) * lowpass[L - 1 - n];
        return {std::move(name), std::move(lowpass), std::move(highpass)};
    }

    static WaveletFilter haar() {
        const double s = 1.0 / std::numbers::sqrt2;
        return from_lowpass("haar", {s, s});
    }

    /// Daubechies, 8 vanishing moments, 16 taps.
    static WaveletFilter db8() {
        return from_lowpass("db8", {
                                       0.05441584224310401,
                                       0.31287159091429995,
                                       0.6756307362972898,
                                       0.5853546836542067,
                                       -0.015829105256349306,
                                       -0.2840155429615469,
                                       0.0004724845739132828,
                                       0.12874742662047847,
                                       -0.017369301001807547,
                                       -0.044088253930794755,
                                       0.013981027917398282,
                                       0.008746094047405777,
                                       -0.004870352993451574,
                                       -0.00039174037337694705,
                                       0.0006754494064505693,
                                       -0.00011747678412476953,
                                   });
    }
};

/// Dense real grid, row-major.
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    Grid() = default;
    Grid(int w, int h, double fill = 0.0) : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    double& operator()(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double operator()(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

    static Grid from_image(const GrayImage& img) {
        Grid g(img.width(), img.height());
        g.values = img.data();
        return g;
    }
};

/// Detail sub-bands of one level. H = highpass across rows (vertical
/// frequency), V = highpass along rows, D = highpass in both.
struct DetailBands {
    Grid horizontal;
    Grid vertical;
    Grid diagonal;
};

/// Result of an L-level 2-D DWT. details[0] is the finest level (level 1);
/// level l bands are ceil(parent/2) per axis.
struct SubbandPyramid {
    int width = 0;  // size of the transformed input
    int height = 0;
    Grid approximation;
    std::vector<DetailBands> details;

    int levels() const noexcept { return static_cast<int>(details.size()); }
};

namespace detail {

/**
 * One level of 1-D periodized analysis: a[k] = sum_n g[n] x[(2k+n) mod N],
 * d[k] = sum_n h[n] x[(2k+n) mod N]. Odd-length inputs are first extended by
 * repeating the last sample, so outputs have ceil(N/2) samples.
 */
inline void analyze_1d(const std::vector<double>& in, const WaveletFilter& f, std::vector<double>& approx,
                       std::vector<double>& detail) {
    std::vector<double> x = in;
    if (x.size() % 2 == 1) x.push_back(x.back());
    const std::size_t N = x.size();
    const std::size_t half = N / 2;
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (std::size_t n = 0; n < f.lowpass.size(); ++n) {
            const double v = x[(2 * k + n) % N];
            a += f.lowpass[n] * v;
            d += f.highpass[n] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

// Adjoint of analyze_1d, cropped to out_len.
inline std::vector<double> synthesize_1d(const std::vector<double>& approx, const std::vector<double>& detail,
                                         const WaveletFilter& f, std::size_t out_len) {
    const std::size_t half = approx.size();
    const std::size_t N = 2 * half;
    std::vector<double> x(N, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        for (std::size_t n = 0; n < f.lowpass.size(); ++n) {
            x[(2 * k + n) % N] += f.lowpass[n] * approx[k] + f.highpass[n] * detail[k];
        }
    }
    x.resize(out_len);
    return x;
}

inline int half_up(int n) { return (n + 1) / 2; }

struct LevelBands {
    Grid ll, lh, hl, hh; // first letter: along rows (x), second: across rows (y)
};

inline LevelBands analyze_2d(const Grid& in, const WaveletFilter& f) {
    const int w2 = half_up(in.width), h2 = half_up(in.height);
    Grid lo(w2, in.height), hi(w2, in.height);
    std::vector<double> row(in.width), a, d;
    for (int y = 0; y < in.height; ++y) {
        for (int x = 0; x < in.width; ++x) row[x] = in(x, y);
        analyze_1d(row, f, a, d);
        for (int x = 0; x < w2; ++x) {
            lo(x, y) = a[x];
            hi(x, y) = d[x];
        }
    }
    LevelBands out{Grid(w2, h2), Grid(w2, h2), Grid(w2, h2), Grid(w2, h2)};
    std::vector<double> col(in.height);
    auto columns = [&](const Grid& src, Grid& low, Grid& high) {
        for (int x = 0; x < w2; ++x) {
            for (int y = 0; y < in.height; ++y) col[y] = src(x, y);
            analyze_1d(col, f, a, d);
            for (int y = 0; y < h2; ++y) {
                low(x, y) = a[y];
                high(x, y) = d[y];
            }
        }
    };
    columns(lo, out.ll, out.lh);
    columns(hi, out.hl, out.hh);
    return out;
}

inline Grid synthesize_2d(const LevelBands& b, const WaveletFilter& f, int out_w, int out_h) {
    const int w2 = b.ll.width, h2 = b.ll.height;
    Grid lo(w2, out_h), hi(w2, out_h);
    std::vector<double> a(h2), d(h2);
    auto columns = [&](const Grid& low, const Grid& high, Grid& dst) {
        for (int x = 0; x < w2; ++x) {
            for (int y = 0; y < h2; ++y) {
                a[y] = low(x, y);
                d[y] = high(x, y);
            }
            const auto col = synthesize_1d(a, d, f, static_cast<std::size_t>(out_h));
            for (int y = 0; y < out_h; ++y) dst(x, y) = col[y];
        }
    };
    columns(b.ll, b.lh, lo);
    columns(b.hl, b.hh, hi);

    Grid out(out_w, out_h);
    std::vector<double> ra(w2), rd(w2);
    for (int y = 0; y < out_h; ++y) {
        for (int x = 0; x < w2; ++x) {
            ra[x] = lo(x, y);
            rd[x] = hi(x, y);
        }
        const auto row = synthesize_1d(ra, rd, f, static_cast<std::size_t>(out_w));
        for (int x = 0; x < out_w; ++x) out(x, y) = row[x];
    }
    return out;
}

inline void check_levels(int width, int height, int levels) {
    if (levels < 1) fail(ErrorKind::parameter, "DWT needs at least one level");
    const int smallest = std::min(width, height);
    if (levels >= 31 || smallest < (1 << levels)) {
        fail(ErrorKind::parameter, "too many DWT levels (" + std::to_string(levels) + ") for a " + std::to_string(width) +
                                       "x" + std::to_string(height) + " image");
    }
}

} // namespace detail

/// Separable multi-level 2-D DWT with periodized boundaries (rows, then
/// columns, recursing on the approximation).
inline SubbandPyramid dwt2(const Grid& input, const WaveletFilter& filter, int levels) {
    detail::check_levels(input.width, input.height, levels);
    SubbandPyramid pyr;
    pyr.width = input.width;
    pyr.height = input.height;
    Grid current = input;
    for (int l = 0; l < levels; ++l) {
        auto bands = detail::analyze_2d(current, filter);
        // LH: lowpass along rows, highpass across rows -> horizontal edges.
        pyr.details.push_back(DetailBands{std::move(bands.lh), std::move(bands.hl), std::move(bands.hh)});
        current = std::move(bands.ll);
    }
    pyr.approximation = std::move(current);
    return pyr;
}

inline SubbandPyramid dwt2(const GrayImage& img, const WaveletFilter& filter, int levels) {
    return dwt2(Grid::from_image(img), filter, levels);
}

/// Inverse of dwt2 for the same filter.
inline Grid idwt2(const SubbandPyramid& pyr, const WaveletFilter& filter) {
    if (pyr.details.empty()) fail(ErrorKind::structure, "pyramid has no levels");
    // Parent sizes of every level, finest first.
    std::vector<std::pair<int, int>> sizes{{pyr.width, pyr.height}};
    for (int l = 1; l < pyr.levels(); ++l) {
        sizes.emplace_back(detail::half_up(sizes.back().first), detail::half_up(sizes.back().second));
    }
    Grid current = pyr.approximation;
    for (int l = pyr.levels() - 1; l >= 0; --l) {
        const auto [pw, ph] = sizes[l];
        const int bw = detail::half_up(pw), bh = detail::half_up(ph);
        const auto& d = pyr.details[l];
        for (const Grid* g : std::initializer_list<const Grid*>{&current, &d.horizontal, &d.vertical, &d.diagonal}) {
            if (g->width != bw || g->height != bh || g->values.size() != static_cast<std::size_t>(bw) * bh) {
                fail(ErrorKind::structure, "sub-band shape inconsistent at level " + std::to_string(l + 1));
            }
        }
        detail::LevelBands bands{current, d.horizontal, d.vertical, d.diagonal};
        current = detail::synthesize_2d(bands, filter, pw, ph);
    }
    return current;
}

/// Mean |c| and std(c) for the approximation, then H, V, D of each level from
/// coarse to fine: 2*(3L+1) values.
inline FeatureVector dwt_descriptor(const GrayImage& img, const WaveletFilter& filter, int levels) {
    const auto pyr = dwt2(img, filter, levels);
    FeatureVector out{filter.name == "haar" ? Descriptor::haar : Descriptor::db8, {}};
    auto pool = [&out](const Grid& g) {
        const double n = static_cast<double>(g.values.size());
        double abs_sum = 0.0, sum = 0.0;
        for (double v : g.values) {
            abs_sum += std::abs(v);
            sum += v;
        }
        const double mean = sum / n;
        double sq = 0.0;
        for (double v : g.values) sq += (v - mean) * (v - mean);
        out.values.push_back(abs_sum / n);
        out.values.push_back(std::sqrt(sq / n));
    };
    pool(pyr.approximation);
    for (int l = pyr.levels() - 1; l >= 0; --l) {
        pool(pyr.details[l].horizontal);
        pool(pyr.details[l].vertical);
        pool(pyr.details[l].diagonal);
    }
    return out;
}

} // namespace veintex
