#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "veintex/features/feature_vector.hpp"
#include "veintex/image.hpp"

namespace veintex {

/// Short-term Fourier coefficients of one M x M window at the four LPQ
/// frequencies u1=(a,0), u2=(0,a), u3=(a,a), u4=(a,-a) with a=1/M.
struct LpqCoefficients {
    std::array<std::complex<double>, 4> F;
    double window_l1 = 0.0; // sum of |f| over the window, sets the zero tolerance
};

namespace detail {

// Coefficients below this fraction of the window's L1 mass count as exact zeros.
inline constexpr double kLpqZeroTolerance = 1e-10;

inline void check_lpq_args(const GrayImage& img, int window) {
    if (window < 3 || window % 2 == 0) fail(ErrorKind::parameter, "LPQ window must be an odd integer >= 3");
    if (img.width() < window || img.height() < window) fail(ErrorKind::size, "image smaller than the LPQ window");
}

} // namespace detail

/**
 * Computes F(u, x) = sum_{y in N_x} f(x - y) exp(-j 2 pi u^T y) for every pixel
 * whose full window fits, returned row-major over the valid region
 * ((W-M+1) x (H-M+1)). Window offsets y run over [-r, r]^2, r = (M-1)/2.
 *
 * The 2-D exponential separates, so two 1-D passes per axis suffice.
 */
inline std::vector<LpqCoefficients> lpq_coefficients(const GrayImage& img, int window) {
    detail::check_lpq_args(img, window);
    using cplx = std::complex<double>;
    const int r = (window - 1) / 2;
    const double a = 1.0 / window;

    // w1[k] = exp(-j 2 pi a y) for y = k - r
    std::vector<cplx> w1(window);
    for (int k = 0; k < window; ++k) {
        const double angle = -2.0 * std::numbers::pi * a * (k - r);
        w1[k] = cplx(std::cos(angle), std::sin(angle));
    }

    const int W = img.width(), H = img.height();
    const int vw = W - 2 * r, vh = H - 2 * r;

    // Horizontal pass: g0 = box sum, g1 = modulated sum, gabs = |f| sum;
    // rows kept in full, columns restricted to the valid range.
    std::vector<double> g0(static_cast<std::size_t>(vw) * H), gabs(g0.size());
    std::vector<cplx> g1(g0.size());
    for (int y = 0; y < H; ++y) {
        for (int vx = 0; vx < vw; ++vx) {
            const int x = vx + r;
            double s0 = 0.0, sa = 0.0;
            cplx s1 = 0.0;
            for (int k = 0; k < window; ++k) {
                const double f = img(x - (k - r), y);
                s0 += f;
                sa += std::abs(f);
                s1 += f * w1[k];
            }
            const std::size_t i = static_cast<std::size_t>(y) * vw + vx;
            g0[i] = s0;
            gabs[i] = sa;
            g1[i] = s1;
        }
    }

    std::vector<LpqCoefficients> out(static_cast<std::size_t>(vw) * vh);
    for (int vy = 0; vy < vh; ++vy) {
        const int y = vy + r;
        for (int vx = 0; vx < vw; ++vx) {
            cplx f1 = 0.0, f2 = 0.0, f3 = 0.0, f4 = 0.0;
            double l1 = 0.0;
            for (int k = 0; k < window; ++k) {
                const std::size_t i = static_cast<std::size_t>(y - (k - r)) * vw + vx;
                f1 += g1[i];
                f2 += g0[i] * w1[k];
                f3 += g1[i] * w1[k];
                f4 += g1[i] * std::conj(w1[k]);
                l1 += gabs[i];
            }
            out[static_cast<std::size_t>(vy) * vw + vx] = LpqCoefficients{{f1, f2, f3, f4}, l1};
        }
    }
    return out;
}

/// Codeword from the signs of [Re F(u1..u4), Im F(u1..u4)]; bit i-1 holds q_i
/// and q_i = 1 when the value is >= 0.
inline std::uint8_t lpq_code(const LpqCoefficients& c) {
    const double zero = detail::kLpqZeroTolerance * c.window_l1;
    auto q = [zero](double v) { return (v >= 0.0 || std::abs(v) <= zero) ? 1u : 0u; };
    unsigned code = 0;
    for (int i = 0; i < 4; ++i) {
        code |= q(c.F[i].real()) << i;
        code |= q(c.F[i].imag()) << (i + 4);
    }
    return static_cast<std::uint8_t>(code);
}

/// 256-bin normalized histogram of LPQ codewords over the valid region.
inline FeatureVector lpq_descriptor(const GrayImage& img, int window = 7) {
    const auto coeffs = lpq_coefficients(img, window);
    std::array<std::size_t, 256> counts{};
    for (const auto& c : coeffs) ++counts[lpq_code(c)];
    FeatureVector out{Descriptor::lpq, std::vector<double>(256)};
    const double total = static_cast<double>(coeffs.size());
    for (int b = 0; b < 256; ++b) out.values[b] = static_cast<double>(counts[b]) / total;
    return out;
}

} // namespace veintex
