#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "veintex/features/feature_vector.hpp"
#include "veintex/fft.hpp"
#include "veintex/image.hpp"

namespace veintex {

/// Radial log-Gabor transfer exp(-log^2(w/w0) / (2 log^2(ratio))), with the
/// DC response pinned to 0. `ratio` is the bandwidth ratio k/w0.
inline double log_gabor_transfer(double w, double w0, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorKind::parameter, "log-Gabor ratio k/w0 must lie in (0,1)");
    if (!(w0 > 0.0)) fail(ErrorKind::parameter, "log-Gabor centre frequency must be positive");
    if (w < 0.0) fail(ErrorKind::parameter, "log-Gabor frequency must be non-negative");
    if (w == 0.0) return 0.0;
    const double num = std::log(w / w0);
    const double den = std::log(ratio);
    return std::exp(-(num * num) / (2.0 * den * den));
}

struct LogGaborParams {
    int scales = 4;
    int orientations = 6;
    double min_wavelength = 4.0;
    double mult = 2.0;
    double ratio = 0.55;
    double angular_sigma = 0.6 * std::numbers::pi / 6.0;

    /// Default parameters with angular_sigma tied to the orientation count.
    static LogGaborParams with_orientations(int scales, int orientations) {
        LogGaborParams p;
        p.scales = scales;
        p.orientations = orientations;
        p.angular_sigma = 0.6 * std::numbers::pi / orientations;
        return p;
    }
};

/**
 * S x O frequency-domain filters for one image size.
 *
 * Filters are stored in natural DFT order (DC at index 0, bin j of an axis of
 * length n has signed frequency j/n for j < n - n/2 and (j-n)/n otherwise),
 * so they multiply an unshifted spectrum directly. Immutable once built.
 */
class LogGaborBank {
public:
    LogGaborBank(int width, int height, const LogGaborParams& params) : width_(width), height_(height), params_(params) {
        if (width <= 0 || height <= 0) fail(ErrorKind::parameter, "bank grid must be positive");
        if (params.scales < 1 || params.orientations < 1) fail(ErrorKind::parameter, "scales and orientations must be >= 1");
        if (!(params.min_wavelength >= 2.0)) fail(ErrorKind::parameter, "min_wavelength must be >= 2");
        if (!(params.mult > 0.0)) fail(ErrorKind::parameter, "scale multiplier must be positive");
        if (!(params.angular_sigma > 0.0)) fail(ErrorKind::parameter, "angular_sigma must be positive");
        if (!(params.ratio > 0.0 && params.ratio < 1.0)) fail(ErrorKind::parameter, "ratio k/w0 must lie in (0,1)");

        const std::size_t n = static_cast<std::size_t>(width) * height;
        std::vector<double> radius(n), angle(n);
        for (int y = 0; y < height; ++y) {
            const double fy = signed_frequency(y, height);
            for (int x = 0; x < width; ++x) {
                const double fx = signed_frequency(x, width);
                radius[index(x, y)] = std::hypot(fx, fy);
                angle[index(x, y)] = std::atan2(-fy, fx);
            }
        }

        filters_.reserve(static_cast<std::size_t>(params.scales) * params.orientations);
        for (int s = 0; s < params.scales; ++s) {
            const double w0 = center_frequency(s);
            for (int o = 0; o < params.orientations; ++o) {
                const double theta0 = orientation_angle(o);
                const double c0 = std::cos(theta0), s0 = std::sin(theta0);
                std::vector<double> filter(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const double ds = std::sin(angle[i]) * c0 - std::cos(angle[i]) * s0;
                    const double dc = std::cos(angle[i]) * c0 + std::sin(angle[i]) * s0;
                    const double dtheta = std::abs(std::atan2(ds, dc));
                    const double spread = std::exp(-(dtheta * dtheta) / (2.0 * params.angular_sigma * params.angular_sigma));
                    filter[i] = log_gabor_transfer(radius[i], w0, params.ratio) * spread;
                }
                filters_.push_back(std::move(filter));
            }
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int scales() const noexcept { return params_.scales; }
    int orientations() const noexcept { return params_.orientations; }
    const LogGaborParams& params() const noexcept { return params_; }

    /// Centre frequency of scale s (0-based), cycles/pixel.
    double center_frequency(int s) const { return 1.0 / (params_.min_wavelength * std::pow(params_.mult, s)); }

    /// Orientation o (0-based) in radians.
    double orientation_angle(int o) const { return o * std::numbers::pi / params_.orientations; }

    const std::vector<double>& filter(int s, int o) const {
        return filters_.at(static_cast<std::size_t>(s) * params_.orientations + o);
    }

    double at(int s, int o, int x, int y) const { return filter(s, o)[index(x, y)]; }

    static double signed_frequency(int j, int n) {
        const int k = j < n - n / 2 ? j : j - n;
        return static_cast<double>(k) / n;
    }

private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_;
    int height_;
    LogGaborParams params_;
    std::vector<std::vector<double>> filters_;
};

/// Mean and standard deviation of each filter's complex response magnitude,
/// scale-major then orientation, mean before std (2*S*O values).
inline FeatureVector log_gabor_descriptor(const GrayImage& img, const LogGaborBank& bank) {
    if (img.width() != bank.width() || img.height() != bank.height()) {
        fail(ErrorKind::parameter, "log-Gabor bank grid does not match the image size");
    }
    using fft::cplx;
    const std::size_t n = img.data().size();
    std::vector<cplx> spectrum(img.data().begin(), img.data().end());
    fft::transform2d(spectrum, img.width(), img.height(), false);

    FeatureVector out{Descriptor::log_gabor, {}};
    out.values.reserve(2 * static_cast<std::size_t>(bank.scales()) * bank.orientations());
    std::vector<cplx> response(n);
    for (int s = 0; s < bank.scales(); ++s) {
        for (int o = 0; o < bank.orientations(); ++o) {
            const auto& filter = bank.filter(s, o);
            for (std::size_t i = 0; i < n; ++i) response[i] = spectrum[i] * filter[i];
            fft::transform2d(response, img.width(), img.height(), true);

            double sum = 0.0;
            for (const auto& v : response) sum += std::abs(v);
            const double mean = sum / static_cast<double>(n);
            double sq = 0.0;
            for (const auto& v : response) {
                const double d = std::abs(v) - mean;
                sq += d * d;
            }
            out.values.push_back(mean);
            out.values.push_back(std::sqrt(sq / static_cast<double>(n)));
        }
    }
    return out;
}

} // namespace veintex
