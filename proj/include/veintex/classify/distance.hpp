#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "veintex/error.hpp"

namespace veintex {

enum class DistanceMetric { euclidean, cityblock, cosine, correlation };

inline constexpr DistanceMetric kAllMetrics[] = {DistanceMetric::euclidean, DistanceMetric::cityblock,
                                                 DistanceMetric::cosine, DistanceMetric::correlation};

inline std::string_view to_string(DistanceMetric m) {
    switch (m) {
    case DistanceMetric::euclidean: return "euclidean";
    case DistanceMetric::cityblock: return "cityblock";
    case DistanceMetric::cosine: return "cosine";
    case DistanceMetric::correlation: return "correlation";
    }
    return "?";
}

inline DistanceMetric parse_metric(std::string_view name) {
    for (auto m : kAllMetrics) {
        if (name == to_string(m)) return m;
    }
    fail(ErrorKind::parameter, "unknown distance metric '" + std::string(name) + "'");
}

namespace detail {

inline void check_same_dim(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        fail(ErrorKind::parameter, "dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    }
    if (x.empty()) fail(ErrorKind::parameter, "vectors must have dimension >= 1");
}

// 1 - dot/(|x||y|), clamped so rounding cannot leave [0,2].
inline double one_minus_cosine(double dot, double xx, double yy) {
    return std::clamp(1.0 - dot / (std::sqrt(xx) * std::sqrt(yy)), 0.0, 2.0);
}

} // namespace detail

inline double squared_euclidean(std::span<const double> x, std::span<const double> y) {
    detail::check_same_dim(x, y);
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - y[j];
        s += d * d;
    }
    return s;
}

/**
 * Euclidean, city-block, cosine (1 - cos angle) or correlation (1 - Pearson r,
 * centring each vector by its own mean) distance.
 *
 * Cosine rejects zero vectors and correlation rejects constant ones with a
 * degenerate-input error.
 */
inline double distance(std::span<const double> x, std::span<const double> y, DistanceMetric metric) {
    detail::check_same_dim(x, y);
    const std::size_t n = x.size();
    switch (metric) {
    case DistanceMetric::euclidean: return std::sqrt(squared_euclidean(x, y));
    case DistanceMetric::cityblock: {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += std::abs(x[j] - y[j]);
        return s;
    }
    case DistanceMetric::cosine: {
        double dot = 0.0, xx = 0.0, yy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            dot += x[j] * y[j];
            xx += x[j] * x[j];
            yy += y[j] * y[j];
        }
        if (xx == 0.0 || yy == 0.0) fail(ErrorKind::degenerate_input, "cosine distance of a zero vector");
        return detail::one_minus_cosine(dot, xx, yy);
    }
    case DistanceMetric::correlation: {
        if (n < 2) fail(ErrorKind::parameter, "correlation distance needs dimension >= 2");
        double mx = 0.0, my = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            mx += x[j];
            my += y[j];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double dot = 0.0, xx = 0.0, yy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double a = x[j] - mx, b = y[j] - my;
            dot += a * b;
            xx += a * a;
            yy += b * b;
        }
        if (xx == 0.0 || yy == 0.0) fail(ErrorKind::degenerate_input, "correlation distance of a constant vector");
        return detail::one_minus_cosine(dot, xx, yy);
    }
    }
    fail(ErrorKind::parameter, "unknown distance metric");
}

} // namespace veintex
