#pragma once

#include <cmath>
#include <span>
#include <string>

#include "veintex/classify/distance.hpp"

namespace veintex {

struct KernelSpec {
    enum class Kind { rbf, polynomial };

    Kind kind = Kind::rbf;
    double sigma = 1.0;  // rbf
    int degree = 3;      // polynomial
    double offset = 1.0; // polynomial c

    static KernelSpec rbf(double sigma) { return {Kind::rbf, sigma, 3, 1.0}; }
    static KernelSpec polynomial(int degree, double offset) { return {Kind::polynomial, 1.0, degree, offset}; }

    void validate() const {
        if (kind == Kind::rbf && !(sigma > 0.0 && std::isfinite(sigma))) {
            fail(ErrorKind::parameter, "rbf sigma must be positive");
        }
        if (kind == Kind::polynomial && (degree < 1 || !(offset >= 0.0))) {
            fail(ErrorKind::parameter, "polynomial kernel needs degree >= 1 and offset >= 0");
        }
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline std::string to_string(const KernelSpec& spec) {
    return spec.kind == KernelSpec::Kind::rbf ? "rbf" : "polynomial";
}

/// exp(-|x-y|^2 / (2 sigma^2)) or (x.y + c)^d.
inline double kernel_eval(std::span<const double> x, std::span<const double> y, const KernelSpec& spec) {
    spec.validate();
    if (spec.kind == KernelSpec::Kind::rbf) {
        return std::exp(-squared_euclidean(x, y) / (2.0 * spec.sigma * spec.sigma));
    }
    detail::check_same_dim(x, y);
    double dot = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) dot += x[j] * y[j];
    const double base = dot + spec.offset;
    double out = 1.0;
    for (int i = 0; i < spec.degree; ++i) out *= base;
    return out;
}

} // namespace veintex
