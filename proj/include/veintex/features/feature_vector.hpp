#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "veintex/error.hpp"

namespace veintex {

enum class Descriptor { lbp, lpq, log_gabor, haar, db8, fused };

inline constexpr std::array<Descriptor, 5> kSingleDescriptors = {Descriptor::lbp, Descriptor::lpq, Descriptor::log_gabor,
                                                                 Descriptor::db8, Descriptor::haar};

inline std::string_view to_string(Descriptor d) {
    switch (d) {
    case Descriptor::lbp: return "LBP";
    case Descriptor::lpq: return "LPQ";
    case Descriptor::log_gabor: return "LOGGABOR";
    case Descriptor::haar: return "HAAR";
    case Descriptor::db8: return "DB8";
    case Descriptor::fused: return "FUSED";
    }
    return "?";
}

inline Descriptor parse_descriptor(std::string_view name) {
    for (Descriptor d : {Descriptor::lbp, Descriptor::lpq, Descriptor::log_gabor, Descriptor::haar, Descriptor::db8,
                         Descriptor::fused}) {
        if (name == to_string(d)) return d;
    }
    fail(ErrorKind::parameter, "unknown descriptor '" + std::string(name) + "'");
}

/// Tagged real vector; values must be finite.
struct FeatureVector {
    Descriptor descriptor = Descriptor::fused;
    std::vector<double> values;

    std::size_t dim() const noexcept { return values.size(); }

    bool all_finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

} // namespace veintex
