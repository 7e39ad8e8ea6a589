#pragma once

#include <array>
#include <cstdint>

#include "veintex/features/feature_vector.hpp"
#include "veintex/image.hpp"

namespace veintex {

/// 8-bit LBP code of the 3x3 window centred at (x,y). Neighbours are read
/// clockwise from the top-left, which lands in the most significant bit; a
/// bit is set when the neighbour is >= the centre.
inline std::uint8_t lbp_code(const GrayImage& img, int x, int y) {
    static constexpr std::array<std::array<int, 2>, 8> offsets = {
        {{-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}}};
    const double centre = img(x, y);
    unsigned code = 0;
    for (const auto& [dx, dy] : offsets) code = (code << 1) | (img(x + dx, y + dy) >= centre ? 1u : 0u);
    return static_cast<std::uint8_t>(code);
}

/// Whole-image 256-bin histogram of interior LBP codes, normalized to sum 1.
inline FeatureVector lbp_descriptor(const GrayImage& img) {
    if (img.width() < 3 || img.height() < 3) fail(ErrorKind::size, "LBP needs an image of at least 3x3");
    std::array<std::size_t, 256> counts{};
    for (int y = 1; y + 1 < img.height(); ++y) {
        for (int x = 1; x + 1 < img.width(); ++x) ++counts[lbp_code(img, x, y)];
    }
    const double total = static_cast<double>(img.width() - 2) * (img.height() - 2);
    FeatureVector out{Descriptor::lbp, std::vector<double>(256)};
    for (int b = 0; b < 256; ++b) out.values[b] = static_cast<double>(counts[b]) / total;
    return out;
}

} // namespace veintex
