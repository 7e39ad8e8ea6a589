#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "veintex/dataset.hpp"
#include "veintex/fft.hpp"
#include "veintex/image.hpp"
#include "veintex/rng.hpp"

namespace veintex {

/// Separable Gaussian blur with half-sample symmetric boundaries; kernel
/// radius ceil(4 sigma).
inline GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0)) fail(ErrorKind::parameter, "blur sigma must be positive");
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) sum += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    for (double& v : kernel) v /= sum;

    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
        return i;
    };
    const int W = img.width(), H = img.height();
    std::vector<double> tmp(img.data().size()), out(img.data().size());
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += kernel[k + radius] * img(reflect(x + k, W), y);
            tmp[static_cast<std::size_t>(y) * W + x] = s;
        }
    }
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            double s = 0.0;
            for (int k = -radius; k <= radius; ++k) s += kernel[k + radius] * tmp[static_cast<std::size_t>(reflect(y + k, H)) * W + x];
            out[static_cast<std::size_t>(y) * W + x] = s;
        }
    }
    return clamped_image(W, H, std::move(out));
}

/// Spectral recipe of one synthetic texture class: a few oriented log-radial
/// bands shaping white noise.
struct TextureClass {
    struct Band {
        double frequency;   // cycles/pixel
        double orientation; // radians
        double weight;
    };
    std::vector<Band> bands;
    double isotropic_weight = 0.0;
};

struct SyntheticCorpusOptions {
    int classes = 20;
    int samples_per_class = 10;
    int size = 128;
    std::uint64_t seed = 0;
    int bands_per_class = 3;
    double orientation_jitter = 0.15; // radians, per sample
    double frequency_jitter = 0.12;   // relative, per sample
    double noise_level = 0.35;        // white noise relative to texture std
};

inline TextureClass random_texture_class(Rng& rng, int bands) {
    TextureClass tc;
    for (int b = 0; b < bands; ++b) {
        tc.bands.push_back({std::exp(rng.uniform(std::log(0.04), std::log(0.3))), rng.uniform(0.0, std::numbers::pi),
                            rng.uniform(0.3, 1.0)});
    }
    tc.isotropic_weight = rng.uniform(0.0, 0.4);
    return tc;
}

/**
 * Renders one realization of a texture class: fresh white noise filtered by
 * the class spectrum (with per-sample jitter of band orientation and
 * frequency), plus additive white noise, mapped to [0,1] by a z-score
 * squashed through a logistic.
 */
inline GrayImage render_texture(const TextureClass& tc, int size, Rng& rng, double orientation_jitter = 0.0,
                                double frequency_jitter = 0.0, double noise_level = 0.0) {
    using fft::cplx;
    const std::size_t n = static_cast<std::size_t>(size) * size;
    std::vector<cplx> field(n);
    for (auto& v : field) v = rng.normal();
    fft::transform2d(field, size, size, false);

    std::vector<TextureClass::Band> bands = tc.bands;
    for (auto& b : bands) {
        b.orientation += orientation_jitter * rng.normal();
        b.frequency *= std::exp(frequency_jitter * rng.normal());
    }
    constexpr double radial_sigma = 0.25; // in log-frequency
    constexpr double angular_sigma = 0.3;
    for (int y = 0; y < size; ++y) {
        const double fy = (y < size - size / 2 ? y : y - size) / static_cast<double>(size);
        for (int x = 0; x < size; ++x) {
            const double fx = (x < size - size / 2 ? x : x - size) / static_cast<double>(size);
            const double r = std::hypot(fx, fy);
            double gain = 0.0;
            if (r > 0.0) {
                const double theta = std::atan2(fy, fx);
                for (const auto& b : bands) {
                    const double lr = std::log(r / b.frequency);
                    // orientation is axial: compare modulo pi
                    double d = std::remainder(theta - b.orientation, std::numbers::pi);
                    gain += b.weight * std::exp(-lr * lr / (2 * radial_sigma * radial_sigma)) *
                            std::exp(-d * d / (2 * angular_sigma * angular_sigma));
                }
                const double li = std::log(r / 0.08);
                gain += tc.isotropic_weight * std::exp(-li * li / (2 * 0.6 * 0.6));
            }
            field[static_cast<std::size_t>(y) * size + x] *= gain;
        }
    }
    fft::transform2d(field, size, size, true);

    std::vector<double> v(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += v[i] = field[i].real();
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (double& x : v) {
        const double z = (sd > 0.0 ? (x - mean) / sd : 0.0) + noise_level * rng.normal();
        x = 1.0 / (1.0 + std::exp(-1.2 * z));
    }
    return GrayImage(size, size, std::move(v));
}

/// Seeded identification corpus: `classes` texture classes with
/// `samples_per_class` realizations each. Subject ids are zero-padded so
/// lexicographic and numeric order agree.
inline LabeledDataset<GrayImage> make_synthetic_corpus(const SyntheticCorpusOptions& opt) {
    if (opt.classes < 1 || opt.samples_per_class < 1 || opt.size < 8) {
        fail(ErrorKind::parameter, "synthetic corpus needs classes >= 1, samples >= 1, size >= 8");
    }
    Rng rng(opt.seed);
    LabeledDataset<GrayImage> ds;
    for (int c = 0; c < opt.classes; ++c) {
        char id[16];
        std::snprintf(id, sizeof id, "s%03d", c);
        ds.class_set.emplace_back(id);
        const TextureClass tc = random_texture_class(rng, opt.bands_per_class);
        for (int s = 0; s < opt.samples_per_class; ++s) {
            ds.push_back(SampleRecord{id, static_cast<std::size_t>(s), {}},
                         render_texture(tc, opt.size, rng, opt.orientation_jitter, opt.frequency_jitter, opt.noise_level));
        }
    }
    return ds;
}

/// Writes a corpus as `<root>/<subject>/<index>.png`.
inline void write_corpus(const LabeledDataset<GrayImage>& ds, const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto dir = root / ds.records[i].subject_id;
        fs::create_directories(dir);
        char name[32];
        std::snprintf(name, sizeof name, "%03zu.png", ds.records[i].sample_index);
        write_png(ds.payloads[i], dir / name);
    }
}

} // namespace veintex
