#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veintex/features/feature_vector.hpp"

namespace veintex {

/// Per-dimension mean and sample standard deviation (divisor N-1) fitted on
/// training vectors. Dimensions with zero spread are listed in `dropped` and
/// normalize to 0.
struct ZScoreParams {
    std::vector<double> mu;
    std::vector<double> sigma;
    std::vector<std::size_t> dropped;

    std::size_t dim() const noexcept { return mu.size(); }

    friend bool operator==(const ZScoreParams&, const ZScoreParams&) = default;
};

inline ZScoreParams fit_zscore(const std::vector<std::vector<double>>& train) {
    if (train.size() < 2) fail(ErrorKind::fit, "z-score fit needs at least two training vectors");
    const std::size_t dim = train.front().size();
    for (const auto& x : train) {
        if (x.size() != dim) fail(ErrorKind::fit, "training vectors differ in dimension");
    }
    const double n = static_cast<double>(train.size());
    ZScoreParams p{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), {}};
    for (const auto& x : train) {
        for (std::size_t j = 0; j < dim; ++j) p.mu[j] += x[j];
    }
    for (double& m : p.mu) m /= n;
    for (const auto& x : train) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = x[j] - p.mu[j];
            p.sigma[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < dim; ++j) {
        // Exact-equality test for constant columns.
        bool constant = true;
        for (const auto& x : train) constant = constant && x[j] == train.front()[j];
        if (constant) {
            p.mu[j] = train.front()[j];
            p.sigma[j] = 0.0;
            p.dropped.push_back(j);
        } else {
            p.sigma[j] = std::sqrt(p.sigma[j] / (n - 1.0));
        }
    }
    if (dim > 0 && p.dropped.size() == dim) warn("z-score fit: every dimension has zero variance");
    return p;
}

inline std::vector<double> apply_zscore(std::span<const double> x, const ZScoreParams& p) {
    if (x.size() != p.dim()) {
        fail(ErrorKind::parameter, "z-score dimension mismatch: " + std::to_string(x.size()) + " vs " +
                                       std::to_string(p.dim()));
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = p.sigma[j] == 0.0 ? 0.0 : (x[j] - p.mu[j]) / p.sigma[j];
    return out;
}

struct FusedPart {
    Descriptor descriptor;
    ZScoreParams params;
};

/// Ordered parts of a fused vector; order is significant.
struct FusedSchema {
    std::vector<FusedPart> parts;

    std::size_t total_dim() const {
        std::size_t d = 0;
        for (const auto& p : parts) d += p.params.dim();
        return d;
    }
};

/// Normalizes every part with its own parameters and concatenates them.
inline FeatureVector fuse_concat(const std::vector<std::pair<std::span<const double>, const ZScoreParams*>>& parts) {
    if (parts.size() < 2) fail(ErrorKind::parameter, "fusion needs at least two parts");
    FeatureVector out{Descriptor::fused, {}};
    for (const auto& [x, p] : parts) {
        const auto z = apply_zscore(x, *p);
        out.values.insert(out.values.end(), z.begin(), z.end());
    }
    return out;
}

/// Fuses one sample given one vector per schema part, in schema order.
inline FeatureVector fuse_concat(const FusedSchema& schema, const std::vector<const FeatureVector*>& vectors) {
    if (vectors.size() != schema.parts.size()) fail(ErrorKind::parameter, "part count does not match the schema");
    std::vector<std::pair<std::span<const double>, const ZScoreParams*>> parts;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i]->descriptor != schema.parts[i].descriptor) {
            fail(ErrorKind::parameter, "part " + std::to_string(i) + " is " + std::string(to_string(vectors[i]->descriptor)) +
                                           ", schema expects " + std::string(to_string(schema.parts[i].descriptor)));
        }
        parts.emplace_back(vectors[i]->values, &schema.parts[i].params);
    }
    return fuse_concat(parts);
}

inline nlohmann::json to_json(const FusedSchema& schema) {
    nlohmann::json parts = nlohmann::json::array();
    for (const auto& p : schema.parts) {
        parts.push_back({{"descriptor", to_string(p.descriptor)},
                         {"dim", p.params.dim()},
                         {"mu", p.params.mu},
                         {"sigma", p.params.sigma},
                         {"dropped", p.params.dropped}});
    }
    return {{"total_dim", schema.total_dim()}, {"parts", parts}};
}

inline FusedSchema schema_from_json(const nlohmann::json& j) {
    try {
        FusedSchema schema;
        for (const auto& pj : j.at("parts")) {
            FusedPart part{parse_descriptor(pj.at("descriptor").get<std::string>()),
                           ZScoreParams{pj.at("mu").get<std::vector<double>>(), pj.at("sigma").get<std::vector<double>>(),
                                        pj.at("dropped").get<std::vector<std::size_t>>()}};
            if (part.params.mu.size() != part.params.sigma.size()) fail(ErrorKind::format, "mu/sigma length mismatch");
            schema.parts.push_back(std::move(part));
        }
        if (j.at("total_dim").get<std::size_t>() != schema.total_dim()) fail(ErrorKind::format, "total_dim mismatch");
        return schema;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::format, std::string("malformed fused schema: ") + e.what());
    }
}

} // namespace veintex
