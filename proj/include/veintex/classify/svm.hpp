#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "veintex/classify/kernel.hpp"
#include "veintex/rng.hpp"

namespace veintex {

struct SvmParams {
    double C = 10.0;
    double tol = 1e-3;
    int max_passes = 10;
};

/// One two-class machine: f(x) = sum_i coef_i K(sv_i, x) + bias, where
/// coef_i = alpha_i * y_i. f >= 0 votes for `positive`, else `negative`.
struct BinaryMachine {
    std::size_t positive = 0;
    std::size_t negative = 0;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef;
    double bias = 0.0;
    std::size_t iterations = 0;

    double decision(std::span<const double> x, const KernelSpec& kernel) const {
        double f = bias;
        for (std::size_t i = 0; i < support_vectors.size(); ++i) f += coef[i] * kernel_eval(support_vectors[i], x, kernel);
        return f;
    }
};

/// One-vs-one ensemble; machines are ordered by (positive, negative) class
/// index with positive < negative.
struct TrainedSvm {
    std::vector<std::string> class_set;
    KernelSpec kernel;
    SvmParams params;
    std::vector<BinaryMachine> machines;
};

/// Dual solution of a binary problem, before support-vector extraction.
struct BinarySolution {
    std::vector<double> alpha;
    double bias = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

inline constexpr double kTau = 1e-12;

/**
 * Soft-margin dual by two-variable analytic updates. Each step picks the
 * maximal-violating i and the j giving the largest second-order decrease of
 * the dual objective, then solves the two-variable problem in closed form
 * under the box and equality constraints.
 *
 * Stops once max_{I_up} -y G - min_{I_low} -y G <= tol, which leaves every
 * training point within tol of its KKT condition in terms of y f(x). The
 * iteration budget is max_passes sweeps of max(n*n, 1000) updates each.
 */
inline BinarySolution solve_binary_dual(const std::vector<std::vector<double>>& gram, const std::vector<int>& y,
                                        const SvmParams& params) {
    const std::size_t n = y.size();
    const double C = params.C;
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);

    auto Q = [&](std::size_t a, std::size_t b) { return y[a] * y[b] * gram[a][b]; };
    auto in_up = [&](std::size_t t) { return (y[t] == 1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0); };
    auto in_low = [&](std::size_t t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < C); };

    const std::size_t sweep = std::max<std::size_t>(1000, n * n);
    const std::size_t budget = static_cast<std::size_t>(params.max_passes) * sweep;

    double gap = 0.0;
    std::size_t iter = 0;
    for (;; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (in_up(t) && -y[t] * grad[t] > gmax) {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t j = n;
        double best_obj = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (!in_low(t)) continue;
            const double score = -y[t] * grad[t];
            gmin = std::min(gmin, score);
            if (i == n) continue;
            const double b = gmax - score;
            if (b > 0.0) {
                double a = gram[i][i] + gram[t][t] - 2.0 * gram[i][t];
                if (a <= 0.0) a = kTau;
                const double obj = -(b * b) / a;
                if (obj < best_obj) {
                    best_obj = obj;
                    j = t;
                }
            }
        }
        gap = gmax - gmin;
        if (i == n || j == n || gap <= params.tol) break;
        if (iter >= budget) {
            throw ConvergenceError("SMO did not converge within " + std::to_string(params.max_passes) +
                                       " passes; KKT gap " + std::to_string(gap),
                                   gap);
        }

        const double old_i = alpha[i], old_j = alpha[j];
        if (y[i] != y[j]) {
            double quad = gram[i][i] + gram[j][j] - 2.0 * gram[i][j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = gram[i][i] + gram[j][j] - 2.0 * gram[i][j];
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
        for (std::size_t t = 0; t < n; ++t) grad[t] += Q(i, t) * di + Q(j, t) * dj;
    }

    // Bias: mean of -y G over free variables, else the midpoint of the
    // feasible interval.
    double free_sum = 0.0;
    std::size_t free_count = 0;
    double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
        const double score = -y[t] * grad[t];
        if (alpha[t] > 0.0 && alpha[t] < C) {
            free_sum += score;
            ++free_count;
        } else {
            if (in_up(t)) lb = std::max(lb, score);
            if (in_low(t)) ub = std::min(ub, score);
        }
    }
    double bias = 0.0;
    if (free_count > 0) {
        bias = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(ub) && std::isfinite(lb)) {
        bias = 0.5 * (ub + lb);
    } else if (std::isfinite(ub)) {
        bias = ub;
    } else if (std::isfinite(lb)) {
        bias = lb;
    }
    return {std::move(alpha), bias, iter};
}

inline void check_finite(const std::vector<double>& v) {
    for (double x : v) {
        if (!std::isfinite(x)) fail(ErrorKind::data, "non-finite feature value");
    }
}

} // namespace detail

/// Gram matrix K[i][j] = kernel(x_i, x_j); filled symmetrically.
inline std::vector<std::vector<double>> gram_matrix(const std::vector<std::vector<double>>& xs, const KernelSpec& spec) {
    const std::size_t n = xs.size();
    std::vector<std::vector<double>> K(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) K[i][j] = K[j][i] = kernel_eval(xs[i], xs[j], spec);
    }
    return K;
}

/// Trains one binary machine on +1/-1 labels and returns the full dual.
inline BinarySolution svm_train_binary(const std::vector<std::vector<double>>& xs, const std::vector<int>& y,
                                       const KernelSpec& spec, const SvmParams& params) {
    spec.validate();
    if (!(params.C > 0.0) || !(params.tol > 0.0) || params.max_passes < 1) {
        fail(ErrorKind::parameter, "SVM needs C > 0, tol > 0 and max_passes >= 1");
    }
    if (xs.size() != y.size()) fail(ErrorKind::parameter, "vectors and labels differ in length");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == -1) has_neg = true;
        else fail(ErrorKind::parameter, "binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) fail(ErrorKind::training, "binary SVM needs both classes");
    for (const auto& x : xs) detail::check_finite(x);
    return detail::solve_binary_dual(gram_matrix(xs, spec), y, params);
}

/**
 * One-vs-one soft-margin SVM. Labels index into class_set; every class needs
 * at least one sample and at least two classes must be present.
 */
inline TrainedSvm svm_train(const std::vector<std::vector<double>>& xs, const std::vector<std::size_t>& labels,
                            std::vector<std::string> class_set, const KernelSpec& spec, const SvmParams& params = {}) {
    if (xs.size() != labels.size()) fail(ErrorKind::parameter, "vectors and labels differ in length");
    const std::size_t num_classes = class_set.size();
    if (num_classes < 2) fail(ErrorKind::training, "SVM training needs at least two classes");
    std::vector<std::vector<std::size_t>> members(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= num_classes) fail(ErrorKind::data, "label outside the class set");
        members[labels[i]].push_back(i);
    }
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (members[c].empty()) fail(ErrorKind::training, "class '" + class_set[c] + "' has no training samples");
    }
    if (!xs.empty()) {
        const std::size_t dim = xs.front().size();
        for (const auto& x : xs) {
            if (x.size() != dim) fail(ErrorKind::parameter, "training vectors differ in dimension");
            detail::check_finite(x);
        }
    }

    TrainedSvm model{std::move(class_set), spec, params, {}};
    for (std::size_t a = 0; a < num_classes; ++a) {
        for (std::size_t b = a + 1; b < num_classes; ++b) {
            std::vector<std::vector<double>> sub;
            std::vector<int> y;
            for (std::size_t i : members[a]) {
                sub.push_back(xs[i]);
                y.push_back(1);
            }
            for (std::size_t i : members[b]) {
                sub.push_back(xs[i]);
                y.push_back(-1);
            }
            auto sol = svm_train_binary(sub, y, spec, params);
            BinaryMachine m{a, b, {}, {}, sol.bias, sol.iterations};
            for (std::size_t i = 0; i < sub.size(); ++i) {
                if (sol.alpha[i] > 0.0) {
                    m.support_vectors.push_back(sub[i]);
                    m.coef.push_back(sol.alpha[i] * y[i]);
                }
            }
            model.machines.push_back(std::move(m));
        }
    }
    return model;
}

/**
 * Majority vote over the pairwise machines. Classes tied on votes are
 * separated by the larger sum of |f| over the machines that voted for them,
 * then by the lower class index.
 */
inline std::size_t svm_predict(const TrainedSvm& model, std::span<const double> query) {
    const std::size_t num_classes = model.class_set.size();
    std::vector<std::size_t> votes(num_classes, 0);
    std::vector<double> confidence(num_classes, 0.0);
    for (const auto& m : model.machines) {
        if (!m.support_vectors.empty() && m.support_vectors.front().size() != query.size()) {
            fail(ErrorKind::parameter, "query dimension does not match the support vectors");
        }
        const double f = m.decision(query, model.kernel);
        const std::size_t winner = f >= 0.0 ? m.positive : m.negative;
        ++votes[winner];
        confidence[winner] += std::abs(f);
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < num_classes; ++c) {
        if (votes[c] > votes[best] || (votes[c] == votes[best] && confidence[c] > confidence[best])) best = c;
    }
    return best;
}

/**
 * Median of the pairwise Euclidean distances over pairs of distinct vectors
 * (zero-distance pairs are excluded). Above 2000 vectors a seeded subsample
 * of 2000 is used.
 */
inline double sigma_median_heuristic(const std::vector<std::vector<double>>& xs, std::uint64_t seed = 0) {
    constexpr std::size_t kMaxSample = 2000;
    std::vector<std::size_t> idx(xs.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (idx.size() > kMaxSample) {
        Rng rng(seed);
        shuffle(idx, rng);
        idx.resize(kMaxSample);
        std::sort(idx.begin(), idx.end());
    }
    std::vector<double> d;
    d.reserve(idx.size() * (idx.size() - (idx.empty() ? 0 : 1)) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a) {
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            const double v = std::sqrt(squared_euclidean(xs[idx[a]], xs[idx[b]]));
            if (v > 0.0) d.push_back(v);
        }
    }
    if (d.empty()) fail(ErrorKind::degenerate_input, "median heuristic needs at least two distinct vectors");
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    const double upper = d[mid];
    if (d.size() % 2 == 1) return upper;
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

// ---- model dump ---------------------------------------------------------

inline nlohmann::json kernel_to_json(const KernelSpec& k) {
    if (k.kind == KernelSpec::Kind::rbf) return {{"kind", "rbf"}, {"sigma", k.sigma}};
    return {{"kind", "polynomial"}, {"degree", k.degree}, {"offset", k.offset}};
}

inline KernelSpec kernel_from_json(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rbf") return KernelSpec::rbf(j.at("sigma").get<double>());
    if (kind == "polynomial") return KernelSpec::polynomial(j.at("degree").get<int>(), j.at("offset").get<double>());
    fail(ErrorKind::parameter, "unknown kernel kind '" + kind + "'");
}

/// Self-describing JSON; doubles are written in round-trip form so a reload
/// predicts bit-identically.
inline nlohmann::json to_json(const TrainedSvm& model) {
    nlohmann::json machines = nlohmann::json::array();
    for (const auto& m : model.machines) {
        machines.push_back({{"positive", m.positive},
                            {"negative", m.negative},
                            {"bias", m.bias},
                            {"coef", m.coef},
                            {"support_vectors", m.support_vectors}});
    }
    return {{"type", "svm-ovo"},
            {"class_set", model.class_set},
            {"kernel", kernel_to_json(model.kernel)},
            {"C", model.params.C},
            {"tol", model.params.tol},
            {"max_passes", model.params.max_passes},
            {"machines", machines}};
}

inline TrainedSvm svm_from_json(const nlohmann::json& j) {
    try {
        if (j.at("type").get<std::string>() != "svm-ovo") fail(ErrorKind::format, "not an svm-ovo model");
        TrainedSvm model;
        model.class_set = j.at("class_set").get<std::vector<std::string>>();
        model.kernel = kernel_from_json(j.at("kernel"));
        model.params = SvmParams{j.at("C").get<double>(), j.at("tol").get<double>(), j.at("max_passes").get<int>()};
        for (const auto& mj : j.at("machines")) {
            BinaryMachine m;
            m.positive = mj.at("positive").get<std::size_t>();
            m.negative = mj.at("negative").get<std::size_t>();
            m.bias = mj.at("bias").get<double>();
            m.coef = mj.at("coef").get<std::vector<double>>();
            m.support_vectors = mj.at("support_vectors").get<std::vector<std::vector<double>>>();
            if (m.coef.size() != m.support_vectors.size()) fail(ErrorKind::format, "coef/support vector count mismatch");
            model.machines.push_back(std::move(m));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::format, std::string("malformed svm model: ") + e.what());
    }
}

} // namespace veintex
