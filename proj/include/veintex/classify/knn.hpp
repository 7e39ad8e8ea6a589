#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

#include "veintex/classify/distance.hpp"

namespace veintex {

/// Labels are indices into the caller's class_set.
struct KnnModel {
    std::size_t k = 5;
    DistanceMetric metric = DistanceMetric::euclidean;
    std::vector<std::vector<double>> vectors;
    std::vector<std::size_t> labels;
    std::size_t num_classes = 0;

    KnnModel(std::size_t k, DistanceMetric metric, std::vector<std::vector<double>> vectors,
             std::vector<std::size_t> labels, std::size_t num_classes)
        : k(k), metric(metric), vectors(std::move(vectors)), labels(std::move(labels)), num_classes(num_classes) {
        if (k == 0) fail(ErrorKind::parameter, "k must be positive");
        if (this->vectors.size() != this->labels.size()) fail(ErrorKind::parameter, "vectors and labels differ in length");
        if (k > this->vectors.size()) {
            fail(ErrorKind::parameter, "k = " + std::to_string(k) + " exceeds the " + std::to_string(this->vectors.size()) +
                                           " training vectors");
        }
        for (std::size_t label : this->labels) {
            if (label >= num_classes) fail(ErrorKind::data, "training label outside the class set");
        }
    }
};

/**
 * Plurality vote among the k nearest training vectors.
 *
 * Neighbours are ordered by (distance, training index). Classes tied on vote
 * count are separated by the smaller summed neighbour distance, then by the
 * lower class index.
 */
inline std::size_t knn_predict(const KnnModel& model, std::span<const double> query) {
    const std::size_t n = model.vectors.size();
    std::vector<double> dist(n);
    for (std::size_t i = 0; i < n; ++i) dist[i] = distance(model.vectors[i], query, model.metric);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto closer = [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(model.k), order.end(), closer);

    std::vector<std::size_t> votes(model.num_classes, 0);
    std::vector<double> summed(model.num_classes, 0.0);
    for (std::size_t r = 0; r < model.k; ++r) {
        const std::size_t i = order[r];
        ++votes[model.labels[i]];
        summed[model.labels[i]] += dist[i];
    }

    std::size_t best = model.num_classes;
    for (std::size_t c = 0; c < model.num_classes; ++c) {
        if (votes[c] == 0) continue;
        if (best == model.num_classes || votes[c] > votes[best] || (votes[c] == votes[best] && summed[c] < summed[best])) {
            best = c;
        }
    }
    return best;
}

} // namespace veintex
