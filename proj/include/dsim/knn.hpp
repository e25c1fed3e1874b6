#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsim/common.hpp"

namespace dsim {

enum class KnnMetric { euclidean, correlation };

struct KnnGraph {
    std::size_t n_points = 0;
    std::size_t k = 0;
    KnnMetric metric = KnnMetric::euclidean;
    std::vector<std::size_t> indices;  // n_points × k, ascending distance
    std::vector<double> distances;     // n_points × k
    // rows that are constant vectors under the correlation metric; they keep
    // distance 1 to everything instead of poisoning the graph with NaNs
    std::vector<std::size_t> degenerate_rows;

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {indices.data() + i * k, k};
    }
    std::span<const double> neighbor_distances(std::size_t i) const {
        return {distances.data() + i * k, k};
    }
};

// Exact brute-force k-nearest-neighbor search (no self-neighbors). Ties break
// by index so results are deterministic and identical for any thread count.
KnnGraph knn_search(const Matrix& points, std::size_t k, KnnMetric metric,
                    int threads = 1);

// Correlation distance 1 - Pearson(x, y); constant vectors are assigned
// distance 1 to every other point.
double correlation_distance(std::span<const double> x, std::span<const double> y);

}  // namespace dsim
