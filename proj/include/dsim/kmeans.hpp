#pragma once

#include <cstdint>
#include <vector>

#include "dsim/common.hpp"

namespace dsim {

struct KMeansResult {
    Matrix centroids;                  // k×N
    std::vector<std::size_t> labels;   // one per point, in [0, k)
    double inertia = 0.0;              // sum of squared distances to assigned centroid
    std::vector<double> inertia_trace; // per-iteration inertia of the winning restart
};

// Lloyd's algorithm with k-means++ seeding, best of n_init restarts by
// inertia. Converges when assignments stop changing or after max_iters.
// Deterministic per seed.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    int n_init = 4, int max_iters = 100);

}  // namespace dsim
