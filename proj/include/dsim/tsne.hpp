#pragma once

#include <cstdint>
#include <vector>

#include "dsim/common.hpp"

namespace dsim {

struct TsneParams {
    double perplexity = 30.0;
    std::size_t out_dim = 2;
    std::size_t iters = 1000;
    double learning_rate = 200.0;
    std::uint64_t seed = 0;
};

// Exact O(M^2) t-SNE: per-point bandwidths found by binary search against the
// perplexity target, symmetrized affinities, gradient descent with momentum
// 0.5 -> 0.8 at iteration 250 and 12x early exaggeration for the first 250 of
// the run. Deterministic per seed. kl_trace, when given, receives the KL
// objective (true affinities) at every iteration.
Matrix tsne_embed(const Matrix& points, const TsneParams& params,
                  std::vector<double>* kl_trace = nullptr);

}  // namespace dsim
