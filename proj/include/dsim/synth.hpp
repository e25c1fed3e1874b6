#pragma once

#include <cstdint>
#include <vector>

#include "dsim/dataset.hpp"

namespace dsim {

// K datasets drawn from a 2-component Gaussian mixture with shared identity
// covariance; dataset t has both component means translated by t*shift_step
// along one fixed random unit direction, so expected pairwise 1-D transport
// distance along that direction grows linearly in |t_i - t_j|. Deterministic
// per seed.
std::vector<Dataset> generate_drift_family(std::size_t k, std::size_t n, std::size_t m,
                                           double shift_step, std::uint64_t seed);

// The drift direction used by generate_drift_family for a given (n, seed);
// exposed so tests can project samples onto it.
std::vector<double> drift_direction(std::size_t n, std::uint64_t seed);

}  // namespace dsim
