#pragma once

#include <cstdint>
#include <vector>

#include "dsim/common.hpp"

namespace dsim {

struct SvdResult {
    Matrix U;               // M×r, orthonormal columns
    std::vector<double> S;  // r singular values, descending, nonnegative
    Matrix V;               // N×r, orthonormal columns
    std::size_t numerical_rank = 0;  // count of singular values above noise floor
};

// Top-r singular triples of A via one-sided Jacobi rotations applied on the
// side with fewer columns. Deterministic; column signs are fixed by making the
// largest-magnitude entry of each V column positive.
SvdResult truncated_svd(const Matrix& a, std::size_t r);

}  // namespace dsim
