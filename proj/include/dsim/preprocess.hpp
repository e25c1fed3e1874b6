#pragma once

#include <cstdint>
#include <string>

#include "dsim/dataset.hpp"

namespace dsim {

enum class NormalizeMode { per_sample_unit_norm, global_standardize, none };

std::string to_string(NormalizeMode mode);
NormalizeMode normalize_mode_from_string(const std::string& s);

// per-sample-unit-norm: every row scaled to Euclidean norm 1 (all-zero rows
// are an error). global-standardize: each feature shifted/scaled to mean 0,
// stdev 1 (zero-variance features left at 0). none: identity.
Dataset normalize(const Dataset& ds, NormalizeMode mode);

// Uniform without-replacement sample of min(M, max_points) rows, deterministic
// per seed. Under the cap the dataset passes through untouched, original order.
Dataset subsample(const Dataset& ds, std::size_t max_points, std::uint64_t seed);

}  // namespace dsim
