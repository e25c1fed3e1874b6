#pragma once

#include <string>
#include <vector>

#include "dsim/common.hpp"

namespace dsim {

// Named collection of row vectors with provenance and a record of the
// transforms applied on the way in.
struct Dataset {
    std::string name;
    Matrix points;  // M×N, row-major
    std::string source;
    std::vector<std::string> preprocessing;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

// Throws if the dataset is empty or carries non-finite entries.
void validate_dataset(const Dataset& ds);

// Throws unless every dataset shares the same feature dimension.
void require_common_dim(const std::vector<Dataset>& datasets);

}  // namespace dsim
