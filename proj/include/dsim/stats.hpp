#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dsim/common.hpp"

namespace dsim {

// Sample Pearson correlation coefficient. Throws Error if either input is
// constant (the coefficient is undefined) or the lengths differ / are < 2.
double pearson(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// Two histograms over shared equal-width bins spanning [min(x∪y), max(x∪y)],
// each normalized to sum 1, with additive smoothing eps applied and then
// renormalized. A degenerate range (all values equal) collapses to the
// single-bin convention p = q = (1).
std::pair<std::vector<double>, std::vector<double>> histogram_pair(
    std::span<const double> x, std::span<const double> y, std::size_t bins,
    double eps = 1e-10);

// Left-continuous empirical quantile function built from a sample:
// F^{-1}(t) = smallest sample value whose ECDF reaches t; t = 0 maps to the
// minimum sample.
class QuantileFunction {
public:
    explicit QuantileFunction(std::span<const double> samples);

    double operator()(double t) const;

    const std::vector<double>& sorted_samples() const { return sorted_; }

private:
    std::vector<double> sorted_;
};

}  // namespace dsim
