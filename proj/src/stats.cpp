#include "dsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsim {

double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw Error("pearson: length mismatch");
    if (x.size() < 2) throw Error("pearson: need at least 2 points");
    const std::size_t n = x.size();

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);

    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw Error("pearson: undefined correlation (constant input)");
    double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * (double(i) + double(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    return pearson(rx, ry);
}

std::pair<std::vector<double>, std::vector<double>> histogram_pair(
    std::span<const double> x, std::span<const double> y, std::size_t bins, double eps) {
    if (bins < 2) throw Error("histogram_pair: bins must be >= 2");
    if (x.empty() || y.empty()) throw Error("histogram_pair: empty sample");

    double lo = x[0], hi = x[0];
    for (double v : x) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    for (double v : y) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }

    if (lo == hi) return {{1.0}, {1.0}};

    const double width = (hi - lo) / double(bins);
    auto fill = [&](std::span<const double> s) {
        std::vector<double> p(bins, 0.0);
        for (double v : s) {
            auto b = static_cast<std::size_t>((v - lo) / width);
            if (b >= bins) b = bins - 1;  // right edge goes to the last bin
            p[b] += 1.0;
        }
        double total = 0.0;
        for (double c : p) total += c;
        for (double& c : p) c = c / total + eps;
        double smoothed = 1.0 + eps * double(bins);
        for (double& c : p) c /= smoothed;
        return p;
    };
    return {fill(x), fill(y)};
}

QuantileFunction::QuantileFunction(std::span<const double> samples)
    : sorted_(samples.begin(), samples.end()) {
    if (sorted_.empty()) throw Error("quantile_function: empty sample");
    std::sort(sorted_.begin(), sorted_.end());
}

double QuantileFunction::operator()(double t) const {
    const double m = double(sorted_.size());
    auto idx = static_cast<long long>(std::ceil(t * m)) - 1;
    if (idx < 0) idx = 0;
    if (idx >= static_cast<long long>(sorted_.size()))
        idx = static_cast<long long>(sorted_.size()) - 1;
    return sorted_[static_cast<std::size_t>(idx)];
}

}  // namespace dsim
