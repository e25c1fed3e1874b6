#include "dsim/knn.hpp"

#include <algorithm>
#include <cmath>

#include "dsim/parallel.hpp"

namespace dsim {

namespace {

bool is_constant_row(std::span<const double> r) {
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i] != r[0]) return false;
    return true;
}

}  // namespace

double correlation_distance(std::span<const double> x, std::span<const double> y) {
    if (is_constant_row(x) || is_constant_row(y)) return 1.0;
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
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 1.0;
    return 1.0 - sxy / std::sqrt(sxx * syy);
}

KnnGraph knn_search(const Matrix& points, std::size_t k, KnnMetric metric, int threads) {
    const std::size_t m = points.rows();
    if (m < 2) throw Error("knn_search: need at least 2 points");
    if (k < 1 || k >= m) throw Error("knn_search: require 1 <= k < number of points");

    KnnGraph g;
    g.n_points = m;
    g.k = k;
    g.metric = metric;
    g.indices.resize(m * k);
    g.distances.resize(m * k);

    // Precompute centered rows for the correlation metric; constant rows are
    // flagged once up front.
    Matrix centered;
    std::vector<double> cnorm;
    std::vector<char> constant;
    if (metric == KnnMetric::correlation) {
        centered = Matrix(m, points.cols());
        cnorm.resize(m);
        constant.resize(m, 0);
        for (std::size_t i = 0; i < m; ++i) {
            auto r = points.row(i);
            if (is_constant_row(r)) {
                constant[i] = 1;
                g.degenerate_rows.push_back(i);
                continue;
            }
            double mean = 0.0;
            for (double v : r) mean += v;
            mean /= double(r.size());
            double ss = 0.0;
            for (std::size_t j = 0; j < r.size(); ++j) {
                centered(i, j) = r[j] - mean;
                ss += centered(i, j) * centered(i, j);
            }
            cnorm[i] = std::sqrt(ss);
        }
    }

    auto distance = [&](std::size_t i, std::size_t j) -> double {
        if (metric == KnnMetric::euclidean) return euclidean_distance(points.row(i), points.row(j));
        if (constant[i] || constant[j]) return 1.0;
        const double d = 1.0 - dot(centered.row(i), centered.row(j)) / (cnorm[i] * cnorm[j]);
        return d < 0.0 ? 0.0 : d;  // clamp fp noise on perfectly correlated rows
    };

    parallel_for(m, threads, [&](std::size_t i) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(m - 1);
        for (std::size_t j = 0; j < m; ++j) {
            if (j == i) continue;
            cand.emplace_back(distance(i, j), j);
        }
        auto kth = cand.begin() + static_cast<std::ptrdiff_t>(k);
        std::nth_element(cand.begin(), kth - 1, cand.end());
        std::sort(cand.begin(), kth);
        for (std::size_t t = 0; t < k; ++t) {
            g.distances[i * k + t] = cand[t].first;
            g.indices[i * k + t] = cand[t].second;
        }
    });
    return g;
}

}  // namespace dsim
