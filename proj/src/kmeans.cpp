#include "dsim/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsim {

namespace {

Matrix plusplus_seed(const Matrix& points, std::size_t k, Rng& rng) {
    const std::size_t m = points.rows(), n = points.cols();
    Matrix centroids(k, n);
    std::vector<double> best_d2(m, std::numeric_limits<double>::infinity());

    std::size_t first = static_cast<std::size_t>(rng.below(m));
    for (std::size_t j = 0; j < n; ++j) centroids(0, j) = points(first, j);

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d2 = squared_distance(points.row(i), centroids.row(c - 1));
            best_d2[i] = std::min(best_d2[i], d2);
            total += best_d2[i];
        }
        std::size_t chosen = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            chosen = m - 1;
            for (std::size_t i = 0; i < m; ++i) {
                acc += best_d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = static_cast<std::size_t>(rng.below(m));
        }
        for (std::size_t j = 0; j < n; ++j) centroids(c, j) = points(chosen, j);
    }
    return centroids;
}

KMeansResult lloyd(const Matrix& points, std::size_t k, Rng& rng, int max_iters) {
    const std::size_t m = points.rows(), n = points.cols();
    KMeansResult res;
    res.centroids = plusplus_seed(points, k, rng);
    res.labels.assign(m, 0);

    std::vector<std::size_t> counts(k);
    for (int iter = 0; iter < max_iters; ++iter) {
        // assignment step
        bool changed = false;
        double inertia = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d2 = squared_distance(points.row(i), res.centroids.row(c));
                if (d2 < best) {
                    best = d2;
                    arg = c;
                }
            }
            if (arg != res.labels[i]) changed = true;
            res.labels[i] = arg;
            inertia += best;
        }
        res.inertia_trace.push_back(inertia);
        res.inertia = inertia;
        if (!changed && iter > 0) break;

        // update step
        counts.assign(k, 0);
        Matrix sums(k, n);
        for (std::size_t i = 0; i < m; ++i) {
            ++counts[res.labels[i]];
            auto row = points.row(i);
            for (std::size_t j = 0; j < n; ++j) sums(res.labels[i], j) += row[j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // adopt the point currently farthest from its centroid
                double worst = -1.0;
                std::size_t arg = 0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double d2 =
                        squared_distance(points.row(i), res.centroids.row(res.labels[i]));
                    if (d2 > worst && counts[res.labels[i]] > 1) {
                        worst = d2;
                        arg = i;
                    }
                }
                --counts[res.labels[arg]];
                for (std::size_t j = 0; j < n; ++j) {
                    sums(res.labels[arg], j) -= points(arg, j);
                    sums(c, j) = points(arg, j);
                }
                res.labels[arg] = c;
                counts[c] = 1;
            }
        }
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t j = 0; j < n; ++j)
                res.centroids(c, j) = sums(c, j) / double(counts[c]);
    }

    // final inertia against the final centroids
    double inertia = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        inertia += squared_distance(points.row(i), res.centroids.row(res.labels[i]));
    res.inertia = inertia;
    return res;
}

}  // namespace

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, int n_init,
                    int max_iters) {
    const std::size_t m = points.rows();
    if (k < 1) throw Error("kmeans: k must be >= 1");
    if (k > m) throw Error("kmeans: k=" + std::to_string(k) + " exceeds point count " +
                           std::to_string(m));

    KMeansResult best;
    bool have = false;
    for (int restart = 0; restart < n_init; ++restart) {
        Rng rng(derive_seed({seed, 0x6b6d65616e73ULL, std::uint64_t(restart)}));
        KMeansResult cur = lloyd(points, k, rng, max_iters);
        if (!have || cur.inertia < best.inertia) {
            best = std::move(cur);
            have = true;
        }
    }
    return best;
}

}  // namespace dsim
