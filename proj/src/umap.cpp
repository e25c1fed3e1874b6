#include "dsim/umap.hpp"

#include <algorithm>
#include <cmath>

#include "dsim/parallel.hpp"

namespace dsim {

void validate(const UmapParams& params) {
    if (params.n_neighbors < 2) throw Error("umap: n_neighbors must be >= 2");
    if (params.min_dist < 0.0) throw Error("umap: min_dist must be >= 0");
    if (params.spread <= 0.0) throw Error("umap: spread must be > 0");
    if (params.min_dist >= params.spread * 3.0)
        throw Error("umap: min_dist must be < 3*spread");
    if (params.out_dim < 1) throw Error("umap: out_dim must be >= 1");
}

double solve_smooth_knn_sigma(std::span<const double> dists, double rho, double target) {
    auto membership_sum = [&](double sigma) {
        double s = 0.0;
        for (double d : dists) s += std::exp(-std::max(0.0, d - rho) / sigma);
        return s;
    };

    double lo = 1e-8, hi = 1e4;
    if (membership_sum(lo) >= target) return lo;
    if (membership_sum(hi) <= target) return hi;
    for (int iter = 0; iter < 64; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double s = membership_sum(mid);
        if (std::abs(s - target) <= 1e-5) return mid;
        if (s < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> smooth_knn_calibrate(std::span<const double> knn_dists,
                                               std::size_t k) {
    if (knn_dists.size() < 2) throw Error("smooth_knn_calibrate: need k >= 2 distances");
    const double rho = knn_dists[0];
    const double target = std::log2(double(k));
    return {rho, solve_smooth_knn_sigma(knn_dists, rho, target)};
}

double fuzzy_weight(double dist, double rho, double sigma) {
    return std::exp(-std::max(0.0, dist - rho) / sigma);
}

double fuzzy_union(double a, double b) { return a + b - a * b; }

FuzzyGraph build_fuzzy_graph(const Matrix& points, const UmapParams& params, int threads) {
    validate(params);
    const std::size_t m = points.rows();
    if (m <= params.n_neighbors)
        throw Error("build_fuzzy_graph: need more points than n_neighbors");

    const KnnGraph knn = knn_search(points, params.n_neighbors, params.metric, threads);

    FuzzyGraph g;
    g.n_points = m;
    g.rho.resize(m);
    g.sigma.resize(m);

    // directed membership weights on the kNN edges
    struct Directed {
        std::size_t u, v;
        double w;
        bool forward;  // true when u -> v
    };
    std::vector<Directed> directed;
    directed.reserve(m * params.n_neighbors);
    for (std::size_t i = 0; i < m; ++i) {
        const auto [rho, sigma] = smooth_knn_calibrate(knn.neighbor_distances(i), knn.k);
        g.rho[i] = rho;
        g.sigma[i] = sigma;
        const auto nbr = knn.neighbors(i);
        const auto nbd = knn.neighbor_distances(i);
        for (std::size_t t = 0; t < knn.k; ++t) {
            const double w = fuzzy_weight(nbd[t], rho, sigma);
            const std::size_t j = nbr[t];
            directed.push_back({std::min(i, j), std::max(i, j), w, i < j});
        }
    }

    std::sort(directed.begin(), directed.end(), [](const Directed& a, const Directed& b) {
        if (a.u != b.u) return a.u < b.u;
        if (a.v != b.v) return a.v < b.v;
        return a.forward && !b.forward;
    });

    for (std::size_t i = 0; i < directed.size();) {
        const std::size_t u = directed[i].u, v = directed[i].v;
        double fwd = 0.0, bwd = 0.0;
        while (i < directed.size() && directed[i].u == u && directed[i].v == v) {
            (directed[i].forward ? fwd : bwd) = directed[i].w;
            ++i;
        }
        const double w = fuzzy_union(fwd, bwd);
        if (w > 0.0) g.edges.push_back({u, v, w});
    }
    return g;
}

std::pair<double, double> fit_curve_ab(double min_dist, double spread) {
    if (spread <= 0.0) throw Error("fit_curve_ab: spread must be > 0");

    constexpr int kGridPoints = 300;
    std::vector<double> xs(kGridPoints), ys(kGridPoints);
    for (int i = 0; i < kGridPoints; ++i) {
        const double d = 3.0 * spread * double(i) / double(kGridPoints - 1);
        xs[i] = d;
        ys[i] = d <= min_dist ? 1.0 : std::exp(-(d - min_dist) / spread);
    }

    // Levenberg-Marquardt on the two kernel parameters.
    double a = 1.0, b = 1.0;
    double lambda = 1e-3;
    auto sse = [&](double pa, double pb) {
        double s = 0.0;
        for (int i = 0; i < kGridPoints; ++i) {
            const double t = xs[i] > 0.0 ? std::pow(xs[i], 2.0 * pb) : 0.0;
            const double f = 1.0 / (1.0 + pa * t);
            s += (f - ys[i]) * (f - ys[i]);
        }
        return s;
    };

    double current = sse(a, b);
    for (int iter = 0; iter < 200; ++iter) {
        double jtj00 = 0.0, jtj01 = 0.0, jtj11 = 0.0, jtr0 = 0.0, jtr1 = 0.0;
        for (int i = 0; i < kGridPoints; ++i) {
            const double d = xs[i];
            const double t = d > 0.0 ? std::pow(d, 2.0 * b) : 0.0;
            const double denom = 1.0 + a * t;
            const double f = 1.0 / denom;
            const double r = f - ys[i];
            const double dfda = -t / (denom * denom);
            const double dfdb = d > 0.0 ? -2.0 * a * t * std::log(d) / (denom * denom) : 0.0;
            jtj00 += dfda * dfda;
            jtj01 += dfda * dfdb;
            jtj11 += dfdb * dfdb;
            jtr0 += dfda * r;
            jtr1 += dfdb * r;
        }
        const double m00 = jtj00 * (1.0 + lambda), m11 = jtj11 * (1.0 + lambda);
        const double det = m00 * m11 - jtj01 * jtj01;
        if (det == 0.0) break;
        const double da = (-jtr0 * m11 + jtr1 * jtj01) / det;
        const double db = (-jtr1 * m00 + jtr0 * jtj01) / det;
        const double na = std::max(1e-6, a + da);
        const double nb = std::max(1e-6, b + db);
        const double trial = sse(na, nb);
        if (trial < current) {
            a = na;
            b = nb;
            current = trial;
            lambda = std::max(lambda * 0.5, 1e-12);
            if (std::abs(da) < 1e-12 && std::abs(db) < 1e-12) break;
        } else {
            lambda *= 4.0;
            if (lambda > 1e12) break;
        }
    }
    return {a, b};
}

Matrix optimize_layout(const FuzzyGraph& graph, Matrix init, const UmapParams& params,
                       double a, double b) {
    const std::size_t m = graph.n_points;
    const std::size_t dim = init.cols();
    if (init.rows() != m) throw Error("optimize_layout: init row count mismatch");
    if (!init.all_finite()) throw Error("optimize_layout: non-finite init coordinates");
    if (params.n_epochs == 0) return init;

    // one directed edge per (head, tail) direction, streamed in fixed order
    struct DirectedEdge {
        std::size_t head, tail;
        double w;
    };
    std::vector<DirectedEdge> edges;
    edges.reserve(graph.edges.size() * 2);
    for (const auto& e : graph.edges) {
        edges.push_back({e.u, e.v, e.w});
        edges.push_back({e.v, e.u, e.w});
    }
    std::sort(edges.begin(), edges.end(), [](const DirectedEdge& x, const DirectedEdge& y) {
        if (x.head != y.head) return x.head < y.head;
        return x.tail < y.tail;
    });

    double w_max = 0.0;
    for (const auto& e : edges) w_max = std::max(w_max, e.w);
    std::vector<double> epochs_per_sample(edges.size());
    std::vector<double> epoch_of_next(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        epochs_per_sample[i] = w_max / edges[i].w;
        epoch_of_next[i] = epochs_per_sample[i];
    }

    Rng rng(derive_seed({params.seed, 0x756d61705f6e6567ULL}));
    auto clip4 = [](double x) { return std::clamp(x, -4.0, 4.0); };

    Matrix y = std::move(init);
    for (std::size_t epoch = 0; epoch < params.n_epochs; ++epoch) {
        const double alpha =
            params.learning_rate * (1.0 - double(epoch) / double(params.n_epochs));

        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (epoch_of_next[e] > double(epoch)) continue;
            epoch_of_next[e] += epochs_per_sample[e];

            const std::size_t u = edges[e].head, v = edges[e].tail;
            auto yu = y.row(u);
            auto yv = y.row(v);

            // attraction along the fitted kernel
            const double d2 = squared_distance(yu, yv);
            if (d2 > 0.0) {
                const double pd = std::pow(d2, b);
                const double coeff = (-2.0 * a * b * pd / d2) / (a * pd + 1.0);
                for (std::size_t c = 0; c < dim; ++c) {
                    const double g = clip4(coeff * (yu[c] - yv[c]));
                    yu[c] += g * alpha;
                    yv[c] -= g * alpha;
                }
            }

            // repulsion from sampled negatives (only the head moves)
            for (std::size_t t = 0; t < params.negative_samples; ++t) {
                const std::size_t k = static_cast<std::size_t>(rng.below(m));
                if (k == u) continue;
                auto yk = y.row(k);
                const double nd2 = squared_distance(yu, yk);
                if (nd2 > 0.0) {
                    const double pd = std::pow(nd2, b);
                    const double coeff = 2.0 * b / ((1e-3 + nd2) * (a * pd + 1.0));
                    for (std::size_t c = 0; c < dim; ++c)
                        yu[c] += clip4(coeff * (yu[c] - yk[c])) * alpha;
                } else {
                    // coincident distinct points: push apart hard
                    for (std::size_t c = 0; c < dim; ++c) yu[c] += 4.0 * alpha;
                }
            }
        }

        if (!y.all_finite())
            throw Error("optimize_layout: coordinates diverged at epoch " +
                        std::to_string(epoch) + "; reduce learning_rate");
    }
    return y;
}

Matrix umap_pipeline(const Matrix& corpus, const UmapParams& params, int threads,
                     std::pair<double, double>* curve_ab_out, FuzzyGraph* graph_out) {
    validate(params);
    FuzzyGraph graph = build_fuzzy_graph(corpus, params, threads);
    const auto [a, b] = fit_curve_ab(params.min_dist, params.spread);
    if (curve_ab_out) *curve_ab_out = {a, b};

    Rng init_rng(derive_seed({params.seed, 0x756d61705f696e69ULL}));
    Matrix init(corpus.rows(), params.out_dim);
    for (auto& v : init.data()) v = init_rng.normal() * 1e-2;

    Matrix coords = optimize_layout(graph, std::move(init), params, a, b);
    if (graph_out) *graph_out = std::move(graph);
    return coords;
}

}  // namespace dsim
