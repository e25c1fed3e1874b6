#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dsim/common.hpp"
#include "dsim/knn.hpp"

namespace dsim {

struct UmapParams {
    std::size_t n_neighbors = 15;
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t out_dim = 2;
    std::size_t n_epochs = 300;
    double learning_rate = 1.0;
    std::size_t negative_samples = 5;
    KnnMetric metric = KnnMetric::correlation;
    std::uint64_t seed = 0;
};

void validate(const UmapParams& params);

// Symmetric fuzzy nearest-neighbor graph: edge weights are membership
// strengths in (0, 1], stored once per unordered pair.
struct FuzzyGraph {
    struct Edge {
        std::size_t u, v;
        double w;
    };
    std::size_t n_points = 0;
    std::vector<Edge> edges;    // sorted by (u, v), u < v
    std::vector<double> rho;    // per-point distance to nearest neighbor
    std::vector<double> sigma;  // per-point smooth-kNN bandwidth
};

// Smooth-kNN calibration: rho is the distance to the nearest neighbor; sigma
// solves sum_i exp(-max(0, d_i - rho)/sigma) = log2(k) by bisection over
// [1e-8, 1e4], clamping to a bracket edge when the target is unreachable.
std::pair<double, double> smooth_knn_calibrate(std::span<const double> knn_dists,
                                               std::size_t k);

// The scalar solve behind smooth_knn_calibrate, exposed with an explicit
// target for direct testing.
double solve_smooth_knn_sigma(std::span<const double> dists, double rho, double target);

double fuzzy_weight(double dist, double rho, double sigma);

// Fuzzy set union a + b - a*b used to symmetrize directed membership weights.
double fuzzy_union(double a, double b);

FuzzyGraph build_fuzzy_graph(const Matrix& points, const UmapParams& params,
                             int threads = 1);

// Least-squares fit of the low-dimensional kernel 1/(1 + a d^(2b)) to the
// piecewise target (1 for d <= min_dist, else exp(-(d - min_dist)/spread))
// over 300 evenly spaced d in [0, 3*spread].
std::pair<double, double> fit_curve_ab(double min_dist, double spread);

// Stochastic layout optimization: edges sampled proportionally to weight,
// negative_samples random repulsions per positive event, per-coordinate
// gradients clipped to [-4, 4], learning rate annealed linearly to zero.
// Single sequential edge stream, so a fixed seed gives identical output.
Matrix optimize_layout(const FuzzyGraph& graph, Matrix init, const UmapParams& params,
                       double a, double b);

// Full pipeline over an already-assembled corpus matrix; returns one
// coordinate row per corpus row. curve_ab_out, when given, receives the fitted
// kernel constants, graph_out the fuzzy graph.
Matrix umap_pipeline(const Matrix& corpus, const UmapParams& params, int threads,
                     std::pair<double, double>* curve_ab_out = nullptr,
                     FuzzyGraph* graph_out = nullptr);

}  // namespace dsim
