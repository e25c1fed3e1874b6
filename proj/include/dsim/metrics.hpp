#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsim/dataset.hpp"

namespace dsim {

enum class MetricId {
    pairwise_euclidean,
    clustered_euclidean,
    centroid_euclidean,
    cosine,
    kl,
    jensen_shannon,
    hellinger,
    wasserstein,
    kolmogorov_smirnov,
    total_variation,
    mmd_linear,
    mmd_rbf,
    energy,
    grassmann,
    chordal,
    asimov,
    pad,
};

std::string to_string(MetricId id);
MetricId metric_from_string(const std::string& s);
const std::vector<MetricId>& all_metric_ids();
std::string valid_metric_names();

struct MetricSpec {
    MetricId id = MetricId::wasserstein;
    std::size_t cluster_k = 8;       // clustered_euclidean
    std::size_t bins = 64;           // histogram divergences
    std::size_t subspace_rank = 0;   // 0 = min(16, N)
    int pad_epochs = 200;
    double pad_lr = 0.1;
    int pad_folds = 5;
    std::size_t max_points = 2000;   // subsample cap for the expensive metrics
    std::uint64_t seed = 0;
};

struct PadSettings {
    int epochs = 200;
    double lr = 0.1;
    int folds = 5;
    std::uint64_t seed = 0;
};

enum class HistDivergence { kl, jensen_shannon, hellinger, total_variation };
enum class MmdKernel { linear, rbf };
enum class SubspaceKind { grassmann, chordal, asimov };

// Mean Euclidean distance over all cross pairs.
double d_pairwise_euclidean(const Dataset& a, const Dataset& b);

// k-means each dataset, then mean Euclidean distance over all centroid pairs.
double d_clustered_euclidean(const Dataset& a, const Dataset& b, std::size_t k,
                             std::uint64_t seed = 0);

// Euclidean distance between dataset means.
double d_average_euclidean(const Dataset& a, const Dataset& b);

// Mean cosine distance (1 - cos angle) over all cross pairs.
double d_cosine(const Dataset& a, const Dataset& b);

// Per-dimension exact 1-D Wasserstein-1 between the empirical distributions,
// averaged over dimensions.
double d_wasserstein(const Dataset& a, const Dataset& b);

// Per-dimension two-sample Kolmogorov-Smirnov statistic, averaged.
double d_ks(const Dataset& a, const Dataset& b);

// Per-dimension histogram divergence, averaged. JS uses base-2 logs (range
// [0,1]); Hellinger = sqrt(1 - sum sqrt(p q)); TV = 0.5 sum |p - q|; KL is the
// symmetrized 0.5(KL(p||q) + KL(q||p)) over smoothed histograms.
double d_hist_divergence(const Dataset& a, const Dataset& b, HistDivergence kind,
                         std::size_t bins = 64);

// Directed KL(a||b), available behind an option flag; not part of the
// symmetric registry surface.
double kl_directed(const Dataset& a, const Dataset& b, std::size_t bins = 64);

// Biased V-statistic MMD^2. Linear kernel reduces to the squared distance
// between means; RBF bandwidth comes from the median heuristic over pooled
// pairwise distances.
double d_mmd(const Dataset& a, const Dataset& b, MmdKernel kernel, std::uint64_t seed = 0);

// Energy distance, non-rooted form: 2 E||x-y|| - E||x-x'|| - E||y-y'||.
double d_energy(const Dataset& a, const Dataset& b);

// Principal-angle distances between the rank-r subspaces spanned by the top
// right singular vectors of the mean-centered datasets.
double d_subspace(const Dataset& a, const Dataset& b, SubspaceKind kind, std::size_t rank);

// Proxy A-distance: balanced two-class logistic discrimination, 5-fold
// cross-validated error eps, PAD = clamp(2(1 - 2 eps), 0, 2).
double d_pad(const Dataset& a, const Dataset& b, const PadSettings& settings);

// Registry entry point: canonicalizes argument order so the value is exactly
// symmetric, applies the subsample cap to the expensive metrics, and
// dispatches on spec.id.
double evaluate_metric(const MetricSpec& spec, const Dataset& a, const Dataset& b);

// Metrics whose self-distance is identically zero (PAD is stochastic and
// clustered self-distance is legitimately nonzero).
bool has_zero_self_distance(MetricId id);

}  // namespace dsim
