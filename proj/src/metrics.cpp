#include "dsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsim/kmeans.hpp"
#include "dsim/preprocess.hpp"
#include "dsim/stats.hpp"
#include "dsim/svd.hpp"

namespace dsim {

namespace {

struct MetricName {
    MetricId id;
    const char* name;
};

constexpr MetricName kMetricNames[] = {
    {MetricId::pairwise_euclidean, "pairwise_euclidean"},
    {MetricId::clustered_euclidean, "clustered_euclidean"},
    {MetricId::centroid_euclidean, "centroid_euclidean"},
    {MetricId::cosine, "cosine"},
    {MetricId::kl, "kl"},
    {MetricId::jensen_shannon, "jensen_shannon"},
    {MetricId::hellinger, "hellinger"},
    {MetricId::wasserstein, "wasserstein"},
    {MetricId::kolmogorov_smirnov, "kolmogorov_smirnov"},
    {MetricId::total_variation, "total_variation"},
    {MetricId::mmd_linear, "mmd_linear"},
    {MetricId::mmd_rbf, "mmd_rbf"},
    {MetricId::energy, "energy"},
    {MetricId::grassmann, "grassmann"},
    {MetricId::chordal, "chordal"},
    {MetricId::asimov, "asimov"},
    {MetricId::pad, "pad"},
};

void require_same_dim(const Dataset& a, const Dataset& b) {
    if (a.dim() != b.dim())
        throw Error("dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
    if (a.size() == 0 || b.size() == 0) throw Error("empty dataset");
}

std::vector<double> column(const Dataset& ds, std::size_t j) {
    std::vector<double> v(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) v[i] = ds.points(i, j);
    return v;
}

std::vector<double> dataset_mean(const Dataset& ds) {
    std::vector<double> mean(ds.dim(), 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto r = ds.points.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) mean[j] += r[j];
    }
    for (auto& v : mean) v /= double(ds.size());
    return mean;
}

// Exact 1-D Wasserstein-1 between two empirical distributions: the area
// between quantile functions, walked over the merged i/p, j/q breakpoints
// with integer bookkeeping so equal-size inputs reduce exactly to the sorted
// L1 mean.
double wasserstein_1d(std::vector<double> x, std::vector<double> y) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const std::size_t p = x.size(), q = y.size();
    const double denom = double(p) * double(q);

    double w = 0.0;
    std::size_t i = 0, j = 0;
    std::uint64_t cur = 0;  // position in units of 1/(p*q)
    while (i < p && j < q) {
        const std::uint64_t next_x = std::uint64_t(i + 1) * q;
        const std::uint64_t next_y = std::uint64_t(j + 1) * p;
        const std::uint64_t nxt = std::min(next_x, next_y);
        w += (double(nxt - cur) / denom) * std::abs(x[i] - y[j]);
        cur = nxt;
        if (nxt == next_x) ++i;
        if (nxt == next_y) ++j;
    }
    return w;
}

double ks_1d(std::vector<double> x, std::vector<double> y) {
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double p = double(x.size()), q = double(y.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.size() && j < y.size()) {
        const double m = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == m) ++i;
        while (j < y.size() && y[j] == m) ++j;
        d = std::max(d, std::abs(double(i) / p - double(j) / q));
    }
    // the supremum is always attained at a pooled sample point, all of which
    // are visited before either pointer runs off its end
    return d;
}

double hist_divergence_1d(const std::vector<double>& p, const std::vector<double>& q,
                          HistDivergence kind) {
    switch (kind) {
        case HistDivergence::kl: {
            double forward = 0.0, backward = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                forward += p[i] * std::log(p[i] / q[i]);
                backward += q[i] * std::log(q[i] / p[i]);
            }
            return 0.5 * (forward + backward);
        }
        case HistDivergence::jensen_shannon: {
            double js = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double m = 0.5 * (p[i] + q[i]);
                js += 0.5 * p[i] * std::log2(p[i] / m) + 0.5 * q[i] * std::log2(q[i] / m);
            }
            return std::max(js, 0.0);
        }
        case HistDivergence::hellinger: {
            // difference form of 1 - sum sqrt(p q): exactly zero for p == q
            double s = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
                s += d * d;
            }
            return std::sqrt(0.5 * s);
        }
        case HistDivergence::total_variation: {
            double tv = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) tv += std::abs(p[i] - q[i]);
            return 0.5 * tv;
        }
    }
    throw Error("hist_divergence: bad kind");
}

Matrix centered_points(const Dataset& ds) {
    const auto mean = dataset_mean(ds);
    Matrix c(ds.size(), ds.dim());
    for (std::size_t i = 0; i < ds.size(); ++i)
        for (std::size_t j = 0; j < ds.dim(); ++j) c(i, j) = ds.points(i, j) - mean[j];
    return c;
}

Matrix subspace_basis(const Dataset& ds, std::size_t rank) {
    if (rank > std::min(ds.size() > 0 ? ds.size() - 1 : 0, ds.dim()))
        throw Error("d_subspace: rank " + std::to_string(rank) + " too large for dataset '" +
                    ds.name + "'");
    const SvdResult svd = truncated_svd(centered_points(ds), rank);
    if (svd.numerical_rank < rank)
        throw Error("d_subspace: dataset '" + ds.name + "' is rank deficient (" +
                    std::to_string(svd.numerical_rank) + " < " + std::to_string(rank) + ")");
    return svd.V;
}

// Combined cosine/sine principal angles: cosines from the singular values of
// Ua^T Ub, and for nearly aligned directions (where acos loses half the
// digits) sines from the singular values of Ub - Ua (Ua^T Ub).
std::vector<double> principal_angles(const Matrix& ua, const Matrix& ub) {
    const std::size_t r = ua.cols();
    const std::size_t n = ua.rows();
    Matrix gram(r, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < n; ++c) s += ua(c, i) * ub(c, j);
            gram(i, j) = s;
        }
    const SvdResult cos_svd = truncated_svd(gram, r);

    Matrix resid(n, r);
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t j = 0; j < r; ++j) {
            double s = ub(c, j);
            for (std::size_t i = 0; i < r; ++i) s -= ua(c, i) * gram(i, j);
            resid(c, j) = s;
        }
    const SvdResult sin_svd = truncated_svd(resid, r);

    // cosines descending give angles ascending; sines descending give angles
    // descending, so reverse to align the two lists
    std::vector<double> theta(r);
    for (std::size_t i = 0; i < r; ++i) {
        const double c = std::clamp(cos_svd.S[i], 0.0, 1.0);
        if (c * c > 0.5) {
            const double s = std::clamp(sin_svd.S[r - 1 - i], 0.0, 1.0);
            theta[i] = std::asin(s);
        } else {
            theta[i] = std::acos(c);
        }
    }
    return theta;
}

std::uint64_t content_hash(const Dataset& ds) {
    const auto& data = ds.points.data();
    const auto* bytes = reinterpret_cast<const char*>(data.data());
    std::uint64_t h = fnv1a64({bytes, data.size() * sizeof(double)});
    h = derive_seed({h, ds.points.rows(), ds.points.cols()});
    return h;
}

// Content-based canonical pair order: every metric here is mathematically
// symmetric, so fixing the argument order makes the computed value exactly
// symmetric as well.
bool canonical_swap(const Dataset& a, const Dataset& b) {
    const std::uint64_t ha = content_hash(a), hb = content_hash(b);
    if (ha != hb) return hb < ha;
    return false;
}

bool metric_uses_subsample(MetricId id) {
    switch (id) {
        case MetricId::pairwise_euclidean:
        case MetricId::cosine:
        case MetricId::energy:
        case MetricId::mmd_linear:
        case MetricId::mmd_rbf:
        case MetricId::pad:
            return true;
        default:
            return false;
    }
}

}  // namespace

std::string to_string(MetricId id) {
    for (const auto& m : kMetricNames)
        if (m.id == id) return m.name;
    return "?";
}

MetricId metric_from_string(const std::string& s) {
    for (const auto& m : kMetricNames)
        if (s == m.name) return m.id;
    throw Error("unknown metric '" + s + "'; valid metrics: " + valid_metric_names());
}

const std::vector<MetricId>& all_metric_ids() {
    static const std::vector<MetricId> ids = [] {
        std::vector<MetricId> v;
        for (const auto& m : kMetricNames) v.push_back(m.id);
        return v;
    }();
    return ids;
}

std::string valid_metric_names() {
    std::string s;
    for (const auto& m : kMetricNames) {
        if (!s.empty()) s += ", ";
        s += m.name;
    }
    return s;
}

bool has_zero_self_distance(MetricId id) {
    switch (id) {
        case MetricId::pad:                 // stochastic, only near zero
        case MetricId::clustered_euclidean: // mean over distinct centroid pairs
        case MetricId::pairwise_euclidean:  // mean over all point pairs
        case MetricId::cosine:              // mean over all point pairs
            return false;
        default:
            return true;
    }
}

double d_pairwise_euclidean(const Dataset& a, const Dataset& b) {
    require_same_dim(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            sum += euclidean_distance(a.points.row(i), b.points.row(j));
    return sum / (double(a.size()) * double(b.size()));
}

double d_clustered_euclidean(const Dataset& a, const Dataset& b, std::size_t k,
                             std::uint64_t seed) {
    require_same_dim(a, b);
    if (k > std::min(a.size(), b.size()))
        throw Error("d_clustered_euclidean: k=" + std::to_string(k) +
                    " exceeds the smaller dataset");
    const KMeansResult ca = kmeans(a.points, k, derive_seed({seed, 0x636c75ULL}));
    const KMeansResult cb = kmeans(b.points, k, derive_seed({seed, 0x636c75ULL}));
    double sum = 0.0;
    for (std::size_t l = 0; l < k; ++l)
        for (std::size_t m = 0; m < k; ++m)
            sum += euclidean_distance(ca.centroids.row(l), cb.centroids.row(m));
    return sum / (double(k) * double(k));
}

double d_average_euclidean(const Dataset& a, const Dataset& b) {
    require_same_dim(a, b);
    const auto ma = dataset_mean(a);
    const auto mb = dataset_mean(b);
    return euclidean_distance(ma, mb);
}

double d_cosine(const Dataset& a, const Dataset& b) {
    require_same_dim(a, b);
    std::vector<double> na(a.size()), nb(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        na[i] = norm2(a.points.row(i));
        if (na[i] == 0.0) throw Error("d_cosine: zero-norm row " + std::to_string(i));
    }
    for (std::size_t j = 0; j < b.size(); ++j) {
        nb[j] = norm2(b.points.row(j));
        if (nb[j] == 0.0) throw Error("d_cosine: zero-norm row " + std::to_string(j));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            sum += 1.0 - dot(a.points.row(i), b.points.row(j)) / (na[i] * nb[j]);
    return std::max(0.0, sum / (double(a.size()) * double(b.size())));
}

double d_wasserstein(const Dataset& a, const Dataset& b) {
    require_same_dim(a, b);
    double sum = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j)
        sum += wasserstein_1d(column(a, j), column(b, j));
    return sum / double(a.dim());
}

double d_ks(const Dataset& a, const Dataset& b) {
    require_same_dim(a, b);
    double sum = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j) sum += ks_1d(column(a, j), column(b, j));
    return sum / double(a.dim());
}

double d_hist_divergence(const Dataset& a, const Dataset& b, HistDivergence kind,
                         std::size_t bins) {
    require_same_dim(a, b);
    double sum = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        const auto [p, q] = histogram_pair(column(a, j), column(b, j), bins);
        sum += hist_divergence_1d(p, q, kind);
    }
    return sum / double(a.dim());
}

double kl_directed(const Dataset& a, const Dataset& b, std::size_t bins) {
    require_same_dim(a, b);
    double sum = 0.0;
    for (std::size_t j = 0; j < a.dim(); ++j) {
        const auto [p, q] = histogram_pair(column(a, j), column(b, j), bins);
        double kl = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) kl += p[i] * std::log(p[i] / q[i]);
        sum += kl;
    }
    return sum / double(a.dim());
}

double d_mmd(const Dataset& a, const Dataset& b, MmdKernel kernel, std::uint64_t seed) {
    require_same_dim(a, b);
    if (kernel == MmdKernel::linear) {
        // V-statistic identity: MMD^2 with k(x,y) = x.y equals ||mean a - mean b||^2
        const auto ma = dataset_mean(a);
        const auto mb = dataset_mean(b);
        return squared_distance(ma, mb);
    }

    // median-heuristic bandwidth over pooled pairwise distances, each side
    // capped at 1000 points for the median computation
    const Dataset sa = subsample(a, 1000, derive_seed({seed, 0x6d6d64ULL, 0}));
    const Dataset sb = subsample(b, 1000, derive_seed({seed, 0x6d6d64ULL, 1}));
    std::vector<std::span<const double>> pooled;
    for (std::size_t i = 0; i < sa.size(); ++i) pooled.push_back(sa.points.row(i));
    for (std::size_t i = 0; i < sb.size(); ++i) pooled.push_back(sb.points.row(i));
    std::vector<double> dists;
    dists.reserve(pooled.size() * (pooled.size() - 1) / 2);
    for (std::size_t i = 0; i < pooled.size(); ++i)
        for (std::size_t j = i + 1; j < pooled.size(); ++j)
            dists.push_back(euclidean_distance(pooled[i], pooled[j]));
    double bandwidth = 1.0;
    if (!dists.empty()) {
        std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
        bandwidth = dists[dists.size() / 2];
        if (bandwidth <= 0.0) bandwidth = 1.0;
    }
    const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);

    auto kernel_mean = [&](const Dataset& x, const Dataset& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j)
                s += std::exp(-gamma * squared_distance(x.points.row(i), y.points.row(j)));
        return s / (double(x.size()) * double(y.size()));
    };
    const double value = kernel_mean(a, a) + kernel_mean(b, b) - 2.0 * kernel_mean(a, b);
    return std::max(0.0, value);
}

double d_energy(const Dataset& a, const Dataset& b) {
    require_same_dim(a, b);
    auto mean_cross = [](const Dataset& x, const Dataset& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j)
                s += euclidean_distance(x.points.row(i), y.points.row(j));
        return s / (double(x.size()) * double(y.size()));
    };
    const double e = 2.0 * mean_cross(a, b) - mean_cross(a, a) - mean_cross(b, b);
    return std::max(0.0, e);
}

double d_subspace(const Dataset& a, const Dataset& b, SubspaceKind kind, std::size_t rank) {
    require_same_dim(a, b);
    if (rank == 0) rank = std::min<std::size_t>(16, a.dim());
    const Matrix ua = subspace_basis(a, rank);
    const Matrix ub = subspace_basis(b, rank);
    const auto theta = principal_angles(ua, ub);
    switch (kind) {
        case SubspaceKind::grassmann: {
            double s = 0.0;
            for (double t : theta) s += t * t;
            return std::sqrt(s);
        }
        case SubspaceKind::chordal: {
            double s = 0.0;
            for (double t : theta) s += std::sin(t) * std::sin(t);
            return std::sqrt(s);
        }
        case SubspaceKind::asimov: {
            double m = 0.0;
            for (double t : theta) m = std::max(m, t);
            return m;
        }
    }
    throw Error("d_subspace: bad kind");
}

double d_pad(const Dataset& a_in, const Dataset& b_in, const PadSettings& settings) {
    const bool swap = canonical_swap(a_in, b_in);
    const Dataset& a = swap ? b_in : a_in;
    const Dataset& b = swap ? a_in : b_in;
    require_same_dim(a, b);
    if (a.size() < 20 || b.size() < 20)
        throw Error("d_pad: need at least 20 points per dataset");

    // balance classes
    const std::size_t m = std::min(a.size(), b.size());
    const Dataset ba = subsample(a, m, derive_seed({settings.seed, 0x706164ULL, 0}));
    const Dataset bb = subsample(b, m, derive_seed({settings.seed, 0x706164ULL, 1}));

    const std::size_t n = a.dim();
    const std::size_t total = 2 * m;

    // standardize features over the combined balanced set
    std::vector<double> mean(n, 0.0), sd(n, 0.0);
    auto accumulate = [&](const Dataset& d) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto r = d.points.row(i);
            for (std::size_t j = 0; j < n; ++j) mean[j] += r[j];
        }
    };
    accumulate(ba);
    accumulate(bb);
    for (auto& v : mean) v /= double(total);
    auto accum_var = [&](const Dataset& d) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            auto r = d.points.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                const double x = r[j] - mean[j];
                sd[j] += x * x;
            }
        }
    };
    accum_var(ba);
    accum_var(bb);
    for (auto& v : sd) v = std::sqrt(v / double(total));

    Matrix x(total, n);
    std::vector<double> label(total);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            x(i, j) = sd[j] > 0.0 ? (ba.points(i, j) - mean[j]) / sd[j] : 0.0;
            x(m + i, j) = sd[j] > 0.0 ? (bb.points(i, j) - mean[j]) / sd[j] : 0.0;
        }
        label[i] = 0.0;
        label[m + i] = 1.0;
    }

    // Fold assignment uses the same within-side rule for both sides so the
    // cross-validation split does not depend on argument order.
    const int folds = settings.folds;
    std::vector<int> fold(total);
    {
        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed({settings.seed, 0x7061645f666f6cULL}));
        rng.shuffle(idx);
        for (std::size_t pos = 0; pos < m; ++pos) {
            fold[idx[pos]] = int(pos % folds);
            fold[m + idx[pos]] = int(pos % folds);
        }
    }

    auto sigmoid = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };

    std::size_t errors = 0;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> test;
        for (std::size_t i = 0; i < total; ++i)
            (fold[i] == f ? test : train).push_back(i);
        if (train.empty() || test.empty()) continue;

        std::vector<double> w(n, 0.0);
        double bias = 0.0;
        std::vector<double> grad(n);
        for (int epoch = 0; epoch < settings.epochs; ++epoch) {
            std::fill(grad.begin(), grad.end(), 0.0);
            double gbias = 0.0;
            for (std::size_t i : train) {
                const double err = sigmoid(dot(w, x.row(i)) + bias) - label[i];
                auto r = x.row(i);
                for (std::size_t j = 0; j < n; ++j) grad[j] += err * r[j];
                gbias += err;
            }
            const double scale = settings.lr / double(train.size());
            for (std::size_t j = 0; j < n; ++j) w[j] -= scale * grad[j];
            bias -= scale * gbias;
        }

        for (std::size_t i : test) {
            const double pred = sigmoid(dot(w, x.row(i)) + bias) >= 0.5 ? 1.0 : 0.0;
            if (pred != label[i]) ++errors;
        }
    }

    const double eps = double(errors) / double(total);
    return std::clamp(2.0 * (1.0 - 2.0 * eps), 0.0, 2.0);
}

double evaluate_metric(const MetricSpec& spec, const Dataset& a_in, const Dataset& b_in) {
    const bool swap = canonical_swap(a_in, b_in);
    const Dataset& first = swap ? b_in : a_in;
    const Dataset& second = swap ? a_in : b_in;

    Dataset sa, sb;
    const Dataset* a = &first;
    const Dataset* b = &second;
    if (metric_uses_subsample(spec.id)) {
        sa = subsample(first, spec.max_points, derive_seed({spec.seed, 0x6d737562ULL, 0}));
        sb = subsample(second, spec.max_points, derive_seed({spec.seed, 0x6d737562ULL, 1}));
        a = &sa;
        b = &sb;
    }

    switch (spec.id) {
        case MetricId::pairwise_euclidean: return d_pairwise_euclidean(*a, *b);
        case MetricId::clustered_euclidean:
            return d_clustered_euclidean(*a, *b, spec.cluster_k, spec.seed);
        case MetricId::centroid_euclidean: return d_average_euclidean(*a, *b);
        case MetricId::cosine: return d_cosine(*a, *b);
        case MetricId::kl: return d_hist_divergence(*a, *b, HistDivergence::kl, spec.bins);
        case MetricId::jensen_shannon:
            return d_hist_divergence(*a, *b, HistDivergence::jensen_shannon, spec.bins);
        case MetricId::hellinger:
            return d_hist_divergence(*a, *b, HistDivergence::hellinger, spec.bins);
        case MetricId::wasserstein: return d_wasserstein(*a, *b);
        case MetricId::kolmogorov_smirnov: return d_ks(*a, *b);
        case MetricId::total_variation:
            return d_hist_divergence(*a, *b, HistDivergence::total_variation, spec.bins);
        case MetricId::mmd_linear: return d_mmd(*a, *b, MmdKernel::linear, spec.seed);
        case MetricId::mmd_rbf: return d_mmd(*a, *b, MmdKernel::rbf, spec.seed);
        case MetricId::energy: return d_energy(*a, *b);
        case MetricId::grassmann:
            return d_subspace(*a, *b, SubspaceKind::grassmann, spec.subspace_rank);
        case MetricId::chordal:
            return d_subspace(*a, *b, SubspaceKind::chordal, spec.subspace_rank);
        case MetricId::asimov:
            return d_subspace(*a, *b, SubspaceKind::asimov, spec.subspace_rank);
        case MetricId::pad:
            return d_pad(*a, *b, {spec.pad_epochs, spec.pad_lr, spec.pad_folds, spec.seed});
    }
    throw Error("evaluate_metric: bad metric id");
}

}  // namespace dsim
