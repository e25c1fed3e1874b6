#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "dsim/embedding.hpp"
#include "dsim/kmeans.hpp"
#include "dsim/tsne.hpp"
#include "dsim/umap.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace dsim;

TEST_CASE("fit_pca: exact line, full rank, explained variance") {
    // 2-D data on a line through a random direction
    Rng rng(2);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 40; ++i) {
        const double t = rng.normal();
        rows.push_back({2.0 * t + 1.0, -1.5 * t + 0.5});
    }
    const auto line = helpers::make_dataset("line", rows);
    const auto model = fit_pca({line}, 1);
    const Matrix z = pca_transform(model, line.points);
    // reconstruct and compare
    for (std::size_t i = 0; i < line.size(); ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            const double rec = model.mean[j] + model.basis(j, 0) * z(i, 0);
            CHECK(std::abs(rec - line.points(i, j)) <= 1e-10);
        }
    }

    // transform of the fit corpus reproduces the stored coordinates exactly
    CHECK(pca_transform(model, line.points) == model.coords);

    // out_dim = N preserves pairwise distances
    const auto cloud = helpers::gaussian_dataset("cloud", 60, 5, 77);
    const auto full = fit_pca({cloud}, 5);
    const Matrix zc = pca_transform(full, cloud.points);
    for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = i + 1; j < 20; ++j) {
            const double orig = euclidean_distance(cloud.points.row(i), cloud.points.row(j));
            const double emb = euclidean_distance(zc.row(i), zc.row(j));
            CHECK(std::abs(orig - emb) <= 1e-8 * std::max(1.0, orig));
        }

    // isotropic cloud: top component explains about 1/N of the variance,
    // matching the covariance eigenvalue oracle
    const std::size_t n = 8;
    const auto iso = helpers::gaussian_dataset("iso", 4000, n, 5);
    const auto m1 = fit_pca({iso}, n);
    const Matrix ziso = pca_transform(m1, iso.points);
    std::vector<double> var(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < ziso.rows(); ++i) mean += ziso(i, c);
        mean /= double(ziso.rows());
        for (std::size_t i = 0; i < ziso.rows(); ++i)
            var[c] += (ziso(i, c) - mean) * (ziso(i, c) - mean);
    }
    const double total = std::accumulate(var.begin(), var.end(), 0.0);

    Matrix centered(iso.size(), n);
    std::vector<double> mu(n, 0.0);
    for (std::size_t i = 0; i < iso.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) mu[j] += iso.points(i, j);
    for (auto& v : mu) v /= double(iso.size());
    for (std::size_t i = 0; i < iso.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) centered(i, j) = iso.points(i, j) - mu[j];
    const auto eig = oracle::sym_eigenvalues(oracle::gram(centered));
    const double eig_total = std::accumulate(eig.begin(), eig.end(), 0.0);

    CHECK(var[0] / total == doctest::Approx(eig[0] / eig_total).epsilon(1e-8));
    CHECK(var[0] / total == doctest::Approx(1.0 / double(n)).epsilon(0.25));

    CHECK_THROWS_AS((void)fit_pca({iso}, n + 1), Error);
}

TEST_CASE("smooth_knn_calibrate: example equation, plateau, monotonicity") {
    // k=4, dists (1,2,3,4): sigma solves 1 + e^(-1/s) + e^(-2/s) + e^(-3/s) = 2
    const std::vector<double> dists{1.0, 2.0, 3.0, 4.0};
    const auto [rho, sigma] = smooth_knn_calibrate(dists, 4);
    CHECK(rho == 1.0);

    // independent bisection oracle on the scalar equation
    double lo = 1e-8, hi = 1e4;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double s =
            1.0 + std::exp(-1.0 / mid) + std::exp(-2.0 / mid) + std::exp(-3.0 / mid);
        (s < 2.0 ? lo : hi) = mid;
    }
    CHECK(sigma == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-3));

    // sanity: the sum at the returned sigma hits the target
    const double sum = 1.0 + std::exp(-1.0 / sigma) + std::exp(-2.0 / sigma) +
                       std::exp(-3.0 / sigma);
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-4));

    // all neighbors equidistant: sum = k for any sigma, clamps to lower edge
    const std::vector<double> flat{2.0, 2.0, 2.0, 2.0};
    const auto [rho_f, sigma_f] = smooth_knn_calibrate(flat, 4);
    CHECK(rho_f == 2.0);
    CHECK(sigma_f == doctest::Approx(1e-8));

    // larger target -> larger sigma, all else fixed
    const double s1 = solve_smooth_knn_sigma(dists, 1.0, 1.5);
    const double s2 = solve_smooth_knn_sigma(dists, 1.0, 2.5);
    const double s3 = solve_smooth_knn_sigma(dists, 1.0, 3.5);
    CHECK(s1 < s2);
    CHECK(s2 < s3);
}

TEST_CASE("build_fuzzy_graph: weights, symmetry, union algebra") {
    CHECK(fuzzy_union(1.0, 0.0) == 1.0);
    CHECK(fuzzy_union(0.5, 0.5) == 0.75);
    CHECK(fuzzy_weight(1.0, 1.0, 0.5) == 1.0);  // nearest neighbor gets weight 1

    UmapParams params;
    params.n_neighbors = 6;
    params.metric = KnnMetric::euclidean;
    params.seed = 3;
    const Matrix pts = [&] {
        Matrix m(50, 4);
        Rng rng(12);
        for (auto& v : m.data()) v = rng.normal();
        return m;
    }();
    const FuzzyGraph g = build_fuzzy_graph(pts, params);
    CHECK(g.n_points == 50);
    REQUIRE(g.rho.size() == 50);

    std::vector<double> max_weight(50, 0.0);
    for (const auto& e : g.edges) {
        CHECK(e.u < e.v);  // stored once, no diagonal
        CHECK(e.w > 0.0);
        CHECK(e.w <= 1.0 + 1e-12);
        max_weight[e.u] = std::max(max_weight[e.u], e.w);
        max_weight[e.v] = std::max(max_weight[e.v], e.w);
    }
    // every point's nearest-neighbor edge has weight exactly 1 (the directed
    // weight is 1 and fuzzy union with anything keeps it 1)
    for (std::size_t i = 0; i < 50; ++i)
        CHECK(max_weight[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit_curve_ab: oracle optimum, pure-exponential target, trend") {
    const auto [a, b] = fit_curve_ab(0.1, 1.0);
    const auto [oa, ob] = oracle::curve_fit_grid(0.1, 1.0);
    CHECK(std::abs(a - oa) <= 0.02);
    CHECK(std::abs(b - ob) <= 0.02);
    // frozen from the grid-search oracle (and the well-known defaults)
    CHECK(a == doctest::Approx(1.577).epsilon(0.02));
    CHECK(b == doctest::Approx(0.8951).epsilon(0.02));

    // min_dist = 0: kernel tracks the pure exponential within 0.08 everywhere
    const auto [a0, b0] = fit_curve_ab(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 300; ++i) {
        const double d = 3.0 * double(i) / 299.0;
        const double t = d > 0.0 ? std::pow(d, 2.0 * b0) : 0.0;
        const double f = 1.0 / (1.0 + a0 * t);
        worst = std::max(worst, std::abs(f - std::exp(-d)));
    }
    CHECK(worst < 0.08);

    // larger min_dist flattens the kernel near zero: a decreases
    const auto [a_small, b_s] = fit_curve_ab(0.01, 1.0);
    const auto [a_mid, b_m] = fit_curve_ab(0.1, 1.0);
    const auto [a_large, b_l] = fit_curve_ab(0.5, 1.0);
    (void)b_s;
    (void)b_m;
    (void)b_l;
    CHECK(a_small > a_mid);
    CHECK(a_mid > a_large);

    // residual bound over the documented min_dist range
    for (const double md : {0.01, 0.1, 0.5}) {
        const auto [af, bf] = fit_curve_ab(md, 1.0);
        double resid = 0.0;
        for (int i = 0; i < 300; ++i) {
            const double d = 3.0 * double(i) / 299.0;
            const double target = d <= md ? 1.0 : std::exp(-(d - md));
            const double t = d > 0.0 ? std::pow(d, 2.0 * bf) : 0.0;
            resid = std::max(resid, std::abs(1.0 / (1.0 + af * t) - target));
        }
        CHECK(resid < 0.1);
    }
}

TEST_CASE("optimize_layout: no-op epochs, determinism, blob separation") {
    UmapParams params;
    params.metric = KnnMetric::euclidean;
    params.seed = 4;

    const Matrix pts = helpers::two_blobs(100, 16, 20.0, 21);
    const FuzzyGraph g = build_fuzzy_graph(pts, params);

    Matrix init(pts.rows(), 2);
    Rng rng(9);
    for (auto& v : init.data()) v = rng.normal() * 1e-2;

    UmapParams zero_epochs = params;
    zero_epochs.n_epochs = 0;
    const Matrix same = optimize_layout(g, init, zero_epochs, 1.577, 0.895);
    CHECK(same == init);

    const Matrix y1 = optimize_layout(g, init, params, 1.577, 0.895);
    const Matrix y2 = optimize_layout(g, init, params, 1.577, 0.895);
    CHECK(y1 == y2);

    // blobs end far apart relative to their spread
    std::vector<double> c0(2, 0.0), c1(2, 0.0);
    for (std::size_t i = 0; i < 100; ++i)
        for (std::size_t c = 0; c < 2; ++c) {
            c0[c] += y1(i, c) / 100.0;
            c1[c] += y1(100 + i, c) / 100.0;
        }
    std::vector<double> r0, r1;
    for (std::size_t i = 0; i < 100; ++i) {
        r0.push_back(std::hypot(y1(i, 0) - c0[0], y1(i, 1) - c0[1]));
        r1.push_back(std::hypot(y1(100 + i, 0) - c1[0], y1(100 + i, 1) - c1[1]));
    }
    std::sort(r0.begin(), r0.end());
    std::sort(r1.begin(), r1.end());
    const double rad = std::max(r0[94], r1[94]);
    const double sep = std::hypot(c0[0] - c1[0], c0[1] - c1[1]);
    CHECK(sep > 3.0 * rad);
}

TEST_CASE("fit_umap: neighborhood preservation and duplicates") {
    const Matrix pts = helpers::manifold_blobs(100, 16, 20.0, 33);
    const auto [a, b] = helpers::split_blobs(pts);

    UmapParams params;
    params.metric = KnnMetric::euclidean;
    params.seed = 17;
    const EmbeddingModel model = fit_umap({a, b}, params);
    REQUIRE(model.coords.rows() == 200);
    REQUIRE(model.coords.cols() == 2);
    CHECK(model.ranges[0].first == 0);
    CHECK(model.ranges[0].second == 100);

    const double score = oracle::neighborhood_preservation(pts, model.coords, 10);
    CHECK(score >= 0.7);

    // duplicated corpus rows embed on top of each other
    Dataset dup = a;
    dup.name = "dup";
    const EmbeddingModel model2 = fit_umap({a, dup, b}, params);
    const auto [da_begin, da_end] = model2.ranges[0];
    const auto [dd_begin, dd_end] = model2.ranges[1];
    (void)da_end;
    (void)dd_end;
    std::vector<double> dup_dist;
    for (std::size_t i = 0; i < 100; ++i)
        dup_dist.push_back(euclidean_distance(model2.coords.row(da_begin + i),
                                              model2.coords.row(dd_begin + i)));
    // compare against the median pairwise embedded distance
    std::vector<double> pair_dist;
    Rng rng(5);
    for (int t = 0; t < 2000; ++t) {
        const auto i = std::size_t(rng.below(300));
        const auto j = std::size_t(rng.below(300));
        if (i == j) continue;
        pair_dist.push_back(euclidean_distance(model2.coords.row(i), model2.coords.row(j)));
    }
    std::sort(dup_dist.begin(), dup_dist.end());
    std::sort(pair_dist.begin(), pair_dist.end());
    CHECK(dup_dist[dup_dist.size() / 2] <= 0.05 * pair_dist[pair_dist.size() / 2]);
}

TEST_CASE("fit_umap: correlation metric groups scaled copies") {
    // base directions, each present at scales 1 and 3
    Rng rng(41);
    const std::size_t bases = 60, n = 16;
    Dataset scale1, scale3;
    scale1.name = "s1";
    scale3.name = "s3";
    scale1.points = Matrix(bases, n);
    scale3.points = Matrix(bases, n);
    for (std::size_t i = 0; i < bases; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double v = rng.normal();
            scale1.points(i, j) = v + 0.01 * rng.normal();
            scale3.points(i, j) = 3.0 * v + 0.01 * rng.normal();
        }
    }

    UmapParams params;
    params.metric = KnnMetric::correlation;
    params.seed = 6;
    params.n_neighbors = 10;
    const EmbeddingModel model = fit_umap({scale1, scale3}, params);

    std::vector<double> pair_d, all_d;
    for (std::size_t i = 0; i < bases; ++i)
        pair_d.push_back(
            euclidean_distance(model.coords.row(i), model.coords.row(bases + i)));
    for (std::size_t i = 0; i < 2 * bases; ++i)
        for (std::size_t j = i + 1; j < 2 * bases; ++j)
            all_d.push_back(euclidean_distance(model.coords.row(i), model.coords.row(j)));
    std::sort(all_d.begin(), all_d.end());
    const double median = all_d[all_d.size() / 2];
    std::size_t below = 0;
    for (double d : pair_d) below += d < median ? 1 : 0;
    CHECK(double(below) / double(bases) >= 0.9);
}

TEST_CASE("fit_umap: row-order invariance for the other dataset") {
    Dataset a = helpers::gaussian_dataset("a", 60, 8, 1);
    Dataset b = helpers::gaussian_dataset("b", 60, 8, 2);
    Dataset b_shuffled = b;
    // reverse b's rows
    for (std::size_t i = 0; i < b.size(); ++i)
        for (std::size_t j = 0; j < 8; ++j)
            b_shuffled.points(i, j) = b.points(b.size() - 1 - i, j);

    UmapParams params;
    params.metric = KnnMetric::euclidean;
    params.n_neighbors = 8;
    params.seed = 13;
    const EmbeddingModel m1 = fit_umap({a, b}, params);
    const EmbeddingModel m2 = fit_umap({a, b_shuffled}, params);

    // dataset a's coordinates are bit-identical either way
    for (std::size_t i = 0; i < 60; ++i)
        for (std::size_t c = 0; c < 2; ++c) CHECK(m1.coords(i, c) == m2.coords(i, c));
    // dataset b's coordinates are the same set, permuted with its rows
    for (std::size_t i = 0; i < 60; ++i)
        for (std::size_t c = 0; c < 2; ++c)
            CHECK(m1.coords(60 + i, c) == m2.coords(60 + (59 - i), c));
}

TEST_CASE("embed_tsne: determinism, KL tail, blob recovery") {
    const Matrix pts = helpers::two_blobs(75, 8, 20.0, 51);
    Dataset a, b;
    a.name = "a";
    b.name = "b";
    a.points = Matrix(75, 8);
    b.points = Matrix(75, 8);
    for (std::size_t i = 0; i < 75; ++i)
        for (std::size_t j = 0; j < 8; ++j) {
            a.points(i, j) = pts(i, j);
            b.points(i, j) = pts(75 + i, j);
        }

    const EmbeddingModel m1 = embed_tsne({a, b}, 20.0, 2, 5);
    const EmbeddingModel m2 = embed_tsne({a, b}, 20.0, 2, 5);
    CHECK(m1.coords == m2.coords);

    REQUIRE(m1.tsne_kl_trace.size() == 1000);
    for (std::size_t t = 901; t < 1000; ++t)
        CHECK(m1.tsne_kl_trace[t] <= m1.tsne_kl_trace[t - 1] + 1e-9);

    // k-means on the embedding recovers the two blobs
    const auto km = kmeans(m1.coords, 2, 3);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < 150; ++i) {
        const bool truth = i < 75;
        const bool pred = km.labels[i] == km.labels[0];
        agree += truth == pred ? 1 : 0;
    }
    const double acc = std::max(double(agree), double(150 - agree)) / 150.0;
    CHECK(acc >= 0.95);

    // preconditions
    CHECK_THROWS_AS((void)embed_tsne({a, b}, 60.0, 2, 1), Error);  // 3*perp >= M
    Dataset huge;
    huge.name = "huge";
    huge.points = Matrix(5001, 2);
    CHECK_THROWS_WITH_AS((void)embed_tsne({huge}, 30.0, 2, 1), doctest::Contains("too large"),
                         Error);
}

TEST_CASE("optimize_layout: rejects non-finite init") {
    UmapParams params;
    params.metric = KnnMetric::euclidean;
    params.n_neighbors = 4;
    const Matrix pts = helpers::two_blobs(10, 4, 5.0, 3);
    const FuzzyGraph g = build_fuzzy_graph(pts, params);
    Matrix bad(pts.rows(), 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS((void)optimize_layout(g, bad, params, 1.577, 0.895),
                         doctest::Contains("non-finite"), Error);
}

TEST_CASE("fit_embedding: dispatch, cap, and pca+umap") {
    Dataset a = helpers::gaussian_dataset("a", 120, 12, 61);
    Dataset b = helpers::gaussian_dataset("b", 120, 12, 62, 8.0);

    EmbedSpec spec;
    spec.space = Space::pca;
    spec.out_dim = 3;
    spec.corpus_cap = 50;
    spec.seed = 5;
    const EmbeddingModel pca_model = fit_embedding({a, b}, spec);
    CHECK(pca_model.coords.rows() == 100);  // capped to 50 per dataset
    CHECK(pca_model.coords.cols() == 3);

    EmbedSpec uspec;
    uspec.space = Space::pca_umap;
    uspec.corpus_cap = 80;
    uspec.pca_stage_dim = 6;
    uspec.umap.metric = KnnMetric::euclidean;
    uspec.umap.n_neighbors = 10;
    uspec.seed = 5;
    const EmbeddingModel pu = fit_embedding({a, b}, uspec);
    CHECK(pu.kind == EmbeddingKind::pca_umap);
    CHECK(pu.coords.rows() == 160);
    CHECK(pu.coords.cols() == 2);
    CHECK(pu.basis.cols() == 6);  // stored pca stage
}
