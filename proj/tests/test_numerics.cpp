#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dsim/kmeans.hpp"
#include "dsim/knn.hpp"
#include "dsim/stats.hpp"
#include "dsim/svd.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace dsim;

namespace {

Matrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
    Matrix a(m, n);
    Rng rng(seed);
    for (auto& v : a.data()) v = rng.normal();
    return a;
}

Matrix reconstruct_svd(const SvdResult& svd) {
    Matrix out(svd.U.rows(), svd.V.rows());
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) {
            double s = 0.0;
            for (std::size_t t = 0; t < svd.S.size(); ++t)
                s += svd.U(i, t) * svd.S[t] * svd.V(j, t);
            out(i, j) = s;
        }
    return out;
}

double frob(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("truncated_svd: diagonal matrix") {
    Matrix a(3, 3);
    a(0, 0) = 3.0;
    a(1, 1) = 2.0;
    a(2, 2) = 1.0;
    const auto svd = truncated_svd(a, 2);
    CHECK(svd.S[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(svd.S[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("truncated_svd: exact rank-1 reconstruction") {
    Matrix a(6, 4);
    Rng rng(11);
    std::vector<double> u(6), v(4);
    for (auto& x : u) x = rng.normal();
    for (auto& x : v) x = rng.normal();
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 4; ++j) a(i, j) = u[i] * v[j];

    const auto svd = truncated_svd(a, 1);
    const Matrix rec = reconstruct_svd(svd);
    double err = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            err = std::max(err, std::abs(a(i, j) - rec(i, j)));
    CHECK(err <= 1e-10);
}

TEST_CASE("truncated_svd: full-rank random matrix vs Gram eigen oracle") {
    const Matrix a = random_matrix(50, 20, 42);
    const auto svd = truncated_svd(a, 20);

    const Matrix rec = reconstruct_svd(svd);
    Matrix diff = a;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) diff(i, j) -= rec(i, j);
    CHECK(frob(diff) <= 1e-8 * frob(a));

    const auto oracle_sv = oracle::singular_values(a);
    for (std::size_t t = 0; t < 20; ++t)
        CHECK(svd.S[t] == doctest::Approx(oracle_sv[t]).epsilon(1e-7));

    // and at the upper end of the documented size range
    const Matrix big = random_matrix(100, 50, 43);
    const auto svd_big = truncated_svd(big, 50);
    const auto oracle_big = oracle::singular_values(big);
    for (std::size_t t = 0; t < 50; ++t)
        CHECK(svd_big.S[t] == doctest::Approx(oracle_big[t]).epsilon(1e-7));

    // orthonormality of retained columns
    for (std::size_t c1 = 0; c1 < 20; ++c1)
        for (std::size_t c2 = c1; c2 < 20; ++c2) {
            double uu = 0.0, vv = 0.0;
            for (std::size_t i = 0; i < svd.U.rows(); ++i) uu += svd.U(i, c1) * svd.U(i, c2);
            for (std::size_t i = 0; i < svd.V.rows(); ++i) vv += svd.V(i, c1) * svd.V(i, c2);
            const double want = c1 == c2 ? 1.0 : 0.0;
            CHECK(std::abs(uu - want) <= 1e-8);
            CHECK(std::abs(vv - want) <= 1e-8);
        }
}

TEST_CASE("truncated_svd: singular vector residuals on a wide matrix") {
    const Matrix a = random_matrix(20, 60, 7);
    const auto svd = truncated_svd(a, 10);
    for (std::size_t t = 0; t < 10; ++t) {
        double resid = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            double av = 0.0;
            for (std::size_t j = 0; j < a.cols(); ++j) av += a(i, j) * svd.V(j, t);
            const double r = av - svd.S[t] * svd.U(i, t);
            resid += r * r;
        }
        CHECK(std::sqrt(resid) <= 1e-8 * svd.S[0]);
    }
}

TEST_CASE("truncated_svd: rank out of range") {
    const Matrix a = random_matrix(5, 3, 1);
    CHECK_THROWS_AS((void)truncated_svd(a, 0), Error);
    CHECK_THROWS_AS((void)truncated_svd(a, 4), Error);
}

TEST_CASE("kmeans: two far-separated pairs") {
    const Matrix pts = Matrix::from_rows({{0, 0}, {0, 2}, {100, 0}, {100, 2}});
    const auto res = kmeans(pts, 2, 3);
    CHECK(res.inertia == doctest::Approx(4.0).epsilon(1e-9));
    std::vector<std::vector<double>> cents;
    for (std::size_t c = 0; c < 2; ++c)
        cents.push_back({res.centroids(c, 0), res.centroids(c, 1)});
    std::sort(cents.begin(), cents.end());
    CHECK(cents[0][0] == doctest::Approx(0.0));
    CHECK(cents[0][1] == doctest::Approx(1.0));
    CHECK(cents[1][0] == doctest::Approx(100.0));
    CHECK(cents[1][1] == doctest::Approx(1.0));
}

TEST_CASE("kmeans: k equals point count gives zero inertia") {
    const Matrix pts = random_matrix(6, 3, 5);
    const auto res = kmeans(pts, 6, 9);
    CHECK(res.inertia <= 1e-12);
}

TEST_CASE("kmeans: k=1 centroid is the mean") {
    const Matrix pts = random_matrix(40, 4, 17);
    const auto res = kmeans(pts, 1, 1);
    for (std::size_t j = 0; j < 4; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < 40; ++i) mean += pts(i, j);
        mean /= 40.0;
        CHECK(res.centroids(0, j) == doctest::Approx(mean).epsilon(1e-12));
    }
}

TEST_CASE("kmeans: inertia non-increasing and deterministic per seed") {
    const Matrix pts = random_matrix(120, 5, 23);
    const auto r1 = kmeans(pts, 6, 77);
    const auto r2 = kmeans(pts, 6, 77);
    CHECK(r1.labels == r2.labels);
    CHECK(r1.centroids == r2.centroids);
    for (std::size_t t = 1; t < r1.inertia_trace.size(); ++t)
        CHECK(r1.inertia_trace[t] <= r1.inertia_trace[t - 1] + 1e-9);
    CHECK_THROWS_AS((void)kmeans(pts, 121, 0), Error);
}

TEST_CASE("knn_search: colinear points") {
    const Matrix pts = Matrix::from_rows({{0.0}, {1.0}, {3.0}});
    const auto g = knn_search(pts, 1, KnnMetric::euclidean);
    CHECK(g.neighbors(0)[0] == 1);
    CHECK(g.neighbors(1)[0] == 0);
    CHECK(g.neighbors(2)[0] == 1);
}

TEST_CASE("knn_search: perfectly correlated rows have distance 0") {
    Matrix pts(4, 6);
    Rng rng(3);
    for (std::size_t j = 0; j < 6; ++j) pts(0, j) = rng.normal();
    for (std::size_t i = 1; i < 4; ++i)
        for (std::size_t j = 0; j < 6; ++j) pts(i, j) = 2.0 * pts(0, j) + 1.0;
    const auto g = knn_search(pts, 2, KnnMetric::correlation);
    for (std::size_t i = 0; i < 4; ++i)
        for (double d : g.neighbor_distances(i)) CHECK(d <= 1e-12);
}

TEST_CASE("knn_search: parallel result is bit-identical to serial") {
    const Matrix pts = random_matrix(120, 6, 55);
    for (const auto metric : {KnnMetric::euclidean, KnnMetric::correlation}) {
        const auto serial = knn_search(pts, 7, metric, 1);
        const auto parallel = knn_search(pts, 7, metric, 4);
        CHECK(serial.indices == parallel.indices);
        CHECK(serial.distances == parallel.distances);
    }
}

TEST_CASE("knn_search: matches exhaustive oracle") {
    const Matrix pts = random_matrix(100, 8, 99);
    const auto g = knn_search(pts, 5, KnnMetric::euclidean, 2);
    for (std::size_t i = 0; i < 100; ++i) {
        const auto want = oracle::knn_of_point(pts, i, 5);
        const auto got = g.neighbors(i);
        for (std::size_t t = 0; t < 5; ++t) CHECK(got[t] == want[t]);
        // sorted distances, no self neighbors
        for (std::size_t t = 0; t < 5; ++t) {
            CHECK(got[t] != i);
            if (t > 0) CHECK(g.neighbor_distances(i)[t] >= g.neighbor_distances(i)[t - 1]);
        }
    }
}

TEST_CASE("knn_search: constant row under correlation is flagged, not fatal") {
    Matrix pts = random_matrix(10, 4, 31);
    for (std::size_t j = 0; j < 4; ++j) pts(3, j) = 2.5;
    const auto g = knn_search(pts, 3, KnnMetric::correlation);
    REQUIRE(g.degenerate_rows.size() == 1);
    CHECK(g.degenerate_rows[0] == 3);
    for (double d : g.neighbor_distances(3)) CHECK(d == doctest::Approx(1.0));
}

TEST_CASE("pearson: affine relations and hand value") {
    std::vector<double> x{1, 2, 3, 4};
    std::vector<double> y_up{3, 5, 7, 9};    // 2x + 1
    std::vector<double> y_down{-1, -2, -3, -4};
    CHECK(pearson(x, y_up) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson(x, y_down) == doctest::Approx(-1.0).epsilon(1e-12));

    std::vector<double> y{1, 3, 2, 4};
    CHECK(pearson(x, y) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(pearson(x, y) == doctest::Approx(oracle::pearson_cov(x, y)).epsilon(1e-12));

    std::vector<double> constant{2, 2, 2, 2};
    CHECK_THROWS_AS((void)pearson(x, constant), Error);
}

TEST_CASE("pearson: invariant under positive affine maps") {
    Rng rng(8);
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
        x[i] = rng.normal();
        y[i] = rng.normal();
    }
    const double base = pearson(x, y);
    std::vector<double> xs = x;
    for (auto& v : xs) v = 3.5 * v + 11.0;
    std::vector<double> ys = y;
    for (auto& v : ys) v = 0.25 * v - 2.0;
    CHECK(pearson(xs, ys) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("histogram_pair: identical, disjoint, degenerate") {
    std::vector<double> x{0.0, 0.1, 0.5, 0.9};
    const auto [p_same, q_same] = histogram_pair(x, x, 4);
    for (std::size_t i = 0; i < p_same.size(); ++i)
        CHECK(p_same[i] == doctest::Approx(q_same[i]).epsilon(1e-15));

    std::vector<double> lo{0.0, 0.1, 0.2};
    std::vector<double> hi{0.8, 0.9, 1.0};
    const auto [p, q] = histogram_pair(lo, hi, 2);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(p[1] <= 1e-9);
    CHECK(q[0] <= 1e-9);
    CHECK(q[1] == doctest::Approx(1.0).epsilon(1e-8));

    std::vector<double> flat{2.0, 2.0, 2.0};
    const auto [pd, qd] = histogram_pair(flat, flat, 8);
    REQUIRE(pd.size() == 1);
    CHECK(pd[0] == 1.0);
    CHECK(qd[0] == 1.0);
}

TEST_CASE("histogram_pair: law of large numbers on uniform samples") {
    Rng rng(4);
    std::vector<double> x(100000), y(100000);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : y) v = rng.uniform();
    const auto [p, q] = histogram_pair(x, y, 10);
    double sum_p = 0.0, sum_q = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(std::abs(p[i] - 0.1) <= 0.01);
        sum_p += p[i];
        sum_q += q[i];
    }
    CHECK(sum_p == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sum_q == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("quantile_function: boundaries and midpoint") {
    std::vector<double> samples{4.0, 1.0, 3.0, 2.0};
    const QuantileFunction q(samples);
    CHECK(q(0.5) == 2.0);
    CHECK(q(1.0) == 4.0);
    CHECK(q(0.0) == 1.0);
    CHECK(q(1e-9) == 1.0);
    CHECK(q(0.25) == 1.0);
    CHECK(q(0.2500001) == 2.0);
}

TEST_CASE("spearman: monotone map gives 1") {
    std::vector<double> x{1, 5, 3, 9, 7};
    std::vector<double> y{2, 26, 10, 82, 50};  // x^2 + 1, increasing on positives
    CHECK(spearman(x, y) == doctest::Approx(1.0).epsilon(1e-12));
}
