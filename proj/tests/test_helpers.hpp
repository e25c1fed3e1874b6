#pragma once

#include <string>
#include <vector>

#include "dsim/common.hpp"
#include "dsim/dataset.hpp"

namespace helpers {

using dsim::Dataset;
using dsim::Matrix;

inline Dataset make_dataset(const std::string& name,
                            const std::vector<std::vector<double>>& rows) {
    Dataset ds;
    ds.name = name;
    ds.source = "test";
    ds.points = Matrix::from_rows(rows);
    return ds;
}

inline Dataset gaussian_dataset(const std::string& name, std::size_t m, std::size_t n,
                                std::uint64_t seed, double mean_shift = 0.0,
                                double scale = 1.0) {
    Dataset ds;
    ds.name = name;
    ds.source = "test";
    ds.points = Matrix(m, n);
    dsim::Rng rng(seed);
    for (auto& v : ds.points.data()) v = mean_shift + scale * rng.normal();
    return ds;
}

// two isotropic blobs separated along the first axis
inline Matrix two_blobs(std::size_t per_blob, std::size_t n, double separation,
                        std::uint64_t seed) {
    Matrix pts(2 * per_blob, n);
    dsim::Rng rng(seed);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const double center = i < per_blob ? 0.0 : separation;
        for (std::size_t j = 0; j < n; ++j)
            pts(i, j) = (j == 0 ? center : 0.0) + rng.normal();
    }
    return pts;
}

// Two Gaussian blobs living on a random low-dimensional plane inside R^ambient
// (unit per-axis sigma on the plane, small ambient noise), separated along an
// orthogonal direction. Full-rank isotropic blobs have no 2-D embeddable
// neighborhood structure, so embedding-quality checks use these instead.
inline Matrix manifold_blobs(std::size_t per_blob, std::size_t ambient, double separation,
                             std::uint64_t seed, std::size_t intrinsic_dim = 2,
                             double ambient_noise = 0.05) {
    dsim::Rng rng(seed);
    std::vector<std::vector<double>> frame;
    for (std::size_t f = 0; f < intrinsic_dim + 1; ++f) {
        std::vector<double> v(ambient);
        for (auto& x : v) x = rng.normal();
        for (const auto& u : frame) {
            const double p = dsim::dot(v, u);
            for (std::size_t j = 0; j < ambient; ++j) v[j] -= p * u[j];
        }
        const double nrm = dsim::norm2(v);
        for (auto& x : v) x /= nrm;
        frame.push_back(v);
    }
    Matrix pts(2 * per_blob, ambient);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const double center = i < per_blob ? 0.0 : separation;
        std::vector<double> coeff(intrinsic_dim);
        for (auto& c : coeff) c = rng.normal();
        for (std::size_t j = 0; j < ambient; ++j) {
            double v = center * frame[intrinsic_dim][j];
            for (std::size_t f = 0; f < intrinsic_dim; ++f) v += coeff[f] * frame[f][j];
            pts(i, j) = v + ambient_noise * rng.normal();
        }
    }
    return pts;
}

inline std::pair<Dataset, Dataset> split_blobs(const Matrix& pts) {
    const std::size_t half = pts.rows() / 2;
    Dataset a, b;
    a.name = "blob_a";
    b.name = "blob_b";
    a.source = b.source = "test";
    a.points = Matrix(half, pts.cols());
    b.points = Matrix(half, pts.cols());
    for (std::size_t i = 0; i < half; ++i)
        for (std::size_t j = 0; j < pts.cols(); ++j) {
            a.points(i, j) = pts(i, j);
            b.points(i, j) = pts(half + i, j);
        }
    return {a, b};
}

}  // namespace helpers
