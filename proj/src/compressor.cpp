#include "dsim/compressor.hpp"

#include <algorithm>
#include <cmath>

#include "dsim/svd.hpp"

namespace dsim {

CompressorModel fit_compressor(const Dataset& train, std::size_t latent_dim) {
    const std::size_t m = train.size(), n = train.dim();
    if (latent_dim < 1 || latent_dim > n)
        throw Error("fit_compressor: latent_dim " + std::to_string(latent_dim) +
                    " out of range for " + std::to_string(n) + " features");
    if (m <= latent_dim)
        throw Error("fit_compressor: need more than latent_dim training rows");

    CompressorModel model;
    model.latent_dim = latent_dim;
    model.trained_on = train.name;
    model.mean.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        auto r = train.points.row(i);
        for (std::size_t j = 0; j < n; ++j) model.mean[j] += r[j];
    }
    for (auto& v : model.mean) v /= double(m);

    Matrix centered(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            centered(i, j) = train.points(i, j) - model.mean[j];

    const SvdResult svd = truncated_svd(centered, latent_dim);
    if (svd.numerical_rank < latent_dim) {
        // keep only the directions actually supported by the data
        model.rank_deficient = true;
        const std::size_t r = std::max<std::size_t>(svd.numerical_rank, 1);
        model.basis = Matrix(n, r);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t c = 0; c < r; ++c) model.basis(j, c) = svd.V(j, c);
    } else {
        model.basis = svd.V;
    }
    return model;
}

Matrix encode(const CompressorModel& model, const Matrix& rows) {
    const std::size_t n = model.mean.size(), d = model.basis.cols();
    if (rows.cols() != n) throw Error("encode: feature dimension mismatch");
    Matrix z(rows.rows(), d);
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t c = 0; c < d; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                s += (rows(i, j) - model.mean[j]) * model.basis(j, c);
            z(i, c) = s;
        }
    return z;
}

Matrix reconstruct(const CompressorModel& model, const Matrix& rows) {
    const Matrix z = encode(model, rows);
    const std::size_t n = model.mean.size(), d = model.basis.cols();
    Matrix out(rows.rows(), n);
    for (std::size_t i = 0; i < rows.rows(); ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = model.mean[j];
            for (std::size_t c = 0; c < d; ++c) s += model.basis(j, c) * z(i, c);
            out(i, j) = s;
        }
    return out;
}

double nmse_db(const Matrix& h, const Matrix& h_hat) {
    if (h.rows() != h_hat.rows() || h.cols() != h_hat.cols())
        throw Error("nmse_db: shape mismatch");
    double err = 0.0, ref = 0.0;
    const auto& hd = h.data();
    const auto& rd = h_hat.data();
    for (std::size_t i = 0; i < hd.size(); ++i) {
        const double d = hd[i] - rd[i];
        err += d * d;
        ref += hd[i] * hd[i];
    }
    if (ref == 0.0) throw Error("nmse_db: zero-norm reference batch");
    if (err == 0.0) return -300.0;
    return std::max(10.0 * std::log10(err / ref), -300.0);
}

}  // namespace dsim
