#include "dsim/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dsim {

namespace {

// Columns held contiguously so Jacobi rotations stream through memory.
using Columns = std::vector<std::vector<double>>;

Columns to_columns(const Matrix& a, bool transpose) {
    const std::size_t rows = transpose ? a.cols() : a.rows();
    const std::size_t cols = transpose ? a.rows() : a.cols();
    Columns c(cols, std::vector<double>(rows));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (transpose)
                c[i][j] = a(i, j);
            else
                c[j][i] = a(i, j);
        }
    return c;
}

void rotate(std::vector<double>& p, std::vector<double>& q, double c, double s) {
    const std::size_t n = p.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double vp = p[i], vq = q[i];
        p[i] = c * vp - s * vq;
        q[i] = s * vp + c * vq;
    }
}

// One-sided Jacobi: orthogonalize the columns of B in place, accumulating the
// applied rotations in V (initialized to identity). On exit B = U * diag(S)
// with V holding the right singular vectors.
void jacobi_orthogonalize(Columns& b, Columns& v) {
    const std::size_t n = b.size();
    const double tol = 1e-14;
    const int max_sweeps = 64;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = dot(b[p], b[p]);
                const double beta = dot(b[q], b[q]);
                const double gamma = dot(b[p], b[q]);
                if (alpha == 0.0 || beta == 0.0) continue;
                const double off = std::abs(gamma) / std::sqrt(alpha * beta);
                max_off = std::max(max_off, off);
                if (off <= tol) continue;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(b[p], b[q], c, s);
                rotate(v[p], v[q], c, s);
            }
        }
        if (max_off <= tol) break;
    }
}

// Deterministic orthonormal fill-in for columns whose singular value is zero
// (rank-deficient input): Gram-Schmidt of standard basis vectors against the
// columns already present.
void complete_column(Columns& u, std::size_t idx) {
    const std::size_t dim = u[idx].size();
    for (std::size_t e = 0; e < dim; ++e) {
        std::vector<double> cand(dim, 0.0);
        cand[e] = 1.0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            if (j == idx) continue;
            const double proj = dot(cand, u[j]);
            for (std::size_t i = 0; i < dim; ++i) cand[i] -= proj * u[j][i];
        }
        const double nrm = norm2(cand);
        if (nrm > 1e-6) {
            for (std::size_t i = 0; i < dim; ++i) u[idx][i] = cand[i] / nrm;
            return;
        }
    }
}

}  // namespace

SvdResult truncated_svd(const Matrix& a, std::size_t r) {
    const std::size_t m = a.rows(), n = a.cols();
    if (m == 0 || n == 0) throw Error("truncated_svd: empty matrix");
    if (r < 1 || r > std::min(m, n))
        throw Error("truncated_svd: rank " + std::to_string(r) + " out of range for " +
                    std::to_string(m) + "x" + std::to_string(n) + " matrix");

    // Work on the side with fewer columns; for N > M decompose the transpose
    // and swap the roles of U and V afterwards.
    const bool transpose = n > m;
    Columns b = to_columns(a, transpose);
    const std::size_t nc = b.size();       // columns being orthogonalized
    const std::size_t nr = b[0].size();    // their length

    Columns v(nc, std::vector<double>(nc, 0.0));
    for (std::size_t j = 0; j < nc; ++j) v[j][j] = 1.0;

    jacobi_orthogonalize(b, v);

    std::vector<double> sigma(nc);
    for (std::size_t j = 0; j < nc; ++j) sigma[j] = norm2(b[j]);

    std::vector<std::size_t> order(nc);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    const double sig_max = sigma[order[0]];
    const double rank_tol =
        sig_max * double(std::max(m, n)) * std::numeric_limits<double>::epsilon();

    // Normalize the retained left columns; zero columns get a deterministic
    // orthonormal completion so the result always carries r triples.
    Columns left(r), right(r);
    std::vector<double> s_out(r);
    std::size_t rank = 0;
    for (std::size_t j = 0; j < nc; ++j)
        if (sigma[j] > rank_tol) ++rank;

    for (std::size_t t = 0; t < r; ++t) {
        const std::size_t j = order[t];
        s_out[t] = sigma[j];
        right[t] = v[j];
        left[t].assign(nr, 0.0);
        if (sigma[j] > 0.0)
            for (std::size_t i = 0; i < nr; ++i) left[t][i] = b[j][i] / sigma[j];
    }
    for (std::size_t t = 0; t < r; ++t)
        if (s_out[t] == 0.0) complete_column(left, t);

    SvdResult out;
    out.S = std::move(s_out);
    out.numerical_rank = std::min(rank, r);

    const std::size_t u_rows = transpose ? nc : nr;  // always M
    const std::size_t v_rows = transpose ? nr : nc;  // always N
    out.U = Matrix(u_rows, r);
    out.V = Matrix(v_rows, r);
    for (std::size_t t = 0; t < r; ++t) {
        const auto& ucol = transpose ? right[t] : left[t];
        const auto& vcol = transpose ? left[t] : right[t];
        for (std::size_t i = 0; i < u_rows; ++i) out.U(i, t) = ucol[i];
        for (std::size_t i = 0; i < v_rows; ++i) out.V(i, t) = vcol[i];
    }

    // Sign convention: largest-magnitude entry of each V column is positive.
    for (std::size_t t = 0; t < r; ++t) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < v_rows; ++i) {
            const double mag = std::abs(out.V(i, t));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (out.V(arg, t) < 0.0) {
            for (std::size_t i = 0; i < v_rows; ++i) out.V(i, t) = -out.V(i, t);
            for (std::size_t i = 0; i < u_rows; ++i) out.U(i, t) = -out.U(i, t);
        }
    }
    return out;
}

}  // namespace dsim
