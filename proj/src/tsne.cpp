#include "dsim/tsne.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsim {

namespace {

// Conditional affinities for one point: Gaussian kernel row with the bandwidth
// chosen so the row entropy matches log(perplexity).
void conditional_row(const std::vector<double>& d2_row, std::size_t self, double perplexity,
                     std::vector<double>& p_row) {
    const std::size_t m = d2_row.size();
    const double target = std::log(perplexity);

    double beta = 1.0;
    double beta_min = -std::numeric_limits<double>::infinity();
    double beta_max = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < 50; ++iter) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            p_row[j] = j == self ? 0.0 : std::exp(-beta * d2_row[j]);
            sum += p_row[j];
        }
        if (sum <= 0.0) sum = std::numeric_limits<double>::min();
        double entropy = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (j == self) continue;
            entropy += beta * d2_row[j] * p_row[j];
        }
        entropy = entropy / sum + std::log(sum);

        const double diff = entropy - target;
        if (std::abs(diff) < 1e-5) break;
        if (diff > 0.0) {
            beta_min = beta;
            beta = std::isinf(beta_max) ? beta * 2.0 : 0.5 * (beta + beta_max);
        } else {
            beta_max = beta;
            beta = std::isinf(beta_min) ? beta * 0.5 : 0.5 * (beta + beta_min);
        }
    }

    double sum = 0.0;
    for (double v : p_row) sum += v;
    if (sum <= 0.0) sum = std::numeric_limits<double>::min();
    for (double& v : p_row) v /= sum;
}

}  // namespace

Matrix tsne_embed(const Matrix& points, const TsneParams& params,
                  std::vector<double>* kl_trace) {
    const std::size_t m = points.rows();
    if (m > 5000)
        throw Error("tsne_embed: corpus too large for the exact method (" +
                    std::to_string(m) + " rows, limit 5000)");
    if (m < 4) throw Error("tsne_embed: need at least 4 points");
    if (3.0 * params.perplexity >= double(m))
        throw Error("tsne_embed: require 3*perplexity < number of points");

    // pairwise squared distances in the input space
    std::vector<std::vector<double>> d2(m, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            d2[i][j] = d2[j][i] = squared_distance(points.row(i), points.row(j));

    // symmetrized affinities
    std::vector<std::vector<double>> p(m, std::vector<double>(m, 0.0));
    {
        std::vector<double> row(m);
        std::vector<std::vector<double>> cond(m, std::vector<double>(m, 0.0));
        for (std::size_t i = 0; i < m; ++i) {
            conditional_row(d2[i], i, params.perplexity, row);
            cond[i] = row;
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                p[i][j] = std::max((cond[i][j] + cond[j][i]) / (2.0 * double(m)), 1e-12);
        for (std::size_t i = 0; i < m; ++i) p[i][i] = 0.0;
    }

    Rng rng(derive_seed({params.seed, 0x74736e655f696e69ULL}));
    Matrix y(m, params.out_dim);
    for (auto& v : y.data()) v = rng.normal() * 1e-4;

    Matrix inc(m, params.out_dim);
    Matrix gains(m, params.out_dim, 1.0);
    std::vector<std::vector<double>> w(m, std::vector<double>(m, 0.0));

    const std::size_t exaggeration_iters = std::min<std::size_t>(250, params.iters);
    const double exaggeration = 12.0;

    for (std::size_t iter = 0; iter < params.iters; ++iter) {
        const double p_scale = iter < exaggeration_iters ? exaggeration : 1.0;
        const double momentum = iter < 250 ? 0.5 : 0.8;

        // low-dimensional kernel and its normalizer
        double z = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = i + 1; j < m; ++j) {
                const double wij = 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
                w[i][j] = w[j][i] = wij;
                z += 2.0 * wij;
            }

        if (kl_trace) {
            double kl = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = 0; j < m; ++j) {
                    if (i == j) continue;
                    const double q = std::max(w[i][j] / z, 1e-12);
                    kl += p[i][j] * std::log(p[i][j] / q);
                }
            kl_trace->push_back(kl);
        }

        for (std::size_t i = 0; i < m; ++i) {
            auto yi = y.row(i);
            for (std::size_t c = 0; c < params.out_dim; ++c) {
                double grad = 0.0;
                for (std::size_t j = 0; j < m; ++j) {
                    if (j == i) continue;
                    const double coeff = (p_scale * p[i][j] - w[i][j] / z) * w[i][j];
                    grad += coeff * (yi[c] - y(j, c));
                }
                grad *= 4.0;

                double& g = gains(i, c);
                g = (grad > 0.0) != (inc(i, c) > 0.0) ? g + 0.2 : g * 0.8;
                g = std::max(g, 0.01);
                inc(i, c) = momentum * inc(i, c) - params.learning_rate * g * grad;
            }
        }
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t c = 0; c < params.out_dim; ++c) y(i, c) += inc(i, c);

        // keep the embedding centered
        for (std::size_t c = 0; c < params.out_dim; ++c) {
            double mean = 0.0;
            for (std::size_t i = 0; i < m; ++i) mean += y(i, c);
            mean /= double(m);
            for (std::size_t i = 0; i < m; ++i) y(i, c) -= mean;
        }

        if (!y.all_finite())
            throw Error("tsne_embed: coordinates diverged at iteration " +
                        std::to_string(iter) + "; reduce learning_rate");
    }
    return y;
}

}  // namespace dsim
