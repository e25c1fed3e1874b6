#pragma once

#include <string>
#include <vector>

#include "dsim/dataset.hpp"

namespace dsim {

// Linear autoencoder: encode z = V^T (x - mu), decode x_hat = V z + mu, where
// V holds the top latent_dim right singular vectors of the mean-centered
// training data.
struct CompressorModel {
    std::vector<double> mean;
    Matrix basis;  // N×latent_dim, orthonormal columns
    std::size_t latent_dim = 0;
    std::string trained_on;
    bool rank_deficient = false;  // fitted with fewer directions than requested
};

CompressorModel fit_compressor(const Dataset& train, std::size_t latent_dim);

Matrix encode(const CompressorModel& model, const Matrix& rows);
Matrix reconstruct(const CompressorModel& model, const Matrix& rows);

// Batch NMSE in dB: 10 log10(sum ||h - h_hat||^2 / sum ||h||^2), one ratio of
// summed squares over the whole batch, clamped to >= -300 dB.
double nmse_db(const Matrix& h, const Matrix& h_hat);

}  // namespace dsim
