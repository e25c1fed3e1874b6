#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsim/dataset.hpp"

namespace dsim {

struct TaskSpec {
    std::size_t latent_dim = 32;
    std::string normalization = "none";
    double train_fraction = 0.8;
};

// Entry (i, j): NMSE dB of the compressor trained on dataset i, evaluated on
// dataset j. The self entry (i, i) is measured on a held-out split.
struct PerformanceMatrix {
    std::vector<std::string> labels;
    Matrix values;
    std::size_t latent_dim = 0;
    std::string normalization;
    std::uint64_t seed = 0;
};

// For each i: seeded train split of D_i (train_fraction), fit the compressor,
// score the held-out rows for P_ii and each full D_j for P_ij. Fits run in
// parallel over i; deterministic per seed.
PerformanceMatrix evaluate_performance_matrix(const std::vector<Dataset>& datasets,
                                              const TaskSpec& task, std::uint64_t seed,
                                              int threads = 1);

// Drop matrix: delta(i, j) = P_ij - P_ii; the diagonal is exactly zero.
Matrix performance_drop(const PerformanceMatrix& p);

void save_performance_csv(const PerformanceMatrix& p, const std::string& path);
void save_drop_csv(const PerformanceMatrix& p, const std::string& path);
PerformanceMatrix load_performance_csv(const std::string& path);

}  // namespace dsim
