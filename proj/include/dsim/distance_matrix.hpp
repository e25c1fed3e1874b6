#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsim/dataset.hpp"
#include "dsim/embedding.hpp"
#include "dsim/metrics.hpp"

namespace dsim {

struct DistanceMatrix {
    std::vector<std::string> labels;
    Matrix values;         // K×K, symmetric, zero diagonal
    Space space = Space::raw;
    MetricSpec metric;
    Matrix entry_seconds;  // per-entry wall time
    std::uint64_t seed = 0;

    double total_seconds() const;
};

// Fills the upper triangle (one deterministic seed per entry derived from
// (seed, i, j, metric)) and mirrors it; the diagonal is zero by definition.
// Entries for distinct pairs may run on a worker pool; values are identical
// for any thread count. For a non-raw space the embedding must cover every
// dataset name and supplies the coordinates.
DistanceMatrix compute_distance_matrix(const std::vector<Dataset>& datasets,
                                       const MetricSpec& metric, Space space,
                                       const EmbeddingModel* embedding,
                                       std::uint64_t seed, int threads = 1);

void save_distance_csv(const DistanceMatrix& dm, const std::string& path);

// Reads labels + values back from the CSV (metric/space/timing live in the
// JSON sidecar, not here).
DistanceMatrix load_distance_csv(const std::string& path);

void save_distance_sidecar(const DistanceMatrix& dm, const std::string& path,
                           const std::string& config_hash);

}  // namespace dsim
