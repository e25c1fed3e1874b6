#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsim/distance_matrix.hpp"
#include "dsim/performance.hpp"

namespace dsim {

enum class DropMode { delta, raw };

std::string to_string(DropMode mode);
DropMode drop_mode_from_string(const std::string& s);

struct CorrelationRow {
    std::string metric;
    std::string space;
    double r = 0.0;
    double seconds = 0.0;  // summed per-entry distance compute time
    std::size_t n_pairs = 0;
    DropMode mode = DropMode::delta;
    bool include_diagonal = false;
    bool ok = true;
    std::string error;
};

struct CorrelationReport {
    std::vector<CorrelationRow> rows;  // sorted by |r| descending, failures last
    std::uint64_t seed = 0;
    std::vector<std::string> datasets;
    std::size_t latent_dim = 0;
    std::string config_hash;
};

// Pearson r between vectorized distances and performance drops over all
// ordered pairs i != j (plus the diagonal when include_diagonal). mode=raw
// pairs distances with P_ij instead of the drop.
CorrelationRow correlate(const DistanceMatrix& d, const PerformanceMatrix& p, DropMode mode,
                         bool include_diagonal = false);

// The full study: one performance matrix, one embedding fit per non-raw
// space, one distance matrix per (metric, space) cell, one correlation row
// each. Per-cell failures are recorded in the row, not fatal to other cells.
CorrelationReport run_benchmark(const std::vector<Dataset>& datasets,
                                const std::vector<MetricSpec>& metrics,
                                const std::vector<EmbedSpec>& spaces, const TaskSpec& task,
                                std::uint64_t seed, int threads = 1);

// report.json carries only deterministic content; timing goes to the separate
// sidecar so byte-identical reruns stay byte-identical.
void save_report_json(const CorrelationReport& report, const std::string& path);
void save_report_timing_json(const CorrelationReport& report, const std::string& path);
std::string report_to_text(const CorrelationReport& report);
void save_report_text(const CorrelationReport& report, const std::string& path);
CorrelationReport load_report_json(const std::string& path);

}  // namespace dsim
