#include "dsim/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dsim/stats.hpp"

namespace dsim {

std::string to_string(DropMode mode) { return mode == DropMode::delta ? "delta" : "raw"; }

DropMode drop_mode_from_string(const std::string& s) {
    if (s == "delta") return DropMode::delta;
    if (s == "raw") return DropMode::raw;
    throw Error("unknown drop mode '" + s + "' (expected delta or raw)");
}

CorrelationRow correlate(const DistanceMatrix& d, const PerformanceMatrix& p, DropMode mode,
                         bool include_diagonal) {
    if (d.labels.size() != p.labels.size())
        throw Error("correlate: matrix sizes differ (" + std::to_string(d.labels.size()) +
                    " vs " + std::to_string(p.labels.size()) + " datasets)");
    for (std::size_t i = 0; i < d.labels.size(); ++i)
        if (d.labels[i] != p.labels[i])
            throw Error("correlate: label mismatch at position " + std::to_string(i) +
                        ": distance has '" + d.labels[i] + "', performance has '" +
                        p.labels[i] + "'");

    const std::size_t k = d.labels.size();
    const Matrix delta = performance_drop(p);

    std::vector<double> xs, ys;
    xs.reserve(k * k);
    ys.reserve(k * k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j && !include_diagonal) continue;
            xs.push_back(d.values(i, j));
            ys.push_back(mode == DropMode::delta ? delta(i, j) : p.values(i, j));
        }

    CorrelationRow row;
    row.metric = to_string(d.metric.id);
    row.space = to_string(d.space);
    row.mode = mode;
    row.include_diagonal = include_diagonal;
    row.n_pairs = xs.size();
    row.seconds = d.total_seconds();
    try {
        row.r = pearson(xs, ys);
    } catch (const Error&) {
        throw Error(
            "correlate: degenerate pairing (constant distances or drops); need K >= 3 "
            "datasets for a defined correlation");
    }
    return row;
}

CorrelationReport run_benchmark(const std::vector<Dataset>& datasets,
                                const std::vector<MetricSpec>& metrics,
                                const std::vector<EmbedSpec>& spaces, const TaskSpec& task,
                                std::uint64_t seed, int threads) {
    CorrelationReport report;
    report.seed = seed;
    report.latent_dim = task.latent_dim;
    for (const auto& d : datasets) report.datasets.push_back(d.name);

    const PerformanceMatrix p =
        evaluate_performance_matrix(datasets, task, derive_seed({seed, 0x70657266ULL}), threads);

    for (const auto& space_spec : spaces) {
        EmbeddingModel model;
        bool model_ok = space_spec.space == Space::raw;
        std::string space_error;
        if (!model_ok) {
            try {
                EmbedSpec spec = space_spec;
                spec.seed = seed;
                spec.threads = threads;
                model = fit_embedding(datasets, spec);
                model_ok = true;
            } catch (const Error& e) {
                space_error = e.what();
            }
        }

        for (const auto& metric : metrics) {
            CorrelationRow row;
            row.metric = to_string(metric.id);
            row.space = to_string(space_spec.space);
            if (!model_ok && space_spec.space != Space::raw) {
                row.ok = false;
                row.error = "embedding failed: " + space_error;
                report.rows.push_back(row);
                continue;
            }
            try {
                const DistanceMatrix d = compute_distance_matrix(
                    datasets, metric, space_spec.space,
                    space_spec.space == Space::raw ? nullptr : &model, seed, threads);
                row = correlate(d, p, DropMode::delta, false);
            } catch (const Error& e) {
                row.ok = false;
                row.error = e.what();
            }
            report.rows.push_back(row);
        }
    }

    std::stable_sort(report.rows.begin(), report.rows.end(),
                     [](const CorrelationRow& a, const CorrelationRow& b) {
                         if (a.ok != b.ok) return a.ok;
                         return std::abs(a.r) > std::abs(b.r);
                     });
    return report;
}

void save_report_json(const CorrelationReport& report, const std::string& path) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["datasets"] = report.datasets;
    j["latent_dim"] = report.latent_dim;
    j["config_hash"] = report.config_hash;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json row = {{"metric", r.metric},   {"space", r.space},
                              {"mode", to_string(r.mode)}, {"n_pairs", r.n_pairs},
                              {"ok", r.ok},           {"include_diagonal", r.include_diagonal}};
        if (r.ok)
            row["r"] = r.r;
        else
            row["error"] = r.error;
        rows.push_back(row);
    }
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    ofs << j.dump(2) << '\n';
}

void save_report_timing_json(const CorrelationReport& report, const std::string& path) {
    nlohmann::json j;
    j["config_hash"] = report.config_hash;
    auto& rows = j["rows"] = nlohmann::json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"metric", r.metric}, {"space", r.space}, {"seconds", r.seconds}});
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    ofs << j.dump(2) << '\n';
}

std::string report_to_text(const CorrelationReport& report) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-22s %-10s %10s %12s %9s\n", "Metric", "Space",
                  "Pearson r", "Time (s)", "Pairs");
    out += buf;
    out += std::string(67, '-') + "\n";
    for (const auto& r : report.rows) {
        if (r.ok)
            std::snprintf(buf, sizeof buf, "%-22s %-10s %10.3f %12.3f %9zu\n",
                          r.metric.c_str(), r.space.c_str(), r.r, r.seconds, r.n_pairs);
        else
            std::snprintf(buf, sizeof buf, "%-22s %-10s %10s  FAILED: %s\n", r.metric.c_str(),
                          r.space.c_str(), "-", r.error.c_str());
        out += buf;
    }
    return out;
}

void save_report_text(const CorrelationReport& report, const std::string& path) {
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    ofs << report_to_text(report);
}

CorrelationReport load_report_json(const std::string& path) {
    std::ifstream ifs(path);
    if (!ifs) throw Error("cannot open file: " + path);
    nlohmann::json j;
    try {
        ifs >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("report " + path + ": " + e.what());
    }
    CorrelationReport report;
    report.seed = j.value("seed", std::uint64_t(0));
    report.datasets = j.value("datasets", std::vector<std::string>{});
    report.latent_dim = j.value("latent_dim", std::size_t(0));
    report.config_hash = j.value("config_hash", "");
    for (const auto& row : j["rows"]) {
        CorrelationRow r;
        r.metric = row.value("metric", "");
        r.space = row.value("space", "");
        r.mode = drop_mode_from_string(row.value("mode", "delta"));
        r.n_pairs = row.value("n_pairs", std::size_t(0));
        r.ok = row.value("ok", true);
        r.include_diagonal = row.value("include_diagonal", false);
        if (r.ok)
            r.r = row.value("r", 0.0);
        else
            r.error = row.value("error", "");
        report.rows.push_back(r);
    }
    return report;
}

}  // namespace dsim
