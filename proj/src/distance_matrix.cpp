#include "dsim/distance_matrix.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dsim/parallel.hpp"

namespace dsim {

double DistanceMatrix::total_seconds() const {
    double s = 0.0;
    for (double v : entry_seconds.data()) s += v;
    return s;
}

DistanceMatrix compute_distance_matrix(const std::vector<Dataset>& datasets,
                                       const MetricSpec& metric, Space space,
                                       const EmbeddingModel* embedding,
                                       std::uint64_t seed, int threads) {
    if (datasets.empty()) throw Error("distance_matrix: no datasets");
    require_common_dim(datasets);

    // resolve the working view: raw points or embedded coordinates
    std::vector<Dataset> view;
    if (space == Space::raw) {
        view = datasets;
    } else {
        if (!embedding)
            throw Error("distance_matrix: space '" + to_string(space) +
                        "' requires a fitted embedding");
        std::vector<Dataset> embedded = embedded_datasets(*embedding);
        for (const auto& d : datasets) {
            auto it = std::find_if(embedded.begin(), embedded.end(),
                                   [&](const Dataset& e) { return e.name == d.name; });
            if (it == embedded.end())
                throw Error("distance_matrix: embedding does not cover dataset '" + d.name +
                            "'");
            view.push_back(*it);
        }
    }

    const std::size_t k = view.size();
    DistanceMatrix dm;
    for (const auto& d : view) dm.labels.push_back(d.name);
    dm.values = Matrix(k, k);
    dm.entry_seconds = Matrix(k, k);
    dm.space = space;
    dm.metric = metric;
    dm.seed = seed;

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) pairs.emplace_back(i, j);

    parallel_for(pairs.size(), threads, [&](std::size_t t) {
        const auto [i, j] = pairs[t];
        MetricSpec entry_spec = metric;
        entry_spec.seed = derive_seed({seed, i, j, std::uint64_t(metric.id)});
        const auto start = std::chrono::steady_clock::now();
        double value;
        try {
            value = evaluate_metric(entry_spec, view[i], view[j]);
        } catch (const Error& e) {
            throw Error("metric " + to_string(metric.id) + " entry (" + std::to_string(i) +
                        "," + std::to_string(j) + ") [" + dm.labels[i] + " vs " +
                        dm.labels[j] + "]: " + e.what());
        }
        const auto stop = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(stop - start).count();
        dm.values(i, j) = dm.values(j, i) = value;
        dm.entry_seconds(i, j) = dm.entry_seconds(j, i) = secs;
    });
    return dm;
}

void save_distance_csv(const DistanceMatrix& dm, const std::string& path) {
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    for (const auto& l : dm.labels) ofs << ',' << l;
    ofs << '\n';
    char buf[32];
    for (std::size_t i = 0; i < dm.values.rows(); ++i) {
        ofs << dm.labels[i];
        for (std::size_t j = 0; j < dm.values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", dm.values(i, j));
            ofs << ',' << buf;
        }
        ofs << '\n';
    }
    if (!ofs) throw Error("write failed: " + path);
}

DistanceMatrix load_distance_csv(const std::string& path) {
    std::ifstream ifs(path);
    if (!ifs) throw Error("cannot open file: " + path);
    std::string line;
    if (!std::getline(ifs, line)) throw Error(path + ": empty distance matrix");

    DistanceMatrix dm;
    {
        std::stringstream ss(line);
        std::string tok;
        bool first = true;
        while (std::getline(ss, tok, ',')) {
            if (first) {
                first = false;  // leading empty header cell
                continue;
            }
            dm.labels.push_back(tok);
        }
    }
    const std::size_t k = dm.labels.size();
    if (k == 0) throw Error(path + ": no dataset labels in header");
    dm.values = Matrix(k, k);
    dm.entry_seconds = Matrix(k, k);

    std::size_t i = 0;
    while (std::getline(ifs, line)) {
        if (line.empty()) continue;
        if (i >= k) throw Error(path + ": more rows than labels");
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        if (tok != dm.labels[i])
            throw Error(path + ": row label '" + tok + "' does not match header '" +
                        dm.labels[i] + "'");
        for (std::size_t j = 0; j < k; ++j) {
            if (!std::getline(ss, tok, ','))
                throw Error(path + ": short row " + std::to_string(i));
            dm.values(i, j) = std::stod(tok);
        }
        ++i;
    }
    if (i != k) throw Error(path + ": expected " + std::to_string(k) + " rows");
    return dm;
}

void save_distance_sidecar(const DistanceMatrix& dm, const std::string& path,
                           const std::string& config_hash) {
    nlohmann::json j;
    j["metric"] = {{"id", to_string(dm.metric.id)},
                   {"cluster_k", dm.metric.cluster_k},
                   {"bins", dm.metric.bins},
                   {"subspace_rank", dm.metric.subspace_rank},
                   {"max_points", dm.metric.max_points}};
    j["space"] = to_string(dm.space);
    j["seed"] = dm.seed;
    j["config_hash"] = config_hash;
    j["labels"] = dm.labels;
    j["total_seconds"] = dm.total_seconds();
    auto& es = j["entry_seconds"] = nlohmann::json::array();
    for (std::size_t i = 0; i < dm.entry_seconds.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t c = 0; c < dm.entry_seconds.cols(); ++c)
            row.push_back(dm.entry_seconds(i, c));
        es.push_back(row);
    }
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    ofs << j.dump(2) << '\n';
}

}  // namespace dsim
