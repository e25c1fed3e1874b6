#include "dsim/performance.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dsim/compressor.hpp"
#include "dsim/parallel.hpp"

namespace dsim {

namespace {

void write_labeled_csv(const std::vector<std::string>& labels, const Matrix& values,
                       const std::string& path) {
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    for (const auto& l : labels) ofs << ',' << l;
    ofs << '\n';
    char buf[32];
    for (std::size_t i = 0; i < values.rows(); ++i) {
        ofs << labels[i];
        for (std::size_t j = 0; j < values.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
            ofs << ',' << buf;
        }
        ofs << '\n';
    }
    if (!ofs) throw Error("write failed: " + path);
}

}  // namespace

PerformanceMatrix evaluate_performance_matrix(const std::vector<Dataset>& datasets,
                                              const TaskSpec& task, std::uint64_t seed,
                                              int threads) {
    if (datasets.empty()) throw Error("performance_matrix: no datasets");
    require_common_dim(datasets);
    const std::size_t k = datasets.size();

    PerformanceMatrix p;
    for (const auto& d : datasets) p.labels.push_back(d.name);
    p.values = Matrix(k, k);
    p.latent_dim = task.latent_dim;
    p.normalization = task.normalization;
    p.seed = seed;

    for (const auto& d : datasets) {
        const auto n_train = std::size_t(task.train_fraction * double(d.size()));
        if (n_train <= task.latent_dim || n_train >= d.size())
            throw Error("performance_matrix: dataset '" + d.name +
                        "' too small for latent_dim " + std::to_string(task.latent_dim) +
                        " with train fraction " + std::to_string(task.train_fraction));
    }

    parallel_for(k, threads, [&](std::size_t i) {
        const Dataset& di = datasets[i];
        const std::size_t m = di.size();
        const auto n_train = std::size_t(task.train_fraction * double(m));

        std::vector<std::size_t> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        Rng rng(derive_seed({seed, 0x706572665f73ULL, i}));
        rng.shuffle(idx);

        Dataset train;
        train.name = di.name;
        train.points = Matrix(n_train, di.dim());
        Matrix held(m - n_train, di.dim());
        for (std::size_t t = 0; t < m; ++t) {
            auto src = di.points.row(idx[t]);
            if (t < n_train) {
                auto dst = train.points.row(t);
                std::copy(src.begin(), src.end(), dst.begin());
            } else {
                auto dst = held.row(t - n_train);
                std::copy(src.begin(), src.end(), dst.begin());
            }
        }

        const CompressorModel model = fit_compressor(train, task.latent_dim);
        for (std::size_t j = 0; j < k; ++j) {
            const Matrix& test = j == i ? held : datasets[j].points;
            p.values(i, j) = nmse_db(test, reconstruct(model, test));
        }
    });
    return p;
}

Matrix performance_drop(const PerformanceMatrix& p) {
    const std::size_t k = p.values.rows();
    Matrix delta(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            delta(i, j) = p.values(i, j) - p.values(i, i);
    return delta;
}

void save_performance_csv(const PerformanceMatrix& p, const std::string& path) {
    write_labeled_csv(p.labels, p.values, path);
}

void save_drop_csv(const PerformanceMatrix& p, const std::string& path) {
    write_labeled_csv(p.labels, performance_drop(p), path);
}

PerformanceMatrix load_performance_csv(const std::string& path) {
    std::ifstream ifs(path);
    if (!ifs) throw Error("cannot open file: " + path);
    std::string line;
    if (!std::getline(ifs, line)) throw Error(path + ": empty performance matrix");

    PerformanceMatrix p;
    {
        std::stringstream ss(line);
        std::string tok;
        bool first = true;
        while (std::getline(ss, tok, ',')) {
            if (first) {
                first = false;
                continue;
            }
            p.labels.push_back(tok);
        }
    }
    const std::size_t k = p.labels.size();
    if (k == 0) throw Error(path + ": no dataset labels in header");
    p.values = Matrix(k, k);
    std::size_t i = 0;
    while (std::getline(ifs, line)) {
        if (line.empty()) continue;
        if (i >= k) throw Error(path + ": more rows than labels");
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        if (tok != p.labels[i])
            throw Error(path + ": row label '" + tok + "' does not match header '" +
                        p.labels[i] + "'");
        for (std::size_t j = 0; j < k; ++j) {
            if (!std::getline(ss, tok, ','))
                throw Error(path + ": short row " + std::to_string(i));
            p.values(i, j) = std::stod(tok);
        }
        ++i;
    }
    if (i != k) throw Error(path + ": expected " + std::to_string(k) + " rows");
    return p;
}

}  // namespace dsim
