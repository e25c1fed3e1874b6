#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dsim/correlate.hpp"
#include "dsim/distance_matrix.hpp"
#include "dsim/embedding.hpp"
#include "dsim/io.hpp"
#include "dsim/parallel.hpp"
#include "dsim/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string manifest;
    std::uint64_t seed = 0;
    std::string out = ".";
    int threads = dsim::default_thread_count();
    std::size_t max_points = 2000;
    bool max_points_set = false;
    bool seed_set = false;
};

// Semantic configuration only: thread count and output paths must not change
// any result, so they stay out of the hash.
std::string config_hash(const GlobalOpts& g, const std::string& command,
                        const std::string& detail) {
    std::string manifest_content;
    if (!g.manifest.empty()) {
        std::ifstream ifs(g.manifest, std::ios::binary);
        std::ostringstream ss;
        ss << ifs.rdbuf();
        manifest_content = ss.str();
    }
    const std::string canon = command + "|seed=" + std::to_string(g.seed) +
                              "|max_points=" + std::to_string(g.max_points) + "|" + detail +
                              "|manifest=" + manifest_content;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(dsim::fnv1a64(canon)));
    return buf;
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw dsim::Error("cannot write file: " + path.string());
    ofs << j.dump(2) << '\n';
}

std::vector<dsim::Dataset> load_inputs(GlobalOpts& g) {
    if (g.manifest.empty()) throw dsim::Error("missing --manifest");
    dsim::Manifest m = dsim::load_manifest(g.manifest);
    if (g.max_points_set) m.limits.max_points = g.max_points;
    if (g.seed_set) m.limits.seed = g.seed;
    if (!g.seed_set) g.seed = m.limits.seed;
    g.max_points = m.limits.max_points;
    return dsim::load_family(m);
}

std::vector<dsim::MetricSpec> parse_metrics(const std::string& names, const GlobalOpts& g,
                                            std::size_t cluster_k, std::size_t bins,
                                            std::size_t subspace_rank) {
    std::vector<dsim::MetricSpec> specs;
    auto push = [&](dsim::MetricId id) {
        dsim::MetricSpec spec;
        spec.id = id;
        spec.cluster_k = cluster_k;
        spec.bins = bins;
        spec.subspace_rank = subspace_rank;
        spec.max_points = g.max_points;
        specs.push_back(spec);
    };
    if (names == "all") {
        for (const auto id : dsim::all_metric_ids()) push(id);
        return specs;
    }
    std::stringstream ss(names);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) push(dsim::metric_from_string(tok));
    }
    if (specs.empty()) throw dsim::Error("no metrics requested");
    return specs;
}

struct EmbedOpts {
    std::size_t dim = 0;
    std::size_t embed_points = 500;
    std::size_t neighbors = 15;
    double min_dist = 0.1;
    double spread = 1.0;
    std::size_t epochs = 300;
    double learning_rate = 1.0;
    std::size_t negative_samples = 5;
    std::string knn_metric = "correlation";
    double perplexity = 30.0;
    std::size_t pca_stage = 32;

    dsim::EmbedSpec to_spec(dsim::Space space, const GlobalOpts& g) const {
        dsim::EmbedSpec spec;
        spec.space = space;
        spec.out_dim = dim;
        spec.corpus_cap = embed_points;
        spec.umap.n_neighbors = neighbors;
        spec.umap.min_dist = min_dist;
        spec.umap.spread = spread;
        spec.umap.n_epochs = epochs;
        spec.umap.learning_rate = learning_rate;
        spec.umap.negative_samples = negative_samples;
        spec.umap.metric = knn_metric == "euclidean" ? dsim::KnnMetric::euclidean
                                                     : dsim::KnnMetric::correlation;
        spec.tsne.perplexity = perplexity;
        spec.pca_stage_dim = pca_stage;
        spec.seed = g.seed;
        spec.threads = g.threads;
        return spec;
    }

    void add_flags(CLI::App* cmd) {
        cmd->add_option("--dim", dim, "output dimension (0 = per-space default)");
        cmd->add_option("--embed-points", embed_points, "per-dataset row cap for the joint fit");
        cmd->add_option("--neighbors", neighbors, "UMAP n_neighbors");
        cmd->add_option("--min-dist", min_dist, "UMAP min_dist");
        cmd->add_option("--spread", spread, "UMAP spread");
        cmd->add_option("--epochs", epochs, "UMAP optimization epochs");
        cmd->add_option("--learning-rate", learning_rate, "UMAP initial learning rate");
        cmd->add_option("--negative-samples", negative_samples, "UMAP negatives per edge");
        cmd->add_option("--knn-metric", knn_metric, "UMAP graph metric: correlation|euclidean")
            ->check(CLI::IsMember({"correlation", "euclidean"}));
        cmd->add_option("--perplexity", perplexity, "t-SNE perplexity");
        cmd->add_option("--pca-stage", pca_stage, "PCA stage width for pca+umap");
    }
};

int cmd_synth(const GlobalOpts& g, std::size_t k, std::size_t n, std::size_t m, double shift) {
    const auto family = dsim::generate_drift_family(k, n, m, shift, g.seed);
    fs::create_directories(g.out);

    dsim::Manifest manifest;
    for (const auto& ds : family) {
        const std::string filename = ds.name + ".f32le";
        dsim::save_dataset_f32le(ds, (fs::path(g.out) / filename).string());
        manifest.entries.push_back({ds.name, filename, dsim::FileFormat::f32le, false});
    }
    // default normalization for the compression task; edit the manifest to
    // opt out
    manifest.preprocess = dsim::ChannelPreprocess{0, 0, "per-sample-unit-norm"};
    manifest.limits = {g.max_points, g.seed};
    dsim::save_manifest(manifest, (fs::path(g.out) / "manifest.json").string());

    const std::string detail = "synth|k=" + std::to_string(k) + "|n=" + std::to_string(n) +
                               "|m=" + std::to_string(m) + "|shift=" + std::to_string(shift);
    write_json(json{{"command", "synth"},
                    {"seed", g.seed},
                    {"config_hash", config_hash(g, "synth", detail)},
                    {"k", k},
                    {"n", n},
                    {"m", m},
                    {"shift_step", shift},
                    {"files", k}},
               fs::path(g.out) / "synth.meta.json");
    std::printf("wrote %zu datasets + manifest.json to %s\n", family.size(), g.out.c_str());
    return 0;
}

int cmd_embed(GlobalOpts& g, const std::string& space_name, const EmbedOpts& e) {
    const dsim::Space space = dsim::space_from_string(space_name);
    if (space == dsim::Space::raw) throw dsim::Error("embed: space must not be raw");
    const auto datasets = load_inputs(g);
    const auto model = dsim::fit_embedding(datasets, e.to_spec(space, g));

    fs::create_directories(g.out);
    const std::string tag = space == dsim::Space::pca_umap ? "pca_umap" : space_name;
    const fs::path coords = fs::path(g.out) / ("coords_" + tag + ".csv");
    dsim::export_coordinates_csv(model, coords.string());

    json meta{{"command", "embed"},
              {"space", dsim::to_string(space)},
              {"seed", g.seed},
              {"config_hash", config_hash(g, "embed", "space=" + space_name)},
              {"out_dim", model.coords.cols()},
              {"corpus_rows", model.coords.rows()},
              {"datasets", json::array()}};
    for (std::size_t t = 0; t < model.labels.size(); ++t)
        meta["datasets"].push_back({{"name", model.labels[t]},
                                    {"begin", model.ranges[t].first},
                                    {"end", model.ranges[t].second}});
    if (space == dsim::Space::umap || space == dsim::Space::pca_umap) {
        meta["curve_a"] = model.curve_a;
        meta["curve_b"] = model.curve_b;
        meta["n_neighbors"] = model.umap_params.n_neighbors;
    }
    write_json(meta, fs::path(g.out) / ("embedding_" + tag + ".meta.json"));
    std::printf("wrote %s (%zu points x %zu dims)\n", coords.string().c_str(),
                model.coords.rows(), model.coords.cols());
    return 0;
}

int cmd_distance(GlobalOpts& g, const std::string& metric_names, const std::string& space_name,
                 const EmbedOpts& e, std::size_t cluster_k, std::size_t bins,
                 std::size_t subspace_rank) {
    const dsim::Space space = dsim::space_from_string(space_name);
    const auto datasets = load_inputs(g);
    const auto metrics = parse_metrics(metric_names, g, cluster_k, bins, subspace_rank);

    dsim::EmbeddingModel model;
    if (space != dsim::Space::raw) model = dsim::fit_embedding(datasets, e.to_spec(space, g));

    fs::create_directories(g.out);
    const std::string tag = space == dsim::Space::pca_umap ? "pca_umap" : space_name;
    json failures = json::array();
    for (const auto& spec : metrics) {
        const std::string name = dsim::to_string(spec.id);
        try {
            const auto dm = dsim::compute_distance_matrix(
                datasets, spec, space, space == dsim::Space::raw ? nullptr : &model, g.seed,
                g.threads);
            const fs::path csv = fs::path(g.out) / ("distance_" + name + "_" + tag + ".csv");
            dsim::save_distance_csv(dm, csv.string());
            dsim::save_distance_sidecar(
                dm, (fs::path(g.out) / ("distance_" + name + "_" + tag + ".json")).string(),
                config_hash(g, "distance", "metric=" + name + "|space=" + space_name));
            std::printf("wrote %s\n", csv.string().c_str());
        } catch (const dsim::Error& err) {
            failures.push_back({{"metric", name}, {"space", space_name}, {"error", err.what()}});
            std::fprintf(stderr, "distance %s/%s failed: %s\n", name.c_str(),
                         space_name.c_str(), err.what());
        }
    }
    if (!failures.empty()) {
        write_json(json{{"failures", failures}}, fs::path(g.out) / "failures.json");
        std::cerr << json{{"failures", failures}}.dump() << "\n";
        return 1;
    }
    return 0;
}

int cmd_perf(GlobalOpts& g, std::size_t latent) {
    const auto datasets = load_inputs(g);
    const dsim::TaskSpec task{latent, "manifest", 0.8};
    const auto p = dsim::evaluate_performance_matrix(
        datasets, task, dsim::derive_seed({g.seed, 0x70657266ULL}), g.threads);

    fs::create_directories(g.out);
    dsim::save_performance_csv(p, (fs::path(g.out) / "perf.csv").string());
    dsim::save_drop_csv(p, (fs::path(g.out) / "perf_delta.csv").string());
    write_json(json{{"command", "perf"},
                    {"seed", g.seed},
                    {"config_hash", config_hash(g, "perf", "latent=" + std::to_string(latent))},
                    {"latent_dim", latent},
                    {"datasets", p.labels}},
               fs::path(g.out) / "perf.meta.json");
    std::printf("wrote perf.csv and perf_delta.csv to %s\n", g.out.c_str());
    return 0;
}

int cmd_correlate(const GlobalOpts& g, const std::string& distance_path,
                  const std::string& perf_path, const std::string& mode_name,
                  bool include_diagonal) {
    auto dm = dsim::load_distance_csv(distance_path);
    const auto p = dsim::load_performance_csv(perf_path);
    const auto row = dsim::correlate(dm, p, dsim::drop_mode_from_string(mode_name),
                                     include_diagonal);

    dsim::CorrelationReport report;
    report.seed = g.seed;
    report.datasets = p.labels;
    report.config_hash = config_hash(g, "correlate", distance_path + "|" + perf_path + "|" +
                                                         mode_name);
    dsim::CorrelationRow named = row;
    named.metric = fs::path(distance_path).stem().string();
    report.rows.push_back(named);

    fs::create_directories(g.out);
    dsim::save_report_json(report, (fs::path(g.out) / "correlate.json").string());
    dsim::save_report_text(report, (fs::path(g.out) / "correlate.txt").string());
    std::printf("%s", dsim::report_to_text(report).c_str());
    return 0;
}

int cmd_report(GlobalOpts& g, const std::string& metric_names, const std::string& spaces_csv,
               std::size_t latent, const EmbedOpts& e, std::size_t cluster_k, std::size_t bins,
               std::size_t subspace_rank) {
    const auto datasets = load_inputs(g);
    const auto metrics = parse_metrics(metric_names, g, cluster_k, bins, subspace_rank);

    std::vector<dsim::EmbedSpec> spaces;
    {
        std::stringstream ss(spaces_csv);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok.empty()) continue;
            spaces.push_back(e.to_spec(dsim::space_from_string(tok), g));
        }
    }
    if (spaces.empty()) throw dsim::Error("no spaces requested");

    dsim::TaskSpec task{latent, "manifest", 0.8};
    auto report = dsim::run_benchmark(datasets, metrics, spaces, task, g.seed, g.threads);
    report.config_hash =
        config_hash(g, "report",
                    "metrics=" + metric_names + "|spaces=" + spaces_csv +
                        "|latent=" + std::to_string(latent));

    fs::create_directories(g.out);
    dsim::save_report_json(report, (fs::path(g.out) / "report.json").string());
    dsim::save_report_timing_json(report, (fs::path(g.out) / "report_timing.json").string());
    dsim::save_report_text(report, (fs::path(g.out) / "report.txt").string());
    std::printf("%s", dsim::report_to_text(report).c_str());

    json failures = json::array();
    for (const auto& r : report.rows)
        if (!r.ok)
            failures.push_back({{"metric", r.metric}, {"space", r.space}, {"error", r.error}});
    if (!failures.empty()) {
        write_json(json{{"failures", failures}}, fs::path(g.out) / "failures.json");
        std::cerr << json{{"failures", failures}}.dump() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dataset similarity toolkit: distances, embeddings, and "
                 "distance-vs-performance correlation"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    auto* seed_opt = app.add_option("--seed", g.seed, "global RNG seed");
    app.add_option("--manifest", g.manifest, "dataset manifest (JSON)");
    app.add_option("--out", g.out, "output directory");
    app.add_option("--threads", g.threads, "worker threads");
    auto* mp_opt =
        app.add_option("--max-points", g.max_points, "per-dataset subsample cap for metrics");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic drift family");
    std::size_t k = 8, n = 64, m = 2000;
    double shift = 5.0;
    synth->add_option("--k", k, "number of datasets");
    synth->add_option("--n", n, "feature dimension");
    synth->add_option("--m", m, "points per dataset");
    synth->add_option("--shift", shift, "mean shift per dataset step");

    // embed
    auto* embed = app.add_subcommand("embed", "fit a joint embedding and export coordinates");
    std::string embed_space = "umap";
    EmbedOpts eopts;
    embed->add_option("--space", embed_space, "pca|umap|tsne|pca+umap");
    eopts.add_flags(embed);

    // distance
    auto* distance = app.add_subcommand("distance", "compute dataset distance matrices");
    std::string metric_names = "all";
    std::string dist_space = "raw";
    std::size_t cluster_k = 8, bins = 64, subspace_rank = 0;
    distance->add_option("--metric", metric_names, "metric id, comma list, or 'all'");
    distance->add_option("--space", dist_space, "raw|pca|umap|tsne|pca+umap");
    distance->add_option("--cluster-k", cluster_k, "clusters for clustered_euclidean");
    distance->add_option("--bins", bins, "histogram bins");
    distance->add_option("--subspace-rank", subspace_rank, "subspace rank (0 = min(16, N))");
    eopts.add_flags(distance);

    // perf
    auto* perf = app.add_subcommand("perf", "train/test compressor performance matrix");
    std::size_t latent = 32;
    perf->add_option("--latent", latent, "compressor latent dimension");

    // correlate
    auto* correlate = app.add_subcommand(
        "correlate", "correlate one distance matrix with one performance matrix");
    std::string distance_path, perf_path, mode_name = "delta";
    bool include_diagonal = false;
    correlate->add_option("--distance", distance_path, "distance matrix CSV")->required();
    correlate->add_option("--perf", perf_path, "performance matrix CSV")->required();
    correlate->add_option("--mode", mode_name, "delta|raw")
        ->check(CLI::IsMember({"delta", "raw"}));
    correlate->add_flag("--include-diagonal", include_diagonal, "include i=j pairs");

    // report
    auto* report = app.add_subcommand("report", "full (metric x space) correlation study");
    std::string report_metrics = "all";
    std::string report_spaces = "raw,pca,umap";
    std::size_t report_latent = 32;
    report->add_option("--metric", report_metrics, "metric id, comma list, or 'all'");
    report->add_option("--spaces", report_spaces, "comma list of spaces");
    report->add_option("--latent", report_latent, "compressor latent dimension");
    report->add_option("--cluster-k", cluster_k, "clusters for clustered_euclidean");
    report->add_option("--bins", bins, "histogram bins");
    report->add_option("--subspace-rank", subspace_rank, "subspace rank (0 = min(16, N))");
    eopts.add_flags(report);

    try {
        app.parse(argc, argv);
        g.seed_set = seed_opt->count() > 0;
        g.max_points_set = mp_opt->count() > 0;

        if (synth->parsed()) {
            if (k < 2) throw dsim::Error("synth: need at least 2 datasets (--k >= 2)");
            return cmd_synth(g, k, n, m, shift);
        }
        if (embed->parsed()) return cmd_embed(g, embed_space, eopts);
        if (distance->parsed())
            return cmd_distance(g, metric_names, dist_space, eopts, cluster_k, bins,
                                subspace_rank);
        if (perf->parsed()) return cmd_perf(g, latent);
        if (correlate->parsed())
            return cmd_correlate(g, distance_path, perf_path, mode_name, include_diagonal);
        if (report->parsed())
            return cmd_report(g, report_metrics, report_spaces, report_latent, eopts,
                              cluster_k, bins, subspace_rank);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const dsim::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
}
