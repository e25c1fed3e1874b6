#include "dsim/embedding.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "dsim/preprocess.hpp"
#include "dsim/svd.hpp"

namespace dsim {

std::string to_string(Space s) {
    switch (s) {
        case Space::raw: return "raw";
        case Space::pca: return "pca";
        case Space::umap: return "umap";
        case Space::tsne: return "tsne";
        case Space::pca_umap: return "pca+umap";
    }
    return "?";
}

Space space_from_string(const std::string& s) {
    if (s == "raw") return Space::raw;
    if (s == "pca") return Space::pca;
    if (s == "umap") return Space::umap;
    if (s == "tsne") return Space::tsne;
    if (s == "pca+umap" || s == "pca_umap") return Space::pca_umap;
    throw Error("unknown space '" + s + "' (expected raw, pca, umap, tsne, or pca+umap)");
}

namespace {

struct StackedCorpus {
    Matrix points;  // original corpus order: dataset 0 rows, dataset 1 rows, ...
    std::vector<std::string> labels;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;
};

StackedCorpus stack(const std::vector<Dataset>& datasets) {
    if (datasets.empty()) throw Error("fit: empty dataset list");
    require_common_dim(datasets);
    std::size_t total = 0;
    for (const auto& d : datasets) total += d.size();

    StackedCorpus c;
    c.points = Matrix(total, datasets[0].dim());
    std::size_t at = 0;
    for (const auto& d : datasets) {
        c.labels.push_back(d.name);
        c.ranges.emplace_back(at, at + d.size());
        for (std::size_t i = 0; i < d.size(); ++i, ++at) {
            auto src = d.points.row(i);
            auto dst = c.points.row(at);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
    return c;
}

// Canonical pipeline order: rows sorted by content, then shuffled with a
// permutation that depends only on (seed, row count). Any permutation of the
// input rows yields the same pipeline stream, which is what makes one
// dataset's coordinates independent of another's row order.
std::vector<std::size_t> canonical_order(const Matrix& points, std::uint64_t seed) {
    std::vector<std::size_t> order(points.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        auto ra = points.row(a), rb = points.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });
    std::vector<std::size_t> slots(points.rows());
    std::iota(slots.begin(), slots.end(), 0);
    Rng rng(derive_seed({seed, 0x656d625f73687566ULL}));
    rng.shuffle(slots);
    std::vector<std::size_t> out(points.rows());
    for (std::size_t i = 0; i < order.size(); ++i) out[slots[i]] = order[i];
    return out;
}

Matrix permute_rows(const Matrix& points, const std::vector<std::size_t>& order) {
    Matrix out(points.rows(), points.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto src = points.row(order[i]);
        auto dst = out.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

Matrix unpermute_rows(const Matrix& permuted, const std::vector<std::size_t>& order) {
    Matrix out(permuted.rows(), permuted.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
        auto src = permuted.row(i);
        auto dst = out.row(order[i]);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

void fit_pca_stage(const Matrix& ordered, std::size_t out_dim, std::vector<double>& mean,
                   Matrix& basis) {
    const std::size_t m = ordered.rows(), n = ordered.cols();
    if (out_dim < 1 || out_dim > n)
        throw Error("fit_pca: out_dim " + std::to_string(out_dim) + " out of range for " +
                    std::to_string(n) + " features");

    mean.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        auto r = ordered.row(i);
        for (std::size_t j = 0; j < n; ++j) mean[j] += r[j];
    }
    for (auto& v : mean) v /= double(m);

    Matrix centered(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) centered(i, j) = ordered(i, j) - mean[j];

    basis = truncated_svd(centered, out_dim).V;
}

Matrix apply_pca(const std::vector<double>& mean, const Matrix& basis, const Matrix& rows) {
    const std::size_t m = rows.rows(), n = rows.cols(), d = basis.cols();
    if (n != basis.rows()) throw Error("pca_transform: feature dimension mismatch");
    Matrix out(m, d);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < d; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += (rows(i, j) - mean[j]) * basis(j, c);
            out(i, c) = s;
        }
    return out;
}

}  // namespace

EmbeddingModel fit_pca(const std::vector<Dataset>& corpus, std::size_t out_dim) {
    StackedCorpus c = stack(corpus);
    const auto order = canonical_order(c.points, 0);
    const Matrix ordered = permute_rows(c.points, order);

    EmbeddingModel model;
    model.kind = EmbeddingKind::pca;
    model.out_dim = out_dim;
    fit_pca_stage(ordered, out_dim, model.mean, model.basis);
    model.coords = apply_pca(model.mean, model.basis, c.points);
    model.labels = std::move(c.labels);
    model.ranges = std::move(c.ranges);
    return model;
}

EmbeddingModel fit_umap(const std::vector<Dataset>& corpus, const UmapParams& params,
                        int threads) {
    StackedCorpus c = stack(corpus);
    if (c.points.rows() <= params.n_neighbors)
        throw Error("fit_umap: corpus of " + std::to_string(c.points.rows()) +
                    " rows is too small for n_neighbors=" +
                    std::to_string(params.n_neighbors));
    const auto order = canonical_order(c.points, params.seed);
    const Matrix ordered = permute_rows(c.points, order);

    EmbeddingModel model;
    model.kind = EmbeddingKind::umap;
    model.out_dim = params.out_dim;
    model.umap_params = params;
    std::pair<double, double> ab;
    Matrix coords = umap_pipeline(ordered, params, threads, &ab, &model.graph);
    model.curve_a = ab.first;
    model.curve_b = ab.second;
    model.coords = unpermute_rows(coords, order);
    model.labels = std::move(c.labels);
    model.ranges = std::move(c.ranges);
    return model;
}

EmbeddingModel embed_tsne(const std::vector<Dataset>& corpus, double perplexity,
                          std::size_t out_dim, std::uint64_t seed) {
    StackedCorpus c = stack(corpus);
    const auto order = canonical_order(c.points, seed);
    const Matrix ordered = permute_rows(c.points, order);

    EmbeddingModel model;
    model.kind = EmbeddingKind::tsne;
    model.out_dim = out_dim;
    model.tsne_params = {perplexity, out_dim, 1000, 200.0, seed};
    Matrix coords = tsne_embed(ordered, model.tsne_params, &model.tsne_kl_trace);
    model.coords = unpermute_rows(coords, order);
    model.labels = std::move(c.labels);
    model.ranges = std::move(c.ranges);
    return model;
}

EmbeddingModel fit_embedding(const std::vector<Dataset>& datasets, const EmbedSpec& spec) {
    std::vector<Dataset> capped;
    capped.reserve(datasets.size());
    for (const auto& d : datasets)
        capped.push_back(
            subsample(d, spec.corpus_cap, derive_seed({spec.seed, fnv1a64(d.name)})));

    switch (spec.space) {
        case Space::raw:
            throw Error("fit_embedding: raw space has no embedding");
        case Space::pca:
            return fit_pca(capped, spec.out_dim ? spec.out_dim : 32);
        case Space::umap: {
            UmapParams p = spec.umap;
            p.seed = spec.seed;
            if (spec.out_dim) p.out_dim = spec.out_dim;
            return fit_umap(capped, p, spec.threads);
        }
        case Space::tsne: {
            EmbeddingModel model = embed_tsne(capped, spec.tsne.perplexity,
                                              spec.out_dim ? spec.out_dim : 2, spec.seed);
            return model;
        }
        case Space::pca_umap: {
            // PCA first, then UMAP over the PCA coordinates
            EmbeddingModel pca_stage = fit_pca(capped, spec.pca_stage_dim);
            std::vector<Dataset> reduced = embedded_datasets(pca_stage);
            UmapParams p = spec.umap;
            p.seed = spec.seed;
            if (spec.out_dim) p.out_dim = spec.out_dim;
            EmbeddingModel model = fit_umap(reduced, p, spec.threads);
            model.kind = EmbeddingKind::pca_umap;
            model.mean = std::move(pca_stage.mean);
            model.basis = std::move(pca_stage.basis);
            return model;
        }
    }
    throw Error("fit_embedding: unreachable");
}

Matrix pca_transform(const EmbeddingModel& model, const Matrix& rows) {
    if (model.kind != EmbeddingKind::pca)
        throw Error("pca_transform: model is not a PCA fit");
    return apply_pca(model.mean, model.basis, rows);
}

std::vector<Dataset> embedded_datasets(const EmbeddingModel& model) {
    std::vector<Dataset> out;
    out.reserve(model.labels.size());
    for (std::size_t t = 0; t < model.labels.size(); ++t) {
        const auto [begin, end] = model.ranges[t];
        Dataset ds;
        ds.name = model.labels[t];
        ds.source = "embedded";
        ds.points = Matrix(end - begin, model.coords.cols());
        for (std::size_t i = begin; i < end; ++i) {
            auto src = model.coords.row(i);
            auto dst = ds.points.row(i - begin);
            std::copy(src.begin(), src.end(), dst.begin());
        }
        out.push_back(std::move(ds));
    }
    return out;
}

void export_coordinates_csv(const EmbeddingModel& model, const std::string& path) {
    std::ofstream ofs(path, std::ios::trunc);
    if (!ofs) throw Error("cannot write file: " + path);
    ofs << "dataset";
    for (std::size_t c = 0; c < model.coords.cols(); ++c) ofs << ",c" << c;
    ofs << "\n";
    char buf[32];
    for (std::size_t t = 0; t < model.labels.size(); ++t) {
        const auto [begin, end] = model.ranges[t];
        for (std::size_t i = begin; i < end; ++i) {
            ofs << model.labels[t];
            for (std::size_t c = 0; c < model.coords.cols(); ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", model.coords(i, c));
                ofs << ',' << buf;
            }
            ofs << "\n";
        }
    }
    if (!ofs) throw Error("write failed: " + path);
}

}  // namespace dsim
