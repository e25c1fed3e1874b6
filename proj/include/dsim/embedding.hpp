#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dsim/dataset.hpp"
#include "dsim/tsne.hpp"
#include "dsim/umap.hpp"

namespace dsim {

enum class Space { raw, pca, umap, tsne, pca_umap };

std::string to_string(Space s);
Space space_from_string(const std::string& s);

enum class EmbeddingKind { pca, umap, tsne, pca_umap };

// A fitted dimensionality-reduction transform over a joint corpus. All kinds
// store the fit-corpus coordinates plus the index range of each source
// dataset, so embedded datasets share one comparable frame. Only PCA supports
// out-of-sample transforms; the nonlinear kinds are re-fit instead.
struct EmbeddingModel {
    EmbeddingKind kind = EmbeddingKind::pca;
    std::size_t out_dim = 0;

    // PCA stage (kind pca and the first stage of pca_umap)
    std::vector<double> mean;
    Matrix basis;  // N×d, orthonormal columns

    // UMAP extras
    UmapParams umap_params;
    double curve_a = 0.0, curve_b = 0.0;
    FuzzyGraph graph;

    // t-SNE extras
    TsneParams tsne_params;
    std::vector<double> tsne_kl_trace;

    Matrix coords;  // fit-corpus coordinates, rows aligned with corpus order
    std::vector<std::string> labels;
    std::vector<std::pair<std::size_t, std::size_t>> ranges;  // [begin, end) per label
};

struct EmbedSpec {
    Space space = Space::umap;
    std::size_t out_dim = 0;       // 0 = per-kind default (pca 32, umap/tsne 2)
    std::size_t corpus_cap = 500;  // per-dataset row cap for the joint fit
    UmapParams umap;
    TsneParams tsne;
    std::size_t pca_stage_dim = 32;  // first stage of pca+umap
    std::uint64_t seed = 0;
    int threads = 1;
};

// Joint fits over the union of the given datasets. The corpus is put into a
// canonical content order and then shuffled with a corpus-independent seeded
// permutation before fitting, so each dataset's coordinates do not depend on
// the row order of the others.
EmbeddingModel fit_pca(const std::vector<Dataset>& corpus, std::size_t out_dim);
EmbeddingModel fit_umap(const std::vector<Dataset>& corpus, const UmapParams& params,
                        int threads = 1);
EmbeddingModel embed_tsne(const std::vector<Dataset>& corpus, double perplexity,
                          std::size_t out_dim, std::uint64_t seed);

// Subsamples each dataset to spec.corpus_cap rows and dispatches on the space.
EmbeddingModel fit_embedding(const std::vector<Dataset>& datasets, const EmbedSpec& spec);

// PCA transform of arbitrary rows (kind must be pca).
Matrix pca_transform(const EmbeddingModel& model, const Matrix& rows);

// One dataset of embedded coordinates per source label.
std::vector<Dataset> embedded_datasets(const EmbeddingModel& model);

// CSV export: header, then one row per point with the source dataset name in
// the first column.
void export_coordinates_csv(const EmbeddingModel& model, const std::string& path);

}  // namespace dsim
