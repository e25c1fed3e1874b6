#include "dsim/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsim {

std::string to_string(NormalizeMode mode) {
    switch (mode) {
        case NormalizeMode::per_sample_unit_norm: return "per-sample-unit-norm";
        case NormalizeMode::global_standardize: return "global-standardize";
        case NormalizeMode::none: return "none";
    }
    return "?";
}

NormalizeMode normalize_mode_from_string(const std::string& s) {
    if (s == "per-sample-unit-norm") return NormalizeMode::per_sample_unit_norm;
    if (s == "global-standardize") return NormalizeMode::global_standardize;
    if (s == "none" || s.empty()) return NormalizeMode::none;
    throw Error("unknown normalization mode '" + s +
                "' (expected per-sample-unit-norm, global-standardize, or none)");
}

Dataset normalize(const Dataset& ds, NormalizeMode mode) {
    if (mode == NormalizeMode::none) return ds;

    Dataset out = ds;
    const std::size_t m = out.points.rows(), n = out.points.cols();

    if (mode == NormalizeMode::per_sample_unit_norm) {
        for (std::size_t i = 0; i < m; ++i) {
            const double nrm = norm2(out.points.row(i));
            if (nrm == 0.0)
                throw Error("normalize: all-zero row " + std::to_string(i) + " in '" +
                            ds.name + "' under per-sample-unit-norm");
            for (std::size_t j = 0; j < n; ++j) out.points(i, j) /= nrm;
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < m; ++i) mean += out.points(i, j);
            mean /= double(m);
            double var = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double d = out.points(i, j) - mean;
                var += d * d;
            }
            var /= double(m);
            const double sd = std::sqrt(var);
            for (std::size_t i = 0; i < m; ++i)
                out.points(i, j) = sd > 0.0 ? (out.points(i, j) - mean) / sd : 0.0;
        }
    }
    out.preprocessing.push_back(to_string(mode));
    return out;
}

Dataset subsample(const Dataset& ds, std::size_t max_points, std::uint64_t seed) {
    if (max_points < 1) throw Error("subsample: max_points must be >= 1");
    const std::size_t m = ds.points.rows();
    if (m <= max_points) return ds;

    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed({seed, 0x73756273616d70ULL}));
    rng.shuffle(idx);
    idx.resize(max_points);
    std::sort(idx.begin(), idx.end());

    Dataset out;
    out.name = ds.name;
    out.source = ds.source;
    out.preprocessing = ds.preprocessing;
    out.preprocessing.push_back("subsample(" + std::to_string(max_points) + ")");
    out.points = Matrix(max_points, ds.points.cols());
    for (std::size_t i = 0; i < max_points; ++i) {
        auto src = ds.points.row(idx[i]);
        auto dst = out.points.row(i);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

}  // namespace dsim
