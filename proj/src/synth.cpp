#include "dsim/synth.hpp"

#include <cmath>

namespace dsim {

namespace {

std::vector<double> random_unit_vector(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    double nrm = 0.0;
    while (nrm == 0.0) {
        for (auto& x : v) x = rng.normal();
        nrm = norm2(v);
    }
    for (auto& x : v) x /= nrm;
    return v;
}

void orthogonalize(std::vector<double>& v, const std::vector<double>& u) {
    const double p = dot(v, u);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] -= p * u[j];
    const double nrm = norm2(v);
    for (auto& x : v) x /= nrm;
}

constexpr std::uint64_t kDirTag = 0x64726966745f6469ULL;   // drift direction stream
constexpr std::uint64_t kCompTag = 0x64726966745f636fULL;  // component direction stream
constexpr std::uint64_t kBaseTag = 0x62617365ULL;          // base offset stream
constexpr std::uint64_t kDataTag = 0x64726966745f6461ULL;  // per-dataset sample stream

// Separation between the two mixture components, in units of the per-axis
// noise; large enough that cluster-based metrics see real structure.
constexpr double kComponentSpread = 4.0;

// Fixed offset of the whole family from the origin, orthogonal to the drift
// direction. Keeps sample norms comparable across the family so that
// norm-sensitive scores (NMSE denominators) respond to the drift itself
// rather than to each dataset's distance from the origin.
constexpr double kBaseOffset = 15.0;

}  // namespace

std::vector<double> drift_direction(std::size_t n, std::uint64_t seed) {
    Rng rng(derive_seed({seed, kDirTag}));
    return random_unit_vector(n, rng);
}

std::vector<Dataset> generate_drift_family(std::size_t k, std::size_t n, std::size_t m,
                                           double shift_step, std::uint64_t seed) {
    if (k < 2) throw Error("generate_drift_family: need at least 2 datasets");
    if (n < 3) throw Error("generate_drift_family: need at least 3 features");
    if (m < 1) throw Error("generate_drift_family: empty dataset requested");

    const std::vector<double> shift_dir = drift_direction(n, seed);

    Rng comp_rng(derive_seed({seed, kCompTag}));
    std::vector<double> comp_dir = random_unit_vector(n, comp_rng);
    orthogonalize(comp_dir, shift_dir);

    Rng base_rng(derive_seed({seed, kBaseTag}));
    std::vector<double> base_dir = random_unit_vector(n, base_rng);
    orthogonalize(base_dir, shift_dir);
    orthogonalize(base_dir, comp_dir);

    std::vector<Dataset> family;
    family.reserve(k);
    for (std::size_t t = 0; t < k; ++t) {
        Dataset ds;
        ds.name = "drift_" + std::to_string(t);
        ds.source = "synthetic:drift(k=" + std::to_string(k) + ",n=" + std::to_string(n) +
                    ",m=" + std::to_string(m) + ",shift=" + std::to_string(shift_step) +
                    ",seed=" + std::to_string(seed) + ",t=" + std::to_string(t) + ")";
        ds.points = Matrix(m, n);

        Rng rng(derive_seed({seed, kDataTag, std::uint64_t(t)}));
        const double offset = double(t) * shift_step;
        for (std::size_t i = 0; i < m; ++i) {
            const double comp = rng.uniform() < 0.5 ? -0.5 : 0.5;
            for (std::size_t j = 0; j < n; ++j)
                ds.points(i, j) = kBaseOffset * base_dir[j] + offset * shift_dir[j] +
                                  comp * kComponentSpread * comp_dir[j] + rng.normal();
        }
        family.push_back(std::move(ds));
    }
    return family;
}

}  // namespace dsim
