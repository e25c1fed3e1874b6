#pragma once

#include <complex>
#include <vector>

#include "dsim/dataset.hpp"

namespace dsim {

// Batch of complex channel matrices, one per sample, antennas × subcarriers.
struct ChannelTensor {
    std::size_t n_samples = 0;
    std::size_t n_bs = 0;
    std::size_t n_sub = 0;
    std::vector<std::complex<double>> data;  // sample-major, then row-major (bs, sub)

    std::complex<double>& at(std::size_t s, std::size_t b, std::size_t u) {
        return data[(s * n_bs + b) * n_sub + u];
    }
    std::complex<double> at(std::size_t s, std::size_t b, std::size_t u) const {
        return data[(s * n_bs + b) * n_sub + u];
    }
};

// Reinterprets a dataset of interleaved re/im features as channel matrices
// with n_bs antenna rows (n_sub inferred from the feature count).
ChannelTensor channel_from_dataset(const Dataset& ds, std::size_t n_bs);

// Unnormalized DFT along the subcarrier axis, keeping the first n_taps delay
// taps, then splitting re/im: each sample becomes n_bs × n_taps × 2 real
// features. The matching inverse carries a 1/n_sub factor.
Dataset channel_to_features(const ChannelTensor& channels, std::size_t n_taps,
                            const std::string& name = "", const std::string& source = "");

}  // namespace dsim
