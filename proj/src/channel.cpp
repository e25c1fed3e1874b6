#include "dsim/channel.hpp"

#include <cmath>
#include <numbers>

namespace dsim {

ChannelTensor channel_from_dataset(const Dataset& ds, std::size_t n_bs) {
    if (ds.points.cols() % 2 != 0)
        throw Error("channel_from_dataset: feature count must be even (re/im interleaved)");
    const std::size_t n_complex = ds.points.cols() / 2;
    if (n_bs == 0 || n_complex % n_bs != 0)
        throw Error("channel_from_dataset: " + std::to_string(n_complex) +
                    " complex scalars not divisible by n_bs=" + std::to_string(n_bs));

    ChannelTensor ch;
    ch.n_samples = ds.points.rows();
    ch.n_bs = n_bs;
    ch.n_sub = n_complex / n_bs;
    ch.data.resize(ch.n_samples * n_complex);
    for (std::size_t s = 0; s < ch.n_samples; ++s)
        for (std::size_t c = 0; c < n_complex; ++c)
            ch.data[s * n_complex + c] = {ds.points(s, 2 * c), ds.points(s, 2 * c + 1)};
    return ch;
}

Dataset channel_to_features(const ChannelTensor& channels, std::size_t n_taps,
                            const std::string& name, const std::string& source) {
    if (n_taps == 0) throw Error("channel_to_features: n_taps must be >= 1");
    if (n_taps > channels.n_sub)
        throw Error("channel_to_features: n_taps=" + std::to_string(n_taps) +
                    " exceeds subcarrier count " + std::to_string(channels.n_sub));

    const std::size_t n_sub = channels.n_sub;
    const double two_pi = 2.0 * std::numbers::pi;

    Dataset out;
    out.name = name;
    out.source = source;
    out.preprocessing.push_back("delay_truncate(n_taps=" + std::to_string(n_taps) + ")");
    out.points = Matrix(channels.n_samples, channels.n_bs * n_taps * 2);

    for (std::size_t s = 0; s < channels.n_samples; ++s) {
        for (std::size_t b = 0; b < channels.n_bs; ++b) {
            for (std::size_t t = 0; t < n_taps; ++t) {
                std::complex<double> tap{0.0, 0.0};
                for (std::size_t u = 0; u < n_sub; ++u) {
                    const double phase = -two_pi * double(t) * double(u) / double(n_sub);
                    tap += channels.at(s, b, u) *
                           std::complex<double>(std::cos(phase), std::sin(phase));
                }
                const std::size_t base = (b * n_taps + t) * 2;
                out.points(s, base) = tap.real();
                out.points(s, base + 1) = tap.imag();
            }
        }
    }
    return out;
}

}  // namespace dsim
