#include "pcslink/waveform.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace pcslink {

std::vector<double> rrc_taps(double rolloff, int sps, int span_symbols) {
    if (!(rolloff > 0.0 && rolloff <= 1.0) || sps < 1 || span_symbols < 1) {
        throw std::invalid_argument("rrc_taps: invalid parameters");
    }
    const int n = 2 * span_symbols * sps + 1;
    std::vector<double> h(n);
    const double b = rolloff;
    double energy = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = static_cast<double>(k - span_symbols * sps) / sps;
        double v;
        if (t == 0.0) {
            v = 1.0 - b + 4.0 * b / kPi;
        } else if (std::abs(std::abs(t) - 1.0 / (4.0 * b)) < 1e-12) {
            v = b / std::sqrt(2.0) *
                ((1.0 + 2.0 / kPi) * std::sin(kPi / (4.0 * b)) + (1.0 - 2.0 / kPi) * std::cos(kPi / (4.0 * b)));
        } else {
            const double x = 4.0 * b * t;
            v = (std::sin(kPi * t * (1.0 - b)) + 4.0 * b * t * std::cos(kPi * t * (1.0 + b))) /
                (kPi * t * (1.0 - x * x));
        }
        h[k] = v;
        energy += v * v;
    }
    const double g = 1.0 / std::sqrt(energy);
    for (double& v : h) v *= g;
    return h;
}

std::vector<cdouble> pulse_shape(std::span<const cdouble> symbols, std::span<const double> taps, int sps) {
    const long n_out = static_cast<long>(symbols.size()) * sps;
    const long c = static_cast<long>(taps.size() / 2);
    std::vector<cdouble> out(static_cast<std::size_t>(n_out));
    for (std::size_t j = 0; j < symbols.size(); ++j) {
        const long base = static_cast<long>(j) * sps - c;
        for (std::size_t k = 0; k < taps.size(); ++k) {
            const long i = base + static_cast<long>(k);
            if (i >= 0 && i < n_out) out[static_cast<std::size_t>(i)] += symbols[j] * taps[k];
        }
    }
    return out;
}

std::vector<cdouble> filter_centered(std::span<const cdouble> in, std::span<const double> taps) {
    const long n = static_cast<long>(in.size());
    const long c = static_cast<long>(taps.size() / 2);
    std::vector<cdouble> out(in.size());
    for (long i = 0; i < n; ++i) {
        cdouble acc = 0.0;
        const long k_lo = std::max(0L, i + c - (n - 1));
        const long k_hi = std::min(static_cast<long>(taps.size()) - 1, i + c);
        for (long k = k_lo; k <= k_hi; ++k) acc += taps[k] * in[i + c - k];
        out[i] = acc;
    }
    return out;
}

void add_noise(std::vector<cdouble>& samples, double noise_var, std::uint64_t seed) {
    if (!(noise_var >= 0.0)) throw std::invalid_argument("add_noise: negative variance");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(noise_var / 2.0));
    for (auto& z : samples) {
        const double re = normal(rng);
        const double im = normal(rng);
        z += cdouble(re, im);
    }
}

} // namespace pcslink
