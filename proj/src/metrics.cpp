#include "pcslink/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "pcslink/channel.hpp"

namespace pcslink {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTiny = 1e-250;

// log(sum(exp(v))) over the entries selected by `take`.
template <typename Take>
double log_sum_exp(std::span<const double> v, Take take) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (take(i)) mx = std::max(mx, v[i]);
    }
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (take(i)) s += std::exp(v[i] - mx);
    }
    return mx + std::log(s);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void check_noise(double noise_var) {
    if (!(noise_var > 0.0) || !std::isfinite(noise_var)) {
        throw std::invalid_argument("noise variance must be positive and finite");
    }
}

} // namespace

std::vector<double> bitwise_llrs_joint(std::span<const cdouble> rx, const ShapedDistribution& dist, double noise_var) {
    check_noise(noise_var);
    const auto& t = dist.tmpl();
    const auto& pts = dist.constellation();
    const auto& p = dist.probabilities();
    const int m = t.bits_per_symbol;
    std::vector<double> log_prior(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) log_prior[i] = p[i] > 0.0 ? std::log(p[i]) : kNegInf;

    std::vector<double> llr(rx.size() * static_cast<std::size_t>(m));
    std::vector<double> metric(pts.size());
    for (std::size_t k = 0; k < rx.size(); ++k) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            metric[i] = log_prior[i] - std::norm(rx[k] - pts[i]) / noise_var;
        }
        for (int j = 0; j < m; ++j) {
            const double l0 = log_sum_exp(metric, [&](std::size_t i) { return t.bit(i, j) == 0; });
            const double l1 = log_sum_exp(metric, [&](std::size_t i) { return t.bit(i, j) == 1; });
            llr[k * m + j] = l0 - l1;
        }
    }
    return llr;
}

std::vector<double> bitwise_llrs(std::span<const cdouble> rx, const ShapedDistribution& dist, double noise_var) {
    if (!dist.product_form()) return bitwise_llrs_joint(rx, dist, noise_var);
    check_noise(noise_var);

    // Product prior and circular noise: the likelihood factorizes per
    // dimension, so each bit's LLR depends only on its own rail.
    const auto& t = dist.tmpl();
    const int m = t.bits_per_symbol;
    const int half = m / 2;
    const std::size_t levels = t.pam_levels.size();
    const double g = 1.0 / std::sqrt(dist.average_power());
    std::vector<double> lev(levels), log_q(levels);
    for (std::size_t a = 0; a < levels; ++a) {
        lev[a] = t.pam_levels[a] * g;
        log_q[a] = dist.marginal()[a] > 0.0 ? std::log(dist.marginal()[a]) : kNegInf;
    }
    std::vector<std::uint8_t> pam_bit(levels * half);
    for (std::size_t a = 0; a < levels; ++a) {
        for (int j = 0; j < half; ++j) pam_bit[a * half + j] = (t.pam_labels[a] >> (half - 1 - j)) & 1U;
    }

    std::vector<double> llr(rx.size() * static_cast<std::size_t>(m));
    std::vector<double> metric(levels), weight(levels);
    auto rail = [&](double v, double* out) {
        double mx = kNegInf;
        for (std::size_t a = 0; a < levels; ++a) {
            const double d = v - lev[a];
            metric[a] = log_q[a] - d * d / noise_var;
            mx = std::max(mx, metric[a]);
        }
        for (std::size_t a = 0; a < levels; ++a) weight[a] = std::exp(metric[a] - mx);
        for (int j = 0; j < half; ++j) {
            double s0 = 0.0, s1 = 0.0;
            for (std::size_t a = 0; a < levels; ++a) (pam_bit[a * half + j] ? s1 : s0) += weight[a];
            if (s0 > kTiny && s1 > kTiny) {
                out[j] = std::log(s0 / s1);
            } else {
                // One label set is negligible next to the maximum; the
                // ratio would lose precision or overflow.
                const double l0 = log_sum_exp(metric, [&](std::size_t a) { return pam_bit[a * half + j] == 0; });
                const double l1 = log_sum_exp(metric, [&](std::size_t a) { return pam_bit[a * half + j] == 1; });
                out[j] = l0 - l1;
            }
        }
    };
    for (std::size_t k = 0; k < rx.size(); ++k) {
        rail(rx[k].real(), &llr[k * m]);
        rail(rx[k].imag(), &llr[k * m + half]);
    }
    return llr;
}

double gmi_from_samples(std::span<const std::uint32_t> tx, std::span<const cdouble> rx, const ShapedDistribution& dist,
                        double noise_var) {
    if (tx.size() != rx.size()) throw std::invalid_argument("gmi_from_samples: tx/rx length mismatch");
    if (tx.empty()) throw std::invalid_argument("gmi_from_samples: empty input");
    const auto llr = bitwise_llrs(rx, dist, noise_var);
    const auto& t = dist.tmpl();
    const int m = t.bits_per_symbol;
    double loss = 0.0;
    for (std::size_t k = 0; k < tx.size(); ++k) {
        for (int j = 0; j < m; ++j) {
            const double sign = t.bit(tx[k], j) ? -1.0 : 1.0;
            loss += softplus(-sign * llr[k * m + j]);
        }
    }
    const double gmi = dist.entropy_bits() - loss / (static_cast<double>(tx.size()) * std::numbers::ln2);
    return std::max(gmi, 0.0);
}

double ngmi(double gmi_bits, double entropy_bits, double m_bits) {
    return 1.0 - (entropy_bits - gmi_bits) / m_bits;
}

double evm_percent(std::span<const cdouble> rx, std::span<const cdouble> tx_ref) {
    if (rx.size() != tx_ref.size()) throw std::invalid_argument("evm_percent: length mismatch");
    double err = 0.0, ref = 0.0;
    for (std::size_t k = 0; k < rx.size(); ++k) {
        err += std::norm(rx[k] - tx_ref[k]);
        ref += std::norm(tx_ref[k]);
    }
    if (!(ref > 0.0)) throw std::invalid_argument("evm_percent: reference has zero power");
    return 100.0 * std::sqrt(err / ref);
}

double snr_from_evm(double evm_pct) {
    if (!(evm_pct > 0.0)) throw std::invalid_argument("snr_from_evm: EVM must be positive");
    return -20.0 * std::log10(evm_pct / 100.0);
}

MetricReport evaluate_block(std::span<const std::uint32_t> tx, std::span<const cdouble> rx,
                            const ShapedDistribution& dist, double noise_var) {
    if (tx.size() != rx.size()) throw std::invalid_argument("evaluate_block: tx/rx length mismatch");
    std::vector<cdouble> ref(tx.size());
    for (std::size_t k = 0; k < tx.size(); ++k) ref[k] = dist.constellation()[tx[k]];
    MetricReport r;
    r.n_symbols = tx.size();
    r.gmi_bits = gmi_from_samples(tx, rx, dist, noise_var);
    r.ngmi = ngmi(r.gmi_bits, dist.entropy_bits(), dist.tmpl().bits_per_symbol);
    r.evm_percent = evm_percent(rx, ref);
    r.snr_db = r.evm_percent > 0.0 ? snr_from_evm(r.evm_percent) : std::numeric_limits<double>::infinity();
    return r;
}

MetricReport simulate_awgn(const ShapedDistribution& dist, double snr_db, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 0));
    const auto tx = sample_symbols(dist, n, rng);
    std::vector<cdouble> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = dist.constellation()[tx[k]];
    const auto y = awgn_transmit(x, snr_db, derive_seed(seed, 1));
    return evaluate_block(tx, y, dist, std::pow(10.0, -snr_db / 10.0));
}

nlohmann::json to_json(const MetricReport& r) {
    return {{"gmi_bits", r.gmi_bits},
            {"ngmi", r.ngmi},
            {"evm_percent", r.evm_percent},
            {"snr_db", r.snr_db},
            {"n_symbols", r.n_symbols}};
}

} // namespace pcslink
