#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"
#include "pcslink/common.hpp"
#include "pcslink/shaping.hpp"

namespace pcslink {

struct MetricReport {
    double gmi_bits = 0.0;   // per symbol per polarization
    double ngmi = 0.0;
    double evm_percent = 0.0;
    double snr_db = 0.0;
    std::size_t n_symbols = 0;
};

nlohmann::json to_json(const MetricReport& r);

/// Exact log-sum-exp bitwise LLRs, log P(b=0|y)/P(b=1|y), with the shaped
/// priors included. rx is in the unit-power scale of dist.constellation();
/// noise_var is the complex noise variance per symbol. Output is laid out
/// symbol-major: llr[k * m + j].
std::vector<double> bitwise_llrs(std::span<const cdouble> rx, const ShapedDistribution& dist,
                                 double noise_var);

/// Same quantity evaluated over the full two-dimensional constellation,
/// ignoring any product-form shortcut.
std::vector<double> bitwise_llrs_joint(std::span<const cdouble> rx, const ShapedDistribution& dist,
                                       double noise_var);

/// Bit-metric GMI estimate in bits/symbol, clamped at 0.
double gmi_from_samples(std::span<const std::uint32_t> tx, std::span<const cdouble> rx,
                        const ShapedDistribution& dist, double noise_var);

/// 1 - (H - GMI) / m
double ngmi(double gmi_bits, double entropy_bits, double m_bits);

double evm_percent(std::span<const cdouble> rx, std::span<const cdouble> tx_ref);

/// SNR_dB = -20 log10(EVM% / 100)
double snr_from_evm(double evm_pct);

/// GMI, NGMI and EVM-derived SNR of a received block against its
/// transmitted symbol indices.
MetricReport evaluate_block(std::span<const std::uint32_t> tx, std::span<const cdouble> rx,
                            const ShapedDistribution& dist, double noise_var);

/// Monte-Carlo transmission of n i.i.d. shaped symbols over AWGN at snr_db.
/// The demapper uses the true noise variance.
MetricReport simulate_awgn(const ShapedDistribution& dist, double snr_db, std::size_t n,
                           std::uint64_t seed);

} // namespace pcslink
