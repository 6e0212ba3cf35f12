#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include "json.hpp"

#include "pcslink/common.hpp"
#include "pcslink/constellation.hpp"

namespace pcslink {

using Rational = boost::rational<std::int64_t>;

/// Lowest entropy (bits/symbol/pol) the shaped 64QAM link will carry.
/// Maxwell-Boltzmann shaping approaches the QPSK-like inner ring here.
inline constexpr double kEntropyFloorBits = 2.0;

/// Probability mass over a template. Symbols sent on the link are the
/// template points rescaled so the shaped constellation has unit average
/// power; see constellation().
class ShapedDistribution {
public:
    ShapedDistribution(TemplatePtr tmpl, std::vector<double> probabilities, double nu);

    const ConstellationTemplate& tmpl() const { return *tmpl_; }
    const TemplatePtr& template_ptr() const { return tmpl_; }
    const std::vector<double>& probabilities() const { return p_; }
    double nu() const { return nu_; }
    double entropy_bits() const { return entropy_; }

    /// Average power of the template points under this distribution.
    double average_power() const { return avg_power_; }

    /// Template points scaled to unit average power under this distribution.
    const std::vector<cdouble>& constellation() const { return scaled_; }

    /// True when p(i_I, i_Q) = p_I(i_I) p_Q(i_Q) on a separable template.
    bool product_form() const { return !marginal_.empty(); }
    /// Per-dimension marginal (valid when product_form()).
    const std::vector<double>& marginal() const { return marginal_; }

private:
    TemplatePtr tmpl_;
    std::vector<double> p_;
    double nu_ = 0.0;
    double entropy_ = 0.0;
    double avg_power_ = 0.0;
    std::vector<cdouble> scaled_;
    std::vector<double> marginal_;
};

double entropy_bits(std::span<const double> p);

/// Maxwell-Boltzmann distribution p_i ~ exp(-nu |x_i|^2) over the template.
ShapedDistribution mb_distribution(double nu, const TemplatePtr& tmpl);

/// Finds nu >= 0 with entropy(mb_distribution(nu)) = target_bits within
/// 1e-6 bits. Valid targets are [kEntropyFloorBits, log2 M].
double solve_nu_for_entropy(double target_bits, const TemplatePtr& tmpl);

/// Convenience: mb_distribution(solve_nu_for_entropy(h)).
ShapedDistribution mb_for_entropy(double target_bits, const TemplatePtr& tmpl);

/// Draws i.i.d. symbol indices by inverse-CDF sampling. The draws for a
/// given generator state are a monotone function of the CDF, so the same
/// seed yields common random numbers across distributions.
std::vector<std::uint32_t> sample_symbols(const ShapedDistribution& dist, std::size_t n,
                                          std::mt19937_64& rng);

struct Composition {
    std::vector<std::uint32_t> counts;

    std::size_t n() const;
    std::vector<double> empirical() const;
};

/// Largest-remainder quantization of n * p_i, remainders tied by index.
Composition quantize_composition(const ShapedDistribution& dist, std::size_t n);

struct FrameConfig {
    Rational fec_rate{5, 6};
    Rational pilot_rate{15, 16};
    std::int64_t gross_symbol_rate = 64'000'000'000;
    std::size_t block_length_symbols = 960;

    Rational net_symbol_rate() const { return Rational(gross_symbol_rate) * fec_rate * pilot_rate; }
};

/// Payload with pilots interleaved. is_pilot[k] marks pilot positions.
struct Frame {
    std::vector<cdouble> symbols;
    std::vector<std::uint8_t> is_pilot;
    std::uint64_t pilot_seed = 0;
    double pilot_power = 1.0;

    std::size_t pilot_count() const;
    std::vector<cdouble> pilots() const;
    std::vector<cdouble> payload() const;
};

/// Deterministic QPSK pilot values with |p|^2 = power.
std::vector<cdouble> pilot_sequence(std::size_t count, std::uint64_t seed, double power);

/// Inserts pilots so that each period of pilot_rate.denominator() symbols
/// starts with (den - num) pilots followed by num payload symbols. A
/// trailing partial period still starts with its pilots.
Frame insert_pilots(std::span<const cdouble> payload, Rational pilot_rate, double avg_power,
                    std::uint64_t seed);

/// Pilot mask for a frame carrying payload_len payload symbols.
std::vector<std::uint8_t> pilot_mask(std::size_t payload_len, Rational pilot_rate);

nlohmann::json to_json(const ShapedDistribution& dist, const Composition* comp = nullptr);
ShapedDistribution distribution_from_json(const nlohmann::json& j);
Composition composition_from_json(const nlohmann::json& j);

} // namespace pcslink
