#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcslink/constellation.hpp"
#include "pcslink/shaping.hpp"

namespace pcslink {

/// Psi: maximum AIR (bits per dual-polarization symbol) sustaining NGMI at
/// or above ngmi_threshold, tabulated against SNR.
struct AirTable {
    std::vector<double> snr_grid_db;
    std::vector<double> air_values;
    double ngmi_threshold = 0.9;
    std::size_t m_pcs = 64;
    std::size_t mc_symbols = 200000;
    std::uint64_t seed = 0;

    void validate() const;
};

struct McConfig {
    std::size_t symbols = 200000;
    std::uint64_t seed = 1;
    double entropy_resolution = 0.01;
};

struct RatePlan {
    std::int64_t gross_symbol_rate = 64'000'000'000;
    Rational fec_rate{5, 6};
    Rational pilot_rate{15, 16};

    Rational net_symbol_rate() const { return Rational(gross_symbol_rate) * fec_rate * pilot_rate; }
    double max_air(std::size_t m_pcs = 64) const;
};

/// Ascending grid from a "lo:hi:step" string, inclusive of hi when it lands
/// on the grid.
std::vector<double> parse_grid(const std::string& text);

/// Largest shaped entropy in [kEntropyFloorBits, log2 M] whose NGMI at
/// snr_db reaches ngmi_th, or 0 if the floor fails. Bisection in entropy
/// with common random numbers across evaluations.
double max_entropy_for_threshold(double snr_db, double ngmi_th, const TemplatePtr& tmpl,
                                 std::size_t mc_symbols, std::uint64_t seed, double resolution);

AirTable build_air_table(double ngmi_th, const TemplatePtr& tmpl, const std::vector<double>& snr_grid,
                         const McConfig& mc);

double lookup_air(const AirTable& table, double snr_db);

double net_bit_rate(double air, const RatePlan& plan);
double air_for_rate(double rate_bps, const RatePlan& plan);

nlohmann::json to_json(const AirTable& table);
AirTable air_table_from_json(const nlohmann::json& j);
void save_air_table(const AirTable& table, const std::string& path);
AirTable load_air_table(const std::string& path);

} // namespace pcslink
