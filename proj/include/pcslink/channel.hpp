#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pcslink/common.hpp"

namespace pcslink {

enum class Weather { Clear, Rain };

const char* to_string(Weather w);
Weather weather_from_string(const std::string& s);

struct TraceEntry {
    double t_s = 0.0;
    double snr_db = 0.0;
    Weather weather = Weather::Clear;

    bool operator==(const TraceEntry&) const = default;
};

struct SnrTrace {
    std::vector<TraceEntry> entries;
    double sampling_period_s = 25.0;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
    void validate() const;

    bool operator==(const SnrTrace&) const = default;
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RainModelConfig {
    double clear_mean_db = 15.5;
    double clear_std_db = 0.3;
    double rain_mean_drop_db = 2.0;
    double rain_std_db = 0.8;
    double ar1_rho = 0.7;
    std::vector<std::pair<double, double>> rain_intervals{{4800.0, 6600.0}, {8100.0, 9000.0}};
    double sampling_period_s = 25.0;
    std::uint64_t seed = 2020;

    void validate() const;
};

RainModelConfig rain_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RainModelConfig& cfg);

/// Regime mean plus AR(1) deviation whose innovation scale follows the
/// current regime's standard deviation.
SnrTrace gen_trace(const RainModelConfig& cfg, double duration_s);

/// CSV with header t_s,snr_db,weather.
void save_trace(const SnrTrace& trace, const std::string& path);
SnrTrace load_trace(const std::string& path);
SnrTrace parse_trace_csv(const std::string& text);
std::string format_trace_csv(const SnrTrace& trace);

/// y = x + n with complex noise variance 10^(-snr/10) per symbol.
std::vector<cdouble> awgn_transmit(std::span<const cdouble> symbols, double snr_db, std::uint64_t seed);

struct ImpairmentConfig {
    double combined_linewidth_hz = 200e3;
    double freq_offset_hz = 0.0;
    double pol_rotation_rad = 0.0;
    double iq_amplitude_imbalance = 0.0;
    double iq_phase_imbalance_rad = 0.0;
    double iq_skew_samples = 0.0;
    std::uint64_t seed = 7;

    static ImpairmentConfig none();
};

/// Everything ahead of the receiver frontend: transmitter quadrature-rail
/// skew, polarization rotation, carrier frequency offset, Wiener phase noise.
DualPol apply_link_impairments(const DualPol& samples, const ImpairmentConfig& cfg, double sample_rate);

/// Receiver frontend IQ amplitude/phase imbalance.
DualPol apply_frontend_impairments(const DualPol& samples, const ImpairmentConfig& cfg);

/// Link impairments followed by the frontend ones.
DualPol apply_impairments(const DualPol& samples, const ImpairmentConfig& cfg, double sample_rate);

/// Windowed-sinc fractional delay of a real sequence by `delay` samples.
std::vector<double> fractional_delay(std::span<const double> v, double delay);

} // namespace pcslink
