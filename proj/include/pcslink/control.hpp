#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "pcslink/airlut.hpp"
#include "pcslink/channel.hpp"
#include "pcslink/dsprx.hpp"

namespace pcslink {

/// Moving-average SNR predictor state: the last N measured SNRs.
struct PredictorState {
    std::size_t window_length = 3;
    double snr_margin_db = 2.0;
    std::deque<double> window;

    void push(double snr_meas_db);
    bool full() const { return window.size() == window_length; }
};

/// Mean of the window minus the margin. Throws if the window is not full.
double predict_snr(const PredictorState& state);

struct RateSelection {
    double entropy_bits = 0.0;  // per polarization
    double air = 0.0;           // per dual-pol symbol
    double rate_bps = 0.0;

    bool transmits() const { return air > 0.0; }
};

/// AIR from the table at the estimated SNR. AIR values that would need an
/// entropy below the shaping floor select "transmit nothing".
RateSelection select_rate(const AirTable& table, double snr_est_db, const RatePlan& plan);

enum class SchemeKind { Fixed, Adaptive };

struct Scheme {
    std::string name;
    SchemeKind kind = SchemeKind::Adaptive;
    double fixed_rate_bps = 0.0;

    /// "adaptive" or "fixed<Gbps>", e.g. "fixed400".
    static Scheme parse(const std::string& name);
};

std::vector<Scheme> parse_schemes(const std::string& csv);

enum class LinkMode { Analytic, Waveform };

LinkMode link_mode_from_string(const std::string& s);

struct CampaignConfig {
    LinkMode mode = LinkMode::Analytic;
    std::uint64_t seed = 1;
    std::size_t mc_symbols = 200000;
    std::size_t predictor_taps = 3;
    double snr_margin_db = 2.0;
    /// Rate the adaptive scheme uses while its predictor window fills.
    double warmup_rate_bps = 400e9;
    // waveform mode
    ImpairmentConfig impairments;
    ChainConfig chain;
    std::size_t waveform_symbols_per_pol = 100000;
};

struct IterationRecord {
    std::size_t n = 0;
    double t_s = 0.0;
    std::string scheme;
    Weather weather = Weather::Clear;
    double snr_true_db = 0.0;
    double snr_meas_db = 0.0;
    std::optional<double> snr_est_db;  // adaptive scheme after warm-up only
    double entropy_bits = 0.0;
    double air = 0.0;
    double rate_bps = 0.0;
    double ngmi = 0.0;
    bool in_service = false;

    bool operator==(const IterationRecord&) const = default;
};

/// One iteration's channel at the given SNR: MC through AWGN in analytic
/// mode, otherwise a shaped waveform through impairments and the receiver.
MetricReport realize_link(const ShapedDistribution& dist, double snr_db, const CampaignConfig& cfg, std::uint64_t seed);

/// Runs every scheme over the trace. Records are ordered by iteration, then
/// by scheme in the given order.
std::vector<IterationRecord> run_campaign(const SnrTrace& trace, const std::vector<Scheme>& schemes,
                                          const AirTable& table, const RatePlan& plan,
                                          const CampaignConfig& cfg);

struct SweepPoint {
    std::size_t window_length = 0;
    double snr_margin_db = 0.0;
    double mean_effective_rate_bps = 0.0;
    double outage_fraction = 0.0;
};

/// Grid sweep of predictor window and margin over a trace. An iteration is
/// counted in service when the selected AIR does not exceed the table's AIR
/// at the true SNR; no Monte Carlo is involved.
std::vector<SweepPoint> sweep_predictor(const SnrTrace& trace, const AirTable& table, const RatePlan& plan,
                                        const std::vector<std::size_t>& windows,
                                        const std::vector<double>& margins);

} // namespace pcslink
