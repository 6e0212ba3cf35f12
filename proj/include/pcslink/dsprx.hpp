#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pcslink/common.hpp"
#include "pcslink/metrics.hpp"
#include "pcslink/shaping.hpp"

namespace pcslink {

struct EqualizerConfig {
    int cma_taps = 25;
    double cma_step = 1e-3;
    int lms_taps = 51;
    double lms_step = 5e-4;
    std::size_t training_symbols = 4000;

    void validate() const;
};

/// Thrown when an adaptive filter's output power runs away. Carries the tap
/// vectors at the moment of detection.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::vector<std::vector<cdouble>> taps)
        : std::runtime_error(what), taps_(std::move(taps)) {}
    const std::vector<std::vector<cdouble>>& taps() const { return taps_; }

private:
    std::vector<std::vector<cdouble>> taps_;
};

/// Error raised inside rx_chain, tagged with the stage that failed.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// Known transmitted sequences at 1 sample/symbol and the pilot layout.
struct TrainingReference {
    std::span<const cdouble> x;
    std::span<const cdouble> y;
    std::span<const std::uint8_t> pilot_mask;
    double pilot_power = 1.0;
};

/// Removes IQ cross-correlation by Gram-Schmidt and equalizes the rail
/// powers. The output total power equals the input total power.
std::pair<std::vector<double>, std::vector<double>> gram_schmidt(std::span<const double> i_rail,
                                                                 std::span<const double> q_rail);
std::vector<cdouble> gram_schmidt(std::span<const cdouble> samples);

enum class CmaMode { DataAided, PilotBased };

struct CmaResult {
    DualPol symbols;                            // 1 sample/symbol
    std::array<std::vector<cdouble>, 4> taps;   // xx, xy, yx, yy
};

/// 2x2 butterfly FIR at 2 samples/symbol driven by a radius-directed error.
/// The target radius is the known transmitted radius during the data-aided
/// stage; in PilotBased mode, after cfg.training_symbols, taps only adapt on
/// pilot positions towards the pilot radius.
CmaResult cma_butterfly(const DualPol& input, const EqualizerConfig& cfg, CmaMode mode,
                        const TrainingReference& ref);

struct FrequencyEstimate {
    double offset_hz = 0.0;
    double phase_per_symbol = 0.0;
    bool ambiguous = false;
};

/// Estimates the carrier offset from the mean phase increment between
/// consecutive pilots (both polarizations pooled) and counter-rotates.
FrequencyEstimate frequency_recovery(DualPol& symbols, const TrainingReference& ref, double symbol_rate);

/// Pilot-aided carrier phase estimation: phasor average over
/// `smoothing_pilots` neighbouring pilots, unwrap, linear interpolation
/// (linear extrapolation past the end), counter-rotation.
std::vector<cdouble> pilot_cpe(std::span<const cdouble> symbols, std::span<const std::uint8_t> pilot_mask,
                               std::span<const cdouble> pilot_ref, int smoothing_pilots = 1);

/// Dual-polarization variant: both polarizations share one phase
/// trajectory estimated from the pilot phasors of both.
void pilot_cpe(DualPol& symbols, std::span<const std::uint8_t> pilot_mask, std::span<const cdouble> pilot_ref_x,
               std::span<const cdouble> pilot_ref_y, int smoothing_pilots = 1);

enum class LmsMode { DataAided, PilotsAndDecisions };

struct LmsResult {
    DualPol symbols;
    /// taps[out][in] with rails ordered XI, XQ, YI, YQ.
    std::array<std::array<std::vector<double>, 4>, 4> taps;
};

/// 4x4 real-valued LMS over the I/Q rails of both polarizations. Trains on
/// the known symbols for cfg.training_symbols, then adapts on pilots and
/// hard decisions against `constellation` (PilotsAndDecisions) or keeps using
/// the reference (DataAided).
LmsResult lms_4x4(const DualPol& symbols, const EqualizerConfig& cfg, LmsMode mode,
                  const TrainingReference& ref, std::span<const cdouble> constellation);

struct ChainConfig {
    EqualizerConfig eq;
    int sps = 2;
    double rolloff = 0.2;
    int rrc_span = 16;
    double symbol_rate = 64e9;
    Rational pilot_rate{15, 16};
    int cpe_smoothing_pilots = 11;
    bool gram_schmidt = true;
    bool cma = true;
    bool frequency_recovery = true;
    bool cpe = true;
    bool lms = true;
};

/// What the receiver knows about the transmitted block.
struct FrameMetadata {
    DualPol tx_symbols;                    // framed symbols incl. pilots
    std::vector<std::uint8_t> pilot_mask;  // shared by both polarizations
    std::vector<std::uint32_t> payload_x;  // payload symbol indices
    std::vector<std::uint32_t> payload_y;
    double pilot_power = 1.0;
};

struct ChainResult {
    DualPol symbols;
    MetricReport report;
    FrequencyEstimate frequency;
    double noise_var = 0.0;  // pilot-estimated
};

/// Gram-Schmidt, matched filter, CMA butterfly, frequency recovery, pilot
/// CPE, 4x4 LMS, demapping. Metrics use payload symbols after the training
/// stage; pilots are excluded.
ChainResult rx_chain(const DualPol& waveform, const FrameMetadata& meta, const ShapedDistribution& dist,
                     const ChainConfig& cfg);

/// Transmit side for waveform mode: frames shaped payload symbols with
/// pilots and pulse-shapes both polarizations.
struct TxBlock {
    DualPol waveform;
    FrameMetadata meta;
};

/// Builds a block of `symbols_per_pol` framed symbols per polarization from
/// CCDM-encoded random bits.
TxBlock make_tx_block(const ShapedDistribution& dist, std::size_t symbols_per_pol, const ChainConfig& cfg,
                      std::uint64_t seed, std::size_t ccdm_block = 960);

} // namespace pcslink
