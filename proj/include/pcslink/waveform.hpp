#pragma once

#include <span>
#include <vector>

#include "pcslink/common.hpp"

namespace pcslink {

/// Root-raised-cosine pulse with unit energy, `span_symbols` each side.
std::vector<double> rrc_taps(double rolloff, int sps, int span_symbols);

/// Upsamples by sps and filters with the RRC pulse. Output sample sps*k is
/// the centre of symbol k.
std::vector<cdouble> pulse_shape(std::span<const cdouble> symbols, std::span<const double> taps, int sps);

/// Zero-phase (centred) real FIR filtering of a complex stream.
std::vector<cdouble> filter_centered(std::span<const cdouble> in, std::span<const double> taps);

/// Adds circular complex Gaussian noise of the given variance per sample.
void add_noise(std::vector<cdouble>& samples, double noise_var, std::uint64_t seed);

} // namespace pcslink
