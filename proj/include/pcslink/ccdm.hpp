#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pcslink/shaping.hpp"

namespace pcslink {

using BigInt = boost::multiprecision::cpp_int;

/// Raised by ccdm_decode on a sequence the encoder cannot have produced.
class CcdmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// n! / prod(n_i!) for the composition.
BigInt multinomial(const Composition& comp);

/// floor(log2(multinomial(comp))): the number of input bits per block.
std::size_t ccdm_input_length(const Composition& comp);

// Constant composition distribution matcher. The input bits (MSB first) are
// read as an integer index into the lexicographically ordered set of
// sequences with the given composition. Encoding subdivides the current
// interval at each position in proportion to the remaining symbol counts;
// the arithmetic is exact, so the map is a bijection between [0, 2^k) and
// its image.

std::vector<std::uint32_t> ccdm_encode(std::span<const std::uint8_t> bits, const Composition& comp);
std::vector<std::uint8_t> ccdm_decode(std::span<const std::uint32_t> symbols, const Composition& comp);

} // namespace pcslink
