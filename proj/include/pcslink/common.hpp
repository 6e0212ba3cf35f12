#pragma once

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pcslink {

using cdouble = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Dual-polarization sample or symbol streams of equal length.
struct DualPol {
    std::vector<cdouble> x;
    std::vector<cdouble> y;

    std::size_t size() const { return x.size(); }
};

/// Derives an independent 64-bit seed from a base seed and stream indices
/// (splitmix64 finalizer over the combined words).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Strict full-string parse; false on any trailing characters.
inline bool parse_number(std::string_view s, double& out) {
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace pcslink
