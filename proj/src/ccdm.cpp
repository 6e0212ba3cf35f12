#include "pcslink/ccdm.hpp"

#include <bit>
#include <numeric>
#include <optional>
#include <string>

namespace pcslink {

BigInt multinomial(const Composition& comp) {
    // Built one symbol at a time; every intermediate value is itself a
    // multinomial coefficient, so each division is exact.
    BigInt t = 1;
    std::uint64_t placed = 0;
    for (auto count : comp.counts) {
        for (std::uint32_t c = 1; c <= count; ++c) {
            ++placed;
            t *= placed;
            t /= c;
        }
    }
    return t;
}

std::size_t ccdm_input_length(const Composition& comp) {
    const BigInt t = multinomial(comp);
    return static_cast<std::size_t>(boost::multiprecision::msb(t));
}

namespace {

// multinomial(comp) * n in 64 bits, or nullopt when it would overflow.
std::optional<std::uint64_t> small_scaled_total(const Composition& comp) {
    std::uint64_t t = 1, placed = 0;
    for (auto count : comp.counts) {
        for (std::uint32_t c = 1; c <= count; ++c) {
            ++placed;
            // t * placed / c is exact: t * placed is divisible by c.
            const std::uint64_t g = std::gcd(placed, static_cast<std::uint64_t>(c));
            std::uint64_t next;
            if (__builtin_mul_overflow(t / (c / g), placed / g, &next)) return std::nullopt;
            t = next;
        }
    }
    std::uint64_t scaled;
    if (__builtin_mul_overflow(t, placed, &scaled)) return std::nullopt;
    return t;
}

std::size_t bit_length_minus_one(const BigInt& v) { return boost::multiprecision::msb(v); }
std::size_t bit_length_minus_one(std::uint64_t v) { return static_cast<std::size_t>(std::bit_width(v) - 1); }

template <typename Int>
std::vector<std::uint32_t> encode_impl(std::span<const std::uint8_t> bits, const Composition& comp, Int total) {
    const std::size_t n = comp.n();
    const std::size_t k = bit_length_minus_one(total);
    if (bits.size() != k) {
        throw std::invalid_argument("ccdm_encode: expected " + std::to_string(k) + " input bits, got " +
                                    std::to_string(bits.size()));
    }
    Int index = 0;
    for (auto b : bits) {
        index <<= 1;
        if (b) index |= 1;
    }

    std::vector<std::uint32_t> remaining = comp.counts;
    std::vector<std::uint32_t> out;
    out.reserve(n);
    Int scaled, acc, step;
    for (std::uint64_t rem = n; rem > 0; --rem) {
        // Sub-interval of symbol s has width total * remaining[s] / rem.
        // Compare in the scaled domain to stay in integers.
        scaled = index * rem;
        acc = 0;
        std::size_t s = 0;
        for (;; ++s) {
            if (remaining[s] == 0) continue;
            step = total * remaining[s];
            if (scaled < acc + step) break;
            acc += step;
        }
        index -= acc / rem;
        total = total * remaining[s] / rem;
        --remaining[s];
        out.push_back(static_cast<std::uint32_t>(s));
    }
    return out;
}

template <typename Int>
std::vector<std::uint8_t> decode_impl(std::span<const std::uint32_t> symbols, const Composition& comp, Int total) {
    const std::size_t k = bit_length_minus_one(total);
    std::vector<std::uint32_t> remaining = comp.counts;
    Int rank = 0;
    std::uint64_t rem = comp.n();
    for (auto s : symbols) {
        std::uint64_t below = 0;
        for (std::size_t t = 0; t < s; ++t) below += remaining[t];
        if (below) rank += total * below / rem;
        total = total * remaining[s] / rem;
        --remaining[s];
        --rem;
    }
    if ((rank >> k) != 0) throw CcdmError("ccdm_decode: sequence is outside the encoder image");

    std::vector<std::uint8_t> bits(k);
    for (std::size_t i = 0; i < k; ++i) bits[k - 1 - i] = static_cast<std::uint8_t>((rank >> i) & 1U);
    return bits;
}

} // namespace

std::vector<std::uint32_t> ccdm_encode(std::span<const std::uint8_t> bits, const Composition& comp) {
    if (comp.n() == 0) throw std::invalid_argument("ccdm_encode: empty composition");
    if (auto t = small_scaled_total(comp)) return encode_impl<std::uint64_t>(bits, comp, *t);
    return encode_impl<BigInt>(bits, comp, multinomial(comp));
}

std::vector<std::uint8_t> ccdm_decode(std::span<const std::uint32_t> symbols, const Composition& comp) {
    const std::size_t n = comp.n();
    if (n == 0) throw std::invalid_argument("ccdm_decode: empty composition");
    std::vector<std::uint32_t> seen(comp.counts.size(), 0);
    for (auto s : symbols) {
        if (s >= seen.size()) throw CcdmError("ccdm_decode: symbol index out of range");
        ++seen[s];
    }
    if (symbols.size() != n || seen != comp.counts) {
        throw CcdmError("ccdm_decode: sequence composition does not match");
    }
    if (auto t = small_scaled_total(comp)) return decode_impl<std::uint64_t>(symbols, comp, *t);
    return decode_impl<BigInt>(symbols, comp, multinomial(comp));
}

} // namespace pcslink
