#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "pcslink/common.hpp"

namespace pcslink {

/// A labelled QAM template. Points are normalized to unit average power
/// under uniform probabilities. Bit labels are read MSB first: bit j of
/// point i is (labels[i] >> (bits_per_symbol - 1 - j)) & 1.
///
/// Square Gray-mapped templates also carry their per-dimension PAM
/// factorization (point index = i_I * L + i_Q), which the demapper uses to
/// evaluate product-form priors one dimension at a time.
struct ConstellationTemplate {
    std::vector<cdouble> points;
    std::vector<std::uint32_t> labels;
    int bits_per_symbol = 0;

    std::vector<double> pam_levels;        // empty for non-square templates
    std::vector<std::uint32_t> pam_labels; // Gray label of each PAM level

    std::size_t size() const { return points.size(); }
    bool separable() const { return !pam_levels.empty(); }
    int bit(std::size_t point, int j) const {
        return static_cast<int>((labels[point] >> (bits_per_symbol - 1 - j)) & 1U);
    }
};

using TemplatePtr = std::shared_ptr<const ConstellationTemplate>;

/// Square M-QAM with binary-reflected Gray labels per dimension.
/// M must be an even power of two (4, 16, 64, ...).
TemplatePtr square_qam(std::size_t m);

/// Generic template from explicit points and labels. Points are rescaled to
/// unit average power; labels must be unique and fit in log2(M) bits.
TemplatePtr make_template(std::vector<cdouble> points, std::vector<std::uint32_t> labels);

/// True when every pair of horizontally or vertically adjacent points of a
/// square template differs in exactly one label bit.
bool has_gray_property(const ConstellationTemplate& tmpl);

} // namespace pcslink
