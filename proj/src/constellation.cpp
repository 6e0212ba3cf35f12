#include "pcslink/constellation.hpp"

#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace pcslink {

namespace {

std::uint32_t gray(std::uint32_t v) { return v ^ (v >> 1); }

bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

} // namespace

TemplatePtr square_qam(std::size_t m) {
    if (!is_power_of_two(m) || m < 4 || (std::countr_zero(m) % 2) != 0) {
        throw std::invalid_argument("square_qam: M must be an even power of two, got " + std::to_string(m));
    }
    const int bits = std::countr_zero(m);
    const int half = bits / 2;
    const std::size_t levels = std::size_t{1} << half;

    ConstellationTemplate t;
    t.bits_per_symbol = bits;

    // PAM levels -(L-1), ..., (L-1); per-dimension mean power (L^2-1)/3.
    const double dim_power = (static_cast<double>(levels * levels) - 1.0) / 3.0;
    const double scale = 1.0 / std::sqrt(2.0 * dim_power);
    for (std::size_t i = 0; i < levels; ++i) {
        t.pam_levels.push_back((2.0 * static_cast<double>(i) - static_cast<double>(levels - 1)) * scale);
        t.pam_labels.push_back(gray(static_cast<std::uint32_t>(i)));
    }
    for (std::size_t a = 0; a < levels; ++a) {
        for (std::size_t b = 0; b < levels; ++b) {
            t.points.emplace_back(t.pam_levels[a], t.pam_levels[b]);
            t.labels.push_back((t.pam_labels[a] << half) | t.pam_labels[b]);
        }
    }
    return std::make_shared<const ConstellationTemplate>(std::move(t));
}

TemplatePtr make_template(std::vector<cdouble> points, std::vector<std::uint32_t> labels) {
    const std::size_t m = points.size();
    if (m < 2 || !is_power_of_two(m)) {
        throw std::invalid_argument("make_template: size must be a power of two >= 2");
    }
    if (labels.size() != m) {
        throw std::invalid_argument("make_template: label count does not match point count");
    }
    const int bits = std::countr_zero(m);
    std::set<std::uint32_t> seen;
    for (auto l : labels) {
        if (l >= m || !seen.insert(l).second) {
            throw std::invalid_argument("make_template: labels must be unique and below M");
        }
    }
    double power = 0.0;
    for (const auto& p : points) power += std::norm(p);
    power /= static_cast<double>(m);
    if (!(power > 0.0)) throw std::invalid_argument("make_template: zero-power template");
    const double g = 1.0 / std::sqrt(power);
    for (auto& p : points) p *= g;

    ConstellationTemplate t;
    t.points = std::move(points);
    t.labels = std::move(labels);
    t.bits_per_symbol = bits;
    return std::make_shared<const ConstellationTemplate>(std::move(t));
}

bool has_gray_property(const ConstellationTemplate& tmpl) {
    if (!tmpl.separable()) return false;
    const std::size_t levels = tmpl.pam_levels.size();
    auto differs_by_one = [](std::uint32_t a, std::uint32_t b) { return std::popcount(a ^ b) == 1; };
    for (std::size_t a = 0; a < levels; ++a) {
        for (std::size_t b = 0; b < levels; ++b) {
            const std::size_t i = a * levels + b;
            if (b + 1 < levels && !differs_by_one(tmpl.labels[i], tmpl.labels[i + 1])) return false;
            if (a + 1 < levels && !differs_by_one(tmpl.labels[i], tmpl.labels[i + levels])) return false;
        }
    }
    return true;
}

} // namespace pcslink
