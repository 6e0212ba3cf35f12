#include "pcslink/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pcslink {

double entropy_bits(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

ShapedDistribution::ShapedDistribution(TemplatePtr tmpl, std::vector<double> probabilities, double nu)
    : tmpl_(std::move(tmpl)), p_(std::move(probabilities)), nu_(nu) {
    if (!tmpl_) throw std::invalid_argument("ShapedDistribution: null template");
    if (p_.size() != tmpl_->size()) {
        throw std::invalid_argument("ShapedDistribution: probability count does not match template size");
    }
    double sum = 0.0;
    for (double v : p_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("ShapedDistribution: invalid probability");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-6) throw std::invalid_argument("ShapedDistribution: probabilities do not sum to 1");
    for (double& v : p_) v /= sum;

    entropy_ = pcslink::entropy_bits(p_);
    avg_power_ = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) avg_power_ += p_[i] * std::norm(tmpl_->points[i]);
    const double g = 1.0 / std::sqrt(avg_power_);
    scaled_.reserve(p_.size());
    for (const auto& x : tmpl_->points) scaled_.push_back(x * g);

    if (tmpl_->separable()) {
        const std::size_t levels = tmpl_->pam_levels.size();
        std::vector<double> pi(levels, 0.0), pq(levels, 0.0);
        for (std::size_t a = 0; a < levels; ++a) {
            for (std::size_t b = 0; b < levels; ++b) {
                pi[a] += p_[a * levels + b];
                pq[b] += p_[a * levels + b];
            }
        }
        bool product = true;
        for (std::size_t a = 0; a < levels && product; ++a) {
            if (std::abs(pi[a] - pq[a]) > 1e-13) product = false;
            for (std::size_t b = 0; b < levels && product; ++b) {
                if (std::abs(p_[a * levels + b] - pi[a] * pi[b]) > 1e-13) product = false;
            }
        }
        if (product) marginal_ = std::move(pi);
    }
}

namespace {

std::vector<double> mb_weights(double nu, const ConstellationTemplate& t) {
    double min_e = std::numeric_limits<double>::infinity();
    for (const auto& x : t.points) min_e = std::min(min_e, std::norm(x));
    std::vector<double> w(t.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        w[i] = std::exp(-nu * (std::norm(t.points[i]) - min_e));
        sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
}

double mb_entropy(double nu, const ConstellationTemplate& t) {
    const auto w = mb_weights(nu, t);
    return entropy_bits(w);
}

} // namespace

ShapedDistribution mb_distribution(double nu, const TemplatePtr& tmpl) {
    if (!(nu >= 0.0) || !std::isfinite(nu)) {
        throw std::invalid_argument("mb_distribution: nu must be finite and >= 0");
    }
    return ShapedDistribution(tmpl, mb_weights(nu, *tmpl), nu);
}

double solve_nu_for_entropy(double target_bits, const TemplatePtr& tmpl) {
    const double h_max = std::log2(static_cast<double>(tmpl->size()));
    if (!(target_bits >= kEntropyFloorBits - 1e-12) || !(target_bits <= h_max + 1e-12)) {
        throw std::invalid_argument("solve_nu_for_entropy: target " + std::to_string(target_bits) +
                                    " outside [" + std::to_string(kEntropyFloorBits) + ", " +
                                    std::to_string(h_max) + "]");
    }
    if (target_bits >= h_max - 1e-12) return 0.0;

    double lo = 0.0;
    double hi = 1.0;
    double h_hi = mb_entropy(hi, *tmpl);
    while (h_hi > target_bits) {
        // The floor itself is only reached asymptotically.
        if (h_hi - target_bits < 1e-9) return hi;
        lo = hi;
        hi *= 2.0;
        h_hi = mb_entropy(hi, *tmpl);
        if (hi > 1e6) throw std::runtime_error("solve_nu_for_entropy: failed to bracket target");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double h = mb_entropy(mid, *tmpl);
        if (std::abs(h - target_bits) < 1e-11) return mid;
        if (h > target_bits) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

ShapedDistribution mb_for_entropy(double target_bits, const TemplatePtr& tmpl) {
    return mb_distribution(solve_nu_for_entropy(target_bits, tmpl), tmpl);
}

std::vector<std::uint32_t> sample_symbols(const ShapedDistribution& dist, std::size_t n, std::mt19937_64& rng) {
    const auto& p = dist.probabilities();
    std::vector<double> cdf(p.size());
    std::partial_sum(p.begin(), p.end(), cdf.begin());
    cdf.back() = 1.0;
    std::vector<std::uint32_t> out(n);
    for (auto& s : out) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        s = static_cast<std::uint32_t>(std::min<std::size_t>(it - cdf.begin(), p.size() - 1));
    }
    return out;
}

std::size_t Composition::n() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::vector<double> Composition::empirical() const {
    const double total = static_cast<double>(n());
    std::vector<double> e(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) e[i] = total > 0 ? counts[i] / total : 0.0;
    return e;
}

Composition quantize_composition(const ShapedDistribution& dist, std::size_t n) {
    if (n == 0) throw std::invalid_argument("quantize_composition: block length must be >= 1");
    const auto& p = dist.probabilities();
    Composition c;
    c.counts.resize(p.size());
    std::vector<double> remainder(p.size());
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double target = static_cast<double>(n) * p[i];
        const double fl = std::floor(target);
        c.counts[i] = static_cast<std::uint32_t>(fl);
        remainder[i] = target - fl;
        assigned += c.counts[i];
    }
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++c.counts[order[k % order.size()]];
    return c;
}

std::size_t Frame::pilot_count() const {
    return static_cast<std::size_t>(std::count(is_pilot.begin(), is_pilot.end(), std::uint8_t{1}));
}

std::vector<cdouble> Frame::pilots() const {
    std::vector<cdouble> out;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        if (is_pilot[k]) out.push_back(symbols[k]);
    }
    return out;
}

std::vector<cdouble> Frame::payload() const {
    std::vector<cdouble> out;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        if (!is_pilot[k]) out.push_back(symbols[k]);
    }
    return out;
}

std::vector<cdouble> pilot_sequence(std::size_t count, std::uint64_t seed, double power) {
    std::mt19937_64 rng(seed);
    const double a = std::sqrt(power / 2.0);
    std::vector<cdouble> out(count);
    for (auto& p : out) {
        const auto r = rng();
        p = {(r & 1U) ? -a : a, (r & 2U) ? -a : a};
    }
    return out;
}

std::vector<std::uint8_t> pilot_mask(std::size_t payload_len, Rational pilot_rate) {
    if (pilot_rate <= Rational(0) || pilot_rate >= Rational(1)) {
        throw std::invalid_argument("pilot rate must lie strictly between 0 and 1");
    }
    const auto payload_per_period = static_cast<std::size_t>(pilot_rate.numerator());
    const auto pilots_per_period = static_cast<std::size_t>(pilot_rate.denominator() - pilot_rate.numerator());
    std::vector<std::uint8_t> mask;
    mask.reserve(payload_len + payload_len / payload_per_period * pilots_per_period + pilots_per_period);
    std::size_t left = payload_len;
    while (left > 0) {
        mask.insert(mask.end(), pilots_per_period, 1);
        const std::size_t take = std::min(left, payload_per_period);
        mask.insert(mask.end(), take, 0);
        left -= take;
    }
    return mask;
}

Frame insert_pilots(std::span<const cdouble> payload, Rational pilot_rate, double avg_power, std::uint64_t seed) {
    if (payload.empty()) throw std::invalid_argument("insert_pilots: empty payload");
    if (!(avg_power > 0.0)) throw std::invalid_argument("insert_pilots: average power must be positive");
    Frame f;
    f.is_pilot = pilot_mask(payload.size(), pilot_rate);
    f.pilot_seed = seed;
    f.pilot_power = avg_power;
    const auto pilots = pilot_sequence(f.pilot_count(), seed, avg_power);
    f.symbols.resize(f.is_pilot.size());
    std::size_t ip = 0, id = 0;
    for (std::size_t k = 0; k < f.symbols.size(); ++k) {
        f.symbols[k] = f.is_pilot[k] ? pilots[ip++] : payload[id++];
    }
    return f;
}

nlohmann::json to_json(const ShapedDistribution& dist, const Composition* comp) {
    nlohmann::json j;
    j["M"] = dist.tmpl().size();
    j["nu"] = dist.nu();
    j["entropy_bits"] = dist.entropy_bits();
    j["p"] = dist.probabilities();
    if (comp) {
        j["counts"] = comp->counts;
        j["n"] = comp->n();
    }
    return j;
}

ShapedDistribution distribution_from_json(const nlohmann::json& j) {
    const auto m = j.at("M").get<std::size_t>();
    auto tmpl = square_qam(m);
    const double nu = j.value("nu", 0.0);
    if (j.contains("p")) return ShapedDistribution(tmpl, j.at("p").get<std::vector<double>>(), nu);
    return mb_distribution(nu, tmpl);
}

Composition composition_from_json(const nlohmann::json& j) {
    Composition c;
    c.counts = j.at("counts").get<std::vector<std::uint32_t>>();
    if (j.contains("n") && j.at("n").get<std::size_t>() != c.n()) {
        throw std::invalid_argument("composition JSON: n does not match the sum of counts");
    }
    return c;
}

} // namespace pcslink
