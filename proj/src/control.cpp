#include "pcslink/control.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pcslink/metrics.hpp"
#include "pcslink/waveform.hpp"

namespace pcslink {

void PredictorState::push(double snr_meas_db) {
    window.push_back(snr_meas_db);
    while (window.size() > window_length) window.pop_front();
}

double predict_snr(const PredictorState& state) {
    if (state.window_length == 0) throw std::invalid_argument("predict_snr: window length must be >= 1");
    if (!state.full()) throw std::logic_error("predict_snr: predictor window is not full");
    const double sum = std::accumulate(state.window.begin(), state.window.end(), 0.0);
    return sum / static_cast<double>(state.window_length) - state.snr_margin_db;
}

RateSelection select_rate(const AirTable& table, double snr_est_db, const RatePlan& plan) {
    double air = std::min(lookup_air(table, snr_est_db), plan.max_air(table.m_pcs));
    if (air < 2.0 * kEntropyFloorBits) return {};
    return {air / 2.0, air, net_bit_rate(air, plan)};
}

Scheme Scheme::parse(const std::string& name) {
    if (name == "adaptive") return {name, SchemeKind::Adaptive, 0.0};
    if (name.rfind("fixed", 0) == 0 && name.size() > 5) {
        const std::string digits = name.substr(5);
        double gbps = 0.0;
        if (parse_number(digits, gbps) && gbps > 0.0) return {name, SchemeKind::Fixed, gbps * 1e9};
    }
    throw std::invalid_argument("unknown scheme '" + name + "' (expected 'adaptive' or 'fixed<Gbps>')");
}

std::vector<Scheme> parse_schemes(const std::string& csv) {
    std::vector<Scheme> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(Scheme::parse(tok));
    }
    if (out.empty()) throw std::invalid_argument("no schemes given");
    return out;
}

LinkMode link_mode_from_string(const std::string& s) {
    if (s == "analytic") return LinkMode::Analytic;
    if (s == "waveform") return LinkMode::Waveform;
    throw std::invalid_argument("unknown mode '" + s + "' (expected analytic or waveform)");
}

MetricReport realize_link(const ShapedDistribution& dist, double snr_db, const CampaignConfig& cfg, std::uint64_t seed) {
    if (cfg.mode == LinkMode::Analytic) return simulate_awgn(dist, snr_db, cfg.mc_symbols, seed);

    const auto blk = make_tx_block(dist, cfg.waveform_symbols_per_pol, cfg.chain, derive_seed(seed, 1));
    ImpairmentConfig imp = cfg.impairments;
    imp.seed = derive_seed(seed, 2);
    auto wf = apply_link_impairments(blk.waveform, imp, cfg.chain.symbol_rate * cfg.chain.sps);
    const double noise_var = std::pow(10.0, -snr_db / 10.0);
    add_noise(wf.x, noise_var, derive_seed(seed, 3));
    add_noise(wf.y, noise_var, derive_seed(seed, 4));
    return rx_chain(apply_frontend_impairments(wf, imp), blk.meta, dist, cfg.chain).report;
}

std::vector<IterationRecord> run_campaign(const SnrTrace& trace, const std::vector<Scheme>& schemes,
                                          const AirTable& table, const RatePlan& plan, const CampaignConfig& cfg) {
    trace.validate();
    table.validate();
    if (schemes.empty()) throw std::invalid_argument("run_campaign: no schemes");
    const auto tmpl = square_qam(table.m_pcs);
    const double h_max = std::log2(static_cast<double>(tmpl->size()));

    PredictorState pred;
    pred.window_length = cfg.predictor_taps;
    pred.snr_margin_db = cfg.snr_margin_db;

    std::vector<IterationRecord> records;
    records.reserve(trace.size() * schemes.size());
    for (std::size_t n = 0; n < trace.size(); ++n) {
        const auto& entry = trace.entries[n];
        for (std::size_t si = 0; si < schemes.size(); ++si) {
            const auto& scheme = schemes[si];
            IterationRecord rec;
            rec.n = n;
            rec.t_s = entry.t_s;
            rec.scheme = scheme.name;
            rec.weather = entry.weather;
            rec.snr_true_db = entry.snr_db;

            if (scheme.kind == SchemeKind::Fixed) {
                rec.air = air_for_rate(scheme.fixed_rate_bps, plan);
            } else if (!pred.full()) {
                rec.air = air_for_rate(cfg.warmup_rate_bps, plan);
            } else {
                rec.snr_est_db = predict_snr(pred);
                rec.air = select_rate(table, *rec.snr_est_db, plan).air;
            }
            rec.entropy_bits = rec.air / 2.0;
            rec.rate_bps = net_bit_rate(rec.air, plan);
            const bool transmits = rec.air > 0.0;
            if (transmits && (rec.entropy_bits < kEntropyFloorBits - 1e-12 || rec.entropy_bits > h_max + 1e-12)) {
                throw std::invalid_argument("scheme '" + scheme.name + "' needs an entropy outside the shaping range");
            }

            // A silent iteration still sends a floor-entropy probe so the
            // predictor keeps receiving SNR measurements.
            const double h = transmits ? std::min(rec.entropy_bits, h_max) : kEntropyFloorBits;
            const auto dist = mb_for_entropy(h, tmpl);
            const auto report = realize_link(dist, entry.snr_db, cfg, derive_seed(cfg.seed, n, si));
            rec.snr_meas_db = report.snr_db;
            rec.ngmi = transmits ? report.ngmi : 0.0;
            rec.in_service = transmits && rec.ngmi >= table.ngmi_threshold;
            if (scheme.kind == SchemeKind::Adaptive) pred.push(rec.snr_meas_db);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

std::vector<SweepPoint> sweep_predictor(const SnrTrace& trace, const AirTable& table, const RatePlan& plan,
                                        const std::vector<std::size_t>& windows, const std::vector<double>& margins) {
    trace.validate();
    table.validate();
    std::vector<SweepPoint> out;
    for (auto w : windows) {
        for (double m : margins) {
            PredictorState pred;
            pred.window_length = w;
            pred.snr_margin_db = m;
            double rate_sum = 0.0;
            std::size_t outages = 0;
            for (const auto& e : trace.entries) {
                const double air = pred.full() ? select_rate(table, predict_snr(pred), plan).air
                                               : air_for_rate(400e9, plan);
                const bool ok = air > 0.0 && air <= lookup_air(table, e.snr_db);
                if (ok) {
                    rate_sum += net_bit_rate(air, plan);
                } else {
                    ++outages;
                }
                pred.push(e.snr_db);
            }
            const auto count = static_cast<double>(trace.size());
            out.push_back({w, m, rate_sum / count, static_cast<double>(outages) / count});
        }
    }
    return out;
}

} // namespace pcslink
