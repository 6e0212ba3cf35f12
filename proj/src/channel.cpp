#include "pcslink/channel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace pcslink {

const char* to_string(Weather w) { return w == Weather::Rain ? "rain" : "clear"; }

Weather weather_from_string(const std::string& s) {
    if (s == "clear") return Weather::Clear;
    if (s == "rain") return Weather::Rain;
    throw std::invalid_argument("unknown weather label '" + s + "'");
}

void SnrTrace::validate() const {
    if (entries.empty()) throw TraceError("empty trace");
    if (!(sampling_period_s > 0.0)) throw TraceError("sampling period must be positive");
    const double tol = 1e-6 * sampling_period_s;
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (!std::isfinite(entries[k].snr_db) || !std::isfinite(entries[k].t_s)) {
            throw TraceError("non-finite value at entry " + std::to_string(k));
        }
        if (k > 0) {
            const double dt = entries[k].t_s - entries[k - 1].t_s;
            if (!(dt > 0.0)) throw TraceError("timestamps not strictly increasing at entry " + std::to_string(k));
            if (std::abs(dt - sampling_period_s) > tol) {
                throw TraceError("timestamp spacing differs from the sampling period at entry " + std::to_string(k));
            }
        }
    }
}

void RainModelConfig::validate() const {
    if (!(sampling_period_s > 0.0)) throw std::invalid_argument("rain model: sampling period must be positive");
    if (!(ar1_rho >= 0.0 && ar1_rho < 1.0)) throw std::invalid_argument("rain model: ar1_rho must lie in [0, 1)");
    if (!(clear_std_db >= 0.0) || !(rain_std_db >= clear_std_db)) {
        throw std::invalid_argument("rain model: need 0 <= clear_std_db <= rain_std_db");
    }
    auto sorted = rain_intervals;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].first < 0.0 || !(sorted[i].second > sorted[i].first)) {
            throw std::invalid_argument("rain model: interval must satisfy 0 <= start < end");
        }
        if (i > 0 && sorted[i].first < sorted[i - 1].second) {
            throw std::invalid_argument("rain model: rain intervals overlap");
        }
    }
}

RainModelConfig rain_config_from_json(const nlohmann::json& j) {
    RainModelConfig c;
    c.clear_mean_db = j.value("clear_mean_db", c.clear_mean_db);
    c.clear_std_db = j.value("clear_std_db", c.clear_std_db);
    c.rain_mean_drop_db = j.value("rain_mean_drop_db", c.rain_mean_drop_db);
    c.rain_std_db = j.value("rain_std_db", c.rain_std_db);
    c.ar1_rho = j.value("ar1_rho", c.ar1_rho);
    c.sampling_period_s = j.value("sampling_period_s", c.sampling_period_s);
    c.seed = j.value("seed", c.seed);
    if (j.contains("rain_intervals")) {
        c.rain_intervals.clear();
        for (const auto& iv : j.at("rain_intervals")) {
            c.rain_intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
        }
    }
    c.validate();
    return c;
}

nlohmann::json to_json(const RainModelConfig& c) {
    nlohmann::json iv = nlohmann::json::array();
    for (const auto& [s, e] : c.rain_intervals) iv.push_back({s, e});
    return {{"clear_mean_db", c.clear_mean_db}, {"clear_std_db", c.clear_std_db},
            {"rain_mean_drop_db", c.rain_mean_drop_db}, {"rain_std_db", c.rain_std_db},
            {"ar1_rho", c.ar1_rho}, {"rain_intervals", iv},
            {"sampling_period_s", c.sampling_period_s}, {"seed", c.seed}};
}

SnrTrace gen_trace(const RainModelConfig& cfg, double duration_s) {
    cfg.validate();
    if (!(duration_s > 0.0)) throw std::invalid_argument("gen_trace: duration must be positive");
    const auto count = static_cast<std::size_t>(std::floor(duration_s / cfg.sampling_period_s + 1e-9));
    if (count == 0) throw std::invalid_argument("gen_trace: duration shorter than one sampling period");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double innovation = std::sqrt(1.0 - cfg.ar1_rho * cfg.ar1_rho);

    SnrTrace trace;
    trace.sampling_period_s = cfg.sampling_period_s;
    trace.entries.reserve(count);
    double dev = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const double t = static_cast<double>(k) * cfg.sampling_period_s;
        const bool rain = std::any_of(cfg.rain_intervals.begin(), cfg.rain_intervals.end(),
                                      [t](const auto& iv) { return t >= iv.first && t < iv.second; });
        const double sigma = rain ? cfg.rain_std_db : cfg.clear_std_db;
        const double w = normal(rng);
        dev = k == 0 ? sigma * w : cfg.ar1_rho * dev + innovation * sigma * w;
        const double mean = cfg.clear_mean_db - (rain ? cfg.rain_mean_drop_db : 0.0);
        trace.entries.push_back({t, mean + dev, rain ? Weather::Rain : Weather::Clear});
    }
    return trace;
}

std::string format_trace_csv(const SnrTrace& trace) {
    std::string out = "t_s,snr_db,weather\n";
    for (const auto& e : trace.entries) {
        out += format_number(e.t_s) + ',' + format_number(e.snr_db) + ',' + to_string(e.weather) + '\n';
    }
    return out;
}

SnrTrace parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    SnrTrace trace;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header) {
            if (line.empty()) continue;
            if (line != "t_s,snr_db,weather") {
                throw TraceError("line " + std::to_string(line_no) + ": expected header 't_s,snr_db,weather'");
            }
            header = true;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ls(line);
        std::string f;
        while (std::getline(ls, f, ',')) fields.push_back(f);
        if (fields.size() != 3) {
            throw TraceError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                             std::to_string(fields.size()));
        }
        TraceEntry e;
        if (!parse_number(fields[0], e.t_s) || !std::isfinite(e.t_s)) {
            throw TraceError("line " + std::to_string(line_no) + ": invalid timestamp '" + fields[0] + "'");
        }
        if (!parse_number(fields[1], e.snr_db) || !std::isfinite(e.snr_db)) {
            throw TraceError("line " + std::to_string(line_no) + ": invalid SNR '" + fields[1] + "'");
        }
        try {
            e.weather = weather_from_string(fields[2]);
        } catch (const std::invalid_argument&) {
            throw TraceError("line " + std::to_string(line_no) + ": invalid weather '" + fields[2] + "'");
        }
        if (!trace.entries.empty() && !(e.t_s > trace.entries.back().t_s)) {
            throw TraceError("line " + std::to_string(line_no) + ": timestamps not strictly increasing");
        }
        trace.entries.push_back(e);
    }
    if (trace.entries.empty()) throw TraceError("empty trace");
    if (trace.entries.size() > 1) trace.sampling_period_s = trace.entries[1].t_s - trace.entries[0].t_s;
    trace.validate();
    return trace;
}

void save_trace(const SnrTrace& trace, const std::string& path) {
    trace.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << format_trace_csv(trace);
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SnrTrace load_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_trace_csv(ss.str());
    } catch (const TraceError& e) {
        throw TraceError(path + ": " + e.what());
    }
}

std::vector<cdouble> awgn_transmit(std::span<const cdouble> symbols, double snr_db, std::uint64_t seed) {
    const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma);
    std::vector<cdouble> out(symbols.size());
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        out[k] = symbols[k] + cdouble(re, im);
    }
    return out;
}

ImpairmentConfig ImpairmentConfig::none() {
    ImpairmentConfig c;
    c.combined_linewidth_hz = 0.0;
    return c;
}

std::vector<double> fractional_delay(std::span<const double> v, double delay) {
    const double whole = std::floor(delay);
    const double frac = delay - whole;
    const auto shift = static_cast<long>(whole);
    const long n = static_cast<long>(v.size());

    std::vector<double> delayed(v.begin(), v.end());
    if (frac != 0.0) {
        constexpr int half = 24;
        std::vector<double> h(2 * half + 1);
        double sum = 0.0;
        for (int k = -half; k <= half; ++k) {
            const double x = k - frac;
            const double sinc = std::sin(kPi * x) / (kPi * x);
            const double u = (x + half + 1) / (2.0 * (half + 1));  // window position in (0, 1)
            const double w = 0.42 - 0.5 * std::cos(2 * kPi * u) + 0.08 * std::cos(4 * kPi * u);
            h[k + half] = sinc * w;
            sum += h[k + half];
        }
        for (double& c : h) c /= sum;
        for (long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int k = -half; k <= half; ++k) {
                const long j = i - k;
                if (j >= 0 && j < n) acc += h[k + half] * v[j];
            }
            delayed[i] = acc;
        }
    }
    if (shift == 0) return delayed;
    std::vector<double> out(v.size(), 0.0);
    for (long i = 0; i < n; ++i) {
        const long j = i - shift;
        if (j >= 0 && j < n) out[i] = delayed[j];
    }
    return out;
}

DualPol apply_link_impairments(const DualPol& samples, const ImpairmentConfig& cfg, double sample_rate) {
    if (samples.x.size() != samples.y.size()) throw std::invalid_argument("apply_impairments: unequal pol lengths");
    DualPol out = samples;
    const std::size_t n = out.size();

    if (cfg.iq_skew_samples != 0.0) {
        for (auto* pol : {&out.x, &out.y}) {
            std::vector<double> q(n);
            for (std::size_t k = 0; k < n; ++k) q[k] = (*pol)[k].imag();
            const auto qd = fractional_delay(q, cfg.iq_skew_samples);
            for (std::size_t k = 0; k < n; ++k) (*pol)[k] = {(*pol)[k].real(), qd[k]};
        }
    }

    if (cfg.pol_rotation_rad != 0.0) {
        const double c = std::cos(cfg.pol_rotation_rad);
        const double s = std::sin(cfg.pol_rotation_rad);
        for (std::size_t k = 0; k < n; ++k) {
            const cdouble x = out.x[k], y = out.y[k];
            out.x[k] = c * x - s * y;
            out.y[k] = s * x + c * y;
        }
    }

    if (cfg.freq_offset_hz != 0.0) {
        const double w = 2.0 * kPi * cfg.freq_offset_hz / sample_rate;
        for (std::size_t k = 0; k < n; ++k) {
            const cdouble rot = std::polar(1.0, w * static_cast<double>(k));
            out.x[k] *= rot;
            out.y[k] *= rot;
        }
    }

    if (cfg.combined_linewidth_hz > 0.0) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0x9a5e));
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 * kPi * cfg.combined_linewidth_hz / sample_rate));
        double phi = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k > 0) phi += normal(rng);
            const cdouble rot = std::polar(1.0, phi);
            out.x[k] *= rot;
            out.y[k] *= rot;
        }
    }
    return out;
}

DualPol apply_frontend_impairments(const DualPol& samples, const ImpairmentConfig& cfg) {
    if (samples.x.size() != samples.y.size()) throw std::invalid_argument("apply_impairments: unequal pol lengths");
    DualPol out = samples;

    if (cfg.iq_amplitude_imbalance != 0.0 || cfg.iq_phase_imbalance_rad != 0.0) {
        const double gain = 1.0 + cfg.iq_amplitude_imbalance;
        const double c = std::cos(cfg.iq_phase_imbalance_rad);
        const double s = std::sin(cfg.iq_phase_imbalance_rad);
        for (auto* pol : {&out.x, &out.y}) {
            for (auto& z : *pol) z = {z.real(), gain * (z.imag() * c + z.real() * s)};
        }
    }
    return out;
}

DualPol apply_impairments(const DualPol& samples, const ImpairmentConfig& cfg, double sample_rate) {
    return apply_frontend_impairments(apply_link_impairments(samples, cfg, sample_rate), cfg);
}

} // namespace pcslink
