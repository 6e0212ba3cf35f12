#include "pcslink/dsprx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "pcslink/ccdm.hpp"
#include "pcslink/waveform.hpp"

namespace pcslink {

void EqualizerConfig::validate() const {
    if (cma_taps < 1 || cma_taps % 2 == 0 || lms_taps < 1 || lms_taps % 2 == 0) {
        throw std::invalid_argument("equalizer tap counts must be odd and positive");
    }
    if (!(cma_step > 0.0) || !(lms_step > 0.0)) throw std::invalid_argument("equalizer step sizes must be positive");
}

std::pair<std::vector<double>, std::vector<double>> gram_schmidt(std::span<const double> i_rail,
                                                                 std::span<const double> q_rail) {
    if (i_rail.size() != q_rail.size()) throw std::invalid_argument("gram_schmidt: rail lengths differ");
    if (i_rail.empty()) throw std::invalid_argument("gram_schmidt: empty input");
    double ii = 0.0, iq = 0.0, qq = 0.0;
    for (std::size_t k = 0; k < i_rail.size(); ++k) {
        ii += i_rail[k] * i_rail[k];
        iq += i_rail[k] * q_rail[k];
        qq += q_rail[k] * q_rail[k];
    }
    if (!(ii > 0.0)) throw std::invalid_argument("gram_schmidt: I rail has zero power");
    const double rho = iq / ii;
    std::vector<double> i_out(i_rail.begin(), i_rail.end());
    std::vector<double> q_out(q_rail.size());
    double q2 = 0.0;
    for (std::size_t k = 0; k < q_rail.size(); ++k) {
        q_out[k] = q_rail[k] - rho * i_rail[k];
        q2 += q_out[k] * q_out[k];
    }
    if (!(q2 > 1e-12 * std::max(qq, ii))) {
        throw std::invalid_argument("gram_schmidt: Q rail is degenerate (fully correlated with I)");
    }
    const double target = 0.5 * (ii + qq);
    const double gi = std::sqrt(target / ii);
    const double gq = std::sqrt(target / q2);
    for (auto& v : i_out) v *= gi;
    for (auto& v : q_out) v *= gq;
    return {std::move(i_out), std::move(q_out)};
}

std::vector<cdouble> gram_schmidt(std::span<const cdouble> samples) {
    std::vector<double> i(samples.size()), q(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        i[k] = samples[k].real();
        q[k] = samples[k].imag();
    }
    auto [io, qo] = gram_schmidt(i, q);
    std::vector<cdouble> out(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) out[k] = {io[k], qo[k]};
    return out;
}

namespace {

constexpr std::size_t kDivergenceBlock = 1024;
constexpr double kDivergenceRatio = 10.0;

class PowerWatch {
public:
    // True once a completed block's output power exceeds the ratio.
    bool add(double in_power, double out_power) {
        in_ += in_power;
        out_ += out_power;
        if (++count_ < kDivergenceBlock) return !std::isfinite(out_power);
        const bool bad = !(out_ <= kDivergenceRatio * in_);
        in_ = out_ = 0.0;
        count_ = 0;
        return bad;
    }

private:
    double in_ = 0.0, out_ = 0.0;
    std::size_t count_ = 0;
};

} // namespace

CmaResult cma_butterfly(const DualPol& input, const EqualizerConfig& cfg, CmaMode mode, const TrainingReference& ref) {
    cfg.validate();
    if (input.x.size() != input.y.size()) throw std::invalid_argument("cma_butterfly: unequal pol lengths");
    const std::size_t n_sym = input.size() / 2;
    const std::size_t n_train = mode == CmaMode::DataAided ? n_sym : std::min(cfg.training_symbols, n_sym);
    if (ref.x.size() < n_train || ref.y.size() < n_train) {
        throw std::invalid_argument("cma_butterfly: training reference shorter than the data-aided stage");
    }
    if (mode == CmaMode::PilotBased && ref.pilot_mask.size() < n_sym) {
        throw std::invalid_argument("cma_butterfly: pilot mask shorter than the block");
    }

    const int nt = cfg.cma_taps;
    const long c = nt / 2;
    const long n_in = static_cast<long>(input.size());
    CmaResult res;
    for (auto& w : res.taps) w.assign(static_cast<std::size_t>(nt), 0.0);
    res.taps[0][c] = 1.0;
    res.taps[3][c] = 1.0;
    auto& wxx = res.taps[0];
    auto& wxy = res.taps[1];
    auto& wyx = res.taps[2];
    auto& wyy = res.taps[3];

    res.symbols.x.resize(n_sym);
    res.symbols.y.resize(n_sym);
    std::vector<cdouble> vx(nt), vy(nt);
    PowerWatch watch;
    const double mu = cfg.cma_step;

    for (std::size_t k = 0; k < n_sym; ++k) {
        const long centre = 2 * static_cast<long>(k) + c;
        for (int t = 0; t < nt; ++t) {
            const long i = centre - t;
            const bool ok = i >= 0 && i < n_in;
            vx[t] = ok ? input.x[i] : 0.0;
            vy[t] = ok ? input.y[i] : 0.0;
        }
        cdouble ox = 0.0, oy = 0.0;
        for (int t = 0; t < nt; ++t) {
            ox += wxx[t] * vx[t] + wxy[t] * vy[t];
            oy += wyx[t] * vx[t] + wyy[t] * vy[t];
        }
        res.symbols.x[k] = ox;
        res.symbols.y[k] = oy;

        double rx2 = 0.0, ry2 = 0.0;
        bool adapt = false;
        if (k < n_train) {
            rx2 = std::norm(ref.x[k]);
            ry2 = std::norm(ref.y[k]);
            adapt = true;
        } else if (ref.pilot_mask[k]) {
            rx2 = ry2 = ref.pilot_power;
            adapt = true;
        }
        if (adapt) {
            const cdouble ex = mu * ox * (std::norm(ox) - rx2);
            const cdouble ey = mu * oy * (std::norm(oy) - ry2);
            for (int t = 0; t < nt; ++t) {
                const cdouble cx = std::conj(vx[t]), cy = std::conj(vy[t]);
                wxx[t] -= ex * cx;
                wxy[t] -= ex * cy;
                wyx[t] -= ey * cx;
                wyy[t] -= ey * cy;
            }
        }

        const double pin = std::norm(vx[c]) + std::norm(vy[c]);
        if (watch.add(pin, std::norm(ox) + std::norm(oy))) {
            throw DivergenceError("CMA diverged near symbol " + std::to_string(k),
                                  {res.taps.begin(), res.taps.end()});
        }
    }
    return res;
}

namespace {

std::vector<std::size_t> pilot_positions(std::span<const std::uint8_t> mask, std::size_t n) {
    std::vector<std::size_t> pos;
    for (std::size_t k = 0; k < std::min(n, mask.size()); ++k) {
        if (mask[k]) pos.push_back(k);
    }
    return pos;
}

} // namespace

FrequencyEstimate frequency_recovery(DualPol& symbols, const TrainingReference& ref, double symbol_rate) {
    const auto pos = pilot_positions(ref.pilot_mask, symbols.size());
    if (pos.size() < 2) throw std::invalid_argument("frequency_recovery: need at least 2 pilots");
    if (ref.x.size() < symbols.size() || ref.y.size() < symbols.size()) {
        throw std::invalid_argument("frequency_recovery: reference shorter than the block");
    }
    const auto spacing = static_cast<double>(pos[1] - pos[0]);
    cdouble acc = 0.0;
    for (std::size_t p = 1; p < pos.size(); ++p) {
        const auto a = pos[p - 1], b = pos[p];
        if (static_cast<double>(b - a) != spacing) {
            throw std::invalid_argument("frequency_recovery: pilots must be uniformly spaced");
        }
        acc += symbols.x[b] * std::conj(ref.x[b]) * std::conj(symbols.x[a] * std::conj(ref.x[a]));
        acc += symbols.y[b] * std::conj(ref.y[b]) * std::conj(symbols.y[a] * std::conj(ref.y[a]));
    }
    const double per_pilot = std::arg(acc);
    FrequencyEstimate est;
    est.phase_per_symbol = per_pilot / spacing;
    est.offset_hz = est.phase_per_symbol * symbol_rate / (2.0 * kPi);
    // Increments near +-pi per pilot period alias; flag the top 10% of the range.
    est.ambiguous = std::abs(per_pilot) > 0.9 * kPi;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        const cdouble rot = std::polar(1.0, -est.phase_per_symbol * static_cast<double>(k));
        symbols.x[k] *= rot;
        symbols.y[k] *= rot;
    }
    return est;
}

namespace {

// Per-pilot phase trajectory from the pilot phasors z: symmetric phasor
// average (window shrinking near the ends so it stays centred; a centred
// average of a linear phase keeps its phase exactly), then unwrapping.
std::vector<double> pilot_phase(const std::vector<cdouble>& z, int smoothing_pilots) {
    const std::size_t np = z.size();
    const std::size_t half = static_cast<std::size_t>(smoothing_pilots / 2);
    std::vector<double> phase(np);
    for (std::size_t p = 0; p < np; ++p) {
        const std::size_t h = std::min({half, p, np - 1 - p});
        cdouble s = 0.0;
        for (std::size_t q = p - h; q <= p + h; ++q) s += z[q];
        phase[p] = std::arg(s);
    }
    for (std::size_t p = 1; p < np; ++p) {
        double d = phase[p] - phase[p - 1];
        d -= 2.0 * kPi * std::round(d / (2.0 * kPi));
        phase[p] = phase[p - 1] + d;
    }
    return phase;
}

// Linear interpolation of the pilot phases (linear extrapolation past the
// first/last pilot) and counter-rotation.
std::vector<cdouble> derotate(std::span<const cdouble> symbols, const std::vector<std::size_t>& pos,
                              const std::vector<double>& phase) {
    const std::size_t np = pos.size();
    std::vector<cdouble> out(symbols.size());
    std::size_t seg = 0;
    for (std::size_t k = 0; k < symbols.size(); ++k) {
        while (seg + 2 < np && k >= pos[seg + 1]) ++seg;
        const double k0 = static_cast<double>(pos[seg]), k1 = static_cast<double>(pos[seg + 1]);
        const double w = (static_cast<double>(k) - k0) / (k1 - k0);
        const double theta = phase[seg] + w * (phase[seg + 1] - phase[seg]);
        out[k] = symbols[k] * std::polar(1.0, -theta);
    }
    return out;
}

void check_cpe_args(std::size_t n_pos, std::size_t n_ref, int smoothing_pilots) {
    if (n_pos < 2) throw std::invalid_argument("pilot_cpe: need at least 2 pilots");
    if (n_ref < n_pos) throw std::invalid_argument("pilot_cpe: fewer reference pilots than positions");
    if (smoothing_pilots < 1) throw std::invalid_argument("pilot_cpe: smoothing window must be >= 1");
}

} // namespace

std::vector<cdouble> pilot_cpe(std::span<const cdouble> symbols, std::span<const std::uint8_t> pilot_mask,
                               std::span<const cdouble> pilot_ref, int smoothing_pilots) {
    const auto pos = pilot_positions(pilot_mask, symbols.size());
    check_cpe_args(pos.size(), pilot_ref.size(), smoothing_pilots);
    std::vector<cdouble> z(pos.size());
    for (std::size_t p = 0; p < pos.size(); ++p) z[p] = symbols[pos[p]] * std::conj(pilot_ref[p]);
    return derotate(symbols, pos, pilot_phase(z, smoothing_pilots));
}

void pilot_cpe(DualPol& symbols, std::span<const std::uint8_t> pilot_mask, std::span<const cdouble> pilot_ref_x,
               std::span<const cdouble> pilot_ref_y, int smoothing_pilots) {
    const auto pos = pilot_positions(pilot_mask, symbols.size());
    check_cpe_args(pos.size(), std::min(pilot_ref_x.size(), pilot_ref_y.size()), smoothing_pilots);
    std::vector<cdouble> z(pos.size());
    for (std::size_t p = 0; p < pos.size(); ++p) {
        z[p] = symbols.x[pos[p]] * std::conj(pilot_ref_x[p]) + symbols.y[pos[p]] * std::conj(pilot_ref_y[p]);
    }
    const auto phase = pilot_phase(z, smoothing_pilots);
    symbols.x = derotate(symbols.x, pos, phase);
    symbols.y = derotate(symbols.y, pos, phase);
}

namespace {

cdouble nearest_point(cdouble v, std::span<const cdouble> constellation) {
    cdouble best = constellation[0];
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& p : constellation) {
        const double d = std::norm(v - p);
        if (d < best_d) {
            best_d = d;
            best = p;
        }
    }
    return best;
}

} // namespace

LmsResult lms_4x4(const DualPol& symbols, const EqualizerConfig& cfg, LmsMode mode, const TrainingReference& ref,
                  std::span<const cdouble> constellation) {
    cfg.validate();
    if (symbols.x.size() != symbols.y.size()) throw std::invalid_argument("lms_4x4: unequal pol lengths");
    const std::size_t n = symbols.size();
    const std::size_t n_train = mode == LmsMode::DataAided ? n : std::min(cfg.training_symbols, n);
    if (ref.x.size() < n_train || ref.y.size() < n_train) {
        throw std::invalid_argument("lms_4x4: training reference shorter than the data-aided stage");
    }
    if (mode == LmsMode::PilotsAndDecisions) {
        if (constellation.empty()) throw std::invalid_argument("lms_4x4: decision mode needs a constellation");
        if (n > n_train && (ref.pilot_mask.size() < n || ref.x.size() < n || ref.y.size() < n)) {
            throw std::invalid_argument("lms_4x4: pilot mask/reference shorter than the block");
        }
    }

    const int nt = cfg.lms_taps;
    const long c = nt / 2;
    const long len = static_cast<long>(n);
    std::array<std::vector<double>, 4> rails;
    for (auto& r : rails) r.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        rails[0][k] = symbols.x[k].real();
        rails[1][k] = symbols.x[k].imag();
        rails[2][k] = symbols.y[k].real();
        rails[3][k] = symbols.y[k].imag();
    }

    LmsResult res;
    for (int r = 0; r < 4; ++r) {
        for (int i = 0; i < 4; ++i) res.taps[r][i].assign(static_cast<std::size_t>(nt), 0.0);
        res.taps[r][r][c] = 1.0;
    }
    res.symbols.x.resize(n);
    res.symbols.y.resize(n);

    std::array<std::vector<double>, 4> win;
    for (auto& w : win) w.resize(nt);
    PowerWatch watch;
    const double mu = cfg.lms_step;

    for (std::size_t k = 0; k < n; ++k) {
        const long centre = static_cast<long>(k) + c;
        for (int i = 0; i < 4; ++i) {
            for (int t = 0; t < nt; ++t) {
                const long j = centre - t;
                win[i][t] = (j >= 0 && j < len) ? rails[i][j] : 0.0;
            }
        }
        std::array<double, 4> out{};
        for (int r = 0; r < 4; ++r) {
            double acc = 0.0;
            for (int i = 0; i < 4; ++i) {
                const double* h = res.taps[r][i].data();
                const double* v = win[i].data();
                for (int t = 0; t < nt; ++t) acc += h[t] * v[t];
            }
            out[r] = acc;
        }
        const cdouble ox(out[0], out[1]), oy(out[2], out[3]);
        res.symbols.x[k] = ox;
        res.symbols.y[k] = oy;

        cdouble tx, ty;
        if (k < n_train || mode == LmsMode::DataAided || ref.pilot_mask[k]) {
            tx = ref.x[k];
            ty = ref.y[k];
        } else {
            tx = nearest_point(ox, constellation);
            ty = nearest_point(oy, constellation);
        }
        const std::array<double, 4> err{tx.real() - out[0], tx.imag() - out[1], ty.real() - out[2],
                                        ty.imag() - out[3]};
        for (int r = 0; r < 4; ++r) {
            const double g = mu * err[r];
            for (int i = 0; i < 4; ++i) {
                double* h = res.taps[r][i].data();
                const double* v = win[i].data();
                for (int t = 0; t < nt; ++t) h[t] += g * v[t];
            }
        }

        const double pin = std::norm(symbols.x[k]) + std::norm(symbols.y[k]);
        if (watch.add(pin, std::norm(ox) + std::norm(oy))) {
            std::vector<std::vector<cdouble>> snapshot;
            for (const auto& row : res.taps) {
                for (const auto& f : row) snapshot.emplace_back(f.begin(), f.end());
            }
            throw DivergenceError("LMS diverged near symbol " + std::to_string(k), std::move(snapshot));
        }
    }
    return res;
}

namespace {

template <typename F>
auto run_stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

} // namespace

ChainResult rx_chain(const DualPol& waveform, const FrameMetadata& meta, const ShapedDistribution& dist,
                     const ChainConfig& cfg) {
    if (cfg.sps != 2) throw StageError("setup", "the receiver runs at 2 samples/symbol");
    if (waveform.x.size() != waveform.y.size()) throw StageError("setup", "unequal pol lengths");
    const std::size_t n_sym = meta.tx_symbols.size();
    if (waveform.size() < n_sym * 2 || meta.tx_symbols.y.size() != n_sym || meta.pilot_mask.size() != n_sym) {
        throw StageError("setup", "waveform and frame metadata disagree in length");
    }
    const TrainingReference ref{meta.tx_symbols.x, meta.tx_symbols.y, meta.pilot_mask, meta.pilot_power};

    DualPol s = waveform;
    if (cfg.gram_schmidt) {
        run_stage("gram_schmidt", [&] {
            s.x = gram_schmidt(s.x);
            s.y = gram_schmidt(s.y);
            return 0;
        });
    }
    const auto mf = rrc_taps(cfg.rolloff, cfg.sps, cfg.rrc_span);
    s.x = filter_centered(s.x, mf);
    s.y = filter_centered(s.y, mf);

    DualPol sym;
    if (cfg.cma) {
        sym = run_stage("cma", [&] { return cma_butterfly(s, cfg.eq, CmaMode::PilotBased, ref).symbols; });
    } else {
        sym.x.resize(n_sym);
        sym.y.resize(n_sym);
        for (std::size_t k = 0; k < n_sym; ++k) {
            sym.x[k] = s.x[2 * k];
            sym.y[k] = s.y[2 * k];
        }
    }
    sym.x.resize(n_sym);
    sym.y.resize(n_sym);

    ChainResult result;
    if (cfg.frequency_recovery) {
        result.frequency = run_stage("frequency_recovery", [&] { return frequency_recovery(sym, ref, cfg.symbol_rate); });
    }

    std::vector<cdouble> pilots_x, pilots_y;
    for (std::size_t k = 0; k < n_sym; ++k) {
        if (meta.pilot_mask[k]) {
            pilots_x.push_back(meta.tx_symbols.x[k]);
            pilots_y.push_back(meta.tx_symbols.y[k]);
        }
    }
    if (cfg.cpe) {
        run_stage("pilot_cpe", [&] {
            pilot_cpe(sym, meta.pilot_mask, pilots_x, pilots_y, cfg.cpe_smoothing_pilots);
            return 0;
        });
    }
    if (cfg.lms) {
        sym = run_stage("lms_4x4", [&] {
            return lms_4x4(sym, cfg.eq, LmsMode::PilotsAndDecisions, ref, dist.constellation()).symbols;
        });
    }

    // Metrics on payload symbols after the training stage.
    run_stage("demap", [&] {
        std::vector<std::uint32_t> tx_idx;
        std::vector<cdouble> rx;
        double pilot_err = 0.0;
        std::size_t pilot_n = 0;
        std::size_t payload_i = 0;
        const std::size_t start = std::min(cfg.eq.training_symbols, n_sym);
        for (std::size_t k = 0; k < n_sym; ++k) {
            if (meta.pilot_mask[k]) {
                if (k >= start) {
                    pilot_err += std::norm(sym.x[k] - meta.tx_symbols.x[k]) + std::norm(sym.y[k] - meta.tx_symbols.y[k]);
                    pilot_n += 2;
                }
                continue;
            }
            if (k >= start) {
                tx_idx.push_back(meta.payload_x.at(payload_i));
                rx.push_back(sym.x[k]);
                tx_idx.push_back(meta.payload_y.at(payload_i));
                rx.push_back(sym.y[k]);
            }
            ++payload_i;
        }
        if (tx_idx.empty() || pilot_n == 0) throw std::invalid_argument("no payload symbols after the training stage");
        result.noise_var = std::max(pilot_err / static_cast<double>(pilot_n), 1e-12);
        result.report = evaluate_block(tx_idx, rx, dist, result.noise_var);
        return 0;
    });
    result.symbols = std::move(sym);
    return result;
}

TxBlock make_tx_block(const ShapedDistribution& dist, std::size_t symbols_per_pol, const ChainConfig& cfg,
                      std::uint64_t seed, std::size_t ccdm_block) {
    const auto num = static_cast<std::size_t>(cfg.pilot_rate.numerator());
    const auto den = static_cast<std::size_t>(cfg.pilot_rate.denominator());
    const std::size_t payload_len = symbols_per_pol / den * num;
    if (payload_len == 0) throw std::invalid_argument("make_tx_block: block too short for one pilot period");

    const Composition comp = quantize_composition(dist, ccdm_block);
    const std::size_t k_bits = ccdm_input_length(comp);
    std::mt19937_64 rng(derive_seed(seed, 0xb175));

    TxBlock blk;
    auto make_pol = [&](std::uint64_t pol, std::vector<std::uint32_t>& indices) {
        indices.clear();
        indices.reserve(payload_len + ccdm_block);
        std::vector<std::uint8_t> bits(k_bits);
        while (indices.size() < payload_len) {
            for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
            const auto block = ccdm_encode(bits, comp);
            indices.insert(indices.end(), block.begin(), block.end());
        }
        indices.resize(payload_len);
        std::vector<cdouble> payload(payload_len);
        for (std::size_t i = 0; i < payload_len; ++i) payload[i] = dist.constellation()[indices[i]];
        return insert_pilots(payload, cfg.pilot_rate, 1.0, derive_seed(seed, 0x9170, pol));
    };
    const Frame fx = make_pol(0, blk.meta.payload_x);
    const Frame fy = make_pol(1, blk.meta.payload_y);
    blk.meta.tx_symbols.x = fx.symbols;
    blk.meta.tx_symbols.y = fy.symbols;
    blk.meta.pilot_mask = fx.is_pilot;
    blk.meta.pilot_power = fx.pilot_power;

    const auto taps = rrc_taps(cfg.rolloff, cfg.sps, cfg.rrc_span);
    blk.waveform.x = pulse_shape(fx.symbols, taps, cfg.sps);
    blk.waveform.y = pulse_shape(fy.symbols, taps, cfg.sps);
    return blk;
}

} // namespace pcslink
