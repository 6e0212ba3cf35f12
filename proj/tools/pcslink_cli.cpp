// pcslink: command-line front end for trace generation, AIR table
// construction, adaptive-link campaigns and their reports.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "pcslink/airlut.hpp"
#include "pcslink/ccdm.hpp"
#include "pcslink/channel.hpp"
#include "pcslink/control.hpp"
#include "pcslink/report.hpp"
#include "pcslink/shaping.hpp"

namespace {

using namespace pcslink;

void print_summary(const CampaignReport& rep) {
    std::printf("%-10s %10s %12s %10s %10s %10s %14s\n", "scheme", "iters", "eff. Gbps", "outage", "out.rain",
                "out.clear", "delivered TB");
    for (const auto& s : rep.schemes) {
        std::printf("%-10s %10zu %12.2f %9.2f%% %9.2f%% %9.2f%% %14.3f\n", s.name.c_str(), s.count,
                    s.mean_effective_rate_bps / 1e9, 100.0 * s.outage_fraction, 100.0 * s.outage_fraction_rain,
                    100.0 * s.outage_fraction_clear, s.delivered_bytes / 1e12);
    }
    for (const auto& g : rep.gains) {
        std::printf("adaptive vs %-8s gain %+.3f TB (%+.3f TB during rain)\n", g.versus.c_str(),
                    g.bytes.back() / 1e12, g.accrued_in_rain_bytes / 1e12);
    }
}

double infer_period(const std::vector<IterationRecord>& records) {
    for (const auto& r : records) {
        if (r.n == 1) return r.t_s - records.front().t_s;
    }
    return 25.0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Time-adaptive probabilistically shaped QAM link simulator"};
    app.require_subcommand(1);

    // gen-trace
    auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic SNR trace with rain episodes");
    std::string gen_config, gen_out;
    double gen_duration = 10800.0;
    gen->add_option("--config", gen_config, "Rain model JSON (defaults used when omitted)");
    gen->add_option("--duration", gen_duration, "Trace duration in seconds")->capture_default_str();
    gen->add_option("--out", gen_out, "Output CSV path")->required();

    // build-lut
    auto* lut = app.add_subcommand("build-lut", "Build the SNR -> AIR lookup table by Monte Carlo");
    double lut_th = 0.9, lut_res = 0.01;
    std::string lut_grid = "0:30:0.25", lut_out;
    std::size_t lut_mc = 200000;
    std::uint64_t lut_seed = 1;
    lut->add_option("--ngmi-th", lut_th, "NGMI threshold")->capture_default_str();
    lut->add_option("--grid", lut_grid, "SNR grid lo:hi:step in dB")->capture_default_str();
    lut->add_option("--mc", lut_mc, "Monte-Carlo symbols per evaluation")->capture_default_str();
    lut->add_option("--seed", lut_seed, "Seed")->capture_default_str();
    lut->add_option("--resolution", lut_res, "Entropy bisection resolution (bits)")->capture_default_str();
    lut->add_option("--out", lut_out, "Output JSON path")->required();

    // run
    auto* run = app.add_subcommand("run", "Run fixed and adaptive schemes over a trace");
    std::string run_trace, run_lut, run_schemes = "fixed400,fixed500,adaptive", run_mode = "analytic", run_out;
    CampaignConfig ccfg;
    run->add_option("--trace", run_trace, "Trace CSV")->required();
    run->add_option("--lut", run_lut, "AIR table JSON")->required();
    run->add_option("--schemes", run_schemes, "Comma-separated schemes")->capture_default_str();
    run->add_option("--mode", run_mode, "analytic | waveform")->capture_default_str();
    run->add_option("--seed", ccfg.seed, "Seed")->capture_default_str();
    run->add_option("--mc", ccfg.mc_symbols, "Symbols per iteration (analytic mode)")->capture_default_str();
    run->add_option("--taps", ccfg.predictor_taps, "Predictor window length N")->capture_default_str();
    run->add_option("--margin", ccfg.snr_margin_db, "SNR margin in dB")->capture_default_str();
    run->add_option("--waveform-symbols", ccfg.waveform_symbols_per_pol, "Symbols per pol per block (waveform mode)")
        ->capture_default_str();
    run->add_option("--out", run_out, "Output directory")->required();

    // report
    auto* rep = app.add_subcommand("report", "Summarize a results directory");
    std::string rep_in;
    double rep_period = 0.0;
    rep->add_option("--in", rep_in, "Results directory holding records.csv")->required();
    rep->add_option("--period", rep_period, "Sampling period in seconds (inferred when omitted)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Sweep predictor window and margin against a trace");
    std::string sw_trace, sw_lut, sw_windows = "1,2,3,4,5", sw_margins = "0:3:0.5";
    sweep->add_option("--trace", sw_trace, "Trace CSV")->required();
    sweep->add_option("--lut", sw_lut, "AIR table JSON")->required();
    sweep->add_option("--windows", sw_windows, "Comma-separated window lengths")->capture_default_str();
    sweep->add_option("--margins", sw_margins, "Margin grid lo:hi:step in dB")->capture_default_str();

    // shape
    auto* shape = app.add_subcommand("shape", "Print the MB distribution and CCDM composition for an entropy");
    double sh_entropy = 5.0;
    std::size_t sh_n = 960;
    shape->add_option("--entropy", sh_entropy, "Entropy in bits/symbol/pol")->capture_default_str();
    shape->add_option("--n", sh_n, "CCDM block length")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            RainModelConfig cfg;
            if (!gen_config.empty()) {
                std::ifstream in(gen_config);
                if (!in) throw std::runtime_error("cannot open config '" + gen_config + "'");
                cfg = rain_config_from_json(nlohmann::json::parse(in));
            }
            const auto trace = gen_trace(cfg, gen_duration);
            save_trace(trace, gen_out);
            std::cout << "wrote " << trace.size() << " samples to " << gen_out << '\n';
        } else if (*lut) {
            McConfig mc;
            mc.symbols = lut_mc;
            mc.seed = lut_seed;
            mc.entropy_resolution = lut_res;
            const auto table = build_air_table(lut_th, square_qam(64), parse_grid(lut_grid), mc);
            save_air_table(table, lut_out);
            std::cout << "wrote " << table.snr_grid_db.size() << "-point AIR table to " << lut_out << '\n';
        } else if (*run) {
            ccfg.mode = link_mode_from_string(run_mode);
            const auto trace = load_trace(run_trace);
            const auto table = load_air_table(run_lut);
            const auto records = run_campaign(trace, parse_schemes(run_schemes), table, RatePlan{}, ccfg);
            const auto report = accumulate_report(records, trace.sampling_period_s);
            emit_report(report, records, run_out);
            print_summary(report);
        } else if (*rep) {
            const auto records = load_records((std::filesystem::path(rep_in) / "records.csv").string());
            if (records.empty()) throw std::runtime_error("records.csv holds no records");
            const double period = rep_period > 0.0 ? rep_period : infer_period(records);
            print_summary(accumulate_report(records, period));
        } else if (*sweep) {
            const auto trace = load_trace(sw_trace);
            const auto table = load_air_table(sw_lut);
            std::vector<std::size_t> windows;
            std::stringstream ss(sw_windows);
            for (std::string tok; std::getline(ss, tok, ',');) windows.push_back(std::stoul(tok));
            std::printf("%6s %8s %12s %8s\n", "N", "margin", "eff. Gbps", "outage");
            for (const auto& p : sweep_predictor(trace, table, RatePlan{}, windows, parse_grid(sw_margins))) {
                std::printf("%6zu %8.2f %12.2f %7.2f%%\n", p.window_length, p.snr_margin_db,
                            p.mean_effective_rate_bps / 1e9, 100.0 * p.outage_fraction);
            }
        } else if (*shape) {
            const auto dist = mb_for_entropy(sh_entropy, square_qam(64));
            const auto comp = quantize_composition(dist, sh_n);
            auto j = to_json(dist, &comp);
            j["ccdm_input_bits"] = ccdm_input_length(comp);
            std::cout << j.dump(2) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
