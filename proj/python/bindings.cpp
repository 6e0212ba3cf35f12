#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcslink/airlut.hpp"
#include "pcslink/ccdm.hpp"
#include "pcslink/channel.hpp"
#include "pcslink/control.hpp"
#include "pcslink/metrics.hpp"
#include "pcslink/report.hpp"
#include "pcslink/shaping.hpp"

namespace py = pybind11;
using namespace pcslink;

namespace {

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_python(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::dict record_dict(const IterationRecord& r) {
    py::dict d;
    d["n"] = r.n;
    d["t_s"] = r.t_s;
    d["scheme"] = r.scheme;
    d["weather"] = to_string(r.weather);
    d["snr_true_db"] = r.snr_true_db;
    d["snr_meas_db"] = r.snr_meas_db;
    d["snr_est_db"] = r.snr_est_db ? py::cast(*r.snr_est_db) : py::none();
    d["entropy_bits"] = r.entropy_bits;
    d["air"] = r.air;
    d["rate_bps"] = r.rate_bps;
    d["ngmi"] = r.ngmi;
    d["in_service"] = r.in_service;
    return d;
}

McConfig mc_config(std::size_t symbols, std::uint64_t seed, double resolution) {
    McConfig mc;
    mc.symbols = symbols;
    mc.seed = seed;
    mc.entropy_resolution = resolution;
    return mc;
}

} // namespace

PYBIND11_MODULE(_pcslink, m) {
    m.doc() = "Probabilistically shaped 64QAM link simulator";

    py::class_<ShapedDistribution>(m, "Distribution")
        .def_property_readonly("nu", &ShapedDistribution::nu)
        .def_property_readonly("entropy_bits", [](const ShapedDistribution& d) { return d.entropy_bits(); })
        .def_property_readonly("average_power", &ShapedDistribution::average_power)
        .def_property_readonly("probabilities", &ShapedDistribution::probabilities)
        .def_property_readonly("constellation", &ShapedDistribution::constellation)
        .def("to_dict", [](const ShapedDistribution& d) { return to_python(to_json(d)); })
        .def("__repr__", [](const ShapedDistribution& d) {
            return "<Distribution H=" + format_number(d.entropy_bits()) + " nu=" + format_number(d.nu()) + ">";
        });

    m.def("mb_distribution", [](double nu, std::size_t m_qam) { return mb_distribution(nu, square_qam(m_qam)); },
          py::arg("nu"), py::arg("m_qam") = 64);
    m.def("mb_for_entropy", [](double h, std::size_t m_qam) { return mb_for_entropy(h, square_qam(m_qam)); },
          py::arg("entropy_bits"), py::arg("m_qam") = 64);
    m.def("quantize_composition",
          [](const ShapedDistribution& d, std::size_t n) { return quantize_composition(d, n).counts; },
          py::arg("dist"), py::arg("n"));

    m.def("ccdm_input_length", [](std::vector<std::uint32_t> counts) { return ccdm_input_length({std::move(counts)}); },
          py::arg("counts"));
    m.def("ccdm_encode",
          [](const std::vector<std::uint8_t>& bits, std::vector<std::uint32_t> counts) {
              return ccdm_encode(bits, Composition{std::move(counts)});
          },
          py::arg("bits"), py::arg("counts"));
    m.def("ccdm_decode",
          [](const std::vector<std::uint32_t>& symbols, std::vector<std::uint32_t> counts) {
              return ccdm_decode(symbols, Composition{std::move(counts)});
          },
          py::arg("symbols"), py::arg("counts"));
    py::register_exception<CcdmError>(m, "CcdmError", PyExc_ValueError);

    m.def("ngmi", &ngmi, py::arg("gmi_bits"), py::arg("entropy_bits"), py::arg("m_bits") = 6.0);
    m.def("evm_percent",
          [](const std::vector<cdouble>& rx, const std::vector<cdouble>& ref) { return evm_percent(rx, ref); },
          py::arg("rx"), py::arg("ref"));
    m.def("snr_from_evm", &snr_from_evm, py::arg("evm_percent"));
    m.def("gmi_from_samples",
          [](const std::vector<std::uint32_t>& tx, const std::vector<cdouble>& rx, const ShapedDistribution& d,
             double noise_var) { return gmi_from_samples(tx, rx, d, noise_var); },
          py::arg("tx"), py::arg("rx"), py::arg("dist"), py::arg("noise_var"));
    m.def("simulate_awgn",
          [](const ShapedDistribution& d, double snr_db, std::size_t n, std::uint64_t seed) {
              return to_python(to_json(simulate_awgn(d, snr_db, n, seed)));
          },
          py::arg("dist"), py::arg("snr_db"), py::arg("n") = 200000, py::arg("seed") = 1);

    py::class_<AirTable>(m, "AirTable")
        .def_readonly("snr_grid_db", &AirTable::snr_grid_db)
        .def_readonly("air_values", &AirTable::air_values)
        .def_readonly("ngmi_threshold", &AirTable::ngmi_threshold)
        .def("lookup", [](const AirTable& t, double snr_db) { return lookup_air(t, snr_db); }, py::arg("snr_db"))
        .def("save", [](const AirTable& t, const std::string& path) { save_air_table(t, path); }, py::arg("path"))
        .def_static("load", &load_air_table, py::arg("path"))
        .def("to_dict", [](const AirTable& t) { return to_python(to_json(t)); });
    m.def("build_air_table",
          [](double ngmi_th, const std::string& grid, std::size_t mc_symbols, std::uint64_t seed, double resolution) {
              return build_air_table(ngmi_th, square_qam(64), parse_grid(grid), mc_config(mc_symbols, seed, resolution));
          },
          py::arg("ngmi_th") = 0.9, py::arg("grid") = "0:30:0.25", py::arg("mc_symbols") = 200000,
          py::arg("seed") = 1, py::arg("resolution") = 0.01, py::call_guard<py::gil_scoped_release>());
    m.def("net_bit_rate", [](double air) { return net_bit_rate(air, RatePlan{}); }, py::arg("air"));
    m.def("air_for_rate", [](double rate_bps) { return air_for_rate(rate_bps, RatePlan{}); }, py::arg("rate_bps"));

    m.def("predict_snr",
          [](const std::vector<double>& history, std::size_t n, double margin) {
              PredictorState s;
              s.window_length = n;
              s.snr_margin_db = margin;
              for (double v : history) s.push(v);
              return predict_snr(s);
          },
          py::arg("history"), py::arg("n") = 3, py::arg("margin_db") = 2.0);
    m.def("select_rate",
          [](const AirTable& t, double snr_est_db) {
              const auto r = select_rate(t, snr_est_db, RatePlan{});
              return py::make_tuple(r.entropy_bits, r.air, r.rate_bps);
          },
          py::arg("table"), py::arg("snr_est_db"));

    py::class_<SnrTrace>(m, "SnrTrace")
        .def("__len__", &SnrTrace::size)
        .def_readonly("sampling_period_s", &SnrTrace::sampling_period_s)
        .def_property_readonly("t_s",
                               [](const SnrTrace& t) {
                                   std::vector<double> v;
                                   for (const auto& e : t.entries) v.push_back(e.t_s);
                                   return v;
                               })
        .def_property_readonly("snr_db",
                               [](const SnrTrace& t) {
                                   std::vector<double> v;
                                   for (const auto& e : t.entries) v.push_back(e.snr_db);
                                   return v;
                               })
        .def_property_readonly("weather",
                               [](const SnrTrace& t) {
                                   std::vector<std::string> v;
                                   for (const auto& e : t.entries) v.emplace_back(to_string(e.weather));
                                   return v;
                               })
        .def("save", [](const SnrTrace& t, const std::string& path) { save_trace(t, path); }, py::arg("path"))
        .def_static("load", &load_trace, py::arg("path"));
    m.def("gen_trace",
          [](double duration_s, const py::object& config) {
              const RainModelConfig cfg = config.is_none() ? RainModelConfig{} : rain_config_from_json(from_python(config));
              return gen_trace(cfg, duration_s);
          },
          py::arg("duration_s") = 10800.0, py::arg("config") = py::none());
    m.def("default_rain_config", [] { return to_python(to_json(RainModelConfig{})); });

    m.def("run_campaign",
          [](const SnrTrace& trace, const AirTable& table, const std::string& schemes, const std::string& mode,
             std::uint64_t seed, std::size_t mc_symbols, std::size_t taps, double margin_db) {
              CampaignConfig cfg;
              cfg.mode = link_mode_from_string(mode);
              cfg.seed = seed;
              cfg.mc_symbols = mc_symbols;
              cfg.predictor_taps = taps;
              cfg.snr_margin_db = margin_db;
              std::vector<IterationRecord> records;
              {
                  py::gil_scoped_release release;
                  records = run_campaign(trace, parse_schemes(schemes), table, RatePlan{}, cfg);
              }
              py::list out;
              for (const auto& r : records) out.append(record_dict(r));
              const auto report = accumulate_report(records, trace.sampling_period_s);
              return py::make_tuple(out, to_python(to_json(report)));
          },
          py::arg("trace"), py::arg("table"), py::arg("schemes") = "fixed400,fixed500,adaptive",
          py::arg("mode") = "analytic", py::arg("seed") = 1, py::arg("mc_symbols") = 200000, py::arg("taps") = 3,
          py::arg("margin_db") = 2.0);

    m.def("realize_link",
          [](const ShapedDistribution& d, double snr_db, const std::string& mode, std::size_t symbols,
             std::uint64_t seed, const py::dict& impairments) {
              CampaignConfig cfg;
              cfg.mode = link_mode_from_string(mode);
              cfg.mc_symbols = symbols;
              cfg.waveform_symbols_per_pol = symbols;
              auto& imp = cfg.impairments;
              for (const auto& [key, value] : impairments) {
                  const auto k = key.cast<std::string>();
                  const double v = value.cast<double>();
                  if (k == "combined_linewidth_hz") imp.combined_linewidth_hz = v;
                  else if (k == "freq_offset_hz") imp.freq_offset_hz = v;
                  else if (k == "pol_rotation_rad") imp.pol_rotation_rad = v;
                  else if (k == "iq_amplitude_imbalance") imp.iq_amplitude_imbalance = v;
                  else if (k == "iq_phase_imbalance_rad") imp.iq_phase_imbalance_rad = v;
                  else if (k == "iq_skew_samples") imp.iq_skew_samples = v;
                  else throw py::key_error("unknown impairment '" + k + "'");
              }
              MetricReport r;
              {
                  py::gil_scoped_release release;
                  r = realize_link(d, snr_db, cfg, seed);
              }
              return to_python(to_json(r));
          },
          py::arg("dist"), py::arg("snr_db"), py::arg("mode") = "analytic", py::arg("symbols") = 100000,
          py::arg("seed") = 1, py::arg("impairments") = py::dict());
}
