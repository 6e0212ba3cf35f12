#include "pcslink/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace pcslink {

const SchemeSummary& CampaignReport::scheme(const std::string& name) const {
    for (const auto& s : schemes) {
        if (s.name == name) return s;
    }
    throw std::out_of_range("no scheme '" + name + "' in report");
}

const GainSeries& CampaignReport::gain_versus(const std::string& name) const {
    for (const auto& g : gains) {
        if (g.versus == name) return g;
    }
    throw std::out_of_range("no gain series versus '" + name + "' in report");
}

CampaignReport accumulate_report(const std::vector<IterationRecord>& records, double sampling_period_s) {
    if (records.empty()) throw std::invalid_argument("accumulate_report: no records");
    if (!(sampling_period_s > 0.0)) throw std::invalid_argument("accumulate_report: sampling period must be positive");

    CampaignReport rep;
    rep.sampling_period_s = sampling_period_s;

    std::vector<std::string> names;
    std::map<std::size_t, std::pair<double, Weather>> by_n;
    for (const auto& r : records) {
        if (std::find(names.begin(), names.end(), r.scheme) == names.end()) names.push_back(r.scheme);
        by_n.emplace(r.n, std::make_pair(r.t_s, r.weather));
    }
    std::map<std::size_t, std::size_t> slot;  // iteration n -> series index
    for (const auto& [n, tw] : by_n) {
        slot[n] = rep.t_s.size();
        rep.t_s.push_back(tw.first);
        rep.weather.push_back(tw.second);
    }
    const std::size_t iters = slot.size();

    std::map<std::string, std::vector<double>> increments;
    for (const auto& name : names) increments[name].assign(iters, 0.0);

    for (const auto& name : names) {
        SchemeSummary s;
        s.name = name;
        double eff_sum = 0.0, rate_rain = 0.0, rate_clear = 0.0;
        std::size_t out = 0, out_rain = 0, out_clear = 0;
        for (const auto& r : records) {
            if (r.scheme != name) continue;
            ++s.count;
            const double eff = r.in_service ? r.rate_bps : 0.0;
            eff_sum += eff;
            increments[name][slot.at(r.n)] += eff * sampling_period_s / 8.0;
            if (!r.in_service) ++out;
            if (r.weather == Weather::Rain) {
                ++s.count_rain;
                rate_rain += r.rate_bps;
                if (!r.in_service) ++out_rain;
            } else {
                ++s.count_clear;
                rate_clear += r.rate_bps;
                if (!r.in_service) ++out_clear;
            }
        }
        const auto ratio = [](double a, std::size_t b) { return b ? a / static_cast<double>(b) : 0.0; };
        s.mean_effective_rate_bps = ratio(eff_sum, s.count);
        s.outage_fraction = ratio(static_cast<double>(out), s.count);
        s.mean_rate_rain_bps = ratio(rate_rain, s.count_rain);
        s.mean_rate_clear_bps = ratio(rate_clear, s.count_clear);
        s.outage_fraction_rain = ratio(static_cast<double>(out_rain), s.count_rain);
        s.outage_fraction_clear = ratio(static_cast<double>(out_clear), s.count_clear);

        auto& acc = rep.delivered_bytes[name];
        acc.resize(iters);
        double total = 0.0;
        for (std::size_t i = 0; i < iters; ++i) {
            total += increments[name][i];
            acc[i] = total;
        }
        s.delivered_bytes = total;
        rep.schemes.push_back(s);
    }

    if (increments.count("adaptive")) {
        const auto& inc_a = increments.at("adaptive");
        for (const auto& name : names) {
            if (name.rfind("fixed", 0) != 0) continue;
            GainSeries g;
            g.versus = name;
            g.bytes.resize(iters);
            double total = 0.0;
            for (std::size_t i = 0; i < iters; ++i) {
                const double d = inc_a[i] - increments.at(name)[i];
                total += d;
                g.bytes[i] = total;
                if (rep.weather[i] == Weather::Rain) g.accrued_in_rain_bytes += d;
            }
            rep.gains.push_back(std::move(g));
        }
    }
    return rep;
}

nlohmann::json to_json(const CampaignReport& report) {
    nlohmann::json j;
    j["sampling_period_s"] = report.sampling_period_s;
    j["iterations"] = report.t_s.size();
    j["duration_s"] = static_cast<double>(report.t_s.size()) * report.sampling_period_s;
    auto& schemes = j["schemes"] = nlohmann::json::array();
    for (const auto& s : report.schemes) {
        schemes.push_back({{"name", s.name},
                           {"count", s.count},
                           {"mean_effective_rate_bps", s.mean_effective_rate_bps},
                           {"outage_fraction", s.outage_fraction},
                           {"delivered_bytes", s.delivered_bytes},
                           {"count_rain", s.count_rain},
                           {"count_clear", s.count_clear},
                           {"mean_rate_rain_bps", s.mean_rate_rain_bps},
                           {"mean_rate_clear_bps", s.mean_rate_clear_bps},
                           {"outage_fraction_rain", s.outage_fraction_rain},
                           {"outage_fraction_clear", s.outage_fraction_clear}});
    }
    auto& gains = j["gains"] = nlohmann::json::array();
    for (const auto& g : report.gains) {
        gains.push_back({{"adaptive_vs", g.versus},
                         {"final_bytes", g.bytes.empty() ? 0.0 : g.bytes.back()},
                         {"final_terabytes", g.bytes.empty() ? 0.0 : g.bytes.back() / 1e12},
                         {"accrued_in_rain_bytes", g.accrued_in_rain_bytes}});
    }
    return j;
}

namespace {

constexpr const char* kRecordsHeader =
    "n,t_s,scheme,weather,snr_true_db,snr_meas_db,snr_est_db,entropy_bits,air,rate_bps,ngmi,in_service";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string f;
    std::stringstream ss(line);
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

} // namespace

std::string format_records_csv(const std::vector<IterationRecord>& records) {
    std::string out = std::string(kRecordsHeader) + '\n';
    for (const auto& r : records) {
        out += std::to_string(r.n) + ',' + format_number(r.t_s) + ',' + r.scheme + ',' + to_string(r.weather) + ',' +
               format_number(r.snr_true_db) + ',' + format_number(r.snr_meas_db) + ',' +
               (r.snr_est_db ? format_number(*r.snr_est_db) : std::string()) + ',' + format_number(r.entropy_bits) +
               ',' + format_number(r.air) + ',' + format_number(r.rate_bps) + ',' + format_number(r.ngmi) + ',' +
               (r.in_service ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<IterationRecord> parse_records_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<IterationRecord> out;
    bool header = false;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error("records.csv line " + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != kRecordsHeader) fail("unexpected header");
            header = true;
            continue;
        }
        const auto f = split_csv(line);
        if (f.size() != 12) fail("expected 12 fields");
        IterationRecord r;
        double n = 0.0, est = 0.0;
        if (!parse_number(f[0], n) || n < 0) fail("bad iteration index");
        r.n = static_cast<std::size_t>(n);
        r.scheme = f[2];
        try {
            r.weather = weather_from_string(f[3]);
        } catch (const std::exception& e) {
            fail(e.what());
        }
        if (!parse_number(f[1], r.t_s) || !parse_number(f[4], r.snr_true_db) || !parse_number(f[5], r.snr_meas_db) ||
            !parse_number(f[7], r.entropy_bits) || !parse_number(f[8], r.air) || !parse_number(f[9], r.rate_bps) ||
            !parse_number(f[10], r.ngmi)) {
            fail("malformed number");
        }
        if (!f[6].empty()) {
            if (!parse_number(f[6], est)) fail("malformed snr_est_db");
            r.snr_est_db = est;
        }
        if (f[11] != "0" && f[11] != "1") fail("in_service must be 0 or 1");
        r.in_service = f[11] == "1";
        out.push_back(std::move(r));
    }
    if (!header) throw std::runtime_error("records.csv: missing header");
    return out;
}

std::vector<IterationRecord> load_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_records_csv(ss.str());
}

void emit_report(const CampaignReport& report, const std::vector<IterationRecord>& records,
                 const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + out_dir + "': " + ec.message());

    write_file(dir / "records.csv", format_records_csv(records));
    write_file(dir / "summary.json", to_json(report).dump(2) + '\n');

    std::vector<std::string> names;
    for (const auto& s : report.schemes) names.push_back(s.name);
    std::map<std::pair<std::size_t, std::string>, const IterationRecord*> at;
    std::map<std::size_t, std::size_t> slot;
    for (const auto& r : records) {
        at[{r.n, r.scheme}] = &r;
        slot.emplace(r.n, 0);
    }
    std::vector<std::size_t> iters;
    for (const auto& [n, unused] : slot) iters.push_back(n);

    const std::string snr_source =
        std::find(names.begin(), names.end(), "adaptive") != names.end() ? "adaptive" : names.front();
    auto row_prefix = [&](std::size_t i) {
        return std::to_string(iters[i]) + ',' + format_number(report.t_s[i]) + ',' + to_string(report.weather[i]);
    };

    std::string snr = "n,t_s,weather,snr_true_db,snr_meas_db,snr_est_db\n";
    std::string ngmi = "n,t_s,weather";
    std::string rate = "n,t_s,weather";
    for (const auto& nm : names) {
        ngmi += ',' + nm;
        rate += ',' + nm;
    }
    ngmi += '\n';
    rate += '\n';
    std::string gain = "n,t_s,weather";
    for (const auto& g : report.gains) gain += ",adaptive_vs_" + g.versus + "_bytes";
    gain += '\n';

    for (std::size_t i = 0; i < iters.size(); ++i) {
        const auto it = at.find({iters[i], snr_source});
        snr += row_prefix(i);
        if (it != at.end()) {
            const auto& r = *it->second;
            snr += ',' + format_number(r.snr_true_db) + ',' + format_number(r.snr_meas_db) + ',' +
                   (r.snr_est_db ? format_number(*r.snr_est_db) : std::string());
        } else {
            snr += ",,,";
        }
        snr += '\n';
        ngmi += row_prefix(i);
        rate += row_prefix(i);
        for (const auto& nm : names) {
            const auto jt = at.find({iters[i], nm});
            ngmi += ',' + (jt != at.end() ? format_number(jt->second->ngmi) : std::string());
            rate += ',' + (jt != at.end() ? format_number(jt->second->rate_bps) : std::string());
        }
        ngmi += '\n';
        rate += '\n';
        gain += row_prefix(i);
        for (const auto& g : report.gains) gain += ',' + format_number(g.bytes[i]);
        gain += '\n';
    }
    write_file(dir / "snr_vs_t.csv", snr);
    write_file(dir / "ngmi_vs_t.csv", ngmi);
    write_file(dir / "rate_vs_t.csv", rate);
    write_file(dir / "gain_vs_t.csv", gain);
}

} // namespace pcslink
