#include "pcslink/airlut.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pcslink/metrics.hpp"

namespace pcslink {

void AirTable::validate() const {
    if (snr_grid_db.size() < 2) throw std::invalid_argument("AirTable: grid needs at least 2 points");
    if (air_values.size() != snr_grid_db.size()) throw std::invalid_argument("AirTable: grid/AIR size mismatch");
    const double max_air = 2.0 * std::log2(static_cast<double>(m_pcs));
    for (std::size_t i = 0; i < snr_grid_db.size(); ++i) {
        if (i > 0 && !(snr_grid_db[i] > snr_grid_db[i - 1])) {
            throw std::invalid_argument("AirTable: grid must be strictly ascending");
        }
        if (!(air_values[i] >= 0.0 && air_values[i] <= max_air + 1e-12)) {
            throw std::invalid_argument("AirTable: AIR value out of range");
        }
        if (i > 0 && air_values[i] < air_values[i - 1]) {
            throw std::invalid_argument("AirTable: AIR must be non-decreasing in SNR");
        }
    }
    if (!(ngmi_threshold > 0.0 && ngmi_threshold < 1.0)) {
        throw std::invalid_argument("AirTable: NGMI threshold must lie in (0, 1)");
    }
}

double RatePlan::max_air(std::size_t m_pcs) const { return 2.0 * std::log2(static_cast<double>(m_pcs)); }

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ':')) {
        try {
            parts.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw std::invalid_argument("grid '" + text + "': '" + tok + "' is not a number");
        }
    }
    if (parts.size() != 3) throw std::invalid_argument("grid must be lo:hi:step, got '" + text + "'");
    const double lo = parts[0], hi = parts[1], step = parts[2];
    if (!(step > 0.0) || !(hi > lo)) throw std::invalid_argument("grid '" + text + "' is not ascending");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> grid(count);
    for (std::size_t k = 0; k < count; ++k) grid[k] = lo + static_cast<double>(k) * step;
    return grid;
}

double max_entropy_for_threshold(double snr_db, double ngmi_th, const TemplatePtr& tmpl, std::size_t mc_symbols,
                                 std::uint64_t seed, double resolution) {
    const double h_max = std::log2(static_cast<double>(tmpl->size()));
    auto passes = [&](double h) {
        return simulate_awgn(mb_for_entropy(h, tmpl), snr_db, mc_symbols, seed).ngmi >= ngmi_th;
    };
    if (passes(h_max)) return h_max;
    if (!passes(kEntropyFloorBits)) return 0.0;
    double lo = kEntropyFloorBits, hi = h_max;
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        if (passes(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

AirTable build_air_table(double ngmi_th, const TemplatePtr& tmpl, const std::vector<double>& snr_grid,
                         const McConfig& mc) {
    if (!(ngmi_th > 0.0 && ngmi_th < 1.0)) throw std::invalid_argument("build_air_table: threshold must lie in (0, 1)");
    if (snr_grid.size() < 2) throw std::invalid_argument("build_air_table: grid needs at least 2 points");
    for (std::size_t i = 1; i < snr_grid.size(); ++i) {
        if (!(snr_grid[i] > snr_grid[i - 1])) throw std::invalid_argument("build_air_table: grid must be ascending");
    }
    if (mc.symbols == 0) throw std::invalid_argument("build_air_table: need at least one MC symbol");

    AirTable table;
    table.snr_grid_db = snr_grid;
    table.ngmi_threshold = ngmi_th;
    table.m_pcs = tmpl->size();
    table.mc_symbols = mc.symbols;
    table.seed = mc.seed;
    table.air_values.resize(snr_grid.size());
    for (std::size_t i = 0; i < snr_grid.size(); ++i) {
        const double h = max_entropy_for_threshold(snr_grid[i], ngmi_th, tmpl, mc.symbols, derive_seed(mc.seed, i),
                                                   mc.entropy_resolution);
        table.air_values[i] = 2.0 * h;
    }
    // Monte-Carlo noise can leave small dips; clamp to the running maximum.
    for (std::size_t i = 1; i < table.air_values.size(); ++i) {
        table.air_values[i] = std::max(table.air_values[i], table.air_values[i - 1]);
    }
    return table;
}

double lookup_air(const AirTable& table, double snr_db) {
    const auto& g = table.snr_grid_db;
    const auto& a = table.air_values;
    if (snr_db <= g.front()) return a.front();
    if (snr_db >= g.back()) return a.back();
    const auto it = std::upper_bound(g.begin(), g.end(), snr_db);
    const std::size_t hi = static_cast<std::size_t>(it - g.begin());
    const std::size_t lo = hi - 1;
    const double w = (snr_db - g[lo]) / (g[hi] - g[lo]);
    return a[lo] + w * (a[hi] - a[lo]);
}

double net_bit_rate(double air, const RatePlan& plan) {
    if (!(air >= 0.0 && air <= plan.max_air() + 1e-12)) {
        throw std::invalid_argument("net_bit_rate: AIR " + std::to_string(air) + " out of range");
    }
    return air * boost::rational_cast<double>(plan.net_symbol_rate());
}

double air_for_rate(double rate_bps, const RatePlan& plan) {
    const double net = boost::rational_cast<double>(plan.net_symbol_rate());
    if (!(rate_bps >= 0.0 && rate_bps <= plan.max_air() * net * (1.0 + 1e-15))) {
        throw std::invalid_argument("air_for_rate: rate " + std::to_string(rate_bps) + " out of range");
    }
    return rate_bps / net;
}

nlohmann::json to_json(const AirTable& table) {
    return {{"ngmi_th", table.ngmi_threshold}, {"M", table.m_pcs},
            {"snr_db", table.snr_grid_db},     {"air", table.air_values},
            {"mc_symbols", table.mc_symbols},  {"seed", table.seed}};
}

AirTable air_table_from_json(const nlohmann::json& j) {
    AirTable t;
    t.ngmi_threshold = j.at("ngmi_th").get<double>();
    t.m_pcs = j.at("M").get<std::size_t>();
    t.snr_grid_db = j.at("snr_db").get<std::vector<double>>();
    t.air_values = j.at("air").get<std::vector<double>>();
    t.mc_symbols = j.value("mc_symbols", std::size_t{0});
    t.seed = j.value("seed", std::uint64_t{0});
    t.validate();
    return t;
}

void save_air_table(const AirTable& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_json(table).dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

AirTable load_air_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open AIR table '" + path + "'");
    try {
        return air_table_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed AIR table '" + path + "': " + e.what());
    }
}

} // namespace pcslink
