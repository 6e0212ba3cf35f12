#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "pcslink/control.hpp"

namespace pcslink {

struct SchemeSummary {
    std::string name;
    std::size_t count = 0;
    double mean_effective_rate_bps = 0.0;  // outage iterations count as zero
    double outage_fraction = 0.0;
    double delivered_bytes = 0.0;
    std::size_t count_rain = 0;
    std::size_t count_clear = 0;
    double mean_rate_rain_bps = 0.0;       // transmitted rate
    double mean_rate_clear_bps = 0.0;
    double outage_fraction_rain = 0.0;
    double outage_fraction_clear = 0.0;
};

struct GainSeries {
    std::string versus;                 // fixed scheme name
    std::vector<double> bytes;          // accumulated adaptive - fixed
    double accrued_in_rain_bytes = 0.0; // sum of increments in rain iterations
};

struct CampaignReport {
    double sampling_period_s = 25.0;
    std::vector<double> t_s;
    std::vector<Weather> weather;
    std::vector<SchemeSummary> schemes;
    std::map<std::string, std::vector<double>> delivered_bytes;  // accumulated, per scheme
    std::vector<GainSeries> gains;                               // adaptive vs each fixed scheme

    const SchemeSummary& scheme(const std::string& name) const;
    const GainSeries& gain_versus(const std::string& name) const;
};

CampaignReport accumulate_report(const std::vector<IterationRecord>& records, double sampling_period_s);

nlohmann::json to_json(const CampaignReport& report);

std::string format_records_csv(const std::vector<IterationRecord>& records);
std::vector<IterationRecord> parse_records_csv(const std::string& text);
std::vector<IterationRecord> load_records(const std::string& path);

/// Writes records.csv, summary.json and the per-panel CSVs (snr_vs_t,
/// ngmi_vs_t, rate_vs_t, gain_vs_t) into out_dir, creating it if needed.
void emit_report(const CampaignReport& report, const std::vector<IterationRecord>& records,
                 const std::string& out_dir);

} // namespace pcslink
