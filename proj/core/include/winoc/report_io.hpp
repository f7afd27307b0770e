#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "winoc/config.hpp"
#include "winoc/experiment.hpp"

namespace winoc {

/// Library version recorded in run manifests.
const char* version();

/// Files written for one run, all CSV with a header row:
///
///   peak_temp.csv        cycle,time_us,peak_c,decision
///   triggers.csv         cycle,kind,flagged,migrations,control_flits,peak_c,predicted_peak_c,peeked,applied_cycle
///   latency_cdf.csv      latency_upper_cycles,count,cdf
///   control.csv          interval_start,control_flits,channel_cycles,bandwidth_gbps
///   component_temps.csv  cycle,c0,...  (record_series only)
///   summary.csv          metric,value
///
/// `prefix` is prepended to every file name. Returns the paths written.
std::vector<std::filesystem::path> write_run_report(const RunReport& report, const std::filesystem::path& dir,
                                                    const std::string& prefix = "");

/// effective_config.ini plus manifest.txt (config hash, seed, version).
void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir, const std::string& command);

/// Per-variant files prefixed `<label>_`, then compare_peak_temp.csv (cycle
/// followed by one peak column per variant) and compare_summary.csv.
std::vector<std::filesystem::path> write_comparison(const Comparison& cmp, const std::filesystem::path& dir);

/// Text lines of the summary (metric, value) for a run.
std::vector<std::pair<std::string, std::string>> run_summary(const RunReport& report);

}  // namespace winoc
