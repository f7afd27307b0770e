#include "winoc/report_io.hpp"

#include <fstream>

#include <fmt/format.h>

#include "winoc/errors.hpp"

#ifndef WINOC_VERSION
#define WINOC_VERSION "unknown"
#endif

namespace winoc {

const char* version() { return WINOC_VERSION; }

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, std::vector<std::filesystem::path>& written) : os_(path) {
    if (!os_) throw ConfigError(fmt::format("cannot write {}", path.string()));
    written.push_back(path);
  }
  template <class... Args>
  void row(fmt::format_string<Args...> f, Args&&... args) {
    os_ << fmt::format(f, std::forward<Args>(args)...) << '\n';
  }

 private:
  std::ofstream os_;
};

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory {}: {}", dir.string(), ec.message()));
}

}  // namespace

std::vector<std::pair<std::string, std::string>> run_summary(const RunReport& r) {
  std::int64_t max_ctl = 0;
  for (const auto& c : r.control) max_ctl = std::max(max_ctl, c.flits);
  return {
      {"label", r.label},
      {"variant", to_string(r.variant)},
      {"t_th_c", fmt::format("{}", r.t_th)},
      {"duration_cycles", fmt::format("{}", r.duration())},
      {"initial_peak_c", fmt::format("{:.4f}", r.peak_c.empty() ? 0.0 : r.peak_c.front())},
      {"max_peak_c", fmt::format("{:.4f}", r.max_peak())},
      {"final_peak_c", fmt::format("{:.4f}", r.peak_c.empty() ? 0.0 : r.peak_c.back())},
      {"triggers", fmt::format("{}", r.triggers())},
      {"packets_delivered", fmt::format("{}", r.noc.packets_delivered)},
      {"mean_latency_cycles", fmt::format("{:.3f}", r.noc.mean_latency())},
      {"throughput_flits_per_cycle", fmt::format("{:.6f}", r.throughput_flits_per_cycle)},
      {"max_control_flits_per_interval", fmt::format("{}", max_ctl)},
      {"deadlock", r.noc.deadlock ? "true" : "false"},
  };
}

std::vector<std::filesystem::path> write_run_report(const RunReport& r, const std::filesystem::path& dir,
                                                    const std::string& prefix) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  const double us_per_cycle = r.clock_hz > 0 ? 1e6 / r.clock_hz : 0.0;
  {
    CsvFile f(dir / (prefix + "peak_temp.csv"), written);
    f.row("cycle,time_us,peak_c,decision");
    for (std::size_t i = 0; i < r.step_cycle.size(); ++i) {
      f.row("{},{:.3f},{:.4f},{}", r.step_cycle[i], static_cast<double>(r.step_cycle[i]) * us_per_cycle, r.peak_c[i],
            to_string(r.step_decision[i]));
    }
  }
  {
    CsvFile f(dir / (prefix + "triggers.csv"), written);
    f.row("cycle,kind,flagged,migrations,control_flits,peak_c,predicted_peak_c,peeked,applied_cycle");
    for (const auto& e : r.events) {
      f.row("{},{},{},{},{},{:.4f},{:.4f},{},{}", e.cycle, to_string(e.kind), e.flagged, e.migrations,
            e.control_flits, e.peak_c, e.peak_predicted_c, e.peeked ? 1 : 0, e.applied_cycle);
    }
  }
  {
    CsvFile f(dir / (prefix + "latency_cdf.csv"), written);
    f.row("latency_upper_cycles,count,cdf");
    const auto total = r.latency.total();
    std::int64_t acc = 0;
    if (total > 0) {
      for (std::size_t b = 0; b < r.latency.counts.size(); ++b) {
        acc += r.latency.counts[b];
        f.row("{},{},{:.6f}", static_cast<std::int64_t>(b + 1) * r.latency.bin_width, r.latency.counts[b],
              static_cast<double>(acc) / static_cast<double>(total));
      }
    }
  }
  {
    CsvFile f(dir / (prefix + "control.csv"), written);
    f.row("interval_start,control_flits,channel_cycles,bandwidth_gbps");
    const double seconds = r.clock_hz > 0 ? static_cast<double>(r.interval_cycles) / r.clock_hz : 0.0;
    for (const auto& c : r.control) {
      const double gbps = seconds > 0 ? static_cast<double>(c.flits) * 32.0 / seconds / 1e9 : 0.0;
      f.row("{},{},{},{:.6f}", c.interval_start, c.flits, c.channel_cycles, gbps);
    }
  }
  if (!r.component_temps.empty()) {
    CsvFile f(dir / (prefix + "component_temps.csv"), written);
    std::string header = "cycle";
    for (std::size_t i = 0; i < r.component_temps.front().size(); ++i) header += fmt::format(",c{}", i);
    f.row("{}", header);
    for (std::size_t k = 0; k < r.component_temps.size(); ++k) {
      f.row("{},{:.4f}", r.step_cycle[k], fmt::join(r.component_temps[k], ","));
    }
  }
  {
    CsvFile f(dir / (prefix + "summary.csv"), written);
    f.row("metric,value");
    for (const auto& [k, v] : run_summary(r)) f.row("{},{}", k, v);
  }
  return written;
}

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir, const std::string& command) {
  ensure_dir(dir);
  {
    std::ofstream os(dir / "effective_config.ini");
    if (!os) throw ConfigError(fmt::format("cannot write {}", (dir / "effective_config.ini").string()));
    os << effective_config(cfg);
  }
  std::ofstream os(dir / "manifest.txt");
  if (!os) throw ConfigError(fmt::format("cannot write {}", (dir / "manifest.txt").string()));
  os << fmt::format("command = {}\nconfig_hash = {}\nseed = {}\nversion = {}\nconfig = effective_config.ini\n",
                    command, config_hash(cfg), cfg.seed, version());
}

std::vector<std::filesystem::path> write_comparison(const Comparison& cmp, const std::filesystem::path& dir) {
  ensure_dir(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& r : cmp.reports) {
    auto files = write_run_report(r, dir, r.label + "_");
    written.insert(written.end(), files.begin(), files.end());
  }
  if (cmp.reports.empty()) return written;
  {
    CsvFile f(dir / "compare_peak_temp.csv", written);
    std::string header = "cycle";
    for (const auto& r : cmp.reports) header += "," + r.label;
    f.row("{}", header);
    const auto& base = cmp.reports.front();
    for (std::size_t i = 0; i < base.step_cycle.size(); ++i) {
      std::string line = std::to_string(base.step_cycle[i]);
      for (const auto& r : cmp.reports) line += fmt::format(",{:.4f}", r.peak_c.at(i));
      f.row("{}", line);
    }
  }
  {
    CsvFile f(dir / "compare_summary.csv", written);
    f.row("label,variant,t_th_c,triggers,max_peak_c,mean_latency_cycles,latency_delta_pct,throughput_flits_per_cycle");
    const double base_lat = cmp.reports.front().noc.mean_latency();
    for (const auto& r : cmp.reports) {
      const double lat = r.noc.mean_latency();
      const double delta = base_lat > 0 ? 100.0 * (lat - base_lat) / base_lat : 0.0;
      f.row("{},{},{},{},{:.4f},{:.3f},{:.3f},{:.6f}", r.label, to_string(r.variant), r.t_th, r.triggers(),
            r.max_peak(), lat, delta, r.throughput_flits_per_cycle);
    }
  }
  return written;
}

}  // namespace winoc
