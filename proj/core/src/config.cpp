#include "winoc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "winoc/errors.hpp"
#include "winoc/rng.hpp"

namespace winoc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text, const char* what) {
  const std::string s = trim(text);
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("config key {}: expected {} (got '{}')", key, what, text));
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("config key {}: expected true or false (got '{}')", key, text));
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<int>(key, item, "a comma-separated list of integers"));
  }
  return out;
}

std::string fmt_double(double v) { return fmt::format("{}", v); }

std::string fmt_list(const std::vector<int>& v) { return fmt::format("{}", fmt::join(v, ",")); }

struct Entry {
  const char* name;
  const char* description;
  std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class F>
Entry make_int(const char* name, const char* desc, F ref) {
  return {name, desc,
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
            ref(c) = parse_number<int>(k, v, "an integer");
          },
          [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); }};
}

template <class F>
Entry make_i64(const char* name, const char* desc, F ref) {
  return {name, desc,
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
            ref(c) = parse_number<std::int64_t>(k, v, "an integer");
          },
          [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); }};
}

template <class F>
Entry make_double(const char* name, const char* desc, F ref) {
  return {name, desc,
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
            ref(c) = parse_number<double>(k, v, "a number");
          },
          [ref](const ExperimentConfig& c) { return fmt_double(ref(c)); }};
}

template <class F>
Entry make_bool(const char* name, const char* desc, F ref) {
  return {name, desc,
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_bool(k, v); },
          [ref](const ExperimentConfig& c) {
            return std::string(ref(c) ? "true" : "false");
          }};
}

template <class F>
Entry make_path(const char* name, const char* desc, F ref) {
  return {name, desc,
          [ref](ExperimentConfig& c, const std::string&, const std::string& v) { ref(c) = trim(v); },
          [ref](const ExperimentConfig& c) { return ref(c).string(); }};
}

template <class F>
Entry make_list(const char* name, const char* desc, F ref) {
  return {name, desc,
          [ref](ExperimentConfig& c, const std::string& k, const std::string& v) { ref(c) = parse_int_list(k, v); },
          [ref](const ExperimentConfig& c) { return fmt_list(ref(c)); }};
}

// Accessor usable on both const and mutable configs.
#define FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = [] {
    std::vector<Entry> e;
    e.push_back(make_int("topology.grid_w", "mesh columns", FIELD(topology.grid_w)));
    e.push_back(make_int("topology.grid_h", "mesh rows", FIELD(topology.grid_h)));
    e.push_back(make_int("topology.num_wis", "wireless interfaces", FIELD(topology.num_wis)));
    e.push_back(make_double("topology.die_mm", "die edge length (mm)", FIELD(topology.die_mm)));

    e.push_back(make_double("thermal.core_c", "core capacitance (J/C)", FIELD(thermal.core.capacitance)));
    e.push_back(make_double("thermal.core_r", "core vertical resistance (C/W)", FIELD(thermal.core.r_vertical)));
    e.push_back(make_double("thermal.switch_c", "switch capacitance (J/C)", FIELD(thermal.sw.capacitance)));
    e.push_back(make_double("thermal.switch_r", "switch vertical resistance (C/W)", FIELD(thermal.sw.r_vertical)));
    e.push_back(make_double("thermal.link_c", "link capacitance (J/C)", FIELD(thermal.link.capacitance)));
    e.push_back(make_double("thermal.link_r", "link vertical resistance (C/W)", FIELD(thermal.link.r_vertical)));
    e.push_back(make_double("thermal.r_lateral", "lateral resistance (C/W)", FIELD(thermal.r_lateral)));
    e.push_back(make_double("thermal.ambient", "ambient temperature (C)", FIELD(thermal.t_ambient)));
    e.push_back(make_double("thermal.dt", "thermal step (s)", FIELD(thermal.dt_s)));
    e.push_back(make_i64("thermal.cycles_per_step", "NoC cycles per thermal step", FIELD(thermal.cycles_per_step)));

    e.push_back(make_double("power.core_leak", "core leakage (W)", FIELD(power.core.leak_w)));
    e.push_back(make_double("power.core_dyn", "core peak dynamic power (W)", FIELD(power.core.peak_dyn_w)));
    e.push_back(make_double("power.switch_leak", "switch leakage (W)", FIELD(power.sw.leak_w)));
    e.push_back(make_double("power.switch_dyn", "switch peak dynamic power (W)", FIELD(power.sw.peak_dyn_w)));
    e.push_back(make_double("power.link_leak", "link leakage (W)", FIELD(power.link.leak_w)));
    e.push_back(make_double("power.link_dyn", "link peak dynamic power (W)", FIELD(power.link.peak_dyn_w)));

    e.push_back(make_int("noc.data_vcs", "data VCs per port, the last is the escape lane", FIELD(noc.data_vcs)));
    e.push_back(make_int("noc.vc_depth", "flits per VC buffer", FIELD(noc.vc_depth)));
    e.push_back(make_int("noc.wireless_vc_depth", "flits per wireless VC buffer", FIELD(noc.wireless_vc_depth)));
    e.push_back(make_int("noc.hop_latency", "cycles per hop", FIELD(noc.hop_latency)));
    e.push_back(make_int("noc.flit_bits", "flit width (bits)", FIELD(noc.flit_bits)));
    e.push_back(make_double("noc.clock_hz", "clock (Hz)", FIELD(noc.clock_hz)));
    e.push_back(make_double("noc.wireless_rate", "wireless data rate (bit/s)", FIELD(noc.wireless_rate_bps)));
    e.push_back(make_i64("noc.token_max_hold", "cycles a WI may keep the token", FIELD(noc.token_max_hold)));
    e.push_back(make_i64("noc.report_interval", "utilisation report period (cycles, 0 = off)",
                         FIELD(noc.report_interval)));
    e.push_back(make_int("noc.scheduler_core", "core running the DTM scheduler", FIELD(noc.scheduler_core)));
    e.push_back(make_i64("noc.watchdog", "stall cycles before the deadlock flag", FIELD(noc.watchdog_cycles)));
    e.push_back(make_i64("noc.migration_pause", "cycles a migrating task is suspended", FIELD(noc.migration_pause)));

    e.push_back(make_i64("routing.cadence", "cycles between DV advertisement rounds", FIELD(routing.cadence_cycles)));
    e.push_back(make_i64("routing.switchover_delay", "cycles from trigger to table switchover",
                         FIELD(routing.switchover_delay)));
    e.push_back(make_i64("routing.penalty", "cost added to hot channels", FIELD(routing.penalty)));
    e.push_back(make_i64("routing.wireless_cost", "base cost of a wireless hop", FIELD(routing.wireless_cost)));

    e.push_back({"traffic.pattern", "uniform | hotspot | transpose | trace",
                 [](ExperimentConfig& c, const std::string&, const std::string& v) {
                   c.traffic.pattern = traffic_pattern_from_string(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.traffic.pattern)); }});
    e.push_back(make_double("traffic.injection_rate", "packets per cycle per task", FIELD(traffic.injection_rate)));
    e.push_back(make_int("traffic.packet_flits", "flits per packet", FIELD(traffic.packet_flits)));
    e.push_back(make_list("traffic.hotspot_targets", "hotspot destination tasks (default: workload.hot_tasks)",
                          FIELD(traffic.hotspot_targets)));
    e.push_back(make_double("traffic.hotspot_bias", "probability a packet targets a hotspot", FIELD(traffic.hotspot_bias)));
    e.push_back(make_path("traffic.trace", "trace CSV (cycle,src,dst,flits)", FIELD(traffic.trace_path)));

    e.push_back(make_list("workload.hot_tasks", "compute-heavy tasks", FIELD(workload.hot_tasks)));
    e.push_back(make_double("workload.hot_load", "busy fraction of hot tasks", FIELD(workload.hot_load)));
    e.push_back(make_double("workload.base_load", "busy fraction of other tasks", FIELD(workload.base_load)));
    e.push_back(make_bool("workload.random_mapping", "random initial task placement", FIELD(workload.random_mapping)));

    e.push_back(make_bool("dtm.enabled", "run the thermal manager", FIELD(dtm_enabled)));
    e.push_back(make_double("dtm.t_th", "threshold temperature (C)", FIELD(dtm.threshold_c)));
    e.push_back({"dtm.variant", "combined | reroute-only | off",
                 [](ExperimentConfig& c, const std::string&, const std::string& v) {
                   c.dtm.variant = dtm_variant_from_string(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.dtm.variant)); }});
    e.push_back(make_i64("dtm.window", "prediction window and decision interval (cycles)", FIELD(interval_cycles)));
    e.push_back(make_int("dtm.max_hot_cores", "hot cores considered per reallocation", FIELD(dtm.max_hot_cores)));

    e.push_back({"predictor.kind", "quantized | float | oracle",
                 [](ExperimentConfig& c, const std::string&, const std::string& v) {
                   c.predictor = predictor_kind_from_string(trim(v));
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.predictor)); }});
    e.push_back(make_path("predictor.model", "trained model file", FIELD(model_path)));

    e.push_back(make_i64("experiment.duration", "cycles simulated after warm-up", FIELD(duration_cycles)));
    e.push_back(make_double("experiment.warmup_peak", "peak temperature after warm-up (C)", FIELD(warmup_peak_c)));
    e.push_back({"experiment.seed", "root seed",
                 [](ExperimentConfig& c, const std::string& k, const std::string& v) {
                   c.seed = parse_number<std::uint64_t>(k, v, "a non-negative integer");
                 },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }});
    e.push_back(make_path("experiment.output_dir", "output directory", FIELD(output_dir)));
    e.push_back(make_bool("experiment.record_series", "write per-component temperatures", FIELD(record_series)));

    e.push_back(make_int("training.scenarios", "utilisation scenarios in the dataset", FIELD(training.scenarios)));
    e.push_back(make_int("training.steps", "thermal steps per scenario", FIELD(training.steps)));
    e.push_back(make_path("training.dataset", "dataset file read by train", FIELD(training.dataset)));
    e.push_back(make_double("training.learning_rate", "SGD learning rate", FIELD(training.hyper.learning_rate)));
    e.push_back(make_double("training.momentum", "SGD momentum", FIELD(training.hyper.momentum)));
    e.push_back(make_int("training.epochs", "training epochs", FIELD(training.hyper.epochs)));
    e.push_back(make_int("training.batch", "minibatch size", FIELD(training.hyper.batch)));
    e.push_back(make_double("training.init_scale", "initial weight scale", FIELD(training.hyper.init_scale)));
    e.push_back(make_int("training.samples_per_scenario", "horizons drawn per scenario per epoch",
                         FIELD(training.hyper.samples_per_scenario)));
    e.push_back(make_double("training.short_horizon_share", "share of log-uniform horizon draws",
                            FIELD(training.hyper.short_horizon_share)));
    e.push_back(make_double("training.validation_fraction", "held-out scenario share",
                            FIELD(training.hyper.validation_fraction)));
    e.push_back(make_int("training.validate_every", "epochs between validation passes",
                         FIELD(training.hyper.validate_every)));
    e.push_back(make_double("training.target_scale", "target divisor during optimisation",
                            FIELD(training.hyper.target_scale)));

    e.push_back(make_int("quant.weight_bits", "weight width", FIELD(training.quant.weight_bits)));
    e.push_back(make_int("quant.frac_bits", "fractional weight bits", FIELD(training.quant.frac_bits)));
    e.push_back(make_int("quant.accumulator_bits", "accumulator width", FIELD(training.quant.accumulator_bits)));
    e.push_back(make_int("quant.mac_units", "MAC units", FIELD(training.quant.mac_units)));
    e.push_back(make_int("quant.pipeline_overhead", "fixed pipeline cycles per inference",
                         FIELD(training.quant.pipeline_overhead_cycles)));
    e.push_back(make_int("quant.sigmoid_entries", "sigmoid LUT entries", FIELD(training.quant.sigmoid_entries)));
    e.push_back(make_double("quant.sigmoid_range", "sigmoid LUT input range", FIELD(training.quant.sigmoid_range)));
    e.push_back(make_int("quant.threshold_entries", "threshold LUT entries", FIELD(training.quant.threshold_entries)));
    e.push_back(make_int("quant.threshold_base", "first threshold LUT entry (C)", FIELD(training.quant.threshold_base_c)));
    return e;
  }();
  return entries;
}

#undef FIELD

const Entry& find_entry(const std::string& key) {
  for (const auto& e : registry()) {
    if (key == e.name) return e;
  }
  throw ConfigError(fmt::format("unknown config key '{}'", key));
}

}  // namespace

std::vector<ConfigKeyInfo> config_keys() {
  std::vector<ConfigKeyInfo> out;
  for (const auto& e : registry()) out.push_back({e.name, e.description});
  return out;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_entry(key).set(cfg, key, value);
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) { return find_entry(key).get(cfg); }

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
  set_config_value(cfg, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

namespace {

// read_ini only knows whole-line comments; drop trailing ones that follow
// whitespace.
std::string strip_inline_comments(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  std::string line;
  while (std::getline(in, line)) {
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.erase(i);
        break;
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(strip_inline_comments(text));
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("config line {}: {}", e.line(), e.message()));
  }
  ExperimentConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError(fmt::format("config key '{}' must sit inside a [section]", section));
    }
    for (const auto& [key, value] : body) {
      set_config_value(cfg, section + "." + key, value.get_value<std::string>());
    }
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

ExperimentConfig parse_config(const std::optional<std::filesystem::path>& path,
                              const std::vector<std::string>& overrides) {
  if (!path) return parse_config_text("", overrides);
  std::ifstream is(*path);
  if (!is) throw ConfigError(fmt::format("cannot open config file {}", path->string()));
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

std::string effective_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& e : registry()) {
    const std::string name = e.name;
    const auto dot = name.find('.');
    const std::string sec = name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) out += '\n';
      out += fmt::format("[{}]\n", sec);
      section = sec;
    }
    out += fmt::format("{} = {}\n", name.substr(dot + 1), e.get(cfg));
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) { return fmt::format("{:016x}", fnv1a(effective_config(cfg))); }

}  // namespace winoc
