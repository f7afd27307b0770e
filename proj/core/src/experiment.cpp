#include "winoc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include <fmt/format.h>

#include "winoc/errors.hpp"
#include "winoc/model_io.hpp"
#include "winoc/rng.hpp"

namespace winoc {

const char* to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::Quantized: return "quantized";
    case PredictorKind::Float: return "float";
    case PredictorKind::Oracle: return "oracle";
  }
  return "?";
}

PredictorKind predictor_kind_from_string(const std::string& s) {
  if (s == "quantized") return PredictorKind::Quantized;
  if (s == "float") return PredictorKind::Float;
  if (s == "oracle") return PredictorKind::Oracle;
  throw ConfigError(fmt::format("predictor.kind must be one of quantized|float|oracle (got {})", s));
}

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(topology.grid_w >= 2, fmt::format("topology.grid_w must satisfy grid_w >= 2 (got {})", topology.grid_w));
  require(topology.grid_h >= 2, fmt::format("topology.grid_h must satisfy grid_h >= 2 (got {})", topology.grid_h));
  const int n = topology.grid_w * topology.grid_h;
  require(topology.num_wis >= 0 && topology.num_wis <= n,
          fmt::format("topology.num_wis must satisfy 0 <= num_wis <= {} (got {})", n, topology.num_wis));
  require(topology.die_mm > 0.0, "topology.die_mm must satisfy die_mm > 0");
  require(thermal.cycles_per_step >= 1, "thermal.cycles_per_step must satisfy cycles_per_step >= 1");
  require(thermal.dt_s > 0.0, "thermal.dt must satisfy dt > 0");
  require(interval_cycles >= thermal.cycles_per_step && interval_cycles % thermal.cycles_per_step == 0,
          fmt::format("dtm.window must be a positive multiple of thermal.cycles_per_step ({}) (got {})",
                      thermal.cycles_per_step, interval_cycles));
  require(duration_cycles == 0 || (duration_cycles >= interval_cycles && duration_cycles % thermal.cycles_per_step == 0),
          fmt::format("experiment.duration must be 0 or a multiple of {} that is >= dtm.window (got {})",
                      thermal.cycles_per_step, duration_cycles));
  require(warmup_peak_c > thermal.t_ambient,
          fmt::format("experiment.warmup_peak must exceed thermal.ambient ({})", thermal.t_ambient));
  require(workload.hot_load >= 0.0 && workload.hot_load <= 1.0, "workload.hot_load must satisfy 0 <= hot_load <= 1");
  require(workload.base_load >= 0.0 && workload.base_load <= 1.0,
          "workload.base_load must satisfy 0 <= base_load <= 1");
  for (int t : workload.hot_tasks) {
    require(t >= 0 && t < n, fmt::format("workload.hot_tasks entry {} must satisfy 0 <= task < {}", t, n));
  }
  require(dtm.max_hot_cores >= 1, "dtm.max_hot_cores must satisfy max_hot_cores >= 1");
  if (dtm_enabled && dtm.variant != DtmVariant::Off) {
    if (predictor == PredictorKind::Quantized) {
      const int lo = training.quant.threshold_base_c;
      const int hi = lo + training.quant.threshold_entries - 1;
      require(dtm.threshold_c >= lo && dtm.threshold_c <= hi,
              fmt::format("dtm.t_th must satisfy {} <= t_th <= {} for the quantized predictor (got {})", lo, hi,
                          dtm.threshold_c));
    }
  }
  require(noc.data_vcs >= 2, fmt::format("noc.data_vcs must satisfy data_vcs >= 2 (got {})", noc.data_vcs));
  require(noc.vc_depth >= 1, fmt::format("noc.vc_depth must satisfy vc_depth >= 1 (got {})", noc.vc_depth));
  require(noc.wireless_vc_depth >= 1, "noc.wireless_vc_depth must satisfy wireless_vc_depth >= 1");
  require(noc.hop_latency >= 1, "noc.hop_latency must satisfy hop_latency >= 1");
  require(noc.flit_bits >= 1, "noc.flit_bits must satisfy flit_bits >= 1");
  require(noc.clock_hz > 0.0 && noc.wireless_rate_bps > 0.0, "noc.clock_hz and noc.wireless_rate must be positive");
  require(noc.token_max_hold >= 1, "noc.token_max_hold must satisfy token_max_hold >= 1");
  require(noc.scheduler_core >= 0 && noc.scheduler_core < n,
          fmt::format("noc.scheduler_core must satisfy 0 <= scheduler_core < {}", n));
  require(noc.report_interval >= 0, "noc.report_interval must satisfy report_interval >= 0");
  require(noc.watchdog_cycles >= 1, "noc.watchdog must satisfy watchdog >= 1");
  require(noc.migration_pause >= 0, "noc.migration_pause must satisfy migration_pause >= 0");
  require(routing.cadence_cycles >= 1, "routing.cadence must satisfy cadence >= 1");
  require(routing.switchover_delay >= 0, "routing.switchover_delay must satisfy switchover_delay >= 0");
  require(routing.penalty >= 0, "routing.penalty must satisfy penalty >= 0");
  require(routing.wireless_cost >= 1, "routing.wireless_cost must satisfy wireless_cost >= 1");
  require(traffic.injection_rate >= 0.0 && traffic.injection_rate <= 1.0,
          "traffic.injection_rate must satisfy 0 <= injection_rate <= 1");
  require(traffic.packet_flits >= 1, "traffic.packet_flits must satisfy packet_flits >= 1");
  require(traffic.hotspot_bias >= 0.0 && traffic.hotspot_bias <= 1.0,
          "traffic.hotspot_bias must satisfy 0 <= hotspot_bias <= 1");
  for (int t : traffic.hotspot_targets) {
    require(t >= 0 && t < n, fmt::format("traffic.hotspot_targets entry {} must satisfy 0 <= task < {}", t, n));
  }
  require(training.scenarios >= 2, "training.scenarios must satisfy scenarios >= 2");
  require(training.steps >= 1, "training.steps must satisfy steps >= 1");
  require(training.hyper.learning_rate > 0.0, "training.learning_rate must satisfy learning_rate > 0");
  require(training.hyper.epochs >= 0, "training.epochs must satisfy epochs >= 0");
  require(training.hyper.batch >= 1, "training.batch must satisfy batch >= 1");
  require(training.hyper.validation_fraction > 0.0 && training.hyper.validation_fraction < 1.0,
          "training.validation_fraction must satisfy 0 < validation_fraction < 1");
  // Rejects thermal constants the explicit integrator cannot step stably.
  RcThermalModel::for_topology(build_topology(topology), thermal);
}

void ExperimentConfig::check_inputs() const {
  if (dtm_enabled && dtm.variant != DtmVariant::Off && predictor != PredictorKind::Oracle) {
    require(!model_path.empty(), "predictor.model must name a trained model file when dtm is enabled");
    require(std::filesystem::exists(model_path),
            fmt::format("predictor.model file {} does not exist", model_path.string()));
  }
  if (traffic.pattern == TrafficPattern::Trace) {
    require(std::filesystem::exists(traffic.trace_path),
            fmt::format("traffic.trace file {} does not exist", traffic.trace_path.string()));
  }
}

Topology build_topology(const TopologyConfig& cfg) {
  auto mesh = Topology::build_mesh(cfg.grid_w, cfg.grid_h, {cfg.die_mm, cfg.die_mm});
  return cfg.num_wis > 0 ? place_wireless_overlay(mesh, cfg.num_wis) : mesh;
}

int RunReport::triggers() const {
  return static_cast<int>(std::count_if(events.begin(), events.end(),
                                        [](const DtmEvent& e) { return e.kind != DecisionKind::None; }));
}

double RunReport::max_peak() const {
  return peak_c.empty() ? 0.0 : *std::max_element(peak_c.begin(), peak_c.end());
}

namespace {

class OracleForecaster final : public Forecaster {
 public:
  OracleForecaster(const RcThermalModel& model, const Topology& topo, const PowerConstants& power)
      : model_(model), classes_(component_classes(topo)), power_(power) {}

  std::vector<double> predict(const UtilizationVector& u, const std::vector<double>& t0, int steps) override {
    const auto p = power_from_utilization(u, classes_, power_);
    return model_.run(ThermalState{t0, model_.t_ambient()}, p, steps).temps;
  }

 private:
  const RcThermalModel& model_;
  std::vector<ComponentKind> classes_;
  PowerConstants power_;
};

class FloatForecaster final : public Forecaster {
 public:
  explicit FloatForecaster(AnnModel model) : model_(std::move(model)) {}

  std::vector<double> predict(const UtilizationVector& u, const std::vector<double>& t0, int steps) override {
    auto d = predict_delta(model_, u, steps);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += t0[i];
    return d;
  }

 private:
  AnnModel model_;
};

class QuantizedForecaster final : public Forecaster {
 public:
  QuantizedForecaster(QuantizedModel model, int t_th_c) : model_(std::move(model)), t_th_(t_th_c) {}

  std::vector<double> predict(const UtilizationVector& u, const std::vector<double>& t0, int steps) override {
    return quantized_predict(model_, u, steps, ThermalState{t0, 0.0}, t_th_).temps;
  }

 private:
  QuantizedModel model_;
  int t_th_;
};

}  // namespace

std::unique_ptr<Forecaster> make_oracle_forecaster(const RcThermalModel& model, const Topology& topo,
                                                   const PowerConstants& power) {
  return std::make_unique<OracleForecaster>(model, topo, power);
}

std::unique_ptr<Forecaster> make_float_forecaster(AnnModel model) {
  return std::make_unique<FloatForecaster>(std::move(model));
}

std::unique_ptr<Forecaster> make_quantized_forecaster(QuantizedModel model, int t_th_c) {
  return std::make_unique<QuantizedForecaster>(std::move(model), t_th_c);
}

std::unique_ptr<Forecaster> make_forecaster(const ExperimentConfig& cfg, const Topology& topo,
                                            const RcThermalModel& model) {
  if (cfg.predictor == PredictorKind::Oracle) return make_oracle_forecaster(model, topo, cfg.power);
  auto file = load_model(cfg.model_path);
  if (file.model.arch().total_outputs() != topo.num_components()) {
    throw ModelError(fmt::format("model {} predicts {} components but the topology has {}", cfg.model_path.string(),
                                 file.model.arch().total_outputs(), topo.num_components()));
  }
  if (cfg.predictor == PredictorKind::Float) return make_float_forecaster(std::move(file.model));
  QuantizedModel qm = file.quantized ? std::move(*file.quantized) : QuantizedModel(file.model, cfg.training.quant);
  return make_quantized_forecaster(std::move(qm), static_cast<int>(std::lround(cfg.dtm.threshold_c)));
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  cfg.check_inputs();
  const bool active = cfg.effective_variant() != DtmVariant::Off;
  if (!active) return run_experiment(cfg, nullptr);
  const Topology topo = build_topology(cfg.topology);
  const auto model = RcThermalModel::for_topology(topo, cfg.thermal);
  auto forecaster = make_forecaster(cfg, topo, model);
  return run_experiment(cfg, forecaster.get());
}

RunReport run_experiment(const ExperimentConfig& cfg, Forecaster* forecaster) {
  cfg.validate();
  if (cfg.traffic.pattern == TrafficPattern::Trace) cfg.check_inputs();
  const Topology topo = build_topology(cfg.topology);
  const auto model = RcThermalModel::for_topology(topo, cfg.thermal);
  const auto classes = component_classes(topo);
  const int n = topo.num_cores();
  const std::int64_t cps = cfg.thermal.cycles_per_step;
  const DtmVariant variant = cfg.effective_variant();
  if (variant != DtmVariant::Off && forecaster == nullptr) throw ConfigError("dtm needs a forecaster");

  DtmConfig dtm = cfg.dtm;
  dtm.variant = variant;
  dtm.window_steps = static_cast<int>(cfg.interval_cycles / cps);

  RunReport report;
  report.cycles_per_step = cps;
  report.interval_cycles = cfg.interval_cycles;
  report.clock_hz = cfg.noc.clock_hz;
  report.t_th = cfg.dtm.threshold_c;
  report.variant = variant;

  ThermalState state = warmup(model, uniform_reference_power(topo, cfg.power), cfg.warmup_peak_c);
  report.initial_state = state;
  auto record = [&](std::int64_t cycle, DecisionKind d) {
    report.step_cycle.push_back(cycle);
    report.peak_c.push_back(state.peak());
    report.step_decision.push_back(d);
    if (cfg.record_series) report.component_temps.push_back(state.temps);
  };
  record(0, DecisionKind::None);

  Network net(topo, cfg.noc, cfg.routing);
  TaskMap tasks(n);
  if (cfg.workload.random_mapping) {
    auto rng = make_rng(cfg.seed, "mapping");
    tasks = TaskMap::random(n, rng);
  }
  std::vector<double> loads(n, cfg.workload.base_load);
  for (int t : cfg.workload.hot_tasks) loads[t] = cfg.workload.hot_load;
  net.set_tasks(tasks, loads);
  TrafficSpec traffic = cfg.traffic;
  if (traffic.pattern == TrafficPattern::Hotspot && traffic.hotspot_targets.empty()) {
    traffic.hotspot_targets = cfg.workload.hot_tasks;
  }
  net.set_traffic(std::make_unique<TrafficGenerator>(traffic, topo.grid_w(), topo.grid_h(),
                                                     derive_seed(cfg.seed, "traffic")));

  const std::int64_t steps = cfg.duration_cycles / cps;
  const std::int64_t steps_per_interval = cfg.interval_cycles / cps;
  auto step_snap = net.snapshot();
  auto interval_snap = step_snap;
  std::int64_t control_flits_mark = 0;
  std::int64_t control_cycles_mark = 0;

  for (std::int64_t k = 1; k <= steps; ++k) {
    const std::int64_t now = k * cps;
    net.run_until(now);
    const auto snap = net.snapshot();
    const auto u = net.utilization_between(step_snap, snap);
    step_snap = snap;
    state = model.step(state, power_from_utilization(u, classes, cfg.power));
    if (cfg.record_series) report.step_utilization.push_back(u);

    DecisionKind decided = DecisionKind::None;
    if (k % steps_per_interval == 0) {
      const auto& st = net.stats();
      report.control.push_back({now - cfg.interval_cycles, st.wireless_control_flits - control_flits_mark,
                                st.control_wireless_cycles - control_cycles_mark});
      control_flits_mark = st.wireless_control_flits;
      control_cycles_mark = st.control_wireless_cycles;

      if (variant != DtmVariant::Off) {
        DtmInputs in;
        in.utilization = net.utilization_between(interval_snap, snap);
        in.temperatures = state.temps;
        in.tasks = net.tasks();
        in.task_power.resize(n);
        for (int t = 0; t < n; ++t) {
          const double uc = in.utilization[topo.core_component(in.tasks.core_of(t))];
          in.task_power[t] = cfg.power.core.leak_w + cfg.power.core.peak_dyn_w * uc;
        }
        in.cycle = now;
        TemperaturePredictor predict = [&](const UtilizationVector& uu, const std::vector<double>& t0, int h) {
          return forecaster->predict(uu, t0, h);
        };
        auto outcome = sliding_window_decide(topo, predict, in, dtm);
        decided = outcome.decision.kind;
        if (decided != DecisionKind::None) {
          const auto flits = encode_control(outcome.decision, now);
          DtmEvent ev;
          ev.cycle = now;
          ev.kind = decided;
          ev.flagged = outcome.decision.status.count();
          ev.migrations = static_cast<int>(outcome.decision.migrations.size());
          ev.control_flits = static_cast<int>(flits.size());
          ev.peak_c = state.peak();
          ev.peak_predicted_c = outcome.peak_predicted;
          ev.peeked = outcome.peeked;
          const std::size_t index = report.events.size();
          report.events.push_back(ev);
          if (!flits.empty()) {
            const int handle = net.start_broadcast(pack_all(flits));
            net.on_broadcast_applied(handle, [&report, &net, &topo, index, d = std::move(outcome.decision)](
                                                 std::int64_t cycle) {
              report.events[index].applied_cycle = cycle;
              if (d.kind == DecisionKind::Reallocate) {
                net.apply_migrations(d.migrations);
              } else {
                net.routing().trigger_reroute(HotComponents::from_status(topo, d.status), cycle);
              }
            });
          } else {
            report.events[index].applied_cycle = now;
          }
        }
      }
      interval_snap = snap;
    }
    record(now, decided);
  }

  report.final_state = state;
  report.noc = net.stats();
  report.latency = net.latency_histogram();
  if (net.cycle() > 0) {
    report.throughput_flits_per_cycle =
        static_cast<double>(report.noc.flits_delivered) / static_cast<double>(net.cycle());
  }
  return report;
}

Comparison compare(const std::vector<std::pair<std::string, ExperimentConfig>>& variants, int jobs) {
  if (variants.empty()) throw ConfigError("compare needs at least one variant");
  const auto& base = variants.front().second;
  for (const auto& [label, cfg] : variants) {
    if (cfg.duration_cycles != base.duration_cycles || cfg.thermal.cycles_per_step != base.thermal.cycles_per_step) {
      throw ConfigError(fmt::format("variant {} has a different duration or thermal step", label));
    }
  }
  Comparison out;
  out.reports.resize(variants.size());
  jobs = std::max(1, jobs);
  std::size_t next = 0;
  while (next < variants.size()) {
    std::vector<std::future<RunReport>> batch;
    const std::size_t first = next;
    for (; next < variants.size() && next - first < static_cast<std::size_t>(jobs); ++next) {
      batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                 [&cfg = variants[next].second] { return run_experiment(cfg); }));
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out.reports[first + i] = batch[i].get();
      out.reports[first + i].label = variants[first + i].first;
    }
  }
  return out;
}

}  // namespace winoc
