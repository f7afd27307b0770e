#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "winoc/ann.hpp"
#include "winoc/dtm.hpp"
#include "winoc/noc.hpp"
#include "winoc/quantized.hpp"
#include "winoc/routing.hpp"
#include "winoc/thermal.hpp"
#include "winoc/traffic.hpp"

namespace winoc {

struct TopologyConfig {
  int grid_w = 8;
  int grid_h = 8;
  int num_wis = 4;
  double die_mm = 20.0;
};

/// Task compute loads: `hot_tasks` run at `hot_load`, the rest at
/// `base_load`. Hot tasks are also the hotspot traffic targets unless the
/// traffic section names its own.
struct WorkloadConfig {
  std::vector<int> hot_tasks{18, 21, 42, 45};
  double hot_load = 0.95;
  double base_load = 0.25;
  bool random_mapping = false;
};

enum class PredictorKind : std::uint8_t { Quantized, Float, Oracle };

const char* to_string(PredictorKind k);
PredictorKind predictor_kind_from_string(const std::string& s);

struct TrainingConfig {
  int scenarios = 250;
  int steps = 3000;
  std::filesystem::path dataset;  // input of `train`
  TrainingHyper hyper;
  QuantConfig quant;
};

struct ExperimentConfig {
  TopologyConfig topology;
  ThermalConstants thermal;
  PowerConstants power;
  NocConfig noc;
  DvConfig routing;
  TrafficSpec traffic;
  WorkloadConfig workload;
  bool dtm_enabled = true;
  DtmConfig dtm;
  std::int64_t interval_cycles = 100'000;
  PredictorKind predictor = PredictorKind::Quantized;
  std::filesystem::path model_path;
  double warmup_peak_c = 60.0;
  std::int64_t duration_cycles = 2'000'000;
  std::uint64_t seed = 1;
  /// Empty: $WINOC_OUT_ROOT (or ./out) plus the subcommand name.
  std::filesystem::path output_dir;
  /// Keep per-step utilisation and component temperatures in the report.
  bool record_series = false;
  TrainingConfig training;

  DtmVariant effective_variant() const { return dtm_enabled ? dtm.variant : DtmVariant::Off; }
  /// Throws ConfigError naming the offending key and its constraint.
  void validate() const;
  /// Throws ConfigError when a referenced file (model, trace) is missing.
  void check_inputs() const;
};

Topology build_topology(const TopologyConfig& cfg);

struct DtmEvent {
  std::int64_t cycle = 0;
  DecisionKind kind = DecisionKind::None;
  int flagged = 0;
  int migrations = 0;
  int control_flits = 0;
  double peak_c = 0.0;
  double peak_predicted_c = 0.0;
  bool peeked = false;
  std::int64_t applied_cycle = -1;  // -1 while the broadcast is in flight
};

struct ControlUsage {
  std::int64_t interval_start = 0;
  std::int64_t flits = 0;
  std::int64_t channel_cycles = 0;
};

struct RunReport {
  std::string label;
  std::int64_t cycles_per_step = 0;
  std::int64_t interval_cycles = 0;
  double clock_hz = 0.0;
  double t_th = 0.0;
  DtmVariant variant = DtmVariant::Off;

  // One entry per thermal step; entry 0 is the warm-up state.
  std::vector<std::int64_t> step_cycle;
  std::vector<double> peak_c;
  std::vector<DecisionKind> step_decision;
  std::vector<std::vector<double>> component_temps;     // record_series only
  std::vector<UtilizationVector> step_utilization;      // record_series only; entry i drives step i + 1

  std::vector<DtmEvent> events;
  std::vector<ControlUsage> control;
  LatencyHistogram latency;
  NocStats noc;
  double throughput_flits_per_cycle = 0.0;
  ThermalState initial_state;
  ThermalState final_state;

  int triggers() const;
  double max_peak() const;
  std::int64_t duration() const { return step_cycle.empty() ? 0 : step_cycle.back(); }
};

/// Temperature forecaster used by the DTM.
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual std::vector<double> predict(const UtilizationVector& u, const std::vector<double>& t0, int steps) = 0;
};

/// Forward integration of the RC model itself (perfect foresight under
/// constant utilisation).
std::unique_ptr<Forecaster> make_oracle_forecaster(const RcThermalModel& model, const Topology& topo,
                                                   const PowerConstants& power);
std::unique_ptr<Forecaster> make_float_forecaster(AnnModel model);
std::unique_ptr<Forecaster> make_quantized_forecaster(QuantizedModel model, int t_th_c);

/// The forecaster a config asks for; loads the model file when needed.
std::unique_ptr<Forecaster> make_forecaster(const ExperimentConfig& cfg, const Topology& topo,
                                            const RcThermalModel& model);

/// Warm-up followed by the co-simulation loop: each thermal step runs the
/// NoC for `cycles_per_step` cycles, converts the measured utilisation to
/// power, and advances the RC model. At every interval boundary the DTM
/// predicts, decides, and broadcasts; decisions take effect once the
/// broadcast has reached every switch.
RunReport run_experiment(const ExperimentConfig& cfg);
/// Same with an explicit forecaster (the config's predictor is ignored).
RunReport run_experiment(const ExperimentConfig& cfg, Forecaster* forecaster);

struct Comparison {
  std::vector<RunReport> reports;
};

/// Runs each labelled variant, on up to `jobs` threads. Variants must share
/// duration and thermal step length.
Comparison compare(const std::vector<std::pair<std::string, ExperimentConfig>>& variants, int jobs = 1);

}  // namespace winoc
