#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "winoc/control_message.hpp"
#include "winoc/thermal.hpp"
#include "winoc/topology.hpp"
#include "winoc/traffic.hpp"

namespace winoc {

enum class DtmVariant : std::uint8_t { Off, RerouteOnly, Combined };

const char* to_string(DtmVariant v);
DtmVariant dtm_variant_from_string(const std::string& s);

struct DtmConfig {
  DtmVariant variant = DtmVariant::Combined;
  double threshold_c = 68.0;
  /// Thermal steps covered by the prediction window; the core peek looks at
  /// the following window.
  int window_steps = 4;
  /// Hot cores considered per reallocation (each paired with a cool core).
  int max_hot_cores = 8;
};

/// Absolute temperatures of every component `steps` thermal steps ahead
/// when utilisation `u` is held, starting from `t0`.
using TemperaturePredictor =
    std::function<std::vector<double>(const UtilizationVector& u, const std::vector<double>& t0, int steps)>;

struct DtmInputs {
  UtilizationVector utilization;
  std::vector<double> temperatures;  // now, per component
  TaskMap tasks;
  std::vector<double> task_power;  // per task, watts
  std::int64_t cycle = 0;
};

struct DtmOutcome {
  DtmDecision decision;
  std::vector<double> window_max;  // predicted per-component maximum over the window
  double peak_predicted = 0.0;
  bool peeked = false;
};

/// Sort-and-zip reallocation restricted to `cores`: the tasks on those cores
/// sorted by power (descending) go to the cores sorted by score (ascending,
/// i.e. coolest first). Ties break toward the lower id. Returns the moves
/// of tasks whose core changes, ordered by task.
std::vector<std::pair<int, int>> ftt_reallocate(const TaskMap& tasks, const std::vector<double>& core_score,
                                                const std::vector<double>& task_power, std::span<const int> cores);
/// Same over every core.
std::vector<std::pair<int, int>> ftt_reallocate(const TaskMap& tasks, const std::vector<double>& core_score,
                                                const std::vector<double>& task_power);

/// One decision at an interval boundary.
///
/// Combined: a core predicted over the threshold within the window triggers
/// reallocation. Otherwise a hot switch or link first peeks at the cores
/// over the next window (reallocating if one turns hot there) and
/// otherwise reroutes around the hot switches and links. RerouteOnly
/// reroutes on any hot component, flagging a hot core's switch. Off never
/// acts.
DtmOutcome sliding_window_decide(const Topology& topo, const TemperaturePredictor& predict, const DtmInputs& in,
                                 const DtmConfig& cfg);

}  // namespace winoc
