#include "winoc/dtm.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

const char* to_string(DtmVariant v) {
  switch (v) {
    case DtmVariant::Off: return "off";
    case DtmVariant::RerouteOnly: return "reroute-only";
    case DtmVariant::Combined: return "combined";
  }
  return "?";
}

DtmVariant dtm_variant_from_string(const std::string& s) {
  if (s == "off") return DtmVariant::Off;
  if (s == "reroute-only") return DtmVariant::RerouteOnly;
  if (s == "combined") return DtmVariant::Combined;
  throw ConfigError(fmt::format("dtm variant must be one of off|reroute-only|combined (got {})", s));
}

std::vector<std::pair<int, int>> ftt_reallocate(const TaskMap& tasks, const std::vector<double>& core_score,
                                                const std::vector<double>& task_power, std::span<const int> cores) {
  const int n = tasks.size();
  if (static_cast<int>(core_score.size()) != n || static_cast<int>(task_power.size()) != n) {
    throw RangeError("reallocation inputs must have one entry per core and task");
  }
  std::vector<int> by_score(cores.begin(), cores.end());
  std::vector<int> by_power;
  by_power.reserve(by_score.size());
  for (int c : by_score) {
    if (c < 0 || c >= n) throw RangeError(fmt::format("core {} out of range", c));
    by_power.push_back(tasks.task_on(c));
  }
  std::sort(by_score.begin(), by_score.end(), [&](int a, int b) {
    return core_score[a] != core_score[b] ? core_score[a] < core_score[b] : a < b;
  });
  std::sort(by_power.begin(), by_power.end(), [&](int a, int b) {
    return task_power[a] != task_power[b] ? task_power[a] > task_power[b] : a < b;
  });
  std::vector<std::pair<int, int>> moves;
  for (std::size_t i = 0; i < by_power.size(); ++i) {
    if (tasks.core_of(by_power[i]) != by_score[i]) moves.emplace_back(by_power[i], by_score[i]);
  }
  std::sort(moves.begin(), moves.end());
  return moves;
}

std::vector<std::pair<int, int>> ftt_reallocate(const TaskMap& tasks, const std::vector<double>& core_score,
                                                const std::vector<double>& task_power) {
  std::vector<int> all(tasks.size());
  std::iota(all.begin(), all.end(), 0);
  return ftt_reallocate(tasks, core_score, task_power, all);
}

namespace {

std::vector<double> max_over(const TemperaturePredictor& predict, const DtmInputs& in, int from, int to) {
  std::vector<double> best;
  for (int h = from; h <= to; ++h) {
    auto t = predict(in.utilization, in.temperatures, h);
    if (best.empty()) {
      best = std::move(t);
    } else {
      for (std::size_t i = 0; i < best.size(); ++i) best[i] = std::max(best[i], t[i]);
    }
  }
  return best;
}

std::vector<std::pair<int, int>> reallocate_hot(const Topology& topo, const DtmInputs& in,
                                                const std::vector<double>& core_pred, const DtmConfig& cfg) {
  const int n = topo.num_cores();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return core_pred[a] != core_pred[b] ? core_pred[a] > core_pred[b] : a < b;
  });
  int hot = 0;
  while (hot < n && hot < cfg.max_hot_cores && core_pred[order[hot]] > cfg.threshold_c) ++hot;
  const int cool = std::min(hot, n - hot);
  std::vector<int> subset(order.begin(), order.begin() + hot);
  subset.insert(subset.end(), order.end() - cool, order.end());
  return ftt_reallocate(in.tasks, core_pred, in.task_power, subset);
}

}  // namespace

DtmOutcome sliding_window_decide(const Topology& topo, const TemperaturePredictor& predict, const DtmInputs& in,
                                 const DtmConfig& cfg) {
  if (cfg.window_steps < 1) throw ConfigError("dtm window must cover at least one thermal step");
  DtmOutcome out;
  out.decision.decision_cycle = in.cycle;
  if (cfg.variant == DtmVariant::Off) return out;

  out.window_max = max_over(predict, in, 1, cfg.window_steps);
  const int n_comp = topo.num_components();
  if (static_cast<int>(out.window_max.size()) != n_comp) throw RangeError("prediction does not match the topology");
  out.peak_predicted = *std::max_element(out.window_max.begin(), out.window_max.end());

  auto core_pred = [&](const std::vector<double>& t) {
    std::vector<double> c(topo.num_cores());
    for (int i = 0; i < topo.num_cores(); ++i) c[i] = t[topo.core_component(i)];
    return c;
  };
  bool core_hot = false;
  bool fabric_hot = false;
  for (int i = 0; i < n_comp; ++i) {
    if (out.window_max[i] <= cfg.threshold_c) continue;
    (topo.kind_of(i) == ComponentKind::Core ? core_hot : fabric_hot) = true;
  }

  auto reroute = [&](bool include_cores) {
    auto& d = out.decision;
    d.kind = DecisionKind::Reroute;
    d.status.bits.assign(n_comp, false);
    d.status.timestamp = in.cycle;
    for (int i = 0; i < n_comp; ++i) {
      if (out.window_max[i] <= cfg.threshold_c) continue;
      if (topo.kind_of(i) == ComponentKind::Core) {
        if (include_cores) d.status.bits[topo.switch_component(i)] = true;
      } else {
        d.status.bits[i] = true;
      }
    }
  };

  if (cfg.variant == DtmVariant::RerouteOnly) {
    if (core_hot || fabric_hot) reroute(true);
    return out;
  }
  if (core_hot) {
    out.decision.kind = DecisionKind::Reallocate;
    out.decision.migrations = reallocate_hot(topo, in, core_pred(out.window_max), cfg);
    return out;
  }
  if (!fabric_hot) return out;
  out.peeked = true;
  const auto peek = core_pred(max_over(predict, in, cfg.window_steps + 1, 2 * cfg.window_steps));
  if (std::any_of(peek.begin(), peek.end(), [&](double t) { return t > cfg.threshold_c; })) {
    out.decision.kind = DecisionKind::Reallocate;
    out.decision.migrations = reallocate_hot(topo, in, peek, cfg);
    return out;
  }
  reroute(false);
  return out;
}

}  // namespace winoc
