#include <algorithm>
#include <vector>

#include <gtest/gtest.h>

#include "winoc/errors.hpp"
#include "winoc/experiment.hpp"

using namespace winoc;

namespace {

ExperimentConfig small(DtmVariant v, std::int64_t duration = 500'000) {
  ExperimentConfig c;
  c.topology.grid_w = 4;
  c.topology.grid_h = 4;
  c.topology.num_wis = 2;
  c.workload.hot_tasks = {5, 10};
  c.predictor = PredictorKind::Oracle;
  c.dtm_enabled = v != DtmVariant::Off;
  c.dtm.variant = v == DtmVariant::Off ? DtmVariant::Combined : v;
  c.duration_cycles = duration;
  c.traffic.injection_rate = 5e-4;
  return c;
}

}  // namespace

TEST(Experiment, ZeroDurationIsWarmupOnly) {
  const auto r = run_experiment(small(DtmVariant::Combined, 0));
  ASSERT_EQ(r.peak_c.size(), 1u);
  EXPECT_NEAR(r.peak_c[0], 60.0, 0.1);
  EXPECT_EQ(r.triggers(), 0);
  EXPECT_EQ(r.duration(), 0);
  EXPECT_TRUE(r.events.empty());
}

TEST(Experiment, StepGrid) {
  const auto r = run_experiment(small(DtmVariant::Off, 250'000));
  ASSERT_EQ(r.step_cycle.size(), 11u);
  for (std::size_t i = 0; i < r.step_cycle.size(); ++i) EXPECT_EQ(r.step_cycle[i], static_cast<std::int64_t>(i) * 25'000);
  EXPECT_EQ(r.peak_c.size(), r.step_cycle.size());
  EXPECT_EQ(r.step_decision.size(), r.step_cycle.size());
}

TEST(Experiment, Deterministic) {
  const auto cfg = small(DtmVariant::Combined);
  const auto a = run_experiment(cfg);
  const auto b = run_experiment(cfg);
  EXPECT_EQ(a.peak_c, b.peak_c);
  EXPECT_EQ(a.final_state.temps, b.final_state.temps);
  ASSERT_EQ(a.events.size(), b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    EXPECT_EQ(a.events[i].cycle, b.events[i].cycle);
    EXPECT_EQ(a.events[i].kind, b.events[i].kind);
    EXPECT_EQ(a.events[i].applied_cycle, b.events[i].applied_cycle);
  }
  EXPECT_EQ(a.noc.flits_delivered, b.noc.flits_delivered);
}

TEST(Experiment, WarmupIndependentOfSeed) {
  auto cfg = small(DtmVariant::Off, 0);
  const auto a = run_experiment(cfg);
  cfg.seed = 99;
  const auto b = run_experiment(cfg);
  EXPECT_EQ(a.initial_state.temps, b.initial_state.temps);
}

TEST(Experiment, OffTrajectoryReplaysThermalModel) {
  auto cfg = small(DtmVariant::Off);
  cfg.record_series = true;
  const auto r = run_experiment(cfg);
  const auto topo = build_topology(cfg.topology);
  const auto model = RcThermalModel::for_topology(topo, cfg.thermal);
  ASSERT_EQ(r.step_utilization.size() + 1, r.component_temps.size());
  ThermalState s = r.initial_state;
  EXPECT_EQ(s.temps, r.component_temps[0]);
  for (std::size_t i = 0; i < r.step_utilization.size(); ++i) {
    s = model.step(s, power_from_utilization(r.step_utilization[i], topo, cfg.power));
    for (std::size_t c = 0; c < s.temps.size(); ++c) ASSERT_NEAR(s.temps[c], r.component_temps[i + 1][c], 1e-9);
    EXPECT_NEAR(*std::max_element(s.temps.begin(), s.temps.end()), r.peak_c[i + 1], 1e-9);
  }
  EXPECT_EQ(r.triggers(), 0);
}

TEST(Experiment, EventsAreConsistent) {
  auto cfg = small(DtmVariant::Combined, 1'000'000);
  cfg.dtm.threshold_c = 58.0;  // below the warm-up peak so the DTM must act
  const auto r = run_experiment(cfg);
  EXPECT_GT(r.triggers(), 0);
  int acted = 0;
  for (const auto& e : r.events) {
    EXPECT_EQ(e.cycle % cfg.interval_cycles, 0);
    if (e.kind == DecisionKind::None) continue;
    ++acted;
    // A decision at the last boundary is still in flight when the run ends.
    if (e.cycle < cfg.duration_cycles) {
      EXPECT_GE(e.applied_cycle, e.cycle);
    }
    EXPECT_GT(e.control_flits, 0);
    if (e.kind == DecisionKind::Reroute) {
      EXPECT_EQ(e.control_flits, 17);
      EXPECT_GT(e.flagged, 0);
    } else {
      EXPECT_EQ(e.control_flits, e.migrations);
    }
  }
  EXPECT_EQ(acted, r.triggers());
  const auto steps_with_decision =
      std::count_if(r.step_decision.begin(), r.step_decision.end(), [](DecisionKind k) { return k != DecisionKind::None; });
  EXPECT_EQ(steps_with_decision, r.triggers());
  EXPECT_EQ(static_cast<std::int64_t>(r.control.size()), cfg.duration_cycles / cfg.interval_cycles);
}

TEST(Experiment, OffNeverBroadcasts) {
  const auto r = run_experiment(small(DtmVariant::Off));
  for (const auto& c : r.control) EXPECT_EQ(c.flits, 0);
  EXPECT_EQ(r.noc.wireless_control_flits, 0);
}

TEST(Experiment, ValidationNamesKey) {
  auto cfg = small(DtmVariant::Off);
  cfg.duration_cycles = 30'000;
  try {
    cfg.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("duration"), std::string::npos);
  }
  cfg = small(DtmVariant::Off);
  cfg.workload.hot_tasks = {16};
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Experiment, MissingModelFileReported) {
  auto cfg = small(DtmVariant::Combined);
  cfg.predictor = PredictorKind::Quantized;
  cfg.model_path = "/nonexistent/model.bin";
  EXPECT_THROW(run_experiment(cfg), ConfigError);
}

TEST(Experiment, CompareRunsEachVariant) {
  const auto cmp = compare({{"off", small(DtmVariant::Off, 250'000)}, {"on", small(DtmVariant::Combined, 250'000)}}, 2);
  ASSERT_EQ(cmp.reports.size(), 2u);
  EXPECT_EQ(cmp.reports[0].label, "off");
  EXPECT_EQ(cmp.reports[1].variant, DtmVariant::Combined);
  EXPECT_EQ(cmp.reports[0].step_cycle, cmp.reports[1].step_cycle);
  EXPECT_THROW(compare({{"a", small(DtmVariant::Off, 250'000)}, {"b", small(DtmVariant::Off, 500'000)}}), ConfigError);
}
