#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "winoc/dtm.hpp"
#include "winoc/errors.hpp"
#include "winoc/noc.hpp"

using namespace winoc;

namespace {

const Topology& mesh() {
  static const Topology t = Topology::build_mesh(8, 8);
  return t;
}

DtmInputs inputs(double temp = 55.0) {
  DtmInputs in;
  in.utilization.values.assign(240, 0.0);
  in.temperatures.assign(240, temp);
  in.tasks = TaskMap(64);
  in.task_power.assign(64, 0.5);
  in.cycle = 100'000;
  return in;
}

// `window` for horizons inside the first window, `later` beyond it.
TemperaturePredictor fixed(std::vector<double> window, std::vector<double> later) {
  return [window, later](const UtilizationVector&, const std::vector<double>&, int steps) {
    return steps <= 4 ? window : later;
  };
}

std::vector<std::pair<int, int>> sort_and_zip(const TaskMap& tasks, const std::vector<double>& score,
                                              const std::vector<double>& power, std::vector<int> cores) {
  std::vector<int> ts;
  for (int c : cores) ts.push_back(tasks.task_on(c));
  std::stable_sort(ts.begin(), ts.end(), [&](int a, int b) { return power[a] > power[b] || (power[a] == power[b] && a < b); });
  std::stable_sort(cores.begin(), cores.end(),
                   [&](int a, int b) { return score[a] < score[b] || (score[a] == score[b] && a < b); });
  std::vector<std::pair<int, int>> moves;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (tasks.core_of(ts[i]) != cores[i]) moves.emplace_back(ts[i], cores[i]);
  }
  std::sort(moves.begin(), moves.end());
  return moves;
}

}  // namespace

TEST(Dtm, VariantNames) {
  for (auto v : {DtmVariant::Off, DtmVariant::RerouteOnly, DtmVariant::Combined}) {
    EXPECT_EQ(dtm_variant_from_string(to_string(v)), v);
  }
  EXPECT_THROW(dtm_variant_from_string("both"), ConfigError);
}

TEST(Dtm, AllCoolMeansNone) {
  const std::vector<double> t(240, 60.0);
  const auto out = sliding_window_decide(mesh(), fixed(t, t), inputs(), DtmConfig{});
  EXPECT_EQ(out.decision.kind, DecisionKind::None);
  EXPECT_FALSE(out.peeked);
  EXPECT_DOUBLE_EQ(out.peak_predicted, 60.0);
}

TEST(Dtm, ExactlyAtThresholdIsNotHot) {
  const std::vector<double> t(240, 68.0);
  EXPECT_EQ(sliding_window_decide(mesh(), fixed(t, t), inputs(), DtmConfig{}).decision.kind, DecisionKind::None);
}

TEST(Dtm, OffNeverActs) {
  const std::vector<double> t(240, 90.0);
  DtmConfig cfg;
  cfg.variant = DtmVariant::Off;
  EXPECT_EQ(sliding_window_decide(mesh(), fixed(t, t), inputs(), cfg).decision.kind, DecisionKind::None);
}

TEST(Dtm, HotCoreReallocates) {
  std::vector<double> t(240, 60.0);
  t[12] = 69.0;
  auto in = inputs();
  in.task_power[12] = 1.5;
  const auto out = sliding_window_decide(mesh(), fixed(t, t), in, DtmConfig{});
  ASSERT_EQ(out.decision.kind, DecisionKind::Reallocate);
  EXPECT_TRUE(out.decision.status.bits.empty());
  // The hot core pairs with the last of the equally cool cores.
  EXPECT_EQ(out.decision.migrations, (std::vector<std::pair<int, int>>{{12, 63}, {63, 12}}));
}

TEST(Dtm, HotLinkReroutesFlaggingOnlyThatLink) {
  std::vector<double> t(240, 60.0);
  const int link30 = mesh().link_component(30);
  t[link30] = 70.0;
  const auto out = sliding_window_decide(mesh(), fixed(t, t), inputs(), DtmConfig{});
  ASSERT_EQ(out.decision.kind, DecisionKind::Reroute);
  EXPECT_TRUE(out.peeked);
  EXPECT_EQ(out.decision.status.count(), 1);
  EXPECT_TRUE(out.decision.status.bits[link30]);
  EXPECT_TRUE(out.decision.migrations.empty());
}

TEST(Dtm, HotLinkUnderRcOracle) {
  // The RC model itself as predictor: link 30 starts hot and stays above
  // threshold over the window while every core stays cool.
  const auto& topo = mesh();
  const auto model = RcThermalModel::for_topology(topo, ThermalConstants{});
  const PowerConstants power;
  TemperaturePredictor rc = [&](const UtilizationVector& u, const std::vector<double>& t0, int steps) {
    return model.run(ThermalState{t0, model.t_ambient()}, power_from_utilization(u, topo, power), steps).temps;
  };
  auto in = inputs(50.0);
  const int link30 = topo.link_component(30);
  in.temperatures[link30] = 75.0;
  in.utilization[link30] = 1.0;
  const auto out = sliding_window_decide(topo, rc, in, DtmConfig{});
  ASSERT_EQ(out.decision.kind, DecisionKind::Reroute);
  EXPECT_EQ(out.decision.status.count(), 1);
  EXPECT_TRUE(out.decision.status.bits[link30]);
  EXPECT_GT(out.window_max[link30], 68.0);
}

TEST(Dtm, PeekAtNextWindowPrefersReallocation) {
  std::vector<double> now(240, 60.0), later(240, 60.0);
  now[mesh().switch_component(20)] = 70.0;
  later[20] = 68.5;
  const auto out = sliding_window_decide(mesh(), fixed(now, later), inputs(), DtmConfig{});
  EXPECT_TRUE(out.peeked);
  EXPECT_EQ(out.decision.kind, DecisionKind::Reallocate);
}

TEST(Dtm, RerouteOnlyFlagsHotCoreSwitch) {
  std::vector<double> t(240, 60.0);
  t[12] = 69.0;
  DtmConfig cfg;
  cfg.variant = DtmVariant::RerouteOnly;
  const auto out = sliding_window_decide(mesh(), fixed(t, t), inputs(), cfg);
  ASSERT_EQ(out.decision.kind, DecisionKind::Reroute);
  EXPECT_EQ(out.decision.status.count(), 1);
  EXPECT_TRUE(out.decision.status.bits[mesh().switch_component(12)]);
}

TEST(Dtm, NeverBothActions) {
  auto rng = make_rng(21, "dtm-mutex");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(240), b(240);
    for (auto& v : a) v = uniform(rng, 60.0, 68.3);
    for (auto& v : b) v = uniform(rng, 60.0, 68.3);
    const auto out = sliding_window_decide(mesh(), fixed(a, b), inputs(), DtmConfig{});
    if (out.decision.kind == DecisionKind::Reroute) {
      EXPECT_TRUE(out.decision.migrations.empty());
    }
    if (out.decision.kind == DecisionKind::Reallocate) {
      EXPECT_TRUE(out.decision.status.bits.empty());
    }
  }
}

TEST(Ftt, TiesKeepIdentityMap) {
  const TaskMap m(8);
  EXPECT_TRUE(ftt_reallocate(m, std::vector<double>(8, 1.0), std::vector<double>(8, 2.0)).empty());
  // Distinct powers with tied scores: highest-power task takes core 0.
  std::vector<double> p{1, 2, 3, 4, 5, 6, 7, 8};
  const auto a = ftt_reallocate(m, std::vector<double>(8, 1.0), p);
  EXPECT_EQ(a, ftt_reallocate(m, std::vector<double>(8, 1.0), p));
  EXPECT_EQ(a.front(), std::make_pair(0, 7));
}

TEST(Ftt, TwoTaskSwap) {
  const TaskMap m(2);
  const auto moves = ftt_reallocate(m, {3.0, -1.0}, {5.0, 1.0});
  EXPECT_EQ(moves, (std::vector<std::pair<int, int>>{{0, 1}, {1, 0}}));
}

TEST(Ftt, MatchesSortAndZipOracle) {
  auto rng = make_rng(22, "ftt");
  for (int trial = 0; trial < 50; ++trial) {
    const auto tasks = TaskMap::random(64, rng);
    std::vector<double> score(64), power(64);
    for (auto& v : score) v = uniform(rng, -2, 5);
    for (auto& v : power) v = uniform(rng, 0.3, 1.5);
    std::vector<int> all(64);
    std::iota(all.begin(), all.end(), 0);
    EXPECT_EQ(ftt_reallocate(tasks, score, power), sort_and_zip(tasks, score, power, all));
    std::vector<int> subset{3, 9, 17, 40, 41, 63};
    EXPECT_EQ(ftt_reallocate(tasks, score, power, subset), sort_and_zip(tasks, score, power, subset));
  }
}

TEST(Ftt, ResultIsBijection) {
  auto rng = make_rng(23, "ftt-bij");
  auto tasks = TaskMap::random(64, rng);
  std::vector<double> score(64), power(64);
  for (auto& v : score) v = uniform01(rng);
  for (auto& v : power) v = uniform01(rng);
  std::vector<int> next = tasks.assignment();
  for (const auto& [t, c] : ftt_reallocate(tasks, score, power)) next[t] = c;
  const auto m = TaskMap::from_assignment(next);
  EXPECT_TRUE(m.is_bijection());
  // Power rank now follows score rank.
  for (int a = 0; a < 64; ++a) {
    for (int b = 0; b < 64; ++b) {
      if (power[a] > power[b]) {
        EXPECT_LE(score[m.core_of(a)], score[m.core_of(b)]);
      }
    }
  }
}

TEST(Control, PackUnpackFields) {
  ThermalControlMessage m{ControlType::Timestamp, 9, 0xBEEF, 0x3A5};
  const auto w = m.pack();
  EXPECT_EQ(w >> 30, 3u);
  EXPECT_EQ((w >> 26) & 0xF, 9u);
  EXPECT_EQ((w >> 10) & 0xFFFF, 0xBEEFu);
  EXPECT_EQ(w & 0x3FF, 0x3A5u);
  EXPECT_EQ(ThermalControlMessage::unpack(w), m);
}

TEST(Control, NoneIsEmpty) {
  EXPECT_TRUE(encode_control(DtmDecision{}, 1234).empty());
}

TEST(Control, RerouteRoundTrip) {
  auto rng = make_rng(24, "control");
  for (int trial = 0; trial < 1000; ++trial) {
    DtmDecision d;
    d.kind = DecisionKind::Reroute;
    d.status.bits.resize(240);
    for (int i = 0; i < 240; ++i) d.status.bits[i] = uniform01(rng) < 0.1;
    const std::int64_t ts = static_cast<std::int64_t>(uniform_index(rng, 1ULL << 26));
    const auto flits = encode_control(d, ts);
    ASSERT_EQ(flits.size(), 17u);
    const auto back = decode_control(flits, 240);
    EXPECT_EQ(back.decision.kind, DecisionKind::Reroute);
    EXPECT_EQ(back.decision.status.bits, d.status.bits);
    EXPECT_EQ(back.timestamp, ts);
  }
}

TEST(Control, BroadcastCost) {
  DtmDecision d;
  d.kind = DecisionKind::Reroute;
  d.status.bits.assign(240, false);
  const auto n = encode_control(d, 0).size();
  EXPECT_EQ(n * 32, 544u);
  EXPECT_EQ(static_cast<std::int64_t>(n) * serialization_cycles(32, 16e9, 2.5e9), 85);
}

TEST(Control, ReallocRoundTrip) {
  DtmDecision d;
  d.kind = DecisionKind::Reallocate;
  d.migrations = {{3, 60}, {60, 3}, {18, 7}, {7, 18}};
  const auto flits = encode_control(d, 0x12345);
  ASSERT_EQ(flits.size(), 4u);
  const auto back = decode_control(flits, 240);
  EXPECT_EQ(back.decision.kind, DecisionKind::Reallocate);
  EXPECT_EQ(back.decision.migrations, d.migrations);
  EXPECT_EQ(back.timestamp, 0x12345 & 0x3FF);
  d.migrations = {{300, 1}};
  EXPECT_THROW(encode_control(d, 0), ProtocolError);
}

TEST(Control, MalformedInputRejected) {
  DtmDecision d;
  d.kind = DecisionKind::Reroute;
  d.status.bits.assign(240, false);
  auto flits = encode_control(d, 5);
  flits.pop_back();
  EXPECT_THROW(decode_control(flits, 240), ProtocolError);
  flits = encode_control(d, 5);
  std::swap(flits[0], flits[1]);
  EXPECT_THROW(decode_control(flits, 240), ProtocolError);
}

TEST(Apply, ReallocationRemapsEndpoints) {
  const auto trace = std::filesystem::temp_directory_path() / "winoc_dtm_test_trace.csv";
  {
    std::ofstream os(trace);
    os << "100,2,5,4\n10000,2,5,4\n";
  }
  const auto topo = place_wireless_overlay(Topology::build_mesh(4, 4), 2);
  NocConfig cfg;
  cfg.report_interval = 0;
  cfg.migration_pause = 10;
  Network net(topo, cfg);
  net.set_tasks(TaskMap(16), std::vector<double>(16, 0.5));
  TrafficSpec spec;
  spec.pattern = TrafficPattern::Trace;
  spec.trace_path = trace;
  net.set_traffic(std::make_unique<TrafficGenerator>(spec, 4, 4, 3));
  DtmDecision d;
  d.kind = DecisionKind::Reallocate;
  d.migrations = {{2, 9}, {9, 2}};
  net.run_until(1000);
  const int h = net.start_broadcast(pack_all(encode_control(d, 0)));
  std::int64_t applied = -1;
  net.on_broadcast_applied(h, [&](std::int64_t c) {
    applied = c;
    net.apply_migrations(d.migrations);
  });
  std::vector<DeliveryEvent> heads;
  net.set_delivery_hook([&](const DeliveryEvent& e) {
    if (e.seq == 0) heads.push_back(e);
  });
  net.run_until(20'000);
  std::filesystem::remove(trace);
  ASSERT_GT(applied, 1000);
  ASSERT_LT(applied, 10'000);
  EXPECT_EQ(net.tasks().core_of(2), 9);
  EXPECT_EQ(net.tasks().core_of(9), 2);
  ASSERT_EQ(heads.size(), 1u);  // the first packet was delivered before the hook
  EXPECT_EQ(heads[0].src_core, 9);
  EXPECT_EQ(heads[0].dst_core, 5);
}

TEST(Apply, RerouteSwitchesOverSixHundredCyclesLater) {
  const auto topo = place_wireless_overlay(Topology::build_mesh(8, 8), 4);
  NocConfig cfg;
  cfg.report_interval = 0;
  Network net(topo, cfg);
  DtmDecision d;
  d.kind = DecisionKind::Reroute;
  d.status.bits.assign(240, false);
  d.status.bits[topo.link_component(30)] = true;
  const int h = net.start_broadcast(pack_all(encode_control(d, 0)));
  std::int64_t trigger = -1;
  net.on_broadcast_applied(h, [&](std::int64_t c) {
    trigger = c;
    net.routing().trigger_reroute(HotComponents::from_status(topo, d.status), c);
  });
  std::int64_t switched = -1;
  while (net.cycle() < 5000) {
    net.step();
    if (switched < 0 && net.routing().active_epoch() == 1) switched = net.cycle();
  }
  ASSERT_GE(trigger, 0);
  // advance() runs at the start of a step; cycle() has moved on by one.
  EXPECT_EQ(switched - 1, trigger + 600);
}
