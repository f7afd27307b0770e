#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "winoc/errors.hpp"
#include "winoc/noc.hpp"

using namespace winoc;

namespace {

NocConfig quiet() {
  NocConfig c;
  c.report_interval = 0;
  return c;
}

std::unique_ptr<TrafficGenerator> uniform_traffic(const Topology& t, double rate, std::uint64_t seed,
                                                  int flits = 64) {
  TrafficSpec spec;
  spec.pattern = TrafficPattern::UniformRandom;
  spec.injection_rate = rate;
  spec.packet_flits = flits;
  return std::make_unique<TrafficGenerator>(spec, t.grid_w(), t.grid_h(), seed);
}

}  // namespace

TEST(Flit, Kinds) {
  EXPECT_EQ(flit_kind(0, 1), FlitKind::HeadTail);
  EXPECT_EQ(flit_kind(0, 64), FlitKind::Head);
  EXPECT_EQ(flit_kind(1, 64), FlitKind::Body);
  EXPECT_EQ(flit_kind(62, 64), FlitKind::Body);
  EXPECT_EQ(flit_kind(63, 64), FlitKind::Tail);
}

TEST(Noc, EmptyNetworkOnlyAdvancesClock) {
  Network net(Topology::build_mesh(2, 2), quiet());
  for (int i = 0; i < 100; ++i) net.step();
  EXPECT_EQ(net.cycle(), 100);
  EXPECT_TRUE(net.empty());
  EXPECT_EQ(net.stats().flits_injected, 0);
  EXPECT_EQ(net.stats().flits_delivered, 0);
}

TEST(Noc, SinglePacketTiming) {
  // Three cycles per hop for the head, then one flit per cycle.
  for (int flits : {1, 2, 64}) {
    for (int dst : {1, 3}) {
      Network net(Topology::build_mesh(2, 2), quiet());
      std::int64_t first = -1, last = -1;
      net.set_delivery_hook([&](const DeliveryEvent& e) {
        if (first < 0) first = e.cycle;
        last = e.cycle;
      });
      net.inject_packet(0, dst, flits);
      net.run_until(500);
      const int hops = net.topology().hop_distance(0, dst);
      EXPECT_EQ(first, 3 * hops);
      EXPECT_EQ(last, 3 * hops + flits - 1);
    }
  }
  Network net(Topology::build_mesh(2, 2), quiet());
  net.inject_packet(0, 1, 64);
  net.run_until(500);
  EXPECT_DOUBLE_EQ(net.stats().mean_latency(), 66.0);
}

TEST(Noc, RejectsSelfPacket) {
  Network net(Topology::build_mesh(2, 2), quiet());
  EXPECT_THROW(net.inject_packet(1, 1, 4), RangeError);
}

TEST(Noc, ContentionConservesFlits) {
  Network net(Topology::build_mesh(4, 4), quiet());
  net.inject_packet(0, 1, 64);
  net.inject_packet(2, 1, 64);
  net.inject_packet(5, 1, 64);
  std::int64_t peak_in_flight = 0;
  for (int i = 0; i < 2000; ++i) {
    net.step();
    const auto& s = net.stats();
    EXPECT_EQ(s.flits_injected, s.flits_delivered + net.flits_in_network());
    peak_in_flight = std::max(peak_in_flight, net.flits_in_network());
  }
  EXPECT_GT(peak_in_flight, 0);
  EXPECT_EQ(net.stats().flits_delivered, 192);
  EXPECT_EQ(net.stats().packets_delivered, 3);
  EXPECT_EQ(net.stats().order_violations, 0);
}

TEST(Noc, SoakInvariants) {
  const auto topo = place_wireless_overlay(Topology::build_mesh(8, 8), 4);
  Network net(topo, NocConfig{});
  net.set_traffic(uniform_traffic(topo, 1e-3, 17));
  std::map<std::uint32_t, int> next_seq;
  std::int64_t order_errors = 0;
  net.set_delivery_hook([&](const DeliveryEvent& e) {
    auto& n = next_seq[e.packet];
    if (e.seq != n) ++order_errors;
    n = e.seq + 1 == e.flits ? 0 : e.seq + 1;
  });
  net.run_until(30'000);
  EXPECT_GT(net.stats().packets_created, 1000);
  EXPECT_TRUE(net.drain(300'000));
  const auto& s = net.stats();
  EXPECT_EQ(s.packets_created, s.packets_delivered);
  EXPECT_EQ(s.flits_injected, s.flits_delivered + s.wireless_control_flits);
  EXPECT_EQ(order_errors, 0);
  EXPECT_EQ(s.order_violations, 0);
  EXPECT_EQ(s.token_violations, 0);
  EXPECT_LE(s.max_transmitters_per_cycle, 1);
  EXPECT_FALSE(s.deadlock);
  EXPECT_EQ(net.max_vc_overflow(), 0);
  EXPECT_GT(s.wireless_data_flits, 0);
}

TEST(Noc, DeterministicPerSeed) {
  const auto topo = place_wireless_overlay(Topology::build_mesh(4, 4), 2);
  auto trace = [&](std::uint64_t seed) {
    Network net(topo, NocConfig{});
    net.set_traffic(uniform_traffic(topo, 2e-3, seed, 8));
    std::vector<std::int64_t> out;
    net.set_delivery_hook([&](const DeliveryEvent& e) {
      out.push_back(e.cycle);
      out.push_back(e.packet);
      out.push_back(e.seq);
    });
    net.run_until(20'000);
    return out;
  };
  const auto a = trace(5);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, trace(5));
  EXPECT_NE(a, trace(6));
}

TEST(Token, RoundRobinOrder) {
  TokenState t{4, 0, 0, 1000};
  std::vector<int> seq;
  for (int i = 0; i < 8; ++i) {
    seq.push_back(t.holder);
    EXPECT_EQ(t.prev_wi(), (t.holder + 3) % 4);
    t = token_advance(t);
    EXPECT_EQ(t.held_for, 0);
  }
  EXPECT_EQ(seq, (std::vector<int>{0, 1, 2, 3, 0, 1, 2, 3}));
  TokenState one{1, 0, 0, 10};
  for (int i = 0; i < 3; ++i) one = token_advance(one);
  EXPECT_EQ(one.holder, 0);
}

TEST(Token, SerializationCycles) {
  EXPECT_EQ(serialization_cycles(32, 16e9, 2.5e9), 5);
  EXPECT_EQ(serialization_cycles(0, 16e9, 2.5e9), 0);
  EXPECT_EQ(serialization_cycles(9 * 32, 16e9, 2.5e9), 45);
  EXPECT_EQ(serialization_cycles(33, 16e9, 2.5e9), 6);
  EXPECT_THROW(serialization_cycles(32, 0.0, 2.5e9), ConfigError);
}

TEST(Token, WaitBetweenGrantsIsBounded) {
  const auto topo = place_wireless_overlay(Topology::build_mesh(8, 8), 4);
  NocConfig cfg;
  cfg.token_max_hold = 40;
  Network net(topo, cfg);
  net.set_traffic(uniform_traffic(topo, 2e-3, 3));
  const int k = topo.num_wis();
  std::vector<std::int64_t> released(k, -1);
  std::int64_t worst = 0;
  int prev = net.token().holder;
  for (int i = 0; i < 40'000; ++i) {
    net.step();
    const int h = net.token().holder;
    if (h != prev) {
      released[prev] = net.cycle();
      if (released[h] >= 0) worst = std::max(worst, net.cycle() - released[h]);
      prev = h;
    }
  }
  EXPECT_GT(worst, 0);
  EXPECT_LE(worst, (k - 1) * cfg.token_max_hold);
  for (auto g : net.token_stats().grants) EXPECT_GT(g, 0);
  EXPECT_EQ(net.stats().token_violations, 0);
  EXPECT_GT(net.stats().wireless_data_flits, 0);
}

TEST(Token, HoldMustCoverOneFlit) {
  NocConfig cfg;
  cfg.token_max_hold = 4;
  EXPECT_THROW(Network(place_wireless_overlay(Topology::build_mesh(4, 4), 2), cfg), ConfigError);
}

TEST(Broadcast, NineFlitsOccupyFortyFiveCycles) {
  const auto topo = place_wireless_overlay(Topology::build_mesh(8, 8), 4);
  Network net(topo, quiet());
  const int h = net.start_broadcast(std::vector<std::uint32_t>(9, 0xABCDu));
  std::int64_t applied = -1;
  net.on_broadcast_applied(h, [&](std::int64_t c) { applied = c; });
  net.run_until(5000);
  EXPECT_EQ(net.stats().wireless_control_flits, 9);
  EXPECT_EQ(net.stats().control_wireless_cycles, 45);
  ASSERT_TRUE(net.broadcast_complete(h).has_value());
  EXPECT_EQ(applied, *net.broadcast_complete(h) + net.downstream_delay());
  EXPECT_TRUE(net.empty());
}

TEST(Broadcast, EmptyMessageCompletesImmediately) {
  const auto topo = place_wireless_overlay(Topology::build_mesh(4, 4), 2);
  Network net(topo, quiet());
  net.run_until(10);
  const int h = net.start_broadcast({});
  ASSERT_TRUE(net.broadcast_complete(h).has_value());
  EXPECT_EQ(*net.broadcast_complete(h), 10);
  net.run_until(1000);
  EXPECT_EQ(net.stats().control_wireless_cycles, 0);
}

TEST(Broadcast, NeedsWirelessInterface) {
  Network net(Topology::build_mesh(4, 4), quiet());
  EXPECT_THROW(net.start_broadcast({1}), ConfigError);
}

TEST(Utilization, IdleWindowIsZero) {
  Network net(place_wireless_overlay(Topology::build_mesh(4, 4), 2), quiet());
  const auto a = net.snapshot();
  net.run_until(1000);
  const auto u = net.utilization_between(a, net.snapshot());
  for (double v : u.values) EXPECT_EQ(v, 0.0);
}

TEST(Utilization, CoreBusyFraction) {
  const auto topo = Topology::build_mesh(4, 4);
  Network net(topo, quiet());
  std::vector<double> loads(16, 0.0);
  loads[3] = 0.4;
  net.set_tasks(TaskMap(16), loads);
  const auto a = net.snapshot();
  net.run_until(100'000);
  const auto u = net.utilization_between(a, net.snapshot());
  EXPECT_NEAR(u[topo.core_component(3)], 0.4, 1e-12);
  EXPECT_EQ(u[topo.core_component(2)], 0.0);
}

TEST(Utilization, SaturatedLinkIsOne) {
  const auto topo = Topology::build_mesh(2, 1);
  Network net(topo, quiet());
  for (int i = 0; i < 200; ++i) {
    net.inject_packet(0, 1, 64);
    net.inject_packet(1, 0, 64);
  }
  net.run_until(1000);
  const auto a = net.snapshot();
  net.run_until(6000);
  const auto u = net.utilization_between(a, net.snapshot());
  EXPECT_NEAR(u[topo.link_component(0)], 1.0, 1e-3);
  for (double v : u.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Utilization, HalfLoadedLink) {
  // 40,000 flits each way over 100,000 cycles of a two-way link.
  const auto topo = Topology::build_mesh(2, 1);
  Network net(topo, quiet());
  for (int i = 0; i < 625; ++i) {
    net.inject_packet(0, 1, 64);
    net.inject_packet(1, 0, 64);
  }
  const auto a = net.snapshot();
  net.run_until(100'000);
  EXPECT_TRUE(net.empty());
  const auto u = net.utilization_between(a, net.snapshot());
  EXPECT_NEAR(u[topo.link_component(0)], 0.4, 1e-12);
}

TEST(Tasks, MigrationSwapsCoresAndPauses) {
  const auto topo = Topology::build_mesh(4, 4);
  Network net(topo, quiet());
  net.set_tasks(TaskMap(16), std::vector<double>(16, 1.0));
  net.run_until(100);
  EXPECT_EQ(net.apply_migrations({{0, 5}, {5, 0}}), 2);
  EXPECT_EQ(net.tasks().core_of(0), 5);
  EXPECT_EQ(net.tasks().core_of(5), 0);
  EXPECT_FALSE(net.task_active(0));
  EXPECT_TRUE(net.task_active(1));
  net.run_until(100 + net.config().migration_pause);
  EXPECT_TRUE(net.task_active(0));
  EXPECT_THROW(net.apply_migrations({{0, 6}}), ConfigError);
}

TEST(Traffic, DeterministicAndRespectsRate) {
  TrafficSpec spec;
  spec.pattern = TrafficPattern::UniformRandom;
  spec.injection_rate = 0.01;
  auto count = [&](std::uint64_t seed, std::vector<PacketRequest>* log) {
    TrafficGenerator g(spec, 8, 8, seed);
    std::int64_t n = 0;
    for (std::int64_t c = 0; c < 10'000; ++c) {
      g.poll(c, [](int) { return true; }, [&](const PacketRequest& r) {
        ++n;
        EXPECT_NE(r.src_task, r.dst_task);
        if (log) log->push_back(r);
      });
    }
    return n;
  };
  std::vector<PacketRequest> a, b;
  const auto n = count(1, &a);
  count(1, &b);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].dst_task, b[i].dst_task);
  // 64 tasks x 10,000 cycles x 0.01; five standard deviations of slack.
  EXPECT_NEAR(static_cast<double>(n), 6400.0, 5 * 80.0);
}

TEST(Traffic, TransposeDestination) {
  TrafficSpec spec;
  spec.pattern = TrafficPattern::Transpose;
  TrafficGenerator g(spec, 8, 8, 1);
  EXPECT_EQ(g.pick_destination(1), 8);
  EXPECT_EQ(g.pick_destination(8 * 2 + 5), 8 * 5 + 2);
  EXPECT_EQ(g.pick_destination(9), -1);
}

TEST(Traffic, HotspotBias) {
  TrafficSpec spec;
  spec.pattern = TrafficPattern::Hotspot;
  spec.hotspot_targets = {10};
  spec.hotspot_bias = 0.5;
  TrafficGenerator g(spec, 8, 8, 2);
  int hits = 0;
  for (int i = 0; i < 10'000; ++i) hits += g.pick_destination(0) == 10;
  // 0.5 + 0.5/63 expected.
  EXPECT_NEAR(hits / 10'000.0, 0.5 + 0.5 / 63, 0.02);
}

TEST(Traffic, TraceReplay) {
  const auto path = std::filesystem::temp_directory_path() / "winoc_noc_test_trace.csv";
  {
    std::ofstream os(path);
    os << "cycle,src,dst,flits\n# comment\n5,0,3,4\n5,1,2,4\n9,2,2,4\n20,3,0,2\n";
  }
  TrafficSpec spec;
  spec.pattern = TrafficPattern::Trace;
  spec.trace_path = path;
  TrafficGenerator g(spec, 2, 2, 1);
  std::vector<PacketRequest> out;
  for (std::int64_t c = 0; c < 30; ++c) g.poll(c, [](int) { return true; }, [&](const PacketRequest& r) { out.push_back(r); });
  ASSERT_EQ(out.size(), 3u);  // the self-addressed line is skipped
  EXPECT_EQ(out[0].cycle, 5);
  EXPECT_EQ(out[2].flits, 2);
  {
    std::ofstream os(path);
    os << "9,0,1,4\n5,1,0,4\n";
  }
  EXPECT_THROW(load_trace(path, 4), ConfigError);
  std::filesystem::remove(path);
}
