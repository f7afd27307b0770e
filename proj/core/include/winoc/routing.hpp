#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "winoc/quantized.hpp"
#include "winoc/topology.hpp"

namespace winoc {

/// Cost of every directed channel, indexed like Topology::neighbors(s).
class ChannelCosts {
 public:
  ChannelCosts() = default;
  /// Every channel at `base`.
  ChannelCosts(const Topology& topo, std::int64_t base);

  std::int64_t at(int sw, int k) const { return cost_[start_[sw] + k]; }
  void set(int sw, int k, std::int64_t c);
  int num_channels() const { return static_cast<int>(cost_.size()); }

  friend bool operator==(const ChannelCosts&, const ChannelCosts&) = default;

 private:
  std::vector<int> start_;
  std::vector<std::int64_t> cost_;
};

struct HotComponents {
  std::vector<bool> switches;
  std::vector<bool> links;

  bool any() const;
  /// Switch and link bits of a 240-wide status vector.
  static HotComponents from_status(const Topology& topo, const StatusBits& status);
};

inline constexpr std::int64_t kDefaultPenalty = 100;

/// Cost 1 per wired hop and `wireless_cost` per wireless hop.
ChannelCosts base_costs(const Topology& topo, std::int64_t wireless_cost = 1);

/// Base costs with `penalty` added once to every channel whose wired link or
/// either endpoint switch is hot.
ChannelCosts penalized_costs(const Topology& topo, const HotComponents& hot, std::int64_t penalty = kDefaultPenalty,
                             std::int64_t wireless_cost = 1);

inline constexpr std::int64_t kUnreachable = INT64_MAX / 4;

/// Per-destination next hops for every switch.
struct RoutingTable {
  int n = 0;
  std::vector<std::int64_t> dist;  // [src * n + dst]
  std::vector<int> next_switch;    // [src * n + dst]; src itself when src == dst
  std::vector<int> next_link;      // wired link taken, -1 for the wireless channel or src == dst

  std::int64_t distance(int s, int d) const { return dist[static_cast<std::size_t>(s) * n + d]; }
  int next(int s, int d) const { return next_switch[static_cast<std::size_t>(s) * n + d]; }
  int link(int s, int d) const { return next_link[static_cast<std::size_t>(s) * n + d]; }

  friend bool operator==(const RoutingTable&, const RoutingTable&) = default;
};

/// Next hop from distances: the lowest-index neighbour on a shortest path
/// (wired before wireless on a shared neighbour).
RoutingTable table_from_distances(const Topology& topo, const ChannelCosts& costs, std::vector<std::int64_t> dist);

/// Exact all-pairs shortest paths (Dijkstra from every source).
RoutingTable dijkstra_oracle(const Topology& topo, const ChannelCosts& costs);

/// True when following next hops toward every destination never revisits a
/// switch.
bool next_hops_acyclic(const RoutingTable& table);

struct ConvergenceRecord {
  std::int64_t trigger_cycle = 0;
  int rounds = 0;  // rounds that changed some vector
  std::int64_t cycles_to_fixpoint = 0;
  std::int64_t switchover_cycle = 0;
  bool converged_before_switchover = true;
};

struct DvConfig {
  std::int64_t cadence_cycles = 10;
  std::int64_t switchover_delay = 600;
  std::int64_t penalty = kDefaultPenalty;
  std::int64_t wireless_cost = 1;
};

/// Distance-vector routing with an active (old) table routing data and a
/// new table being built after a trigger.
///
/// A trigger installs fresh costs and restarts the vectors from "unknown"
/// (0 to self, unreachable elsewhere); each round every switch relaxes
/// against the vectors its neighbours advertised in the previous round.
/// Estimates only decrease, so stale long paths cannot linger.
class DistanceVectorRouting {
 public:
  DistanceVectorRouting() = default;
  /// Both tables start at converged base-cost shortest paths.
  DistanceVectorRouting(Topology topo, DvConfig cfg = {});

  const Topology& topology() const { return topo_; }
  const DvConfig& config() const { return cfg_; }
  const ChannelCosts& costs() const { return costs_; }

  /// Table of a routing epoch; epoch 0 is the initial one.
  const RoutingTable& table(int epoch) const { return *epochs_[epoch]; }
  const RoutingTable& active() const { return *epochs_.back(); }
  int active_epoch() const { return static_cast<int>(epochs_.size()) - 1; }

  /// Installs penalised costs and starts a new exchange. Returns false (and
  /// changes nothing) when nothing is hot.
  bool trigger_reroute(const HotComponents& hot, std::int64_t trigger_cycle);
  /// Same, with explicit channel costs.
  bool trigger_with_costs(ChannelCosts costs, std::int64_t trigger_cycle);

  bool pending() const { return pending_; }
  std::int64_t switchover_cycle() const { return switchover_cycle_; }
  /// One synchronous advertisement/relaxation round; returns whether any
  /// estimate changed.
  bool dv_exchange_step();
  bool converged() const { return converged_; }
  /// Current per-switch estimates [src * n + dst].
  const std::vector<std::int64_t>& estimates() const { return dist_; }

  /// Runs every round due up to `now` and performs the switchover once
  /// `now` reaches the scheduled cycle. Returns true on switchover.
  bool advance(std::int64_t now);

  const std::vector<ConvergenceRecord>& convergence_log() const { return log_; }

  /// Per-destination next-hop table of the active epoch as text.
  std::string dump() const;

 private:
  void switchover();

  Topology topo_ = Topology::build_mesh(2, 2);
  DvConfig cfg_;
  ChannelCosts costs_;
  std::vector<std::shared_ptr<const RoutingTable>> epochs_;
  std::vector<std::int64_t> dist_;
  std::vector<std::int64_t> scratch_;
  bool pending_ = false;
  bool converged_ = true;
  int rounds_ = 0;
  std::int64_t trigger_cycle_ = 0;
  std::int64_t next_round_cycle_ = 0;
  std::int64_t switchover_cycle_ = 0;
  std::vector<ConvergenceRecord> log_;
};

}  // namespace winoc
