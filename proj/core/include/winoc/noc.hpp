#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "winoc/routing.hpp"
#include "winoc/thermal.hpp"
#include "winoc/token.hpp"
#include "winoc/topology.hpp"
#include "winoc/traffic.hpp"

namespace winoc {

enum class FlitKind : std::uint8_t { Head, Body, Tail, HeadTail };

FlitKind flit_kind(int seq, int packet_flits);

/// Switch ports. Direction d maps to port d + 1.
enum Port : int { kLocal = 0, kNorth = 1, kEast = 2, kSouth = 3, kWest = 4, kWireless = 5 };
inline constexpr int kNumPorts = 6;

struct NocConfig {
  int data_vcs = 4;  // the last one is the deadlock-free escape lane
  int vc_depth = 2;
  int wireless_vc_depth = 8;
  int hop_latency = 3;
  int flit_bits = 32;
  double clock_hz = 2.5e9;
  double wireless_rate_bps = 16e9;
  std::int64_t token_max_hold = 1000;
  /// Every switch reports its utilisation to the scheduler this often
  /// (0 disables the reports).
  std::int64_t report_interval = 100'000;
  int scheduler_core = 0;
  /// Cycles without any flit movement, with flits buffered, before the
  /// deadlock flag is raised.
  std::int64_t watchdog_cycles = 200'000;
  /// Cycles a migrating task is suspended.
  std::int64_t migration_pause = 5'000;
};

struct DeliveryEvent {
  std::int64_t cycle;
  std::uint32_t packet;
  int seq;
  int flits;  // packet length
  int src_core;
  int dst_core;
};

struct NocStats {
  std::int64_t packets_created = 0;
  std::int64_t packets_delivered = 0;
  std::int64_t flits_injected = 0;
  std::int64_t flits_delivered = 0;
  std::int64_t order_violations = 0;
  std::int64_t token_violations = 0;
  std::int64_t max_transmitters_per_cycle = 0;
  std::int64_t wireless_data_flits = 0;
  std::int64_t wireless_control_flits = 0;
  std::int64_t wireless_busy_cycles = 0;
  std::int64_t control_wireless_cycles = 0;  // broadcast occupancy
  std::int64_t report_packets_delivered = 0;
  std::int64_t escape_allocations = 0;
  double latency_sum = 0.0;  // creation to tail delivery, data packets
  std::int64_t latency_count = 0;
  bool deadlock = false;

  double mean_latency() const { return latency_count ? latency_sum / static_cast<double>(latency_count) : 0.0; }
};

/// Packet latency histogram with fixed-width bins; the last bin is open.
struct LatencyHistogram {
  std::int64_t bin_width = 50;
  std::vector<std::int64_t> counts = std::vector<std::int64_t>(200, 0);

  void add(std::int64_t latency);
  std::int64_t total() const;
};

/// Cumulative counters; the difference of two snapshots is a window.
struct UtilizationSnapshot {
  std::int64_t cycle = 0;
  std::vector<double> core_busy;
  std::vector<std::int64_t> switch_occupancy;  // flit-cycles
  std::vector<std::int64_t> link_flits;
};

/// Cycle-accurate wormhole NoC with virtual channels, credit flow control,
/// round-robin separable allocation, and a token-passed wireless channel.
///
/// Timing: a flit switched at cycle t is buffered downstream at t + hop
/// latency (plus serialisation on the wireless channel). Each VC owns
/// `depth` buffer slots plus one pipeline register per latency stage, and
/// credits cover both, so occupancy never exceeds what the hardware holds.
///
/// Data packets follow the routing table of the epoch their head saw at
/// creation over VCs 0..data_vcs-2. When those are busy a head may take the
/// escape VC (data_vcs-1) along dimension-order XY and then stays on escape
/// lanes, which keeps the network deadlock-free for arbitrary tables.
/// Control flits use the reserved VC with XY routing.
class Network {
 public:
  Network(Topology topo, NocConfig cfg, DvConfig dv = {});

  const Topology& topology() const { return topo_; }
  const NocConfig& config() const { return cfg_; }
  std::int64_t cycle() const { return now_; }

  DistanceVectorRouting& routing() { return routing_; }
  const DistanceVectorRouting& routing() const { return routing_; }

  // ---- workload ----
  void set_traffic(std::unique_ptr<TrafficGenerator> gen);
  TrafficGenerator* traffic() { return traffic_.get(); }
  void set_tasks(TaskMap map, std::vector<double> loads);
  const TaskMap& tasks() const { return tasks_; }
  const std::vector<double>& task_loads() const { return loads_; }
  bool task_active(int task) const;
  /// Applies a permutation given as (task, new core) moves; moved tasks
  /// pause for migration_pause cycles. Returns the number of tasks moved.
  int apply_migrations(const std::vector<std::pair<int, int>>& moves);

  /// Queues a data packet at the source core's interface.
  std::uint32_t inject_packet(int src_core, int dst_core, int flits);

  // ---- control broadcast ----
  /// Sends control words from the scheduler core to its nearest WI, which
  /// broadcasts them to every WI. Returns a handle.
  int start_broadcast(const std::vector<std::uint32_t>& words);
  /// Cycle at which every WI holds the whole message, once known.
  std::optional<std::int64_t> broadcast_complete(int handle) const;
  /// Cycles for a broadcast message to reach every switch from the WIs.
  std::int64_t downstream_delay() const { return downstream_delay_; }
  /// Runs `action(cycle)` at the start of the first cycle at which every
  /// switch has received broadcast `handle`.
  void on_broadcast_applied(int handle, std::function<void(std::int64_t)> action);

  // ---- time ----
  void step();
  void run_until(std::int64_t cycle);
  /// Stops traffic and steps until no flit or queued packet remains, at
  /// most `max_cycles`. Returns whether the network emptied.
  bool drain(std::int64_t max_cycles);

  bool empty() const;
  std::int64_t flits_in_network() const { return in_network_; }
  std::int64_t flits_queued() const;

  // ---- observation ----
  const NocStats& stats() const { return stats_; }
  const LatencyHistogram& latency_histogram() const { return hist_; }
  const TokenState& token() const { return token_; }
  const TokenStats& token_stats() const { return token_stats_; }
  void set_delivery_hook(std::function<void(const DeliveryEvent&)> hook) { hook_ = std::move(hook); }

  UtilizationSnapshot snapshot() const;
  /// Utilisation over the window between two snapshots.
  UtilizationVector utilization_between(const UtilizationSnapshot& a, const UtilizationSnapshot& b) const;
  /// Buffer slots of a switch (depth plus pipeline registers, all VCs).
  int switch_capacity(int sw) const { return switch_capacity_[sw]; }
  /// Largest VC occupancy seen versus its capacity (must stay <= 1).
  int max_vc_overflow() const { return max_vc_overflow_; }

 private:
  struct Slot {
    std::uint32_t packet;
    int seq;
    std::int64_t ready;
  };
  struct Vc {
    std::vector<Slot> ring;
    int head = 0;
    int count = 0;
    int capacity = 0;
    std::int64_t owner = -1;  // packet holding the VC
    std::int64_t free_from = 0;
    std::int64_t last_departure = -1;
    int out_port = -1;
    int out_vc = -1;
    int out_switch = -1;

    const Slot& front() const { return ring[head]; }
  };
  struct Packet {
    int src = 0;
    int dst = 0;
    int flits = 0;
    int epoch = 0;
    bool control = false;
    int broadcast = -1;  // handle when bound for the scheduler's WI
    bool report = false;
    std::uint32_t payload = 0;
    std::int64_t created = 0;
    int next_seq = 0;
    bool live = false;
  };
  struct Injector {
    std::vector<std::uint32_t> data;  // FIFO of packets (head index below)
    std::size_t data_head = 0;
    std::vector<std::uint32_t> control;
    std::size_t control_head = 0;
    std::int64_t cur_data = -1;
    int cur_data_vc = -1;
    int cur_data_seq = 0;
    bool listed = false;
    bool pending() const { return data_head < data.size() || control_head < control.size() || cur_data >= 0; }
  };
  struct Broadcast {
    int total = 0;
    int sent = 0;
    std::int64_t complete = -1;
  };

  Vc& vc(int sw, int port, int v) { return vcs_[(static_cast<std::size_t>(sw) * kNumPorts + port) * vcs_per_port_ + v]; }
  const Vc& vc(int sw, int port, int v) const {
    return vcs_[(static_cast<std::size_t>(sw) * kNumPorts + port) * vcs_per_port_ + v];
  }
  int control_vc() const { return cfg_.data_vcs; }
  int escape_vc() const { return cfg_.data_vcs - 1; }

  std::uint32_t new_packet(int src, int dst, int flits, bool control);
  void push_flit(int sw, int port, int v, const Slot& s);
  void pop_flit(int sw, int port, int v);
  bool has_credit(int sw, int port, int v) const;
  bool vc_free(int sw, int port, int v) const;
  int xy_port(int sw, int dst) const;
  bool allocate_route(int sw, int port, int v);
  void process_switch(int sw);
  void transmit_control();
  void update_token();
  void inject();
  void wake_injector(int core);
  void generate_traffic();
  void send_reports();
  void deliver(int sw, const Slot& s);
  void checkpoint_cores();
  void run_pending_actions();
  bool wireless_demand(int sw) const;
  /// Channel idle and the holder's remaining hold covers one flit.
  bool may_transmit() const {
    return channel_.idle(now_) && (topo_.num_wis() <= 1 || token_.held_for + wireless_ser_ <= token_.max_hold);
  }

  Topology topo_;
  NocConfig cfg_;
  DistanceVectorRouting routing_;
  int vcs_per_port_;
  std::int64_t now_ = 0;
  std::int64_t wireless_ser_ = 5;
  std::vector<Vc> vcs_;
  std::vector<int> switch_flits_;
  std::vector<int> port_flits_;  // [sw * kNumPorts + port]
  std::vector<int> switch_capacity_;
  std::vector<std::array<int, kNumPorts>> neighbor_;  // downstream switch per port, -1 if none
  std::vector<std::array<int, kNumPorts>> port_link_;
  std::vector<std::array<int, kNumPorts>> rr_in_;
  std::vector<std::array<int, kNumPorts>> rr_out_;
  std::vector<Packet> packets_;
  std::vector<std::uint32_t> free_packets_;
  std::vector<Injector> injectors_;
  std::vector<int> busy_injectors_;
  std::int64_t in_network_ = 0;
  std::int64_t queued_flits_ = 0;

  TokenState token_;
  TokenStats token_stats_;
  WirelessChannel channel_;
  int transmitters_this_cycle_ = 0;
  std::vector<std::vector<std::uint32_t>> bcast_queue_;  // per switch, FIFO of packet ids
  std::vector<std::size_t> bcast_head_;
  std::vector<Broadcast> broadcasts_;
  std::vector<std::pair<int, std::function<void(std::int64_t)>>> pending_actions_;
  int scheduler_wi_ = -1;
  std::int64_t downstream_delay_ = 0;

  std::unique_ptr<TrafficGenerator> traffic_;
  TaskMap tasks_;
  std::vector<double> loads_;
  std::vector<std::int64_t> pause_from_;
  std::vector<std::int64_t> pause_until_;
  std::int64_t core_checkpoint_ = 0;

  std::vector<double> core_busy_;
  std::vector<std::int64_t> occ_integral_;
  std::vector<std::int64_t> occ_last_;
  std::vector<std::int64_t> link_flits_;
  UtilizationSnapshot last_report_;

  std::int64_t last_progress_ = 0;
  int max_vc_overflow_ = 0;
  NocStats stats_;
  LatencyHistogram hist_;
  std::function<void(const DeliveryEvent&)> hook_;
};

}  // namespace winoc
