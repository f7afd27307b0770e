#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "winoc/rng.hpp"

namespace winoc {

/// Bijection between tasks and cores.
class TaskMap {
 public:
  TaskMap() = default;
  /// Task i on core i.
  explicit TaskMap(int n);
  static TaskMap random(int n, Rng& rng);
  static TaskMap from_assignment(std::vector<int> task_to_core);

  int size() const { return static_cast<int>(task_to_core_.size()); }
  int core_of(int task) const { return task_to_core_[task]; }
  int task_on(int core) const { return core_to_task_[core]; }
  const std::vector<int>& assignment() const { return task_to_core_; }

  /// Moves `task` to `core`; the task there takes the vacated core.
  void swap_to(int task, int core);
  bool is_bijection() const;

  friend bool operator==(const TaskMap&, const TaskMap&) = default;

 private:
  std::vector<int> task_to_core_;
  std::vector<int> core_to_task_;
};

enum class TrafficPattern : std::uint8_t { UniformRandom, Hotspot, Transpose, Trace };

const char* to_string(TrafficPattern p);
TrafficPattern traffic_pattern_from_string(const std::string& s);

struct TrafficSpec {
  TrafficPattern pattern = TrafficPattern::Hotspot;
  /// Packets per cycle per task (geometric inter-arrival).
  double injection_rate = 0.0002;
  int packet_flits = 64;
  /// Hotspot: destination tasks favoured with probability `hotspot_bias`.
  std::vector<int> hotspot_targets;
  double hotspot_bias = 0.3;
  std::filesystem::path trace_path;
};

/// One packet request between tasks. Tasks are resolved to cores by the
/// network at generation time, so traffic follows migrations.
struct PacketRequest {
  std::int64_t cycle = 0;
  int src_task = 0;
  int dst_task = 0;
  int flits = 0;
};

/// Trace CSV: `cycle,src,dst,flits` per line (src/dst are task ids), sorted
/// by cycle; lines starting with '#' and a `cycle,...` header are skipped.
std::vector<PacketRequest> load_trace(const std::filesystem::path& path, int n_tasks);

/// Deterministic packet source for every task.
class TrafficGenerator {
 public:
  TrafficGenerator(TrafficSpec spec, int grid_w, int grid_h, std::uint64_t seed);

  const TrafficSpec& spec() const { return spec_; }

  /// Emits every request due at `cycle`, in task order. Cycles must be
  /// visited in increasing order. Tasks for which `active(task)` is false
  /// skip their arrivals.
  void poll(std::int64_t cycle, const std::function<bool(int)>& active,
            const std::function<void(const PacketRequest&)>& emit);

  /// Earliest cycle at which poll() can emit anything.
  std::int64_t next_event() const;

  /// Stop generating (the network can then drain).
  void stop() { stopped_ = true; }
  bool stopped() const { return stopped_; }

  /// Destination task for a source under the synthetic patterns, or -1.
  int pick_destination(int src_task);

 private:
  std::int64_t gap();

  TrafficSpec spec_;
  int grid_w_;
  int grid_h_;
  int n_;
  Rng rng_;
  bool stopped_ = false;
  std::vector<std::int64_t> next_;  // per task
  using Entry = std::pair<std::int64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::vector<PacketRequest> trace_;
  std::size_t trace_pos_ = 0;
};

}  // namespace winoc
