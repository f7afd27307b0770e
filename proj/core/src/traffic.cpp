#include "winoc/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

TaskMap::TaskMap(int n) : task_to_core_(n), core_to_task_(n) {
  for (int i = 0; i < n; ++i) task_to_core_[i] = core_to_task_[i] = i;
}

TaskMap TaskMap::random(int n, Rng& rng) {
  std::vector<int> a(n);
  for (int i = 0; i < n; ++i) a[i] = i;
  shuffle(a.begin(), a.end(), rng);
  return from_assignment(std::move(a));
}

TaskMap TaskMap::from_assignment(std::vector<int> task_to_core) {
  TaskMap m;
  const int n = static_cast<int>(task_to_core.size());
  m.core_to_task_.assign(n, -1);
  for (int t = 0; t < n; ++t) {
    const int c = task_to_core[t];
    if (c < 0 || c >= n || m.core_to_task_[c] >= 0) throw ConfigError("task assignment is not a bijection");
    m.core_to_task_[c] = t;
  }
  m.task_to_core_ = std::move(task_to_core);
  return m;
}

void TaskMap::swap_to(int task, int core) {
  const int old_core = task_to_core_[task];
  const int other = core_to_task_[core];
  task_to_core_[task] = core;
  core_to_task_[core] = task;
  task_to_core_[other] = old_core;
  core_to_task_[old_core] = other;
}

bool TaskMap::is_bijection() const {
  const int n = size();
  if (static_cast<int>(core_to_task_.size()) != n) return false;
  for (int t = 0; t < n; ++t) {
    const int c = task_to_core_[t];
    if (c < 0 || c >= n || core_to_task_[c] != t) return false;
  }
  return true;
}

const char* to_string(TrafficPattern p) {
  switch (p) {
    case TrafficPattern::UniformRandom: return "uniform";
    case TrafficPattern::Hotspot: return "hotspot";
    case TrafficPattern::Transpose: return "transpose";
    case TrafficPattern::Trace: return "trace";
  }
  return "?";
}

TrafficPattern traffic_pattern_from_string(const std::string& s) {
  if (s == "uniform") return TrafficPattern::UniformRandom;
  if (s == "hotspot") return TrafficPattern::Hotspot;
  if (s == "transpose") return TrafficPattern::Transpose;
  if (s == "trace") return TrafficPattern::Trace;
  throw ConfigError(fmt::format("pattern must be one of uniform|hotspot|transpose|trace (got {})", s));
}

std::vector<PacketRequest> load_trace(const std::filesystem::path& path, int n_tasks) {
  std::ifstream is(path);
  if (!is) throw ConfigError(fmt::format("cannot open trace file {}", path.string()));
  std::vector<PacketRequest> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("cycle", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    PacketRequest r;
    if (!(ls >> r.cycle >> r.src_task >> r.dst_task >> r.flits)) {
      throw ConfigError(fmt::format("{}:{}: expected cycle,src,dst,flits", path.string(), lineno));
    }
    if (r.cycle < 0 || r.src_task < 0 || r.src_task >= n_tasks || r.dst_task < 0 || r.dst_task >= n_tasks ||
        r.flits < 1) {
      throw ConfigError(fmt::format("{}:{}: field out of range", path.string(), lineno));
    }
    if (!out.empty() && r.cycle < out.back().cycle) {
      throw ConfigError(fmt::format("{}:{}: trace is not sorted by cycle", path.string(), lineno));
    }
    out.push_back(r);
  }
  return out;
}

TrafficGenerator::TrafficGenerator(TrafficSpec spec, int grid_w, int grid_h, std::uint64_t seed)
    : spec_(std::move(spec)), grid_w_(grid_w), grid_h_(grid_h), n_(grid_w * grid_h),
      rng_(make_rng(seed, "traffic")) {
  if (spec_.packet_flits < 1) throw ConfigError("packet_flits must satisfy packet_flits >= 1");
  if (spec_.injection_rate < 0.0 || spec_.injection_rate > 1.0) {
    throw ConfigError(fmt::format("injection_rate must satisfy 0 <= injection_rate <= 1 (got {})",
                                  spec_.injection_rate));
  }
  for (int t : spec_.hotspot_targets) {
    if (t < 0 || t >= n_) throw ConfigError(fmt::format("hotspot target {} is not a task", t));
  }
  if (spec_.pattern == TrafficPattern::Trace) {
    trace_ = load_trace(spec_.trace_path, n_);
    return;
  }
  next_.resize(n_);
  for (int t = 0; t < n_; ++t) {
    next_[t] = gap();
    heap_.push({next_[t], t});
  }
}

std::int64_t TrafficGenerator::gap() {
  const double p = spec_.injection_rate;
  if (p <= 0.0) return std::numeric_limits<std::int64_t>::max() / 2;
  if (p >= 1.0) return 1;
  const double u = uniform01(rng_);
  return 1 + static_cast<std::int64_t>(std::floor(std::log1p(-u) / std::log1p(-p)));
}

int TrafficGenerator::pick_destination(int src) {
  switch (spec_.pattern) {
    case TrafficPattern::Transpose: {
      const int x = src % grid_w_;
      const int y = src / grid_w_;
      const int dst = (y % grid_w_) + (x % grid_h_) * grid_w_;
      return dst == src ? -1 : dst;
    }
    case TrafficPattern::Hotspot: {
      if (!spec_.hotspot_targets.empty() && uniform01(rng_) < spec_.hotspot_bias) {
        const int dst = spec_.hotspot_targets[uniform_index(rng_, spec_.hotspot_targets.size())];
        if (dst != src) return dst;
      }
      [[fallthrough]];
    }
    case TrafficPattern::UniformRandom: {
      if (n_ < 2) return -1;
      const int d = static_cast<int>(uniform_index(rng_, static_cast<std::uint64_t>(n_ - 1)));
      return d >= src ? d + 1 : d;
    }
    case TrafficPattern::Trace: break;
  }
  return -1;
}

std::int64_t TrafficGenerator::next_event() const {
  if (stopped_) return std::numeric_limits<std::int64_t>::max();
  if (spec_.pattern == TrafficPattern::Trace) {
    return trace_pos_ < trace_.size() ? trace_[trace_pos_].cycle : std::numeric_limits<std::int64_t>::max();
  }
  return heap_.empty() ? std::numeric_limits<std::int64_t>::max() : heap_.top().first;
}

void TrafficGenerator::poll(std::int64_t cycle, const std::function<bool(int)>& active,
                            const std::function<void(const PacketRequest&)>& emit) {
  if (stopped_) return;
  if (spec_.pattern == TrafficPattern::Trace) {
    while (trace_pos_ < trace_.size() && trace_[trace_pos_].cycle <= cycle) {
      const auto& r = trace_[trace_pos_++];
      if (r.src_task != r.dst_task && active(r.src_task)) emit(r);
    }
    return;
  }
  while (!heap_.empty() && heap_.top().first <= cycle) {
    const auto [c, task] = heap_.top();
    heap_.pop();
    if (active(task)) {
      const int dst = pick_destination(task);
      if (dst >= 0) emit({cycle, task, dst, spec_.packet_flits});
    }
    next_[task] = c + gap();
    heap_.push({next_[task], task});
  }
}

}  // namespace winoc
