#include "winoc/noc.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

namespace {

constexpr std::array<int, kNumPorts> kOpposite = {kLocal, kSouth, kWest, kNorth, kEast, kWireless};

}  // namespace

FlitKind flit_kind(int seq, int packet_flits) {
  if (packet_flits == 1) return FlitKind::HeadTail;
  if (seq == 0) return FlitKind::Head;
  return seq == packet_flits - 1 ? FlitKind::Tail : FlitKind::Body;
}

void LatencyHistogram::add(std::int64_t latency) {
  const auto bin = std::min<std::int64_t>(latency / bin_width, static_cast<std::int64_t>(counts.size()) - 1);
  ++counts[static_cast<std::size_t>(std::max<std::int64_t>(bin, 0))];
}

std::int64_t LatencyHistogram::total() const {
  std::int64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

Network::Network(Topology topo, NocConfig cfg, DvConfig dv)
    : topo_(std::move(topo)), cfg_(cfg), routing_(topo_, dv), vcs_per_port_(cfg.data_vcs + 1) {
  if (cfg_.data_vcs < 2) throw ConfigError(fmt::format("data_vcs must satisfy data_vcs >= 2 (got {})", cfg_.data_vcs));
  if (cfg_.vc_depth < 1) throw ConfigError(fmt::format("vc_depth must satisfy vc_depth >= 1 (got {})", cfg_.vc_depth));
  if (cfg_.wireless_vc_depth < 1) {
    throw ConfigError(fmt::format("wireless_vc_depth must satisfy wireless_vc_depth >= 1 (got {})", cfg_.wireless_vc_depth));
  }
  if (cfg_.hop_latency < 1) {
    throw ConfigError(fmt::format("hop_latency must satisfy hop_latency >= 1 (got {})", cfg_.hop_latency));
  }
  if (cfg_.token_max_hold < 1) {
    throw ConfigError(fmt::format("token_max_hold must satisfy token_max_hold >= 1 (got {})", cfg_.token_max_hold));
  }
  const int n = topo_.num_switches();
  if (cfg_.scheduler_core < 0 || cfg_.scheduler_core >= n) {
    throw ConfigError(fmt::format("scheduler_core must satisfy 0 <= scheduler_core < {} (got {})", n, cfg_.scheduler_core));
  }
  wireless_ser_ = serialization_cycles(cfg_.flit_bits, cfg_.wireless_rate_bps, cfg_.clock_hz);
  if (topo_.num_wis() > 1 && cfg_.token_max_hold < wireless_ser_) {
    throw ConfigError(fmt::format("token_max_hold must cover one wireless flit ({} cycles, got {})", wireless_ser_,
                                  cfg_.token_max_hold));
  }

  neighbor_.assign(n, {});
  port_link_.assign(n, {});
  rr_in_.assign(n, {});
  rr_out_.assign(n, {});
  switch_capacity_.assign(n, 0);
  vcs_.resize(static_cast<std::size_t>(n) * kNumPorts * vcs_per_port_);
  for (int s = 0; s < n; ++s) {
    neighbor_[s].fill(-1);
    port_link_[s].fill(-1);
    for (Direction d : kDirections) {
      const int p = static_cast<int>(d) + 1;
      neighbor_[s][p] = topo_.mesh_neighbor(s, d);
      if (neighbor_[s][p] >= 0) port_link_[s][p] = topo_.link_between(s, neighbor_[s][p]);
    }
    for (int p = 0; p < kNumPorts; ++p) {
      int cap = 0;
      if (p == kLocal) {
        cap = cfg_.vc_depth;
      } else if (p == kWireless) {
        cap = topo_.is_wi(s) ? cfg_.wireless_vc_depth + cfg_.hop_latency : 0;
      } else if (neighbor_[s][p] >= 0) {
        cap = cfg_.vc_depth + cfg_.hop_latency;
      }
      for (int v = 0; v < vcs_per_port_; ++v) {
        Vc& c = vc(s, p, v);
        c.capacity = cap;
        c.ring.resize(std::max(cap, 1));
      }
      switch_capacity_[s] += cap * vcs_per_port_;
    }
  }
  switch_flits_.assign(n, 0);
  port_flits_.assign(static_cast<std::size_t>(n) * kNumPorts, 0);
  injectors_.resize(n);

  token_.num_wis = std::max(topo_.num_wis(), 1);
  token_.max_hold = cfg_.token_max_hold;
  token_stats_ = TokenStats(token_.num_wis);
  token_stats_.granted(0, 0);
  channel_.data_rate_bps = cfg_.wireless_rate_bps;
  bcast_queue_.assign(n, {});
  bcast_head_.assign(n, 0);
  if (topo_.num_wis() > 0) {
    scheduler_wi_ = topo_.nearest_wi(cfg_.scheduler_core);
    int worst = 0;
    for (int s = 0; s < n; ++s) worst = std::max(worst, topo_.hop_distance(s, topo_.nearest_wi(s)));
    downstream_delay_ = static_cast<std::int64_t>(worst) * cfg_.hop_latency;
  }

  tasks_ = TaskMap(n);
  loads_.assign(n, 0.0);
  pause_from_.assign(n, 0);
  pause_until_.assign(n, 0);
  core_busy_.assign(n, 0.0);
  occ_integral_.assign(n, 0);
  occ_last_.assign(n, 0);
  link_flits_.assign(topo_.num_links(), 0);
  last_report_ = snapshot();
}

void Network::set_traffic(std::unique_ptr<TrafficGenerator> gen) { traffic_ = std::move(gen); }

void Network::set_tasks(TaskMap map, std::vector<double> loads) {
  const int n = topo_.num_cores();
  if (map.size() != n || !map.is_bijection()) throw ConfigError("task map must be a bijection over the cores");
  if (static_cast<int>(loads.size()) != n) throw ConfigError("need one load per task");
  for (double l : loads) {
    if (l < 0.0 || l > 1.0) throw ConfigError(fmt::format("task load must lie in [0, 1] (got {})", l));
  }
  checkpoint_cores();
  tasks_ = std::move(map);
  loads_ = std::move(loads);
}

bool Network::task_active(int task) const { return now_ < pause_from_[task] || now_ >= pause_until_[task]; }

void Network::checkpoint_cores() {
  const std::int64_t a = core_checkpoint_;
  const std::int64_t b = now_;
  if (b <= a) return;
  for (int c = 0; c < topo_.num_cores(); ++c) {
    const int t = tasks_.task_on(c);
    const std::int64_t lo = std::max(a, pause_from_[t]);
    const std::int64_t hi = std::min(b, pause_until_[t]);
    const std::int64_t paused = std::max<std::int64_t>(0, hi - lo);
    core_busy_[c] += loads_[t] * static_cast<double>(b - a - paused);
  }
  core_checkpoint_ = b;
}

int Network::apply_migrations(const std::vector<std::pair<int, int>>& moves) {
  std::vector<int> next = tasks_.assignment();
  for (const auto& [t, c] : moves) {
    if (t < 0 || t >= tasks_.size() || c < 0 || c >= tasks_.size()) throw RangeError("migration out of range");
    next[t] = c;
  }
  TaskMap updated = TaskMap::from_assignment(next);  // throws unless a bijection
  checkpoint_cores();
  int moved = 0;
  for (int t = 0; t < tasks_.size(); ++t) {
    if (updated.core_of(t) != tasks_.core_of(t)) {
      pause_from_[t] = now_;
      pause_until_[t] = now_ + cfg_.migration_pause;
      ++moved;
    }
  }
  tasks_ = std::move(updated);
  return moved;
}

std::uint32_t Network::new_packet(int src, int dst, int flits, bool control) {
  std::uint32_t id;
  if (!free_packets_.empty()) {
    id = free_packets_.back();
    free_packets_.pop_back();
  } else {
    id = static_cast<std::uint32_t>(packets_.size());
    packets_.emplace_back();
  }
  Packet& p = packets_[id];
  p = Packet{};
  p.src = src;
  p.dst = dst;
  p.flits = flits;
  p.control = control;
  p.epoch = routing_.active_epoch();
  p.created = now_;
  p.live = true;
  ++stats_.packets_created;
  queued_flits_ += flits;
  return id;
}

std::uint32_t Network::inject_packet(int src_core, int dst_core, int flits) {
  const int n = topo_.num_cores();
  if (src_core < 0 || src_core >= n || dst_core < 0 || dst_core >= n) throw RangeError("packet endpoint out of range");
  if (src_core == dst_core) throw RangeError("packet source and destination coincide");
  if (flits < 1) throw RangeError("packet needs at least one flit");
  const auto id = new_packet(src_core, dst_core, flits, false);
  injectors_[src_core].data.push_back(id);
  wake_injector(src_core);
  return id;
}

int Network::start_broadcast(const std::vector<std::uint32_t>& words) {
  if (scheduler_wi_ < 0) throw ConfigError("control broadcast needs at least one wireless interface");
  const int handle = static_cast<int>(broadcasts_.size());
  broadcasts_.push_back({static_cast<int>(words.size()), 0, words.empty() ? now_ : -1});
  const int src = cfg_.scheduler_core;
  for (auto w : words) {
    const auto id = new_packet(src, scheduler_wi_, 1, true);
    packets_[id].broadcast = handle;
    packets_[id].payload = w;
    if (src == scheduler_wi_) {
      --queued_flits_;
      bcast_queue_[src].push_back(id);
    } else {
      injectors_[src].control.push_back(id);
      wake_injector(src);
    }
  }
  return handle;
}

std::optional<std::int64_t> Network::broadcast_complete(int handle) const {
  const auto& b = broadcasts_.at(handle);
  if (b.complete < 0) return std::nullopt;
  return b.complete;
}

void Network::on_broadcast_applied(int handle, std::function<void(std::int64_t)> action) {
  if (handle < 0 || handle >= static_cast<int>(broadcasts_.size())) throw RangeError("unknown broadcast handle");
  pending_actions_.emplace_back(handle, std::move(action));
}

void Network::run_pending_actions() {
  for (std::size_t i = 0; i < pending_actions_.size();) {
    const auto& b = broadcasts_[pending_actions_[i].first];
    if (b.complete >= 0 && now_ >= b.complete + downstream_delay_) {
      auto action = std::move(pending_actions_[i].second);
      pending_actions_.erase(pending_actions_.begin() + static_cast<std::ptrdiff_t>(i));
      action(now_);
    } else {
      ++i;
    }
  }
}

void Network::push_flit(int sw, int port, int v, const Slot& s) {
  Vc& c = vc(sw, port, v);
  occ_integral_[sw] += switch_flits_[sw] * (now_ - occ_last_[sw]);
  occ_last_[sw] = now_;
  if (c.count >= c.capacity) {
    // Credits make this unreachable; keep the flit and record it.
    max_vc_overflow_ = std::max(max_vc_overflow_, c.count + 1 - c.capacity);
    c.ring.resize(c.ring.size() + 1);
    std::rotate(c.ring.begin(), c.ring.begin() + c.head, c.ring.end() - 1);
    c.head = 0;
  }
  std::size_t at = static_cast<std::size_t>(c.head + c.count);
  if (at >= c.ring.size()) at -= c.ring.size();
  c.ring[at] = s;
  ++c.count;
  ++switch_flits_[sw];
  ++port_flits_[static_cast<std::size_t>(sw) * kNumPorts + port];
}

void Network::pop_flit(int sw, int port, int v) {
  Vc& c = vc(sw, port, v);
  occ_integral_[sw] += switch_flits_[sw] * (now_ - occ_last_[sw]);
  occ_last_[sw] = now_;
  if (++c.head == static_cast<int>(c.ring.size())) c.head = 0;
  --c.count;
  c.last_departure = now_;
  --switch_flits_[sw];
  --port_flits_[static_cast<std::size_t>(sw) * kNumPorts + port];
}

bool Network::has_credit(int sw, int port, int v) const {
  const Vc& c = vc(sw, port, v);
  // A slot freed this cycle is visible upstream next cycle.
  return c.count + (c.last_departure == now_ ? 1 : 0) < c.capacity;
}

bool Network::vc_free(int sw, int port, int v) const {
  const Vc& c = vc(sw, port, v);
  return c.owner < 0 && c.free_from <= now_ && c.capacity > 0;
}

int Network::xy_port(int sw, int dst) const {
  const int x = topo_.x_of(sw);
  const int y = topo_.y_of(sw);
  const int dx = topo_.x_of(dst);
  const int dy = topo_.y_of(dst);
  if (dx > x) return kEast;
  if (dx < x) return kWest;
  if (dy > y) return kSouth;
  if (dy < y) return kNorth;
  return kLocal;
}

bool Network::allocate_route(int sw, int port, int v) {
  Vc& c = vc(sw, port, v);
  const std::uint32_t id = c.front().packet;
  Packet& p = packets_[id];
  if (p.dst == sw) {
    c.out_port = kLocal;
    return true;
  }
  auto grab = [&](int o, int target, int in_port, int dv) {
    if (!vc_free(target, in_port, dv)) return false;
    vc(target, in_port, dv).owner = id;
    c.out_port = o;
    c.out_vc = dv;
    c.out_switch = target;
    return true;
  };
  if (p.control) {
    const int o = xy_port(sw, p.dst);
    return grab(o, neighbor_[sw][o], kOpposite[o], control_vc());
  }
  const bool escaped = port != kLocal && port != kWireless && v == escape_vc();
  if (!escaped) {
    const auto& table = routing_.table(p.epoch);
    const int next = table.next(sw, p.dst);
    const int link = table.link(sw, p.dst);
    int o = kWireless;
    if (link >= 0) o = xy_port(sw, next);
    const int in_port = kOpposite[o];
    for (int dv = 0; dv < escape_vc(); ++dv) {
      if (grab(o, next, in_port, dv)) return true;
    }
  }
  const int o = xy_port(sw, p.dst);
  if (grab(o, neighbor_[sw][o], kOpposite[o], escape_vc())) {
    if (!escaped) ++stats_.escape_allocations;
    return true;
  }
  return false;
}

void Network::deliver(int sw, const Slot& s) {
  Packet& p = packets_[s.packet];
  if (p.broadcast >= 0) {
    --in_network_;
    bcast_queue_[sw].push_back(s.packet);
    return;
  }
  if (s.seq != p.next_seq) ++stats_.order_violations;
  p.next_seq = s.seq + 1;
  ++stats_.flits_delivered;
  --in_network_;
  if (hook_) hook_({now_, s.packet, s.seq, p.flits, p.src, p.dst});
  if (s.seq == p.flits - 1) {
    ++stats_.packets_delivered;
    if (p.report) {
      ++stats_.report_packets_delivered;
    } else if (!p.control) {
      const std::int64_t lat = now_ - p.created;
      hist_.add(lat);
      stats_.latency_sum += static_cast<double>(lat);
      ++stats_.latency_count;
    }
    p.live = false;
    free_packets_.push_back(s.packet);
  }
}

void Network::process_switch(int sw) {
  if (switch_flits_[sw] == 0) return;
  std::array<int, kNumPorts> req_vc;
  std::array<int, kNumPorts> req_out;
  req_vc.fill(-1);
  req_out.fill(-1);
  unsigned requested = 0;
  const int my_wi = topo_.wi_index(sw);

  for (int p = 0; p < kNumPorts; ++p) {
    if (port_flits_[static_cast<std::size_t>(sw) * kNumPorts + p] == 0) continue;
    int v = rr_in_[sw][p];
    for (int i = 0; i < vcs_per_port_; ++i, v = v + 1 == vcs_per_port_ ? 0 : v + 1) {
      Vc& c = vc(sw, p, v);
      if (c.count == 0 || c.front().ready > now_) continue;
      if (c.out_port < 0 && !allocate_route(sw, p, v)) continue;
      const int o = c.out_port;
      bool ok;
      if (o == kLocal) {
        ok = true;
      } else if (o == kWireless) {
        ok = my_wi == token_.holder && may_transmit() && has_credit(c.out_switch, kWireless, c.out_vc);
      } else {
        ok = has_credit(c.out_switch, kOpposite[o], c.out_vc);
      }
      if (ok) {
        req_vc[p] = v;
        req_out[p] = o;
        requested |= 1u << o;
        break;
      }
    }
  }

  for (int o = 0; o < kNumPorts; ++o) {
    if (!(requested & (1u << o))) continue;
    int winner = -1;
    int q = rr_out_[sw][o];
    for (int i = 0; i < kNumPorts; ++i, q = q + 1 == kNumPorts ? 0 : q + 1) {
      if (req_out[q] == o) {
        winner = q;
        break;
      }
    }
    if (winner < 0) continue;
    const int p = winner;
    const int v = req_vc[p];
    rr_out_[sw][o] = (p + 1) % kNumPorts;
    rr_in_[sw][p] = (v + 1) % vcs_per_port_;

    Vc& c = vc(sw, p, v);
    const Slot s = c.front();
    const int out_switch = c.out_switch;
    const int out_vc = c.out_vc;
    pop_flit(sw, p, v);
    const bool last = s.seq == packets_[s.packet].flits - 1;
    if (last) {
      c.owner = -1;
      c.free_from = now_ + 1;
      c.out_port = -1;
      c.out_vc = -1;
      c.out_switch = -1;
    }
    last_progress_ = now_;
    if (o == kLocal) {
      deliver(sw, s);
    } else if (o == kWireless) {
      if (my_wi != token_.holder) ++stats_.token_violations;
      ++transmitters_this_cycle_;
      channel_.busy_until = now_ + wireless_ser_;
      stats_.wireless_busy_cycles += wireless_ser_;
      ++stats_.wireless_data_flits;
      push_flit(out_switch, kWireless, out_vc, {s.packet, s.seq, now_ + cfg_.hop_latency + wireless_ser_});
    } else {
      ++link_flits_[port_link_[sw][o]];
      push_flit(out_switch, kOpposite[o], out_vc, {s.packet, s.seq, now_ + cfg_.hop_latency});
    }
  }
}

void Network::transmit_control() {
  if (scheduler_wi_ < 0 || !may_transmit()) return;
  const int sw = topo_.wireless_interfaces()[token_.holder];
  auto& q = bcast_queue_[sw];
  auto& head = bcast_head_[sw];
  if (head >= q.size()) return;
  const std::uint32_t id = q[head++];
  if (head == q.size()) {
    q.clear();
    head = 0;
  }
  Packet& p = packets_[id];
  Broadcast& b = broadcasts_[p.broadcast];
  ++b.sent;
  ++transmitters_this_cycle_;
  channel_.busy_until = now_ + wireless_ser_;
  stats_.wireless_busy_cycles += wireless_ser_;
  stats_.control_wireless_cycles += wireless_ser_;
  ++stats_.wireless_control_flits;
  if (b.sent == b.total) b.complete = now_ + cfg_.hop_latency + wireless_ser_;
  ++stats_.packets_delivered;
  p.live = false;
  free_packets_.push_back(id);
}

bool Network::wireless_demand(int sw) const {
  if (bcast_head_[sw] < bcast_queue_[sw].size()) return true;
  for (int p = 0; p < kNumPorts; ++p) {
    if (port_flits_[static_cast<std::size_t>(sw) * kNumPorts + p] == 0) continue;
    for (int v = 0; v < vcs_per_port_; ++v) {
      const Vc& c = vc(sw, p, v);
      if (c.count == 0) continue;
      if (c.out_port == kWireless) return true;
      if (c.out_port < 0 && c.front().seq == 0) {
        const Packet& pk = packets_[c.front().packet];
        if (!pk.control && pk.dst != sw && routing_.table(pk.epoch).link(sw, pk.dst) < 0) return true;
      }
    }
  }
  return false;
}

void Network::update_token() {
  stats_.max_transmitters_per_cycle = std::max<std::int64_t>(stats_.max_transmitters_per_cycle, transmitters_this_cycle_);
  if (transmitters_this_cycle_ > 1) ++stats_.token_violations;
  transmitters_this_cycle_ = 0;
  if (topo_.num_wis() <= 1) return;
  ++token_.held_for;
  if (!channel_.idle(now_ + 1)) return;
  const int sw = topo_.wireless_interfaces()[token_.holder];
  // A holder that cannot finish another flit within max_hold releases now.
  const bool spent = token_.held_for + wireless_ser_ > token_.max_hold;
  if (spent || !wireless_demand(sw)) {
    token_ = token_advance(token_);
    token_stats_.granted(token_.holder, now_ + 1);
  }
}

void Network::wake_injector(int core) {
  Injector& in = injectors_[core];
  if (in.listed) return;
  in.listed = true;
  busy_injectors_.push_back(core);
}

void Network::inject() {
  if (busy_injectors_.empty()) return;
  for (const int core : busy_injectors_) {
    Injector& in = injectors_[core];
    if (in.control_head < in.control.size()) {
      const int cv = control_vc();
      if (vc_free(core, kLocal, cv) && has_credit(core, kLocal, cv)) {
        const std::uint32_t id = in.control[in.control_head++];
        if (in.control_head == in.control.size()) {
          in.control.clear();
          in.control_head = 0;
        }
        vc(core, kLocal, cv).owner = id;
        push_flit(core, kLocal, cv, {id, 0, now_});
        ++stats_.flits_injected;
        ++in_network_;
        --queued_flits_;
        continue;  // one flit per cycle through the local port
      }
    }
    if (in.cur_data < 0 && in.data_head < in.data.size()) {
      for (int v = 0; v < cfg_.data_vcs; ++v) {
        if (vc_free(core, kLocal, v)) {
          in.cur_data = in.data[in.data_head++];
          in.cur_data_vc = v;
          in.cur_data_seq = 0;
          vc(core, kLocal, v).owner = in.cur_data;
          break;
        }
      }
      if (in.data_head == in.data.size()) {
        in.data.clear();
        in.data_head = 0;
      }
    }
    if (in.cur_data >= 0 && has_credit(core, kLocal, in.cur_data_vc)) {
      const auto id = static_cast<std::uint32_t>(in.cur_data);
      push_flit(core, kLocal, in.cur_data_vc, {id, in.cur_data_seq, now_});
      ++stats_.flits_injected;
      ++in_network_;
      --queued_flits_;
      if (++in.cur_data_seq == packets_[id].flits) in.cur_data = -1;
    }
  }
  std::erase_if(busy_injectors_, [this](int core) {
    Injector& in = injectors_[core];
    if (in.pending()) return false;
    in.listed = false;
    return true;
  });
}

void Network::generate_traffic() {
  if (!traffic_ || traffic_->next_event() > now_) return;
  traffic_->poll(
      now_, [this](int task) { return task_active(task); },
      [this](const PacketRequest& r) {
        const int src = tasks_.core_of(r.src_task);
        const int dst = tasks_.core_of(r.dst_task);
        if (src != dst) inject_packet(src, dst, r.flits);
      });
}

void Network::send_reports() {
  if (cfg_.report_interval <= 0 || now_ == 0 || now_ % cfg_.report_interval != 0) return;
  const auto snap = snapshot();
  const auto u = utilization_between(last_report_, snap);
  last_report_ = snap;
  const int sched = cfg_.scheduler_core;
  auto code = [&](int comp) -> std::uint32_t {
    return comp < 0 ? 0u : static_cast<std::uint32_t>(std::lround(std::clamp(u[comp], 0.0, 1.0) * 255.0));
  };
  for (int s = 0; s < topo_.num_switches(); ++s) {
    if (s == sched) continue;
    const int east = topo_.mesh_neighbor(s, Direction::East);
    const int south = topo_.mesh_neighbor(s, Direction::South);
    const int le = east >= 0 ? topo_.link_component(topo_.link_between(s, east)) : -1;
    const int ls = south >= 0 ? topo_.link_component(topo_.link_between(s, south)) : -1;
    const auto id = new_packet(s, sched, 1, true);
    packets_[id].report = true;
    packets_[id].payload = code(topo_.core_component(s)) << 24 | code(topo_.switch_component(s)) << 16 |
                           code(le) << 8 | code(ls);
    injectors_[s].control.push_back(id);
    wake_injector(s);
  }
}

void Network::step() {
  if (!pending_actions_.empty()) run_pending_actions();
  routing_.advance(now_);
  generate_traffic();
  send_reports();
  inject();
  transmit_control();
  for (int s = 0; s < topo_.num_switches(); ++s) process_switch(s);
  update_token();
  if (in_network_ > 0 && now_ - last_progress_ > cfg_.watchdog_cycles) stats_.deadlock = true;
  if (in_network_ == 0) last_progress_ = now_;
  ++now_;
}

void Network::run_until(std::int64_t cycle) {
  while (now_ < cycle) step();
}

bool Network::empty() const {
  if (in_network_ != 0 || queued_flits_ != 0) return false;
  for (std::size_t s = 0; s < bcast_queue_.size(); ++s) {
    if (bcast_head_[s] < bcast_queue_[s].size()) return false;
  }
  return true;
}

std::int64_t Network::flits_queued() const { return queued_flits_; }

bool Network::drain(std::int64_t max_cycles) {
  if (traffic_) traffic_->stop();
  const std::int64_t limit = now_ + max_cycles;
  while (!empty() && now_ < limit) step();
  return empty();
}

UtilizationSnapshot Network::snapshot() const {
  UtilizationSnapshot s;
  s.cycle = now_;
  s.core_busy = core_busy_;
  const std::int64_t a = core_checkpoint_;
  const std::int64_t b = now_;
  if (b > a) {
    for (int c = 0; c < topo_.num_cores(); ++c) {
      const int t = tasks_.task_on(c);
      const std::int64_t lo = std::max(a, pause_from_[t]);
      const std::int64_t hi = std::min(b, pause_until_[t]);
      s.core_busy[c] += loads_[t] * static_cast<double>(b - a - std::max<std::int64_t>(0, hi - lo));
    }
  }
  s.switch_occupancy.resize(topo_.num_switches());
  for (int sw = 0; sw < topo_.num_switches(); ++sw) {
    s.switch_occupancy[sw] = occ_integral_[sw] + switch_flits_[sw] * (now_ - occ_last_[sw]);
  }
  s.link_flits = link_flits_;
  return s;
}

UtilizationVector Network::utilization_between(const UtilizationSnapshot& a, const UtilizationSnapshot& b) const {
  UtilizationVector u{std::vector<double>(topo_.num_components(), 0.0)};
  const double w = static_cast<double>(b.cycle - a.cycle);
  if (w <= 0.0) return u;
  for (int c = 0; c < topo_.num_cores(); ++c) {
    u[topo_.core_component(c)] = std::clamp((b.core_busy[c] - a.core_busy[c]) / w, 0.0, 1.0);
  }
  for (int s = 0; s < topo_.num_switches(); ++s) {
    const double occ = static_cast<double>(b.switch_occupancy[s] - a.switch_occupancy[s]);
    u[topo_.switch_component(s)] = std::clamp(occ / (w * switch_capacity_[s]), 0.0, 1.0);
  }
  for (int l = 0; l < topo_.num_links(); ++l) {
    const double f = static_cast<double>(b.link_flits[l] - a.link_flits[l]);
    u[topo_.link_component(l)] = std::clamp(f / (2.0 * w), 0.0, 1.0);
  }
  return u;
}

}  // namespace winoc
