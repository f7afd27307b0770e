#include "winoc/routing.hpp"

#include <algorithm>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/dijkstra_shortest_paths.hpp>
#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

ChannelCosts::ChannelCosts(const Topology& topo, std::int64_t base) {
  const int n = topo.num_switches();
  start_.resize(n + 1);
  for (int s = 0; s < n; ++s) start_[s + 1] = start_[s] + static_cast<int>(topo.neighbors(s).size());
  cost_.assign(start_[n], base);
}

void ChannelCosts::set(int sw, int k, std::int64_t c) {
  if (c < 1) throw RangeError(fmt::format("channel cost must be >= 1 (got {})", c));
  cost_[start_[sw] + k] = c;
}

bool HotComponents::any() const {
  return std::find(switches.begin(), switches.end(), true) != switches.end() ||
         std::find(links.begin(), links.end(), true) != links.end();
}

HotComponents HotComponents::from_status(const Topology& topo, const StatusBits& status) {
  if (static_cast<int>(status.bits.size()) != topo.num_components()) {
    throw RangeError("status vector does not match the topology");
  }
  HotComponents h;
  h.switches.resize(topo.num_switches());
  h.links.resize(topo.num_links());
  for (int s = 0; s < topo.num_switches(); ++s) h.switches[s] = status.bits[topo.switch_component(s)];
  for (int l = 0; l < topo.num_links(); ++l) h.links[l] = status.bits[topo.link_component(l)];
  return h;
}

ChannelCosts base_costs(const Topology& topo, std::int64_t wireless_cost) {
  ChannelCosts costs(topo, 1);
  if (wireless_cost == 1) return costs;
  for (int s = 0; s < topo.num_switches(); ++s) {
    const auto nbs = topo.neighbors(s);
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      if (nbs[k].wireless()) costs.set(s, static_cast<int>(k), wireless_cost);
    }
  }
  return costs;
}

ChannelCosts penalized_costs(const Topology& topo, const HotComponents& hot, std::int64_t penalty,
                             std::int64_t wireless_cost) {
  ChannelCosts costs = base_costs(topo, wireless_cost);
  auto sw_hot = [&](int s) { return !hot.switches.empty() && hot.switches[s]; };
  for (int s = 0; s < topo.num_switches(); ++s) {
    const auto nbs = topo.neighbors(s);
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      const auto& nb = nbs[k];
      const bool link_hot = !nb.wireless() && !hot.links.empty() && hot.links[nb.link];
      if (link_hot || sw_hot(s) || sw_hot(nb.switch_id)) {
        costs.set(s, static_cast<int>(k), costs.at(s, static_cast<int>(k)) + penalty);
      }
    }
  }
  return costs;
}

RoutingTable table_from_distances(const Topology& topo, const ChannelCosts& costs, std::vector<std::int64_t> dist) {
  const int n = topo.num_switches();
  RoutingTable t;
  t.n = n;
  t.dist = std::move(dist);
  t.next_switch.assign(static_cast<std::size_t>(n) * n, -1);
  t.next_link.assign(static_cast<std::size_t>(n) * n, -1);
  for (int s = 0; s < n; ++s) {
    const auto nbs = topo.neighbors(s);
    for (int d = 0; d < n; ++d) {
      const std::size_t i = static_cast<std::size_t>(s) * n + d;
      if (s == d) {
        t.next_switch[i] = s;
        continue;
      }
      for (std::size_t k = 0; k < nbs.size(); ++k) {
        const std::int64_t via = costs.at(s, static_cast<int>(k)) + t.distance(nbs[k].switch_id, d);
        if (via == t.dist[i]) {
          t.next_switch[i] = nbs[k].switch_id;
          t.next_link[i] = nbs[k].link;
          break;
        }
      }
    }
  }
  return t;
}

RoutingTable dijkstra_oracle(const Topology& topo, const ChannelCosts& costs) {
  using Graph = boost::adjacency_list<boost::vecS, boost::vecS, boost::directedS, boost::no_property,
                                      boost::property<boost::edge_weight_t, std::int64_t>>;
  const int n = topo.num_switches();
  Graph g(n);
  for (int s = 0; s < n; ++s) {
    const auto nbs = topo.neighbors(s);
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      boost::add_edge(s, nbs[k].switch_id, costs.at(s, static_cast<int>(k)), g);
    }
  }
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n) * n);
  std::vector<std::int64_t> row(n);
  for (int s = 0; s < n; ++s) {
    boost::dijkstra_shortest_paths(
        g, s, boost::distance_map(boost::make_iterator_property_map(row.begin(), boost::get(boost::vertex_index, g)))
                  .distance_inf(kUnreachable));
    std::copy(row.begin(), row.end(), dist.begin() + static_cast<std::ptrdiff_t>(s) * n);
  }
  return table_from_distances(topo, costs, std::move(dist));
}

bool next_hops_acyclic(const RoutingTable& table) {
  const int n = table.n;
  std::vector<int> seen(n, -1);
  for (int d = 0; d < n; ++d) {
    for (int s = 0; s < n; ++s) {
      const int mark = d * n + s;
      int cur = s;
      int steps = 0;
      while (cur != d) {
        if (seen[cur] == mark || cur < 0 || ++steps > n) return false;
        seen[cur] = mark;
        cur = table.next(cur, d);
      }
    }
  }
  return true;
}

DistanceVectorRouting::DistanceVectorRouting(Topology topo, DvConfig cfg)
    : topo_(std::move(topo)), cfg_(cfg) {
  if (cfg_.cadence_cycles < 1) throw ConfigError("dv cadence must satisfy cadence >= 1");
  if (cfg_.wireless_cost < 1) throw ConfigError("wireless cost must satisfy wireless_cost >= 1");
  costs_ = base_costs(topo_, cfg_.wireless_cost);
  if (cfg_.switchover_delay < 0) throw ConfigError("switchover delay must be non-negative");
  const int n = topo_.num_switches();
  dist_.assign(static_cast<std::size_t>(n) * n, kUnreachable);
  for (int s = 0; s < n; ++s) dist_[static_cast<std::size_t>(s) * n + s] = 0;
  while (dv_exchange_step()) {
  }
  for (auto d : dist_) {
    if (d >= kUnreachable) throw ConfigError("topology is disconnected");
  }
  epochs_.push_back(std::make_shared<RoutingTable>(table_from_distances(topo_, costs_, dist_)));
  converged_ = true;
  rounds_ = 0;
}

bool DistanceVectorRouting::trigger_reroute(const HotComponents& hot, std::int64_t trigger_cycle) {
  if (!hot.any()) return false;
  return trigger_with_costs(penalized_costs(topo_, hot, cfg_.penalty, cfg_.wireless_cost), trigger_cycle);
}

bool DistanceVectorRouting::trigger_with_costs(ChannelCosts costs, std::int64_t trigger_cycle) {
  if (costs.num_channels() != costs_.num_channels()) throw RangeError("channel costs do not match the topology");
  if (pending_) switchover();
  costs_ = std::move(costs);
  const int n = topo_.num_switches();
  std::fill(dist_.begin(), dist_.end(), kUnreachable);
  for (int s = 0; s < n; ++s) dist_[static_cast<std::size_t>(s) * n + s] = 0;
  pending_ = true;
  converged_ = false;
  rounds_ = 0;
  trigger_cycle_ = trigger_cycle;
  next_round_cycle_ = trigger_cycle + cfg_.cadence_cycles;
  switchover_cycle_ = trigger_cycle + cfg_.switchover_delay;
  return true;
}

bool DistanceVectorRouting::dv_exchange_step() {
  const int n = topo_.num_switches();
  scratch_ = dist_;  // vectors advertised in the previous round
  bool changed = false;
  for (int s = 0; s < n; ++s) {
    const auto nbs = topo_.neighbors(s);
    std::int64_t* row = dist_.data() + static_cast<std::size_t>(s) * n;
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      const std::int64_t c = costs_.at(s, static_cast<int>(k));
      const std::int64_t* adv = scratch_.data() + static_cast<std::size_t>(nbs[k].switch_id) * n;
      for (int d = 0; d < n; ++d) {
        if (adv[d] >= kUnreachable) continue;
        if (c + adv[d] < row[d]) {
          row[d] = c + adv[d];
          changed = true;
        }
      }
    }
  }
  if (changed) {
    ++rounds_;
  } else {
    converged_ = true;
  }
  return changed;
}

bool DistanceVectorRouting::advance(std::int64_t now) {
  if (!pending_) return false;
  while (!converged_ && next_round_cycle_ <= now) {
    dv_exchange_step();
    if (converged_) {
      log_.push_back({trigger_cycle_, rounds_, static_cast<std::int64_t>(rounds_) * cfg_.cadence_cycles,
                      switchover_cycle_, true});
    }
    next_round_cycle_ += cfg_.cadence_cycles;
  }
  if (now < switchover_cycle_) return false;
  switchover();
  return true;
}

void DistanceVectorRouting::switchover() {
  if (!converged_) {
    // Budget overrun: finish the exchange so data never sees a partial table.
    while (dv_exchange_step()) {
    }
    log_.push_back({trigger_cycle_, rounds_, static_cast<std::int64_t>(rounds_) * cfg_.cadence_cycles,
                    switchover_cycle_, false});
  }
  epochs_.push_back(std::make_shared<RoutingTable>(table_from_distances(topo_, costs_, dist_)));
  pending_ = false;
}

std::string DistanceVectorRouting::dump() const {
  const auto& t = active();
  std::string s = fmt::format("# epoch {} next hops; row = destination, column = source\n", active_epoch());
  for (int d = 0; d < t.n; ++d) {
    s += fmt::format("dst {:3d}:", d);
    for (int src = 0; src < t.n; ++src) s += fmt::format(" {:3d}", t.next(src, d));
    s += '\n';
  }
  return s;
}

}  // namespace winoc
