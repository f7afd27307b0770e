#include "winoc/topology.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "winoc/errors.hpp"

namespace winoc {

const char* to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::Core: return "core";
    case ComponentKind::Switch: return "switch";
    case ComponentKind::Link: return "link";
  }
  return "?";
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::North: return "N";
    case Direction::East: return "E";
    case Direction::South: return "S";
    case Direction::West: return "W";
  }
  return "?";
}

Topology Topology::build_mesh(int grid_w, int grid_h, DieSize die) {
  if (grid_w < 1 || grid_h < 1 || grid_w * grid_h < 2) {
    throw ConfigError(fmt::format("mesh must have at least two switches (got {}x{})", grid_w, grid_h));
  }
  if (!(die.width_mm > 0.0) || !(die.height_mm > 0.0)) {
    throw ConfigError("die dimensions must be positive");
  }

  Topology t;
  t.grid_w_ = grid_w;
  t.grid_h_ = grid_h;
  t.die_ = die;

  const double pitch_x = die.width_mm / grid_w;
  const double pitch_y = die.height_mm / grid_h;
  const int n = grid_w * grid_h;
  t.positions_.resize(n);
  for (int s = 0; s < n; ++s) {
    t.positions_[s] = {(s % grid_w + 0.5) * pitch_x, (s / grid_w + 0.5) * pitch_y};
  }

  // Horizontal links row by row, then vertical links.
  for (int y = 0; y < grid_h; ++y) {
    for (int x = 0; x + 1 < grid_w; ++x) {
      const int a = y * grid_w + x;
      t.links_.push_back({a, a + 1, pitch_x});
    }
  }
  for (int y = 0; y + 1 < grid_h; ++y) {
    for (int x = 0; x < grid_w; ++x) {
      const int a = y * grid_w + x;
      t.links_.push_back({a, a + grid_w, pitch_y});
    }
  }

  t.rebuild_derived();
  return t;
}

Topology Topology::with_wireless(std::vector<int> wi_switches) const {
  std::sort(wi_switches.begin(), wi_switches.end());
  if (std::adjacent_find(wi_switches.begin(), wi_switches.end()) != wi_switches.end()) {
    throw ConfigError("wireless interface switches must be distinct");
  }
  for (int s : wi_switches) {
    if (s < 0 || s >= num_switches()) {
      throw ConfigError(fmt::format("wireless interface switch {} out of range [0, {})", s, num_switches()));
    }
  }
  Topology t = *this;
  t.wis_ = std::move(wi_switches);
  t.rebuild_derived();
  return t;
}

void Topology::rebuild_derived() {
  const int n = num_switches();
  links_of_.assign(n, {});
  for (int l = 0; l < num_links(); ++l) {
    links_of_[links_[l].a].push_back(l);
    links_of_[links_[l].b].push_back(l);
  }

  wi_index_.assign(n, -1);
  for (int i = 0; i < num_wis(); ++i) wi_index_[wis_[i]] = i;

  neighbors_.assign(n, {});
  for (int l = 0; l < num_links(); ++l) {
    neighbors_[links_[l].a].push_back({links_[l].b, l});
    neighbors_[links_[l].b].push_back({links_[l].a, l});
  }
  for (int a : wis_) {
    for (int b : wis_) {
      if (a != b) neighbors_[a].push_back({b, -1});
    }
  }
  for (auto& nb : neighbors_) {
    std::sort(nb.begin(), nb.end(), [](const Neighbor& x, const Neighbor& y) {
      // A WI pair that is also mesh-adjacent keeps both channels; wired first.
      if (x.switch_id != y.switch_id) return x.switch_id < y.switch_id;
      return x.link > y.link;
    });
  }

  hops_.assign(static_cast<std::size_t>(n) * n, 0);
  for (int s = 0; s < n; ++s) {
    const auto row = bfs_hops(*this, s);
    std::copy(row.begin(), row.end(), hops_.begin() + static_cast<std::ptrdiff_t>(s) * n);
  }
}

int Topology::flatten(ComponentId c) const {
  switch (c.kind) {
    case ComponentKind::Core:
      if (c.index < 0 || c.index >= num_cores()) break;
      return c.index;
    case ComponentKind::Switch:
      if (c.index < 0 || c.index >= num_switches()) break;
      return num_switches() + c.index;
    case ComponentKind::Link:
      if (c.index < 0 || c.index >= num_links()) break;
      return 2 * num_switches() + c.index;
  }
  throw RangeError(fmt::format("{} index {} out of range", to_string(c.kind), c.index));
}

ComponentId Topology::unflatten(int flat) const {
  const int n = num_switches();
  if (flat < 0 || flat >= num_components()) {
    throw RangeError(fmt::format("component index {} out of range [0, {})", flat, num_components()));
  }
  if (flat < n) return {ComponentKind::Core, flat};
  if (flat < 2 * n) return {ComponentKind::Switch, flat - n};
  return {ComponentKind::Link, flat - 2 * n};
}

int Topology::mesh_neighbor(int sw, Direction d) const {
  const int x = x_of(sw);
  const int y = y_of(sw);
  switch (d) {
    case Direction::North: return y > 0 ? sw - grid_w_ : -1;
    case Direction::East: return x + 1 < grid_w_ ? sw + 1 : -1;
    case Direction::South: return y + 1 < grid_h_ ? sw + grid_w_ : -1;
    case Direction::West: return x > 0 ? sw - 1 : -1;
  }
  return -1;
}

int Topology::link_between(int a, int b) const {
  for (int l : links_of_[a]) {
    if (links_[l].a == b || links_[l].b == b) return l;
  }
  return -1;
}

int Topology::nearest_wi(int sw) const {
  int best = -1;
  int best_hops = std::numeric_limits<int>::max();
  for (int w : wis_) {
    const int h = hop_distance(sw, w);
    if (h < best_hops) {
      best_hops = h;
      best = w;
    }
  }
  return best;
}

double Topology::mean_hop_count() const {
  const int n = num_switches();
  long long total = 0;
  for (int v : hops_) total += v;
  return static_cast<double>(total) / (static_cast<double>(n) * (n - 1));
}

int Topology::diameter() const {
  return *std::max_element(hops_.begin(), hops_.end());
}

std::string Topology::dump() const {
  std::string out = fmt::format("# topology {}x{} die {:.3f}x{:.3f} mm, {} components, {} WIs\n",
                                grid_w_, grid_h_, die_.width_mm, die_.height_mm,
                                num_components(), num_wis());
  out += "# flat_id kind index x_mm y_mm detail\n";
  for (int c = 0; c < num_cores(); ++c) {
    out += fmt::format("{} core {} {:.3f} {:.3f} switch={}\n", flatten({ComponentKind::Core, c}), c,
                       positions_[c].x_mm, positions_[c].y_mm, c);
  }
  for (int s = 0; s < num_switches(); ++s) {
    out += fmt::format("{} switch {} {:.3f} {:.3f} wi={}\n", flatten({ComponentKind::Switch, s}), s,
                       positions_[s].x_mm, positions_[s].y_mm, is_wi(s) ? "yes" : "no");
  }
  for (int l = 0; l < num_links(); ++l) {
    const auto& lk = links_[l];
    const double mx = 0.5 * (positions_[lk.a].x_mm + positions_[lk.b].x_mm);
    const double my = 0.5 * (positions_[lk.a].y_mm + positions_[lk.b].y_mm);
    out += fmt::format("{} link {} {:.3f} {:.3f} a={} b={} length_mm={:.3f}\n",
                       flatten({ComponentKind::Link, l}), l, mx, my, lk.a, lk.b, lk.length_mm);
  }
  return out;
}

std::vector<int> bfs_hops(const Topology& topo, int src) {
  const int n = topo.num_switches();
  std::vector<int> dist(n, -1);
  std::deque<int> queue{src};
  dist[src] = 0;
  bool wireless_expanded = false;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int l : topo.links_of(u)) {
      const auto& lk = topo.links()[l];
      const int v = lk.a == u ? lk.b : lk.a;
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
    // The WI clique only needs expanding from the first WI reached.
    if (topo.is_wi(u) && !wireless_expanded) {
      wireless_expanded = true;
      for (int w : topo.wireless_interfaces()) {
        if (dist[w] < 0) {
          dist[w] = dist[u] + 1;
          queue.push_back(w);
        }
      }
    }
  }
  return dist;
}

Topology place_wireless_overlay(const Topology& topo, int k) {
  const int n = topo.num_switches();
  if (k < 1 || k > n) {
    throw ConfigError(fmt::format("wi_count must satisfy 1 <= wi_count <= {} (got {})", n, k));
  }
  std::vector<int> chosen;
  for (int round = 0; round < k; ++round) {
    int best = -1;
    double best_mean = std::numeric_limits<double>::infinity();
    long long best_spread = std::numeric_limits<long long>::max();
    for (int cand = 0; cand < n; ++cand) {
      if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
      auto trial = chosen;
      trial.push_back(cand);
      const Topology t = topo.with_wireless(trial);
      const double mean = t.mean_hop_count();
      long long spread = 0;
      for (int s = 0; s < n; ++s) spread += t.hop_distance(cand, s);
      // Exact comparison is safe: means share a denominator.
      if (mean < best_mean || (mean == best_mean && spread < best_spread)) {
        best = cand;
        best_mean = mean;
        best_spread = spread;
      }
    }
    chosen.push_back(best);
  }
  return topo.with_wireless(chosen);
}

}  // namespace winoc
