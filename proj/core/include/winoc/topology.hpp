#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace winoc {

enum class ComponentKind : std::uint8_t { Core, Switch, Link };

/// One thermal component: a core, a switch, or a wired link.
struct ComponentId {
  ComponentKind kind;
  int index;

  friend bool operator==(const ComponentId&, const ComponentId&) = default;
};

const char* to_string(ComponentKind kind);

struct Point {
  double x_mm = 0.0;
  double y_mm = 0.0;
};

struct DieSize {
  double width_mm = 20.0;
  double height_mm = 20.0;
};

/// Undirected wired link; endpoints stored with a < b.
struct WiredLink {
  int a = 0;
  int b = 0;
  double length_mm = 0.0;
};

/// Mesh directions. Switch s sits at (s % grid_w, s / grid_w); North is y - 1.
enum class Direction : std::uint8_t { North, East, South, West };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::North, Direction::East, Direction::South, Direction::West};

const char* to_string(Direction d);

/// A hop reachable from a switch in one step: either a wired neighbour
/// (link >= 0) or another wireless interface (link == -1).
struct Neighbor {
  int switch_id = 0;
  int link = -1;

  bool wireless() const { return link < 0; }
};

/// Wired 2D mesh with a wireless overlay and one core per switch.
///
/// Component flattening: cores occupy [0, N), switches [N, 2N) and links
/// [2N, 2N + L), where N is the switch count and L the link count. For the
/// default 8x8 grid that is 64 + 64 + 112 = 240 components.
///
/// Instances are immutable; the overlay is added by producing a new value.
class Topology {
 public:
  static Topology build_mesh(int grid_w, int grid_h, DieSize die = {});

  /// Same mesh with the given switches hosting wireless interfaces.
  Topology with_wireless(std::vector<int> wi_switches) const;

  int grid_w() const { return grid_w_; }
  int grid_h() const { return grid_h_; }
  DieSize die() const { return die_; }
  int num_switches() const { return grid_w_ * grid_h_; }
  int num_cores() const { return num_switches(); }
  int num_links() const { return static_cast<int>(links_.size()); }
  int num_components() const { return 2 * num_switches() + num_links(); }

  int flatten(ComponentId c) const;
  ComponentId unflatten(int flat) const;
  ComponentKind kind_of(int flat) const { return unflatten(flat).kind; }

  int core_component(int core) const { return core; }
  int switch_component(int sw) const { return num_switches() + sw; }
  int link_component(int link) const { return 2 * num_switches() + link; }

  int x_of(int sw) const { return sw % grid_w_; }
  int y_of(int sw) const { return sw / grid_w_; }
  int switch_at(int x, int y) const { return y * grid_w_ + x; }

  std::span<const Point> switch_positions() const { return positions_; }
  std::span<const WiredLink> links() const { return links_; }

  /// Neighbouring switch in a mesh direction, or -1 at the edge.
  int mesh_neighbor(int sw, Direction d) const;
  /// Link joining two adjacent switches, or -1.
  int link_between(int a, int b) const;
  /// Wired links touching a switch (2 to 4 of them).
  std::span<const int> links_of(int sw) const { return links_of_[sw]; }

  /// All one-hop neighbours (wired and wireless), sorted by switch id; a
  /// mesh-adjacent WI pair appears twice, wired channel first.
  std::span<const Neighbor> neighbors(int sw) const { return neighbors_[sw]; }

  std::span<const int> wireless_interfaces() const { return wis_; }
  int num_wis() const { return static_cast<int>(wis_.size()); }
  bool is_wi(int sw) const { return wi_index_[sw] >= 0; }
  /// Position of `sw` in the WI list, or -1.
  int wi_index(int sw) const { return wi_index_[sw]; }
  /// WI closest (in hops, then lowest index) to a switch.
  int nearest_wi(int sw) const;

  /// Shortest hop count; any WI pair is one hop apart.
  int hop_distance(int a, int b) const { return hops_[a * num_switches() + b]; }
  /// Mean hop count over all ordered pairs of distinct switches.
  double mean_hop_count() const;
  int diameter() const;

  /// Component list with positions and link lengths, one per line.
  std::string dump() const;

 private:
  Topology() = default;
  void rebuild_derived();

  int grid_w_ = 0;
  int grid_h_ = 0;
  DieSize die_;
  std::vector<Point> positions_;
  std::vector<WiredLink> links_;
  std::vector<std::vector<int>> links_of_;
  std::vector<int> wis_;
  std::vector<int> wi_index_;
  std::vector<std::vector<Neighbor>> neighbors_;
  std::vector<int> hops_;
};

/// Chooses k wireless interfaces greedily: each pick minimises the mean
/// all-pairs hop count, then the pick's total distance to every switch,
/// then the switch index. With k = 1 this lands on a grid centre.
Topology place_wireless_overlay(const Topology& topo, int k);

/// Breadth-first hop counts from `src` over wired links and the WI clique.
std::vector<int> bfs_hops(const Topology& topo, int src);

}  // namespace winoc
