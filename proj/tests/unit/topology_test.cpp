#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <queue>
#include <vector>

#include <gtest/gtest.h>

#include "winoc/errors.hpp"
#include "winoc/topology.hpp"

using namespace winoc;

namespace {

// Independent BFS over grid coordinates plus an all-pairs WI clique.
std::vector<int> reference_hops(int w, int h, const std::vector<int>& wis, int src) {
  const int n = w * h;
  std::vector<int> dist(n, -1);
  std::queue<int> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    const int s = q.front();
    q.pop();
    std::vector<int> next;
    const int x = s % w;
    const int y = s / w;
    if (x > 0) next.push_back(s - 1);
    if (x + 1 < w) next.push_back(s + 1);
    if (y > 0) next.push_back(s - w);
    if (y + 1 < h) next.push_back(s + w);
    if (std::find(wis.begin(), wis.end(), s) != wis.end()) next.insert(next.end(), wis.begin(), wis.end());
    for (int t : next) {
      if (dist[t] < 0) {
        dist[t] = dist[s] + 1;
        q.push(t);
      }
    }
  }
  return dist;
}

double reference_mean(int w, int h, const std::vector<int>& wis) {
  const int n = w * h;
  double sum = 0;
  for (int s = 0; s < n; ++s) {
    for (int d : reference_hops(w, h, wis, s)) sum += d;
  }
  return sum / (static_cast<double>(n) * (n - 1));
}

}  // namespace

TEST(Topology, DefaultMeshCounts) {
  const auto t = Topology::build_mesh(8, 8, {20, 20});
  EXPECT_EQ(t.num_switches(), 64);
  EXPECT_EQ(t.num_links(), 112);
  EXPECT_EQ(t.num_components(), 240);
}

TEST(Topology, SmallestMesh) {
  const auto t = Topology::build_mesh(2, 2);
  EXPECT_EQ(t.num_switches(), 4);
  EXPECT_EQ(t.num_links(), 4);
  EXPECT_EQ(t.num_components(), 12);
}

TEST(Topology, FourByFourLinksMatchEnumeration) {
  const auto t = Topology::build_mesh(4, 4);
  int edges = 0;
  for (int a = 0; a < 16; ++a) {
    for (int b = a + 1; b < 16; ++b) {
      if (std::abs(a % 4 - b % 4) + std::abs(a / 4 - b / 4) == 1) ++edges;
    }
  }
  EXPECT_EQ(edges, 24);
  EXPECT_EQ(t.num_links(), edges);
  EXPECT_EQ(t.num_components(), 56);
}

TEST(Topology, RejectsDegenerateMesh) {
  EXPECT_THROW(Topology::build_mesh(1, 1), ConfigError);
  EXPECT_THROW(Topology::build_mesh(0, 4), ConfigError);
  EXPECT_THROW(Topology::build_mesh(4, 4, {0.0, 20.0}), ConfigError);
}

TEST(Topology, LinkLengthsArePitch) {
  const auto t = Topology::build_mesh(8, 8, {20, 16});
  for (const auto& l : t.links()) {
    const bool horizontal = l.b == l.a + 1;
    EXPECT_DOUBLE_EQ(l.length_mm, horizontal ? 2.5 : 2.0);
  }
}

TEST(Topology, FlattenRoundTrip) {
  const auto t = Topology::build_mesh(8, 8);
  for (int i = 0; i < t.num_components(); ++i) EXPECT_EQ(t.flatten(t.unflatten(i)), i);
  EXPECT_EQ(t.unflatten(0).kind, ComponentKind::Core);
  EXPECT_EQ(t.unflatten(64).kind, ComponentKind::Switch);
  EXPECT_EQ(t.unflatten(128).kind, ComponentKind::Link);
  EXPECT_THROW(t.unflatten(240), RangeError);
}

TEST(Topology, HopDistanceWithoutWireless) {
  const auto t = Topology::build_mesh(8, 8);
  EXPECT_EQ(t.hop_distance(5, 5), 0);
  EXPECT_EQ(t.hop_distance(t.switch_at(0, 0), t.switch_at(7, 7)), 14);
  EXPECT_EQ(t.diameter(), 14);
}

TEST(Topology, CornerWisShortcut) {
  const auto t = Topology::build_mesh(8, 8).with_wireless({0, 63});
  EXPECT_EQ(t.hop_distance(0, 63), 1);
  const auto ref = reference_hops(8, 8, {0, 63}, 7);
  for (int d = 0; d < 64; ++d) EXPECT_EQ(t.hop_distance(7, d), ref[d]);
}

TEST(Topology, SingleWiIsOneMedian) {
  const auto t = place_wireless_overlay(Topology::build_mesh(8, 8), 1);
  ASSERT_EQ(t.num_wis(), 1);
  double best = 1e9;
  for (int s = 0; s < 64; ++s) best = std::min(best, reference_mean(8, 8, {s}));
  const int wi = t.wireless_interfaces()[0];
  EXPECT_DOUBLE_EQ(reference_mean(8, 8, {wi}), best);
  EXPECT_NEAR(t.mean_hop_count(), best, 1e-12);
  // A centre switch of the 8x8 grid.
  EXPECT_TRUE(t.x_of(wi) == 3 || t.x_of(wi) == 4);
  EXPECT_TRUE(t.y_of(wi) == 3 || t.y_of(wi) == 4);
}

TEST(Topology, FourWisBeatOne) {
  const auto mesh = Topology::build_mesh(8, 8);
  const auto one = place_wireless_overlay(mesh, 1);
  const auto four = place_wireless_overlay(mesh, 4);
  std::vector<int> wis(four.wireless_interfaces().begin(), four.wireless_interfaces().end());
  EXPECT_LT(reference_mean(8, 8, wis), reference_mean(8, 8, {one.wireless_interfaces()[0]}));
  EXPECT_NEAR(four.mean_hop_count(), reference_mean(8, 8, wis), 1e-12);
}

TEST(Topology, AllWisOnTwoByTwo) {
  const auto t = place_wireless_overlay(Topology::build_mesh(2, 2), 4);
  EXPECT_EQ(t.num_wis(), 4);
  for (int a = 0; a < 4; ++a) {
    EXPECT_TRUE(t.is_wi(a));
    for (int b = 0; b < 4; ++b) EXPECT_LE(t.hop_distance(a, b), 1);
  }
}

TEST(Topology, OverlayRejectsBadCounts) {
  const auto mesh = Topology::build_mesh(2, 2);
  EXPECT_THROW(place_wireless_overlay(mesh, 0), ConfigError);
  EXPECT_THROW(place_wireless_overlay(mesh, 5), ConfigError);
  EXPECT_THROW(mesh.with_wireless({1, 1}), ConfigError);
}

TEST(Topology, NeighborsSortedWiredFirst) {
  // 14 and 15 are mesh neighbours and both WIs.
  const auto t = Topology::build_mesh(8, 8).with_wireless({14, 15, 40});
  for (int s = 0; s < t.num_switches(); ++s) {
    const auto nbs = t.neighbors(s);
    for (std::size_t k = 1; k < nbs.size(); ++k) {
      EXPECT_LE(nbs[k - 1].switch_id, nbs[k].switch_id);
      if (nbs[k - 1].switch_id == nbs[k].switch_id) {
        EXPECT_FALSE(nbs[k - 1].wireless());
        EXPECT_TRUE(nbs[k].wireless());
      }
    }
  }
  const auto n14 = t.neighbors(14);
  EXPECT_EQ(std::count_if(n14.begin(), n14.end(), [](const Neighbor& n) { return n.switch_id == 15; }), 2);
}

TEST(Topology, LineMesh) {
  const auto t = Topology::build_mesh(5, 1);
  EXPECT_EQ(t.num_links(), 4);
  EXPECT_EQ(t.hop_distance(0, 4), 4);
}

TEST(Topology, DumpListsEveryComponent) {
  const auto t = place_wireless_overlay(Topology::build_mesh(4, 4), 2);
  const auto text = t.dump();
  EXPECT_NE(text.find("link"), std::string::npos);
  EXPECT_GE(std::count(text.begin(), text.end(), '\n'), t.num_components());
}
