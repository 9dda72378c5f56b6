#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "lazydash/hypergraph.hpp"
#include "lazydash/rng.hpp"

using lazydash::Hypergraph;
using lazydash::Rng;

namespace {
using G = Hypergraph<int, int>;
}

TEST_CASE("add_vertex assigns sequential stable ids") {
  G g;
  REQUIRE(g.add_vertex(7) == 0);
  REQUIRE(g.counts() == std::pair<int, int>{1, 0});
  REQUIRE(g.add_vertex(7) == 1);  // not deduplicating
  G g2;
  for (int i = 0; i < 100; ++i) REQUIRE(g2.add_vertex(i) == i);
  REQUIRE(g2.num_vertices() == 100);
}

TEST_CASE("add_hyperarc wires forward stars") {
  G g;
  g.add_vertex(0);
  g.add_vertex(1);
  g.add_vertex(2);
  REQUIRE(g.add_hyperarc({0}, {1}, 0) == 0);
  const int a = g.add_hyperarc({0, 1}, {2}, 1);
  REQUIRE(std::count(g.forward_star(0).begin(), g.forward_star(0).end(), a) == 1);
  REQUIRE(std::count(g.forward_star(1).begin(), g.forward_star(1).end(), a) == 1);
  REQUIRE(g.forward_star(2).empty());
}

TEST_CASE("add_hyperarc rejects bad input") {
  G g;
  g.add_vertex(0);
  REQUIRE_THROWS_AS(g.add_hyperarc({0}, {}, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(g.add_hyperarc({}, {0}, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(g.add_hyperarc({0}, {5}, 0), std::out_of_range);
  REQUIRE_THROWS_AS(g.forward_star(3), std::out_of_range);
}

TEST_CASE("forward_star matches brute force on random graphs") {
  Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    G g;
    const int nv = 2 + static_cast<int>(rng.uniform_int(60));
    for (int i = 0; i < nv; ++i) g.add_vertex(i);
    const int na = static_cast<int>(rng.uniform_int(400));
    for (int i = 0; i < na; ++i) {
      std::set<int> tail, head;
      const int nt = 1 + static_cast<int>(rng.uniform_int(3));
      const int nh = 1 + static_cast<int>(rng.uniform_int(3));
      while (static_cast<int>(tail.size()) < nt) {
        tail.insert(static_cast<int>(rng.uniform_int(nv)));
      }
      while (static_cast<int>(head.size()) < nh) {
        head.insert(static_cast<int>(rng.uniform_int(nv)));
      }
      g.add_hyperarc({tail.begin(), tail.end()}, {head.begin(), head.end()}, i);
    }
    for (int v = 0; v < nv; ++v) {
      std::set<int> brute;
      for (int a = 0; a < g.num_hyperarcs(); ++a) {
        for (int t : g.arc(a).tail) {
          if (t == v) brute.insert(a);
        }
      }
      const auto& fs = g.forward_star(v);
      REQUIRE(std::set<int>(fs.begin(), fs.end()) == brute);
    }
  }
}

TEST_CASE("counts are monotone under adds") {
  G g;
  auto prev = g.counts();
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    if (g.num_vertices() < 2 || rng.uniform() < 0.5) {
      g.add_vertex(i);
    } else {
      const int u = static_cast<int>(rng.uniform_int(g.num_vertices()));
      const int v = static_cast<int>(rng.uniform_int(g.num_vertices()));
      g.add_hyperarc({u}, {v}, i);
    }
    const auto cur = g.counts();
    REQUIRE(cur.first >= prev.first);
    REQUIRE(cur.second >= prev.second);
    prev = cur;
  }
}
