#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "lazydash/task_space.hpp"

using namespace lazydash;

namespace {

World one_robot_one_object() {
  World w;
  w.bounds = {0, 0, 4, 4};
  w.surfaces = {{"table", {0.5, 0.5, 3.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.8, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1.2, 2}, {2.8, 2}}};
  return w;
}

// Independent rule-enumeration oracle: instantiate the closure rules directly
// and count the multiset of expected arc signatures.
struct ArcSig {
  int action, robot, robot2, object, pose;
  auto operator<=>(const ArcSig&) const = default;
};

std::multiset<ArcSig> enumerate_expected_arcs(const World& w, const PoseTable& t) {
  std::multiset<ArcSig> out;
  for (const auto& ob : w.objects) {
    for (int p = 0; p < t.count(ob.id); ++p) {
      for (const auto& r : w.robots) {
        if (dist(t.position(ob.id, p), r.base) <= r.reach) {
          out.insert({0, r.id, -1, ob.id, p});  // pick
          out.insert({1, r.id, -1, ob.id, p});  // place
        }
      }
    }
    for (const auto& a : w.robots) {
      for (const auto& b : w.robots) {
        if (a.id == b.id) continue;
        if (dist(a.base, b.base) >= a.reach + b.reach) continue;
        // both ends must be able to hold the object somehow
        const auto useful = [&](const RobotModel& r) {
          for (int p = 0; p < t.count(ob.id); ++p) {
            if (dist(t.position(ob.id, p), r.base) <= r.reach) return true;
          }
          for (const auto& o : w.robots) {
            if (o.id == r.id || dist(o.base, r.base) >= o.reach + r.reach) continue;
            for (int p = 0; p < t.count(ob.id); ++p) {
              if (dist(t.position(ob.id, p), o.base) <= o.reach) return true;
            }
          }
          return false;
        };
        if (useful(a) && useful(b)) out.insert({2, a.id, b.id, ob.id, -1});
      }
    }
  }
  out.insert({3, -1, -1, -1, -1});  // source
  out.insert({4, -1, -1, -1, -1});  // sink
  return out;
}

std::multiset<ArcSig> actual_arcs(const TaskSpace& ts) {
  std::multiset<ArcSig> out;
  for (int a = 0; a < ts.graph().num_hyperarcs(); ++a) {
    const TaskArc& arc = ts.graph().arc(a).payload;
    out.insert({static_cast<int>(arc.action), arc.robot, arc.robot2, arc.object,
                arc.action == TaskAction::Handover ? -1 : arc.pose});
  }
  return out;
}

}  // namespace

TEST_CASE("one robot one object closure") {
  const World w = one_robot_one_object();
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  REQUIRE(ts.graph().num_vertices() == 6);
  REQUIRE(ts.graph().num_hyperarcs() == 6);
  REQUIRE(actual_arcs(ts) == enumerate_expected_arcs(w, t));
}

TEST_CASE("disjoint reach discs force exactly one handover pair") {
  World w;
  w.bounds = {0, 0, 8, 4};
  w.surfaces = {{"table", {0.5, 0.5, 7.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.6, 0.05, 1.0}, {1, {5, 2}, 1.6, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1.0, 2}, {6.0, 2}}};  // start only in A, goal only in B
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  int handovers = 0;
  for (int a = 0; a < ts.graph().num_hyperarcs(); ++a) {
    if (ts.graph().arc(a).payload.action == TaskAction::Handover) handovers++;
  }
  REQUIRE(handovers == 2);  // symmetric pair, generated independently
  REQUIRE(actual_arcs(ts) == enumerate_expected_arcs(w, t));
}

TEST_CASE("unreachable goal without handover chain is unsolvable input") {
  World w;
  w.bounds = {0, 0, 10, 4};
  w.surfaces = {{"table", {0.5, 0.5, 9.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.2, 0.05, 1.0}, {1, {8, 2}, 1.2, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1.5, 2}, {8.5, 2}}};  // reach discs never meet
  const PoseTable t = PoseTable::from_world(w);
  REQUIRE_THROWS_AS(TaskSpace::build(w, t), std::runtime_error);
}

TEST_CASE("expand_with_pose grows monotonically and fires the right rules") {
  const World w = one_robot_one_object();
  PoseTable t = PoseTable::from_world(w);
  TaskSpace ts = TaskSpace::build(w, t);
  const auto before = ts.graph().counts();

  ts.expand_with_pose(t, 0, {2.0, 1.2});  // reachable by the only robot
  REQUIRE(ts.graph().num_vertices() == before.first + 1);
  REQUIRE(ts.graph().num_hyperarcs() == before.second + 2);  // one pick, one place
  REQUIRE(actual_arcs(ts) == enumerate_expected_arcs(w, t));

  // a pose reachable by no robot registers but stays inert
  const auto mid = ts.graph().counts();
  ts.expand_with_pose(t, 0, {0.7, 0.7});
  REQUIRE(ts.graph().num_vertices() == mid.first + 1);
  REQUIRE(ts.graph().num_hyperarcs() == mid.second);

  REQUIRE_THROWS_AS(ts.expand_with_pose(t, 0, {0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("rebuild yields an isomorphic hypergraph") {
  const World w = one_robot_one_object();
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace a = TaskSpace::build(w, t);
  const TaskSpace b = TaskSpace::build(w, t);
  REQUIRE(a.graph().counts() == b.graph().counts());
  REQUIRE(actual_arcs(a) == actual_arcs(b));
}

TEST_CASE("reachable_robots agrees with grasp_config") {
  World w;
  w.bounds = {0, 0, 8, 4};
  w.surfaces = {{"table", {0.5, 0.5, 7.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.6, 0.05, 1.0}, {1, {5, 2}, 1.6, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1.0, 2}, {6.0, 2}}};
  Rng rng(17);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{rng.uniform(0, 8), rng.uniform(0, 4)};
    const auto ids = reachable_robots(w, p);
    for (const auto& r : w.robots) {
      const bool in = std::count(ids.begin(), ids.end(), r.id) > 0;
      REQUIRE(in == grasp_config(r, p).has_value());
    }
  }
  REQUIRE(reachable_robots(w, {2, 2}) == std::vector<int>{0});
  REQUIRE(reachable_robots(w, {0.1, 0.1}).empty());
}
