#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "lazydash/task_query.hpp"

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

std::vector<TaskAction> actions_of(const TaskSpace& ts, const UnvalidatedSchedule& s) {
  std::vector<TaskAction> out;
  for (const auto& step : s.steps) out.push_back(ts.graph().arc(step.arc).payload.action);
  return out;
}

// Exhaustive oracle: breadth-first enumeration of all frontier states under
// the same expansion semantics, recording the shortest action sequence that
// reaches the sink. Independent of the greedy search implementation.
std::optional<int> shortest_plan_length(const TaskSpace& ts, const ConstraintSet& cs) {
  const World& world = ts.world();
  using State = std::pair<std::map<int, int>, std::set<int>>;  // frontier, heads
  State init;
  for (const auto& r : world.robots) init.first[robot_entity(r.id)] = ts.source_vertex();
  for (const auto& ob : world.objects) {
    init.first[object_entity(world, ob.id)] = ts.source_vertex();
  }
  std::set<State> seen{init};
  std::vector<std::pair<State, int>> frontier{{init, 0}};
  while (!frontier.empty()) {
    std::vector<std::pair<State, int>> next;
    for (auto& [state, depth] : frontier) {
      std::set<int> in_frontier;
      for (auto& [e, v] : state.first) in_frontier.insert(v);
      for (int aid = 0; aid < ts.graph().num_hyperarcs(); ++aid) {
        const auto& arc = ts.graph().arc(aid);
        bool full = true;
        for (int t : arc.tail) {
          if (!in_frontier.count(t)) full = false;
        }
        if (!full) continue;
        if (constraint_blocks(state.first, state.second, arc, cs)) continue;
        if (aid == ts.sink_arc()) return depth + 1;
        State child = state;
        for (int h : arc.head) {
          for (int e : ts.covered_entities(h)) child.first[e] = h;
          child.second.insert(h);
        }
        if (seen.insert(child).second) next.push_back({child, depth + 1});
      }
    }
    frontier = std::move(next);
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("greedy query finds the canonical pick-place plan") {
  const World w = one_robot_one_object();
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  const auto res = query_task_plan(ts, t, {});
  REQUIRE(res.schedule.has_value());
  const auto acts = actions_of(ts, *res.schedule);
  REQUIRE(acts == std::vector<TaskAction>{TaskAction::SourceArc, TaskAction::Pick,
                                          TaskAction::Place, TaskAction::SinkArc});
  // the exhaustive oracle confirms this is the unique shortest sequence
  REQUIRE(shortest_plan_length(ts, {}) == 4);
  // pick must take the object from start, place must deliver it to goal
  REQUIRE(ts.graph().arc(res.schedule->steps[1].arc).payload.pose == kStartPose);
  REQUIRE(ts.graph().arc(res.schedule->steps[2].arc).payload.pose == kGoalPose);
}

TEST_CASE("history constraint can make the query exhaust") {
  const World w = one_robot_one_object();
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  TaskConstraint c;
  c.kind = ConstraintKind::History;
  c.v_pre = ts.object_at_vertex(0, kStartPose);
  c.v_post = *ts.find_holding_vertex(0, 0);
  const auto res = query_task_plan(ts, t, {c});
  REQUIRE_FALSE(res.schedule.has_value());
  REQUIRE(res.failure == TaskQueryFailure::Exhausted);
  REQUIRE_FALSE(shortest_plan_length(ts, {c}).has_value());
}

TEST_CASE("identity task yields a source-sink schedule") {
  World w = one_robot_one_object();
  w.objects[0].goal = w.objects[0].start;  // already done
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  const auto res = query_task_plan(ts, t, {});
  REQUIRE(res.schedule.has_value());
  const auto acts = actions_of(ts, *res.schedule);
  // goal pose duplicates start, so the sink tail is immediately satisfiable
  REQUIRE(acts.front() == TaskAction::SourceArc);
  REQUIRE(acts.back() == TaskAction::SinkArc);
  REQUIRE(acts.size() <= 4);
}

TEST_CASE("expandable_arcs respects partial tails and constraints") {
  World w;
  w.bounds = {0, 0, 8, 4};
  w.surfaces = {{"table", {0.5, 0.5, 7.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.6, 0.05, 1.0}, {1, {5, 2}, 1.6, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1.0, 2}, {6.0, 2}}};
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  const TaskQuery q(ts, t);

  std::map<int, int> frontier{{robot_entity(0), ts.robot_free_vertex(0)},
                              {robot_entity(1), ts.robot_free_vertex(1)},
                              {object_entity(w, 0), ts.object_at_vertex(0, kStartPose)}};
  std::map<int, int> poses{{0, kStartPose}};
  auto arcs = q.expandable_arcs(frontier, {}, poses, {});
  // only robot 0 reaches the start pose; handovers need a holding tail
  REQUIRE(arcs.size() == 1);
  REQUIRE(ts.graph().arc(arcs[0]).payload.action == TaskAction::Pick);
  REQUIRE(ts.graph().arc(arcs[0]).payload.robot == 0);

  // a frontier constraint on the produced head suppresses the expansion
  TaskConstraint c;
  c.kind = ConstraintKind::Frontier;
  c.v_pre = ts.object_at_vertex(0, kStartPose);
  c.v_post = *ts.find_holding_vertex(0, 0);
  REQUIRE(q.expandable_arcs(frontier, {}, poses, {c}).empty());
  // frontier constraints are state-local: without v_pre present they lift
  std::map<int, int> frontier2 = frontier;
  frontier2[object_entity(w, 0)] = ts.object_at_vertex(0, kGoalPose);
  REQUIRE_FALSE(q.expandable_arcs(frontier2, {}, poses, {c}).empty());
}

TEST_CASE("heuristic distances") {
  World w;
  w.bounds = {0, 0, 10, 10};
  w.surfaces = {{"table", {0.5, 0.5, 9.5, 9.5}}};
  w.robots = {{0, {0.5, 0.5}, 9.0, 0.05, 1.0}, {1, {6.5, 0.5}, 9.0, 0.05, 1.0}};
  w.objects = {{0, 0.1, {3.5, 4.5}, {5, 5}}};
  const PoseTable t = PoseTable::from_world(w);
  TaskArc pick{TaskAction::Pick, 0, -1, 0, kStartPose};
  REQUIRE(heuristic_cost(pick, w, t) == Catch::Approx(5.0));
  TaskArc ho{TaskAction::Handover, 0, 1, 0, -1};
  REQUIRE(heuristic_cost(ho, w, t) == Catch::Approx(6.0));
  TaskArc sink{TaskAction::SinkArc, -1, -1, -1, -1};
  REQUIRE(heuristic_cost(sink, w, t) == 0.0);
}

TEST_CASE("schedules satisfy the partition property under replay") {
  World w;
  w.bounds = {0, 0, 8, 4};
  w.surfaces = {{"table", {0.5, 0.5, 7.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.7, 0.05, 1.0}, {1, {5, 2}, 1.7, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1.0, 2}, {6.0, 2}}, {1, 0.1, {5.8, 1.4}, {1.1, 1.4}}};
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  const auto res = query_task_plan(ts, t, {});
  REQUIRE(res.schedule.has_value());

  // replay: applying each arc to its snapshot yields the next snapshot
  std::map<int, int> frontier = res.schedule->steps.front().frontier_before;
  for (size_t i = 0; i < res.schedule->steps.size(); ++i) {
    const auto& step = res.schedule->steps[i];
    REQUIRE(step.frontier_before == frontier);
    // partition property: every entity covered exactly once
    REQUIRE(static_cast<int>(frontier.size()) == num_entities(w));
    std::set<int> tails;
    for (auto& [e, v] : frontier) tails.insert(v);
    for (int t2 : ts.graph().arc(step.arc).tail) REQUIRE(tails.count(t2) == 1);
    for (int h : ts.graph().arc(step.arc).head) {
      for (int e : ts.covered_entities(h)) frontier[e] = h;
    }
  }
  // the plan crosses the gap: it must contain a handover each way
  int handovers = 0;
  for (const auto& step : res.schedule->steps) {
    if (ts.graph().arc(step.arc).payload.action == TaskAction::Handover) handovers++;
  }
  REQUIRE(handovers >= 2);
}

TEST_CASE("determinism and constraint monotonicity") {
  const World w = one_robot_one_object();
  const PoseTable t = PoseTable::from_world(w);
  const TaskSpace ts = TaskSpace::build(w, t);
  const auto a = query_task_plan(ts, t, {});
  const auto b = query_task_plan(ts, t, {});
  REQUIRE(a.schedule.has_value());
  REQUIRE(b.schedule.has_value());
  REQUIRE(a.schedule->steps.size() == b.schedule->steps.size());
  for (size_t i = 0; i < a.schedule->steps.size(); ++i) {
    REQUIRE(a.schedule->steps[i].arc == b.schedule->steps[i].arc);
  }
  REQUIRE(a.stats.expansions == b.stats.expansions);
}
