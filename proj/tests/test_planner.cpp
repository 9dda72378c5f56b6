#include <catch2/catch_amalgamated.hpp>

#include "lazydash/planner.hpp"

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

}  // namespace

TEST_CASE("lazy mode solves the open 1-robot scenario in one iteration") {
  const World w = one_robot_one_object();
  Planner planner(w, {}, 1);
  const auto report = planner.plan_lazy();
  REQUIRE(report.outcome == Outcome::Solved);
  REQUIRE(report.iterations == 1);
  REQUIRE(report.timed.has_value());
  REQUIRE(report.makespan > 0.0);
  // two moves (approach, carry) plus source/sink and two transitions
  int moves = 0, transitions = 0;
  for (const auto& a : report.plan.arcs) {
    moves += a.kind == PlanArc::Kind::Move ? 1 : 0;
    transitions += a.kind == PlanArc::Kind::Transition ? 1 : 0;
  }
  REQUIRE(moves == 2);
  REQUIRE(transitions == 2);
}

TEST_CASE("eager mode solves the open 1-robot scenario") {
  const World w = one_robot_one_object();
  Planner planner(w, {}, 1);
  const auto report = planner.plan_eager();
  REQUIRE(report.outcome == Outcome::Solved);
}
