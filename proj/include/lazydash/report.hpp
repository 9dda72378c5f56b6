#pragma once

#include "lazydash/planner.hpp"
#include "lazydash/scenario.hpp"

namespace lazydash {

// Canonical JSON serialization of a run report. Keys are emitted in a fixed
// order and all content except the "timings" block is a pure function of
// (scenario, mode, seed).

inline Json segments_json(const EntityTrack& tr) {
  Json out = Json::array();
  for (const auto& s : tr.segs) {
    out.push_back({s.t0, s.t1, s.a.x, s.a.y, s.b.x, s.b.y});
  }
  return out;
}

inline Json report_to_json(const RunReport& r, const Scenario& scenario) {
  Json j;
  j["mode"] = r.mode;
  j["seed"] = r.seed;
  j["outcome"] = to_string(r.outcome);
  j["failure_note"] = r.failure_note;
  j["metrics"] = {{"task_vertices", r.task_vertices},
                  {"task_hyperarcs", r.task_hyperarcs},
                  {"motion_vertices", r.motion_vertices},
                  {"motion_hyperarcs", r.motion_hyperarcs},
                  {"roadmap_vertices", r.roadmap_vertices},
                  {"roadmap_edges", r.roadmap_edges},
                  {"validated_edges", r.validated_edges},
                  {"collision_checks", r.collision_checks},
                  {"task_expansions", r.task_expansions},
                  {"task_backtracks", r.task_backtracks},
                  {"conflicts", r.conflicts},
                  {"subproblems", r.subproblems},
                  {"iterations", r.iterations},
                  {"makespan", r.makespan}};
  j["iteration_counts"] = Json::array();
  for (const auto& c : r.iteration_counts) {
    j["iteration_counts"].push_back({c[0], c[1], c[2], c[3]});
  }
  j["schedule"] = Json::array();
  for (const auto& a : r.plan.arcs) {
    if (a.kind != PlanArc::Kind::Transition) continue;
    Json e;
    e["action"] = to_string(a.action);
    e["robots"] = a.robots;
    e["object"] = a.object;
    e["pose"] = a.pose;
    e["anchor"] = {a.anchor.x, a.anchor.y};
    j["schedule"].push_back(e);
  }
  if (r.timed) {
    const TimedPlan& t = *r.timed;
    Json ex;
    ex["dt"] = r.dt;
    ex["makespan"] = t.makespan;
    ex["robots"] = Json::array();
    for (const auto& rb : scenario.world.robots) {
      ex["robots"].push_back(
          {{"id", rb.id},
           {"base", {rb.base.x, rb.base.y}},
           {"reach", rb.reach},
           {"arm_halfwidth", rb.arm_halfwidth},
           {"segments", segments_json(t.robot_tracks[static_cast<size_t>(rb.id)])}});
    }
    ex["objects"] = Json::array();
    for (const auto& ob : scenario.world.objects) {
      ex["objects"].push_back(
          {{"id", ob.id},
           {"radius", ob.radius},
           {"start", {ob.start.x, ob.start.y}},
           {"goal", {ob.goal.x, ob.goal.y}},
           {"segments", segments_json(t.object_tracks[static_cast<size_t>(ob.id)])}});
    }
    ex["attachments"] = Json::array();
    for (const auto& a : t.attachments) {
      ex["attachments"].push_back({a.object, a.robot, a.t0, a.t1, a.open ? 1 : 0});
    }
    ex["waivers"] = Json::array();
    for (const auto& wv : t.waivers) {
      Json wj;
      wj["t0"] = wv.t0;
      wj["t1"] = wv.t1;
      wj["anchor"] = {wv.anchor.x, wv.anchor.y};
      wj["radius"] = wv.radius;
      wj["participants"] = Json::array();
      for (const auto& [k, id] : wv.participants) {
        wj["participants"].push_back({std::string(1, k), id});
      }
      ex["waivers"].push_back(wj);
    }
    j["execution"] = ex;
  }
  j["trace"] = Json::array();
  for (const auto& ev : r.trace) {
    Json e;
    e["type"] = ev.type;
    for (const auto& [k, v] : ev.num) e[k] = v;
    for (const auto& [k, v] : ev.str) e[k] = v;
    j["trace"].push_back(e);
  }
  j["timings"] = {{"build_s", r.timers.build_s},
                  {"task_query_s", r.timers.task_query_s},
                  {"task_conflict_s", r.timers.task_conflict_s},
                  {"motion_s", r.timers.motion_s},
                  {"resolve_s", r.timers.resolve_s},
                  {"total_s", r.timers.total_s}};
  return j;
}

// Determinism comparisons strip the wall-clock block; everything else must be
// byte-identical across reruns.
inline Json report_core(Json j) {
  j.erase("timings");
  return j;
}

}  // namespace lazydash
