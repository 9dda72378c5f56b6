#pragma once

#include <array>
#include <chrono>
#include <string>

#include "lazydash/baseline.hpp"
#include "lazydash/resolve.hpp"

namespace lazydash {

// Outer planning loop: orchestrates task-space construction and expansion,
// the task query, task conflict detection, the motion query, and conflict
// resolution, threading task and motion constraints between the layers. Also
// hosts the eager baseline mode.

enum class Outcome { Solved, Infeasible, BudgetExhausted };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Solved: return "Solved";
    case Outcome::Infeasible: return "Infeasible";
    case Outcome::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

struct PlannerParams {
  MotionParams motion;
  ResolveBudgets resolve;
  long task_budget = 100000;
  int max_outer_iterations = 50;
  int max_inner_rounds = 20;
  double wall_clock_budget_s = 300.0;
  int pose_attempts = 100;
};

struct PhaseTimers {
  double build_s = 0.0;
  double task_query_s = 0.0;
  double task_conflict_s = 0.0;
  double motion_s = 0.0;
  double resolve_s = 0.0;
  double total_s = 0.0;
};

// One structured trace event. Values are kept in sorted maps so serialized
// traces are canonical.
struct TraceEvent {
  std::string type;
  std::map<std::string, long> num;
  std::map<std::string, std::string> str;
};

struct RunReport {
  Outcome outcome = Outcome::BudgetExhausted;
  std::string mode;
  std::uint64_t seed = 0;
  long task_vertices = 0, task_hyperarcs = 0;
  long motion_vertices = 0, motion_hyperarcs = 0;
  long roadmap_vertices = 0, roadmap_edges = 0;
  long validated_edges = 0, collision_checks = 0;
  long task_expansions = 0, task_backtracks = 0;
  long conflicts = 0, subproblems = 0;
  int iterations = 0;
  double makespan = 0.0;
  double dt = 0.0;
  std::vector<std::array<long, 4>> iteration_counts;  // vt, et, vm, em
  PhaseTimers timers;
  std::vector<TraceEvent> trace;
  OptimisticSchedule plan;
  std::optional<TimedPlan> timed;
  std::string failure_note;
};

class Planner {
 public:
  Planner(const World& world, const PlannerParams& params, std::uint64_t seed)
      : world_(world), params_(params), seed_(seed), master_(seed) {}

  RunReport plan(const std::string& mode) {
    return mode == "eager" ? plan_eager() : plan_lazy();
  }

  RunReport plan_lazy() {
    RunReport report;
    report.mode = "lazy";
    report.seed = seed_;
    const auto t_total = now();
    table_ = PoseTable::from_world(world_);

    const auto t_build = now();
    std::optional<TaskSpace> ts_holder;
    try {
      ts_holder = TaskSpace::build(world_, table_);
    } catch (const std::runtime_error& e) {
      report.outcome = Outcome::Infeasible;
      report.failure_note = e.what();
      report.timers.total_s = secs(t_total);
      return report;
    }
    TaskSpace& ts = *ts_holder;
    report.timers.build_s += secs(t_build);

    MotionState state(world_, master_.fork("roadmaps"));
    TaskConflictLayer layer(ts, table_);
    ConstraintSet c_t;
    std::vector<MotionConstraint> c_m;
    long expand_counter = 0;

    for (int iter = 0; iter < params_.max_outer_iterations; ++iter) {
      report.iterations = iter + 1;
      if (secs(t_total) > params_.wall_clock_budget_s) {
        report.failure_note = "wall clock budget";
        break;
      }

      // --- task phase: query + conflict fixed point -----------------------
      std::optional<AnchoredSchedule> anchored;
      std::optional<UnvalidatedSchedule> schedule;
      bool fatal = false;
      for (int round = 0; round < params_.max_inner_rounds; ++round) {
        if (!schedule) {
          const auto t_q = now();
          auto res = query_task_plan(ts, table_, c_t, params_.task_budget);
          report.timers.task_query_s += secs(t_q);
          report.task_expansions += res.stats.expansions;
          report.task_backtracks += res.stats.backtracks;
          if (!res.schedule) {
            if (res.failure == TaskQueryFailure::Budget) {
              report.failure_note = "task query budget";
              fatal = true;
              break;
            }
            // exhausted: the constrained space is too small; grow it
            const int obj = expansion_object(c_t, ts);
            auto p = sample_moveout(ts, obj, table_.position(obj, kStartPose),
                                    expand_counter++);
            if (!p) {
              report.failure_note = "task space expansion failed";
              fatal = true;
              break;
            }
            ts.expand_with_pose(table_, obj, *p);
            trace_expand(report, obj, *p, "query_exhausted");
            continue;
          }
          schedule = std::move(res.schedule);
        }
        const auto t_c = now();
        if (!anchored) {
          Rng anchor_rng = master_.fork("anchor")
                               .fork(static_cast<std::uint64_t>(iter))
                               .fork(static_cast<std::uint64_t>(round));
          anchored = layer.anchor(*schedule, anchor_rng);
        }
        auto conflicts = layer.detect(*anchored);
        report.timers.task_conflict_s += secs(t_c);
        if (conflicts.empty()) break;
        report.conflicts += static_cast<long>(conflicts.size());
        {
          TraceEvent ev;
          ev.type = "task_conflicts";
          ev.num["iteration"] = iter;
          ev.num["round"] = round;
          ev.num["count"] = static_cast<long>(conflicts.size());
          report.trace.push_back(ev);
        }
        // batch resolution: the whole schedule's conflicts are collected and
        // all resulting constraints applied before the next query
        bool requery = false;
        Rng resolve_rng = master_.fork("task_resolve")
                              .fork(static_cast<std::uint64_t>(iter))
                              .fork(static_cast<std::uint64_t>(round));
        for (const auto& c : conflicts) {
          auto resolution = layer.resolve(c, *anchored, c_t, resolve_rng);
          if (auto* rp = std::get_if<TaskConflictLayer::ResampledPose>(&resolution)) {
            if (!pose_in_use(*schedule, ts, rp->object, rp->old_pose)) continue;
            ts.expand_with_pose(table_, rp->object, rp->new_point);
            const int new_pose = table_.count(rp->object) - 1;
            if (!patch_schedule(*schedule, ts, rp->object, rp->old_pose, new_pose)) {
              requery = true;
            }
            trace_resample(report, rp->object, rp->old_pose, new_pose);
          } else if (auto* ra =
                         std::get_if<TaskConflictLayer::ResampledAnchor>(&resolution)) {
            anchored->anchors[static_cast<size_t>(ra->index)] = ra->point;
            TraceEvent ev;
            ev.type = "anchor_resample";
            ev.num["index"] = ra->index;
            report.trace.push_back(ev);
          } else if (auto* tc = std::get_if<TaskConstraint>(&resolution)) {
            if (add_constraint(c_t, *tc)) trace_constraint(report, *tc, "task_conflict");
            requery = true;
          } else if (auto* ex =
                         std::get_if<TaskConflictLayer::ExpandTaskSpace>(&resolution)) {
            if (ex->constraint && add_constraint(c_t, *ex->constraint)) {
              trace_constraint(report, *ex->constraint, "task_conflict_cycle");
            }
            const Vec2 near = c.blocker.kind == ConflictBody::Kind::Object
                                  ? std::get<Disc>(c.blocker.shape).center
                                  : table_.position(ex->object, kStartPose);
            auto p = sample_moveout(ts, ex->object, near, expand_counter++);
            if (!p) {
              report.failure_note = "task space expansion failed";
              fatal = true;
              break;
            }
            ts.expand_with_pose(table_, ex->object, *p);
            trace_expand(report, ex->object, *p, "constraint_cycle");
            requery = true;
          } else if (auto* un =
                         std::get_if<TaskConflictLayer::Unresolvable>(&resolution)) {
            if (c.cls == ConflictClass::RobotRobot) continue;  // deferred
            report.outcome = Outcome::Infeasible;
            report.failure_note = un->reason;
            finish(report, ts, state, t_total);
            return report;
          }
        }
        if (fatal) break;
        if (requery) {
          schedule.reset();
          anchored.reset();
        } else {
          // keep the patched schedule and anchors; only the deterministic
          // pick/place anchors need refreshing after a pose substitution
          replay_snapshots(ts, *schedule);
          anchored->schedule = *schedule;
          for (size_t i = 0; i < anchored->schedule.steps.size(); ++i) {
            const TaskArc& a =
                ts.graph().arc(anchored->schedule.steps[i].arc).payload;
            if (a.action == TaskAction::Pick || a.action == TaskAction::Place) {
              anchored->anchors[i] = table_.position(a.object, a.pose);
            }
          }
        }
      }
      if (fatal) break;
      if (!anchored) {
        report.failure_note = "task conflict fixed point not reached";
        break;
      }

      // --- motion phase + coordination ------------------------------------
      bool back_to_task = false;
      for (int mret = 0; mret < params_.max_inner_rounds && !back_to_task; ++mret) {
        const auto t_m = now();
        MotionQuery mq(ts, table_, state, params_.motion);
        Rng motion_rng = master_.fork("motion")
                             .fork(static_cast<std::uint64_t>(iter))
                             .fork(static_cast<std::uint64_t>(mret));
        auto mres = mq.query(*anchored, c_m, motion_rng);
        report.timers.motion_s += secs(t_m);
        if (auto* fb = std::get_if<MotionFeedback>(&mres)) {
          if (add_constraint(c_t, fb->constraint)) {
            trace_constraint(report, fb->constraint, "motion_feedback");
          }
          back_to_task = true;
          break;
        }
        auto plan = std::get<OptimisticSchedule>(std::move(mres));

        const auto t_r = now();
        Resolver resolver(ts, table_, state, params_.motion, params_.resolve);
        std::vector<std::pair<int, int>> sync_pairs;
        Rng resolve_rng = master_.fork("resolve")
                              .fork(static_cast<std::uint64_t>(iter))
                              .fork(static_cast<std::uint64_t>(mret));
        auto rout = resolver.resolve_all(plan, sync_pairs, resolve_rng);
        report.timers.resolve_s += secs(t_r);
        report.conflicts += rout.conflicts;
        report.subproblems += rout.subproblems;
        if (rout.kind == ResolveOutcome::Kind::Valid) {
          report.outcome = Outcome::Solved;
          report.plan = std::move(plan);
          report.timed = std::move(rout.timed);
          report.makespan = report.timed->makespan;
          finish(report, ts, state, t_total);
          return report;
        }
        if (rout.kind == ResolveOutcome::Kind::MotionFeedback) {
          for (const auto& cm : rout.cms) {
            c_m.push_back(cm);
            trace_motion_constraint(report, cm);
          }
          continue;  // retry the motion query under the new regions
        }
        if (rout.kind == ResolveOutcome::Kind::TaskFeedback) {
          for (const auto& ct : rout.cts) {
            if (add_constraint(c_t, ct)) trace_constraint(report, ct, "arc_vertex");
          }
          back_to_task = true;
          break;
        }
        report.failure_note = "conflict resolution iteration limit";
        record_counts(report, ts, state);
        finish(report, ts, state, t_total);
        return report;
      }
      record_counts(report, ts, state);
    }
    if (report.failure_note.empty()) report.failure_note = "outer iteration limit";
    report.outcome = Outcome::BudgetExhausted;
    finish(report, ts, state, t_total);
    return report;
  }

  RunReport plan_eager() {
    RunReport report;
    report.mode = "eager";
    report.seed = seed_;
    const auto t_total = now();
    table_ = PoseTable::from_world(world_);

    const auto t_build = now();
    std::optional<TaskSpace> ts_holder;
    try {
      ts_holder = TaskSpace::build(world_, table_);
    } catch (const std::runtime_error& e) {
      report.outcome = Outcome::Infeasible;
      report.failure_note = e.what();
      report.timers.total_s = secs(t_total);
      return report;
    }
    TaskSpace& ts = *ts_holder;

    MotionState state(world_, master_.fork("roadmaps"));
    Rng eager_rng = master_.fork("eager");
    const EagerModel model =
        build_eager_motion_hypergraph(ts, table_, state, params_.motion, eager_rng);
    report.timers.build_s += secs(t_build);

    ConstraintSet c_t;
    std::vector<MotionConstraint> c_m;
    for (int iter = 0; iter < params_.max_outer_iterations; ++iter) {
      report.iterations = iter + 1;
      if (secs(t_total) > params_.wall_clock_budget_s) {
        report.failure_note = "wall clock budget";
        break;
      }
      const auto t_q = now();
      BaselineQuery bq(ts, table_, state, model, params_.motion);
      auto qres = bq.query(c_t, c_m, params_.task_budget);
      report.timers.task_query_s += secs(t_q);
      report.task_expansions += qres.expansions;
      report.task_backtracks += qres.backtracks;
      if (!qres.plan) {
        report.failure_note = qres.failure == BaselineFailure::Budget
                                  ? "combined query budget"
                                  : "combined query exhausted";
        break;
      }
      auto plan = std::move(*qres.plan);

      const auto t_r = now();
      Resolver resolver(ts, table_, state, params_.motion, params_.resolve);
      std::vector<std::pair<int, int>> sync_pairs;
      Rng resolve_rng = master_.fork("resolve").fork(static_cast<std::uint64_t>(iter));
      auto rout = resolver.resolve_all(plan, sync_pairs, resolve_rng);
      report.timers.resolve_s += secs(t_r);
      report.conflicts += rout.conflicts;
      report.subproblems += rout.subproblems;
      if (rout.kind == ResolveOutcome::Kind::Valid) {
        report.outcome = Outcome::Solved;
        report.plan = std::move(plan);
        report.timed = std::move(rout.timed);
        report.makespan = report.timed->makespan;
        record_counts(report, ts, state);
        finish(report, ts, state, t_total);
        return report;
      }
      if (rout.kind == ResolveOutcome::Kind::MotionFeedback) {
        for (const auto& cm : rout.cms) {
          c_m.push_back(cm);
          trace_motion_constraint(report, cm);
        }
      } else if (rout.kind == ResolveOutcome::Kind::TaskFeedback) {
        for (const auto& ct : rout.cts) {
          if (add_constraint(c_t, ct)) trace_constraint(report, ct, "arc_vertex");
        }
      } else {
        report.failure_note = "conflict resolution iteration limit";
        record_counts(report, ts, state);
        finish(report, ts, state, t_total);
        return report;
      }
      record_counts(report, ts, state);
    }
    if (report.failure_note.empty()) report.failure_note = "outer iteration limit";
    report.outcome = Outcome::BudgetExhausted;
    finish(report, ts, state, t_total);
    return report;
  }

 private:
  using Clock = std::chrono::steady_clock;
  static Clock::time_point now() { return Clock::now(); }
  static double secs(Clock::time_point since) {
    return std::chrono::duration<double>(Clock::now() - since).count();
  }

  static bool add_constraint(ConstraintSet& set, const TaskConstraint& c) {
    for (const auto& e : set) {
      if (e == c) return false;
    }
    set.push_back(c);
    return true;
  }

  int expansion_object(const ConstraintSet& c_t, const TaskSpace& ts) const {
    for (auto it = c_t.rbegin(); it != c_t.rend(); ++it) {
      const TaskVertex& pre = ts.graph().vertex(it->v_pre);
      if (pre.kind == TaskVertexKind::ObjectAt) return pre.object;
      const TaskVertex& post = ts.graph().vertex(it->v_post);
      if (post.object >= 0) return post.object;
    }
    return 0;
  }

  std::optional<Vec2> sample_moveout(const TaskSpace& ts, int object, Vec2 near,
                                     long counter) {
    (void)ts;
    std::vector<Disc> blocked;
    for (const auto& ob : world_.objects) {
      for (int p = 0; p < table_.count(ob.id); ++p) {
        if (ob.id == object && table_.entry(ob.id, p).provenance ==
                                   PoseProvenance::Moveout) {
          continue;  // stale move-outs of the same object do not block
        }
        blocked.push_back({table_.position(ob.id, p), ob.radius});
      }
    }
    Rng rng = master_.fork("expand").fork(static_cast<std::uint64_t>(counter));
    // same-surface preference
    int surface = -1;
    for (size_t i = 0; i < world_.surfaces.size(); ++i) {
      if (world_.surfaces[i].rect.contains(near)) {
        surface = static_cast<int>(i);
        break;
      }
    }
    PoseSampleOptions opt;
    opt.attempts = params_.pose_attempts;
    opt.surface = surface;
    if (surface >= 0) {
      if (auto p = sample_stable_pose(world_, object, blocked, rng, opt)) {
        if (!reachable_robots(world_, *p).empty()) return p;
      }
    }
    opt.surface = -1;
    for (int k = 0; k < 4; ++k) {
      if (auto p = sample_stable_pose(world_, object, blocked, rng, opt)) {
        if (!reachable_robots(world_, *p).empty()) return p;
      }
    }
    return std::nullopt;
  }

  static bool pose_in_use(const UnvalidatedSchedule& schedule, const TaskSpace& ts,
                          int object, int pose) {
    for (const auto& step : schedule.steps) {
      const TaskArc& a = ts.graph().arc(step.arc).payload;
      if (a.object == object && a.pose == pose &&
          (a.action == TaskAction::Pick || a.action == TaskAction::Place)) {
        return true;
      }
    }
    return false;
  }

  static bool patch_schedule(UnvalidatedSchedule& schedule, const TaskSpace& ts,
                             int object, int old_pose, int new_pose) {
    for (auto& step : schedule.steps) {
      const TaskArc& a = ts.graph().arc(step.arc).payload;
      if (a.object != object || a.pose != old_pose) continue;
      if (a.action != TaskAction::Pick && a.action != TaskAction::Place) continue;
      auto repl = ts.find_pick_place_arc(a.action, a.robot, object, new_pose);
      if (!repl) return false;
      step.arc = *repl;
    }
    return true;
  }

  static void replay_snapshots(const TaskSpace& ts, UnvalidatedSchedule& schedule) {
    std::map<int, int> frontier;
    const World& world = ts.world();
    for (const auto& r : world.robots) frontier[robot_entity(r.id)] = ts.source_vertex();
    for (const auto& ob : world.objects) {
      frontier[object_entity(world, ob.id)] = ts.source_vertex();
    }
    for (auto& step : schedule.steps) {
      step.frontier_before = frontier;
      for (int h : ts.graph().arc(step.arc).head) {
        for (int e : ts.covered_entities(h)) frontier[e] = h;
      }
    }
  }

  void record_counts(RunReport& report, const TaskSpace& ts, const MotionState& state) {
    report.iteration_counts.push_back(
        {static_cast<long>(ts.graph().num_vertices()),
         static_cast<long>(ts.graph().num_hyperarcs()),
         static_cast<long>(state.hypergraph().num_vertices()),
         static_cast<long>(state.hypergraph().num_hyperarcs())});
  }

  void finish(RunReport& report, const TaskSpace& ts, const MotionState& state,
              Clock::time_point t_total) {
    report.task_vertices = ts.graph().num_vertices();
    report.task_hyperarcs = ts.graph().num_hyperarcs();
    report.motion_vertices = state.hypergraph().num_vertices();
    report.motion_hyperarcs = state.hypergraph().num_hyperarcs();
    report.roadmap_vertices = state.roadmap_vertices();
    report.roadmap_edges = state.roadmap_edges();
    report.validated_edges = state.validated_edge_total();
    report.collision_checks = state.counters.collision_checks;
    report.dt = world_.collision_resolution() / world_.max_speed();
    report.timers.total_s = secs(t_total);
    if (report.iteration_counts.empty()) record_counts(report, ts, state);
  }

  void trace_constraint(RunReport& report, const TaskConstraint& c,
                        const std::string& origin) {
    TraceEvent ev;
    ev.type = "task_constraint";
    ev.num["v_pre"] = c.v_pre;
    ev.num["v_post"] = c.v_post;
    ev.str["kind"] = c.kind == ConstraintKind::Frontier ? "frontier" : "history";
    ev.str["origin"] = origin;
    report.trace.push_back(ev);
  }

  void trace_motion_constraint(RunReport& report, const MotionConstraint& cm) {
    TraceEvent ev;
    ev.type = "motion_constraint";
    ev.str["sig_a"] = cm.sig_a;
    ev.str["sig_b"] = cm.sig_b;
    ev.num["cx_mm"] = static_cast<long>(cm.region.center.x * 1000.0);
    ev.num["cy_mm"] = static_cast<long>(cm.region.center.y * 1000.0);
    report.trace.push_back(ev);
  }

  void trace_expand(RunReport& report, int object, Vec2 p, const std::string& origin) {
    TraceEvent ev;
    ev.type = "expand_task_space";
    ev.num["object"] = object;
    ev.num["px_mm"] = static_cast<long>(p.x * 1000.0);
    ev.num["py_mm"] = static_cast<long>(p.y * 1000.0);
    ev.str["origin"] = origin;
    report.trace.push_back(ev);
  }

  void trace_resample(RunReport& report, int object, int old_pose, int new_pose) {
    TraceEvent ev;
    ev.type = "pose_resample";
    ev.num["object"] = object;
    ev.num["old_pose"] = old_pose;
    ev.num["new_pose"] = new_pose;
    report.trace.push_back(ev);
  }

  const World& world_;
  PlannerParams params_;
  std::uint64_t seed_;
  Rng master_;
  PoseTable table_;
};

}  // namespace lazydash
