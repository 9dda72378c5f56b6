#pragma once

#include <string>
#include <tuple>

#include "lazydash/motion.hpp"

namespace lazydash {

// Motion hypergraph bookkeeping plus the motion-extended query that traces an
// anchored schedule, producing an optimistic schedule or task-constraint
// feedback.

struct MotionVertexPayload {
  int task_vertex = -1;
  Config q;
};

enum class MotionArcKind { Source, Sink, Move, Transition };

struct MotionArcPayload {
  MotionArcKind kind = MotionArcKind::Move;
  int task_arc = -1;
  double length = 0.0;
};

using MotionHypergraph = Hypergraph<MotionVertexPayload, MotionArcPayload>;

// History-scoped motion constraint: a workspace region two specific motion
// contexts must avoid. Contexts are matched by the task signature of the
// last hyperarc on each side.
struct MotionConstraint {
  std::string sig_a;
  std::string sig_b;
  Disc region;
};

inline std::string task_signature(const TaskArc& a) {
  return std::string(to_string(a.action)) + ":" + std::to_string(a.robot) + ":" +
         std::to_string(a.robot2) + ":" + std::to_string(a.object) + ":" +
         std::to_string(a.pose);
}

inline std::vector<Disc> active_regions(const std::vector<MotionConstraint>& cms,
                                        const std::string& sig) {
  std::vector<Disc> out;
  for (const auto& cm : cms) {
    if (cm.sig_a == sig || cm.sig_b == sig) out.push_back(cm.region);
  }
  return out;
}

// One arc of the optimistic/valid schedule. Move arcs carry a timed path;
// transitions are instantaneous.
struct PlanArc {
  enum class Kind { Source, Sink, Move, Transition };
  Kind kind = Kind::Move;
  int schedule_index = -1;  // task schedule step
  int task_arc = -1;
  TaskAction action = TaskAction::SourceArc;
  ElementKey element;        // Move only
  std::vector<int> robots;   // participating robots
  int object = -1;           // manipulated/carried object
  int carried = -1;          // object riding along a Move, -1 if none
  int pose = -1;             // registered pose id for pick/place transitions
  Vec2 anchor;               // transition point
  Path path;                 // Move waypoints
  std::vector<double> times; // per-waypoint offsets from arc start
  double duration = 0.0;
  int hm_arc = -1;
};

struct OptimisticSchedule {
  std::vector<PlanArc> arcs;
};

struct MotionFeedback {
  TaskConstraint constraint;
  int schedule_index = -1;
  int task_arc = -1;
};

using MotionQueryResult = std::variant<OptimisticSchedule, MotionFeedback>;

struct MotionParams {
  int roadmap_samples = 200;
  int k_neighbors = 8;
  int transition_resamples = 30;
  LazyPathParams lazy;
};

// Shared motion-layer state: roadmaps and the motion hypergraph persist for a
// whole planner run and only ever grow.
class MotionState {
 public:
  MotionState(const World& world, Rng roadmap_rng)
      : world_(world), roadmap_rng_(roadmap_rng) {}

  Roadmap& roadmap(const ElementKey& key, const MotionParams& params) {
    auto it = roadmaps_.find(key);
    if (it != roadmaps_.end()) return it->second;
    std::uint64_t tag = 0x9e3779b97f4a7c15ull;
    for (auto [r, c] : key.slots) {
      tag = tag * 1000003u + static_cast<std::uint64_t>(r + 1) * 31u +
            static_cast<std::uint64_t>(c + 2);
    }
    Rng rng = roadmap_rng_.fork(tag);
    // composite spaces are higher-dimensional and need denser sampling
    const int scale = static_cast<int>(key.slots.size());
    auto rm = build_lazy_roadmap(key, world_, params.roadmap_samples * scale * scale,
                                 params.k_neighbors + 4 * (scale - 1), rng);
    return roadmaps_.emplace(key, std::move(rm)).first->second;
  }

  bool has_roadmap(const ElementKey& key) const { return roadmaps_.count(key) > 0; }

  int ensure_vertex(int task_vid, const Config& q) {
    VertexKey key{task_vid, {}};
    for (const auto& limb : q.limbs) {
      key.second.push_back({limb.robot, limb.effector.x, limb.effector.y, limb.carried});
    }
    auto it = vertex_ids_.find(key);
    if (it != vertex_ids_.end()) return it->second;
    const int id = hm_.add_vertex({task_vid, q});
    vertex_ids_.emplace(std::move(key), id);
    return id;
  }

  int ensure_arc(MotionArcKind kind, int task_arc, std::vector<int> tails,
                 std::vector<int> heads, double length) {
    ArcKey key{static_cast<int>(kind), task_arc, tails, heads, length};
    auto it = arc_ids_.find(key);
    if (it != arc_ids_.end()) return it->second;
    const int id = hm_.add_hyperarc(std::move(tails), std::move(heads),
                                    {kind, task_arc, length});
    arc_ids_.emplace(std::move(key), id);
    return id;
  }

  const MotionHypergraph& hypergraph() const { return hm_; }
  const std::map<ElementKey, Roadmap>& roadmaps() const { return roadmaps_; }
  std::map<ElementKey, Roadmap>& roadmaps() { return roadmaps_; }

  long roadmap_vertices() const {
    long n = 0;
    for (const auto& [k, rm] : roadmaps_) n += static_cast<long>(rm.vertices.size());
    return n;
  }
  long roadmap_edges() const {
    long n = 0;
    for (const auto& [k, rm] : roadmaps_) n += static_cast<long>(rm.edges.size());
    return n;
  }
  long validated_edge_total() const {
    long n = 0;
    for (const auto& [k, rm] : roadmaps_) n += rm.valid_edges();
    return n;
  }

  MotionCounters counters;

 private:
  using VertexKey = std::pair<int, std::vector<std::tuple<int, double, double, int>>>;
  using ArcKey = std::tuple<int, int, std::vector<int>, std::vector<int>, double>;

  const World& world_;
  Rng roadmap_rng_;
  MotionHypergraph hm_;
  std::map<ElementKey, Roadmap> roadmaps_;
  std::map<VertexKey, int> vertex_ids_;
  std::map<ArcKey, int> arc_ids_;
};

namespace motion_detail {

inline Config object_only_config(int object, Vec2 p) {
  Config c;
  c.limbs.push_back({-1, p, object});
  return c;
}

inline Config single_config(int robot, Vec2 eff, int carried) {
  Config c;
  c.limbs.push_back({robot, eff, carried});
  return c;
}

inline std::vector<double> waypoint_times(const Path& path, double speed) {
  std::vector<double> t{0.0};
  double acc = 0.0;
  for (size_t i = 1; i < path.waypoints.size(); ++i) {
    acc += config_distance(path.waypoints[i - 1], path.waypoints[i]) / speed;
    t.push_back(acc);
  }
  return t;
}

}  // namespace motion_detail

inline PlanArc make_transition_plan_arc(const TaskSpace& ts, MotionState& state,
                                        const TaskArc& arc, Vec2 h, int index,
                                        int task_arc) {
  PlanArc out;
  out.kind = PlanArc::Kind::Transition;
  out.schedule_index = index;
  out.task_arc = task_arc;
  out.action = arc.action;
  out.anchor = h;
  out.object = arc.object;
  out.pose = arc.pose;
  out.robots = arc.action == TaskAction::Handover
                   ? std::vector<int>{arc.robot, arc.robot2}
                   : std::vector<int>{arc.robot};
  std::vector<int> tails, heads;
  switch (arc.action) {
    case TaskAction::Pick:
      tails = {state.ensure_vertex(ts.robot_free_vertex(arc.robot),
                                   motion_detail::single_config(arc.robot, h, -1)),
               state.ensure_vertex(ts.object_at_vertex(arc.object, arc.pose),
                                   motion_detail::object_only_config(arc.object, h))};
      heads = {state.ensure_vertex(
          *ts.find_holding_vertex(arc.robot, arc.object),
          motion_detail::single_config(arc.robot, h, arc.object))};
      break;
    case TaskAction::Place:
      tails = {state.ensure_vertex(
          *ts.find_holding_vertex(arc.robot, arc.object),
          motion_detail::single_config(arc.robot, h, arc.object))};
      heads = {state.ensure_vertex(ts.robot_free_vertex(arc.robot),
                                   motion_detail::single_config(arc.robot, h, -1)),
               state.ensure_vertex(ts.object_at_vertex(arc.object, arc.pose),
                                   motion_detail::object_only_config(arc.object, h))};
      break;
    case TaskAction::Handover:
      tails = {state.ensure_vertex(
                   *ts.find_holding_vertex(arc.robot, arc.object),
                   motion_detail::single_config(arc.robot, h, arc.object)),
               state.ensure_vertex(ts.robot_free_vertex(arc.robot2),
                                   motion_detail::single_config(arc.robot2, h, -1))};
      heads = {state.ensure_vertex(ts.robot_free_vertex(arc.robot),
                                   motion_detail::single_config(arc.robot, h, -1)),
               state.ensure_vertex(
                   *ts.find_holding_vertex(arc.robot2, arc.object),
                   motion_detail::single_config(arc.robot2, h, arc.object))};
      break;
    default:
      break;
  }
  out.hm_arc = state.ensure_arc(MotionArcKind::Transition, task_arc, tails, heads, 0.0);
  return out;
}

inline PlanArc make_source_plan_arc(const TaskSpace& ts, MotionState& state, int index,
                                    int task_arc, const std::map<int, Vec2>& eff) {
  const World& world = ts.world();
  PlanArc out;
  out.kind = PlanArc::Kind::Source;
  out.schedule_index = index;
  out.task_arc = task_arc;
  std::vector<int> heads;
  for (const auto& r : world.robots) {
    heads.push_back(
        state.ensure_vertex(ts.robot_free_vertex(r.id),
                            motion_detail::single_config(r.id, eff.at(r.id), -1)));
  }
  for (const auto& ob : world.objects) {
    heads.push_back(state.ensure_vertex(ts.object_at_vertex(ob.id, kStartPose),
                                        motion_detail::object_only_config(ob.id, ob.start)));
  }
  const int src = state.ensure_vertex(ts.source_vertex(), Config{});
  out.hm_arc = state.ensure_arc(MotionArcKind::Source, task_arc, {src}, heads, 0.0);
  return out;
}

inline PlanArc make_sink_plan_arc(const TaskSpace& ts, MotionState& state, int index,
                                  int task_arc, const std::map<int, Vec2>& eff) {
  const World& world = ts.world();
  PlanArc out;
  out.kind = PlanArc::Kind::Sink;
  out.schedule_index = index;
  out.task_arc = task_arc;
  std::vector<int> tails;
  for (const auto& r : world.robots) {
    tails.push_back(
        state.ensure_vertex(ts.robot_free_vertex(r.id),
                            motion_detail::single_config(r.id, eff.at(r.id), -1)));
  }
  for (const auto& ob : world.objects) {
    tails.push_back(state.ensure_vertex(ts.object_at_vertex(ob.id, kGoalPose),
                                        motion_detail::object_only_config(ob.id, ob.goal)));
  }
  const int sink = state.ensure_vertex(ts.sink_vertex(), Config{});
  out.hm_arc = state.ensure_arc(MotionArcKind::Sink, task_arc, tails, {sink}, 0.0);
  return out;
}

// Traces the anchored schedule, planning a lazy path for every entity segment
// between consecutive anchors. On unrecoverable failure returns a history
// constraint so the task query avoids this route; the failed content stays in
// the representations.
class MotionQuery {
 public:
  MotionQuery(const TaskSpace& ts, const PoseTable& table, MotionState& state,
              const MotionParams& params)
      : ts_(ts), table_(table), world_(ts.world()), state_(state), params_(params) {}

  MotionQueryResult query(const AnchoredSchedule& anchored,
                          const std::vector<MotionConstraint>& cms, Rng& rng) {
    OptimisticSchedule plan;
    std::map<int, Vec2> eff;
    std::map<int, int> carried;
    std::map<int, int> placed;  // object -> pose id
    for (const auto& r : world_.robots) {
      eff[r.id] = r.base;
      carried[r.id] = -1;
    }

    for (size_t i = 0; i < anchored.schedule.steps.size(); ++i) {
      const int task_arc = anchored.schedule.steps[i].arc;
      const TaskArc& arc = ts_.graph().arc(task_arc).payload;
      const int index = static_cast<int>(i);
      switch (arc.action) {
        case TaskAction::SourceArc: {
          for (const auto& ob : world_.objects) placed[ob.id] = kStartPose;
          plan.arcs.push_back(make_source_plan_arc(ts_, state_, index, task_arc, eff));
          break;
        }
        case TaskAction::SinkArc: {
          plan.arcs.push_back(make_sink_plan_arc(ts_, state_, index, task_arc, eff));
          break;
        }
        case TaskAction::Pick:
        case TaskAction::Place:
        case TaskAction::Handover: {
          Vec2 h = *anchored.anchors[i];
          const auto regions = active_regions(cms, task_signature(arc));
          // transition configuration must clear the current statics and any
          // active constraint regions; handover points can be resampled
          if (!transition_clear(arc, h, placed, regions)) {
            if (arc.action == TaskAction::Handover) {
              auto alt = resample_handover(arc, placed, regions, rng);
              if (!alt) return feedback(arc, index, task_arc);
              h = *alt;
            } else {
              return feedback(arc, index, task_arc);
            }
          }
          // approach/carry moves for each participating robot
          const auto participants = arc.action == TaskAction::Handover
                                        ? std::vector<int>{arc.robot, arc.robot2}
                                        : std::vector<int>{arc.robot};
          for (int rid : participants) {
            auto move = plan_move(rid, carried[rid], eff[rid], h, arc, index, task_arc,
                                  placed, regions, rng);
            if (!move) return feedback(arc, index, task_arc);
            if (move->path.waypoints.size() > 1) plan.arcs.push_back(std::move(*move));
            eff[rid] = h;
          }
          plan.arcs.push_back(make_transition_plan_arc(ts_, state_, arc, h, index, task_arc));
          apply_transition(arc, h, eff, carried, placed);
          break;
        }
      }
    }
    return plan;
  }

 private:
  std::vector<Shape> placed_statics(const std::map<int, int>& placed,
                                    int except_object) const {
    std::vector<Shape> out;
    for (const auto& [obj, pose] : placed) {
      if (obj == except_object) continue;
      out.push_back(Disc{table_.position(obj, pose), world_.object(obj).radius});
    }
    return out;
  }

  bool transition_clear(const TaskArc& arc, Vec2 h, const std::map<int, int>& placed,
                        const std::vector<Disc>& regions) {
    const auto statics = placed_statics(placed, arc.object);
    std::vector<Shape> shapes;
    shapes.push_back(Capsule{world_.robot(arc.robot).base, h,
                             world_.robot(arc.robot).arm_halfwidth});
    if (arc.action == TaskAction::Handover) {
      shapes.push_back(Capsule{world_.robot(arc.robot2).base, h,
                               world_.robot(arc.robot2).arm_halfwidth});
    }
    shapes.push_back(Disc{h, world_.object(arc.object).radius});
    state_.counters.collision_checks++;
    for (const auto& s : shapes) {
      for (const auto& st : statics) {
        if (collides(s, st)) return false;
      }
      for (const auto& w : world_.walls) {
        if (collides(s, Shape{w})) return false;
      }
      for (const auto& rg : regions) {
        if (collides(s, Shape{rg})) return false;
      }
    }
    return true;
  }

  std::optional<Vec2> resample_handover(const TaskArc& arc,
                                        const std::map<int, int>& placed,
                                        const std::vector<Disc>& regions, Rng& rng) {
    std::vector<Disc> avoid;
    for (const auto& [obj, pose] : placed) {
      if (obj == arc.object) continue;
      avoid.push_back({table_.position(obj, pose), world_.object(obj).radius});
    }
    for (const auto& rg : regions) avoid.push_back(rg);
    for (int k = 0; k < params_.transition_resamples; ++k) {
      const Vec2 h = sample_handover_point(world_, arc.robot, arc.robot2, arc.object,
                                           rng, 50, &avoid);
      if (transition_clear(arc, h, placed, regions)) return h;
    }
    return std::nullopt;
  }

  std::optional<PlanArc> plan_move(int rid, int carried_obj, Vec2 from, Vec2 to,
                                   const TaskArc& arc, int index, int task_arc,
                                   const std::map<int, int>& placed,
                                   const std::vector<Disc>& regions, Rng& rng) {
    const ElementKey elem =
        carried_obj >= 0 ? element_holding(rid, carried_obj) : element_free(rid);
    const Config start = motion_detail::single_config(rid, from, carried_obj);
    const Config goal = motion_detail::single_config(rid, to, carried_obj);
    PlanArc out;
    out.kind = PlanArc::Kind::Move;
    out.schedule_index = index;
    out.task_arc = task_arc;
    out.action = arc.action;
    out.element = elem;
    out.robots = {rid};
    out.carried = carried_obj;
    out.object = carried_obj;
    if (start == goal) {
      out.path.waypoints = {start};
      return out;
    }
    // Placed discs stay obstacles throughout; transition contacts (grasping
    // the pick target, departing a released disc) are licensed by waiver
    // discs at the anchors, mirroring the timed-replay exemptions.
    const auto statics = placed_statics(placed, -1);
    std::vector<Disc> waivers;
    const double wr = motion_detail::contact_waiver_radius(world_);
    if (arc.action == TaskAction::Pick && rid == arc.robot && carried_obj < 0) {
      waivers.push_back(Disc{to, wr});
    }
    for (const auto& st : statics) {
      if (const auto* d = std::get_if<Disc>(&st)) {
        for (const auto& s : motion_detail::limb_shapes(world_, start)) {
          if (collides(s, st)) {
            waivers.push_back(Disc{d->center, wr});
            break;
          }
        }
      }
    }
    Roadmap& rm = state_.roadmap(elem, params_);
    std::optional<Path> path;
    for (int attempt = 0; attempt < 2 && !path; ++attempt) {
      Rng path_rng = rng.fork(static_cast<std::uint64_t>(index) * 131u +
                              static_cast<std::uint64_t>(rid) * 7u +
                              static_cast<std::uint64_t>(attempt));
      path = LazyPath(rm, world_, state_.counters)
                 .query(start, goal, statics, regions, params_.lazy, path_rng, waivers);
    }
    if (!path) return std::nullopt;
    out.path = std::move(*path);
    out.times = motion_detail::waypoint_times(out.path, world_.robot(rid).speed);
    out.duration = out.times.back();
    const int elem_vid = carried_obj >= 0
                             ? *ts_.find_holding_vertex(rid, carried_obj)
                             : ts_.robot_free_vertex(rid);
    const int t = state_.ensure_vertex(elem_vid, start);
    const int hvid = state_.ensure_vertex(elem_vid, out.path.waypoints.back());
    out.hm_arc = state_.ensure_arc(MotionArcKind::Move, task_arc, {t}, {hvid},
                                   out.path.total_length);
    return out;
  }

  // Infeasible-transition feedback. Scoped as a frontier constraint on the
  // arc's object-state endpoints: the route is blocked exactly while its tail
  // state holds, and lifts once the object reaches any other state.
  MotionFeedback feedback(const TaskArc& arc, int index, int task_arc) const {
    MotionFeedback fb;
    fb.constraint.kind = ConstraintKind::Frontier;
    fb.constraint.v_pre = tail_object_state(ts_, arc);
    fb.constraint.v_post = head_object_state(ts_, arc);
    fb.schedule_index = index;
    fb.task_arc = task_arc;
    return fb;
  }

  void apply_transition(const TaskArc& arc, Vec2 h, std::map<int, Vec2>& eff,
                        std::map<int, int>& carried, std::map<int, int>& placed) {
    switch (arc.action) {
      case TaskAction::Pick:
        carried[arc.robot] = arc.object;
        placed.erase(arc.object);
        eff[arc.robot] = h;
        break;
      case TaskAction::Place:
        carried[arc.robot] = -1;
        placed[arc.object] = arc.pose;
        eff[arc.robot] = h;
        break;
      case TaskAction::Handover:
        carried[arc.robot] = -1;
        carried[arc.robot2] = arc.object;
        eff[arc.robot] = h;
        eff[arc.robot2] = h;
        break;
      default:
        break;
    }
  }

  const TaskSpace& ts_;
  const PoseTable& table_;
  const World& world_;
  MotionState& state_;
  MotionParams params_;
};

}  // namespace lazydash
