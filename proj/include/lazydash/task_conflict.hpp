#pragma once

#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "lazydash/task_query.hpp"

namespace lazydash {

// Task conflict detection: trace the unvalidated schedule's transition
// configurations against the frontier's static geometry and route each
// conflict to pose resampling, task-constraint feedback or task-space
// expansion.

struct AnchoredSchedule {
  UnvalidatedSchedule schedule;
  // One anchor per step: the pick/place pose or the sampled handover point.
  std::vector<std::optional<Vec2>> anchors;
};

enum class ConflictClass { ObjectObject, RobotObject, RobotRobot, RobotWall };

struct ConflictBody {
  enum class Kind { Robot, Object, Wall };
  Kind kind = Kind::Object;
  int id = -1;
  int pose = -1;  // registered pose id when this is a placed object
  Shape shape;
};

struct TaskConflict {
  int index = -1;  // schedule step
  ConflictClass cls = ConflictClass::ObjectObject;
  ConflictBody moving;  // transition-side body
  ConflictBody blocker;  // frontier-static side (or wall)
};

using TaskConflictReport = std::vector<TaskConflict>;

// Uniform handover point in the closed reach intersection, preferring one
// whose full transition shape (two arms + carried disc) is wall-free with
// the motion layer's sampling clearance. After `attempts` failures the last
// sample is accepted; conflicts surface downstream.
inline Vec2 sample_handover_point(const World& world, int giver, int receiver,
                                  int object, Rng& rng, int attempts = 50,
                                  const std::vector<Disc>* avoid = nullptr) {
  const auto& ra = world.robot(giver);
  const auto& rb = world.robot(receiver);
  if (dist(ra.base, rb.base) >= ra.reach + rb.reach) {
    throw std::logic_error("handover without reach intersection");
  }
  const double clearance = world.collision_resolution() / 2.0 + 1e-6;
  // bounding box of the true intersection lens
  const double d = dist(ra.base, rb.base);
  const double x_along = (d * d + ra.reach * ra.reach - rb.reach * rb.reach) / (2.0 * d);
  const double half_h =
      std::sqrt(std::max(0.0, ra.reach * ra.reach - x_along * x_along));
  const Vec2 axis = (rb.base - ra.base) * (1.0 / d);
  const Vec2 perp{-axis.y, axis.x};
  const Vec2 lens_center = ra.base + axis * x_along;
  Rect box{std::max(ra.base.x - ra.reach, rb.base.x - rb.reach),
           std::max(ra.base.y - ra.reach, rb.base.y - rb.reach),
           std::min(ra.base.x + ra.reach, rb.base.x + rb.reach),
           std::min(ra.base.y + ra.reach, rb.base.y + rb.reach)};
  // tighten across the base-base axis where the lens is thinner than the box
  box.x0 = std::max(box.x0, lens_center.x - half_h * std::abs(perp.x) -
                                std::abs(axis.x) * (box.x1 - box.x0));
  box.y0 = std::max(box.y0, lens_center.y - half_h * std::abs(perp.y) -
                                std::abs(axis.y) * (box.y1 - box.y0));
  box.x1 = std::min(box.x1, lens_center.x + half_h * std::abs(perp.x) +
                                std::abs(axis.x) * (box.x1 - box.x0));
  box.y1 = std::min(box.y1, lens_center.y + half_h * std::abs(perp.y) +
                                std::abs(axis.y) * (box.y1 - box.y0));
  Vec2 last = (ra.base + rb.base) * 0.5;
  for (int k = 0; k < attempts; ++k) {
    const Vec2 p{rng.uniform(box.x0, box.x1), rng.uniform(box.y0, box.y1)};
    if (dist(p, ra.base) > ra.reach || dist(p, rb.base) > rb.reach) continue;
    last = p;
    const Shape arm_a{Capsule{ra.base, p, ra.arm_halfwidth}};
    const Shape arm_b{Capsule{rb.base, p, rb.arm_halfwidth}};
    const Shape disc{Disc{p, world.object(object).radius}};
    bool clear = true;
    for (const auto& w : world.walls) {
      if (collides_with_clearance(arm_a, Shape{w}, clearance) ||
          collides_with_clearance(arm_b, Shape{w}, clearance) ||
          collides_with_clearance(disc, Shape{w}, clearance)) {
        clear = false;
        break;
      }
    }
    if (clear && avoid != nullptr) {
      for (const auto& d : *avoid) {
        if (collides_with_clearance(arm_a, Shape{d}, clearance) ||
            collides_with_clearance(arm_b, Shape{d}, clearance) ||
            collides_with_clearance(disc, Shape{d}, clearance)) {
          clear = false;
          break;
        }
      }
    }
    if (clear) return p;
  }
  return last;
}

// Object-state vertices of a transition: the tail vertex that carries the
// object before the arc and the head vertex that carries it after. These are
// the endpoints used by route-specific constraints.
inline int tail_object_state(const TaskSpace& ts, const TaskArc& arc) {
  switch (arc.action) {
    case TaskAction::Pick:
      return ts.object_at_vertex(arc.object, arc.pose);
    case TaskAction::Place:
    case TaskAction::Handover:
      return *ts.find_holding_vertex(arc.robot, arc.object);
    default:
      return -1;
  }
}

inline int head_object_state(const TaskSpace& ts, const TaskArc& arc) {
  switch (arc.action) {
    case TaskAction::Pick:
      return *ts.find_holding_vertex(arc.robot, arc.object);
    case TaskAction::Place:
      return ts.object_at_vertex(arc.object, arc.pose);
    case TaskAction::Handover:
      return *ts.find_holding_vertex(arc.robot2, arc.object);
    default:
      return -1;
  }
}

namespace detail {

// Frontier statics at a step: placed object discs plus idle robots held at a
// rest configuration (effector at base).
inline std::vector<ConflictBody> frontier_statics(
    const TaskSpace& ts, const PoseTable& table,
    const std::map<int, int>& frontier) {
  const World& world = ts.world();
  std::vector<ConflictBody> out;
  std::set<int> seen;
  for (const auto& [entity, vid] : frontier) {
    if (!seen.insert(vid).second) continue;
    const TaskVertex& v = ts.graph().vertex(vid);
    if (v.kind == TaskVertexKind::ObjectAt) {
      ConflictBody b;
      b.kind = ConflictBody::Kind::Object;
      b.id = v.object;
      b.pose = v.pose;
      b.shape = Disc{table.position(v.object, v.pose), world.object(v.object).radius};
      out.push_back(b);
    } else if (v.kind == TaskVertexKind::RobotFree) {
      ConflictBody b;
      b.kind = ConflictBody::Kind::Robot;
      b.id = v.robot;
      b.shape = Disc{world.robot(v.robot).base, world.robot(v.robot).arm_halfwidth};
      out.push_back(b);
    }
  }
  return out;
}

struct TransitionShapes {
  std::vector<ConflictBody> bodies;  // shapes in motion during the transition
  std::vector<int> robots;
  int object = -1;
};

inline TransitionShapes transition_shapes(const World& world, const TaskArc& arc,
                                          Vec2 anchor) {
  TransitionShapes t;
  t.object = arc.object;
  const auto arm = [&](int rid) {
    ConflictBody b;
    b.kind = ConflictBody::Kind::Robot;
    b.id = rid;
    b.shape = Capsule{world.robot(rid).base, anchor, world.robot(rid).arm_halfwidth};
    return b;
  };
  const auto obj = [&]() {
    ConflictBody b;
    b.kind = ConflictBody::Kind::Object;
    b.id = arc.object;
    b.pose = arc.pose;
    b.shape = Disc{anchor, world.object(arc.object).radius};
    return b;
  };
  switch (arc.action) {
    case TaskAction::Pick:
      t.robots = {arc.robot};
      t.bodies = {arm(arc.robot), obj()};
      break;
    case TaskAction::Place:
      t.robots = {arc.robot};
      t.bodies = {arm(arc.robot), obj()};
      break;
    case TaskAction::Handover:
      t.robots = {arc.robot, arc.robot2};
      t.bodies = {arm(arc.robot), arm(arc.robot2), obj()};
      break;
    default:
      break;
  }
  return t;
}

}  // namespace detail

class TaskConflictLayer {
 public:
  TaskConflictLayer(const TaskSpace& ts, const PoseTable& table)
      : ts_(ts), table_(table), world_(ts.world()) {}

  // Sample explicit transition configurations for every pick/place/handover
  // step. Handover points prefer samples clear of the step's frontier
  // statics; a possibly-conflicting point is only kept when no clear sample
  // exists, and the conflict surfaces downstream. Deterministic under a
  // fixed rng stream.
  AnchoredSchedule anchor(const UnvalidatedSchedule& schedule, Rng& rng) const {
    AnchoredSchedule out;
    out.schedule = schedule;
    out.anchors.resize(schedule.steps.size());
    for (size_t i = 0; i < schedule.steps.size(); ++i) {
      const TaskArc& arc = ts_.graph().arc(schedule.steps[i].arc).payload;
      switch (arc.action) {
        case TaskAction::Pick:
        case TaskAction::Place:
          out.anchors[i] = table_.position(arc.object, arc.pose);
          break;
        case TaskAction::Handover: {
          const auto avoid = handover_avoid(arc, schedule.steps[i].frontier_before);
          out.anchors[i] = sample_handover_point(world_, arc.robot, arc.robot2,
                                                 arc.object, rng, 50, &avoid);
          break;
        }
        default:
          break;
      }
    }
    return out;
  }

  // Walk the schedule, collision-checking each transition's shapes against
  // the frontier statics and walls. All conflicts over the whole schedule are
  // accumulated.
  TaskConflictReport detect(const AnchoredSchedule& anchored) const {
    TaskConflictReport report;
    for (size_t i = 0; i < anchored.schedule.steps.size(); ++i) {
      const auto& step = anchored.schedule.steps[i];
      const TaskArc& arc = ts_.graph().arc(step.arc).payload;
      if (arc.action == TaskAction::SourceArc || arc.action == TaskAction::SinkArc) {
        continue;
      }
      const auto trans =
          detail::transition_shapes(world_, arc, *anchored.anchors[i]);
      const auto statics = detail::frontier_statics(ts_, table_, step.frontier_before);
      for (const auto& body : trans.bodies) {
        for (const auto& st : statics) {
          if (participates(st, trans)) continue;
          if (!collides(body.shape, st.shape)) continue;
          TaskConflict c;
          c.index = static_cast<int>(i);
          c.cls = classify(body, st);
          c.moving = body;
          c.blocker = st;
          report.push_back(c);
        }
        for (const auto& w : world_.walls) {
          if (!collides(body.shape, Shape{w})) continue;
          TaskConflict c;
          c.index = static_cast<int>(i);
          c.cls = ConflictClass::RobotWall;
          c.moving = body;
          c.blocker.kind = ConflictBody::Kind::Wall;
          c.blocker.shape = w;
          report.push_back(c);
        }
      }
    }
    return report;
  }

  struct ResampledPose {
    int object = -1;
    int old_pose = -1;
    Vec2 new_point;
  };
  struct ResampledAnchor {
    int index = -1;
    Vec2 point;
  };
  struct ExpandTaskSpace {
    int object = -1;
    // A constraint worth recording alongside the expansion: without it the
    // query re-derives the same conflicting branch against the grown space.
    std::optional<TaskConstraint> constraint;
  };
  struct Unresolvable {
    std::string reason;
  };
  using Resolution = std::variant<ResampledPose, ResampledAnchor, TaskConstraint,
                                  ExpandTaskSpace, Unresolvable>;

  // Routes one detected conflict. `existing` is the current frontier
  // constraint set, used for the blocked-both-orders cycle scan.
  Resolution resolve(const TaskConflict& conflict, const AnchoredSchedule& anchored,
                     const ConstraintSet& existing, Rng& rng) const {
    const TaskArc& blocked =
        ts_.graph().arc(anchored.schedule.steps[static_cast<size_t>(conflict.index)].arc)
            .payload;
    switch (conflict.cls) {
      case ConflictClass::ObjectObject:
        return resolve_object_object(conflict, anchored, blocked, existing, rng);
      case ConflictClass::RobotObject:
        if (blocked.action == TaskAction::Handover) {
          // a clear anchor elsewhere in the reach intersection beats waiting
          // for the blocker to move
          if (auto alt = clear_handover_anchor(conflict, anchored, blocked, rng)) {
            return ResampledAnchor{conflict.index, *alt};
          }
        }
        return make_ordering_constraint(conflict.blocker, blocked, existing, rng);
      case ConflictClass::RobotRobot:
        // Robot-robot interference is timing-dependent; deferred to the
        // motion conflict resolution layer.
        return Unresolvable{"robot-robot at task level (deferred)"};
      case ConflictClass::RobotWall: {
        if (blocked.action == TaskAction::Handover) {
          // a wall-crossing handover point is a sampling artifact as long as
          // some clear point exists
          if (auto alt = clear_handover_anchor(conflict, anchored, blocked, rng)) {
            return ResampledAnchor{conflict.index, *alt};
          }
        }
        // The transition's arm configuration crosses a wall; block the route
        // while its tail state holds so alternative actors stay available.
        TaskConstraint c;
        c.kind = ConstraintKind::Frontier;
        c.v_pre = tail_object_state(ts_, blocked);
        c.v_post = head_object_state(ts_, blocked);
        return c;
      }
    }
    return Unresolvable{"unknown conflict class"};
  }

 private:
  // Frontier statics a handover anchor must dodge: everything except the
  // transition's own participants (the receiver's rest disc would otherwise
  // reject its own arm).
  std::vector<Disc> handover_avoid(const TaskArc& arc,
                                   const std::map<int, int>& frontier) const {
    std::vector<Disc> out;
    for (const auto& st : detail::frontier_statics(ts_, table_, frontier)) {
      if (st.kind == ConflictBody::Kind::Robot &&
          (st.id == arc.robot || st.id == arc.robot2)) {
        continue;
      }
      if (st.kind == ConflictBody::Kind::Object && st.id == arc.object) continue;
      out.push_back(std::get<Disc>(st.shape));
    }
    return out;
  }

  // Wall- and static-clear handover point for the conflicting step, if one
  // exists within a generous sampling budget.
  std::optional<Vec2> clear_handover_anchor(const TaskConflict& conflict,
                                            const AnchoredSchedule& anchored,
                                            const TaskArc& blocked, Rng& rng) const {
    const auto& step = anchored.schedule.steps[static_cast<size_t>(conflict.index)];
    const auto avoid = handover_avoid(blocked, step.frontier_before);
    const Vec2 p = sample_handover_point(world_, blocked.robot, blocked.robot2,
                                         blocked.object, rng, 1000, &avoid);
    // the sampler falls back to a dirty point; accept only a clean one
    const auto trans = detail::transition_shapes(world_, blocked, p);
    for (const auto& body : trans.bodies) {
      for (const auto& w : world_.walls) {
        if (collides(body.shape, Shape{w})) return std::nullopt;
      }
      for (const auto& d : avoid) {
        if (collides(body.shape, Shape{d})) return std::nullopt;
      }
    }
    return p;
  }

  static bool participates(const ConflictBody& st,
                           const detail::TransitionShapes& trans) {
    if (st.kind == ConflictBody::Kind::Object) return st.id == trans.object;
    for (int r : trans.robots) {
      if (st.kind == ConflictBody::Kind::Robot && st.id == r) return true;
    }
    return false;
  }

  static ConflictClass classify(const ConflictBody& a, const ConflictBody& b) {
    const int robots = (a.kind == ConflictBody::Kind::Robot ? 1 : 0) +
                       (b.kind == ConflictBody::Kind::Robot ? 1 : 0);
    if (robots == 0) return ConflictClass::ObjectObject;
    if (robots == 1) return ConflictClass::RobotObject;
    return ConflictClass::RobotRobot;
  }

  Resolution resolve_object_object(const TaskConflict& conflict,
                                   const AnchoredSchedule& anchored,
                                   const TaskArc& blocked,
                                   const ConstraintSet& existing, Rng& rng) const {
    const auto prov = [&](const ConflictBody& b) {
      return table_.entry(b.id, b.pose).provenance;
    };
    // Prefer resampling the transition-side pose (it is the later placement),
    // then the blocker, whichever is move-out provenance.
    const bool moving_moveout = conflict.moving.pose >= 0 &&
                                prov(conflict.moving) == PoseProvenance::Moveout;
    const bool blocker_moveout = conflict.blocker.pose >= 0 &&
                                 prov(conflict.blocker) == PoseProvenance::Moveout;
    if (moving_moveout || blocker_moveout) {
      const ConflictBody& target = moving_moveout ? conflict.moving : conflict.blocker;
      const ConflictBody& other = moving_moveout ? conflict.blocker : conflict.moving;
      ResampledPose r;
      r.object = target.id;
      r.old_pose = target.pose;
      std::vector<Disc> avoid = anchored_discs(target.id);
      avoid.push_back(std::get<Disc>(other.shape));
      PoseSampleOptions opt;
      opt.required_reach = robots_touching_pose(anchored, target.id, target.pose);
      auto p = sample_stable_pose(world_, target.id, avoid, rng, opt);
      if (!p) {
        // No alternative pose; grow the space for this object instead.
        return ExpandTaskSpace{target.id, std::nullopt};
      }
      r.new_point = *p;
      return r;
    }
    // Both poses anchored at start/goal. A goal-goal (or start-start) overlap
    // is permanent and unresolvable; a start-goal mix is an ordering problem.
    const auto pa = prov(conflict.moving);
    const auto pb = prov(conflict.blocker);
    if (pa == pb) {
      return Unresolvable{"anchored pose overlap between objects " +
                          std::to_string(conflict.moving.id) + " and " +
                          std::to_string(conflict.blocker.id)};
    }
    return make_ordering_constraint(conflict.blocker, blocked, existing, rng);
  }

  // Frontier constraint: while the blocker rests at its pose, the blocked
  // arc's object-state head may not be produced. A blocked-both-orders cycle
  // over the constraint digraph upgrades to a task-space expansion.
  Resolution make_ordering_constraint(const ConflictBody& blocker,
                                      const TaskArc& blocked,
                                      const ConstraintSet& existing, Rng& rng) const {
    (void)rng;
    TaskConstraint c;
    c.kind = ConstraintKind::Frontier;
    c.v_pre = ts_.object_at_vertex(blocker.id, blocker.pose);
    c.v_post = head_object_state(ts_, blocked);
    if (creates_cycle(c, existing)) {
      return ExpandTaskSpace{blocker.id, c};
    }
    return c;
  }

  bool creates_cycle(const TaskConstraint& c, const ConstraintSet& existing) const {
    const auto object_of = [&](int vid) {
      const TaskVertex& v = ts_.graph().vertex(vid);
      return v.object;
    };
    const int from = object_of(c.v_pre);
    const int to = object_of(c.v_post);
    if (from < 0 || to < 0) return false;
    // chain scan: does a path to -> ... -> from already exist?
    std::set<int> frontier{to}, visited{to};
    while (!frontier.empty()) {
      std::set<int> next;
      for (const auto& e : existing) {
        if (e.kind != ConstraintKind::Frontier) continue;
        const int a = object_of(e.v_pre);
        const int b = object_of(e.v_post);
        if (a < 0 || b < 0 || !frontier.count(a)) continue;
        if (b == from) return true;
        if (visited.insert(b).second) next.insert(b);
      }
      frontier = std::move(next);
    }
    return false;
  }

  std::vector<Disc> anchored_discs(int except_object) const {
    std::vector<Disc> out;
    for (const auto& ob : world_.objects) {
      if (ob.id == except_object) continue;
      out.push_back({ob.start, ob.radius});
      out.push_back({ob.goal, ob.radius});
    }
    return out;
  }

  // Robots whose pick/place arcs touch (object, pose) in the schedule; a
  // replacement pose must stay within their reach.
  std::vector<int> robots_touching_pose(const AnchoredSchedule& anchored, int object,
                                        int pose) const {
    std::set<int> ids;
    for (const auto& step : anchored.schedule.steps) {
      const TaskArc& a = ts_.graph().arc(step.arc).payload;
      if (a.object == object && a.pose == pose &&
          (a.action == TaskAction::Pick || a.action == TaskAction::Place)) {
        ids.insert(a.robot);
      }
    }
    return {ids.begin(), ids.end()};
  }

  const TaskSpace& ts_;
  const PoseTable& table_;
  const World& world_;
};

}  // namespace lazydash
