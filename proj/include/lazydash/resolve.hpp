#pragma once

#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "lazydash/motion_plan.hpp"

namespace lazydash {

// Scheduled adaptive robot coordination: dependency graph over the plan,
// longest-path timing, timed conflict detection between motion hyperarcs, and
// composite-space replanning with constraint feedback on failure.

struct TrackSegment {
  double t0 = 0.0, t1 = 0.0;
  Vec2 a, b;
};

struct EntityTrack {
  std::vector<TrackSegment> segs;

  Vec2 pos(double t) const {
    if (segs.empty()) return {};
    if (t <= segs.front().t0) return segs.front().a;
    for (const auto& s : segs) {
      if (t <= s.t1) {
        const double dur = s.t1 - s.t0;
        if (dur <= 0.0) return s.b;
        const double u = (t - s.t0) / dur;
        return s.a + (s.b - s.a) * u;
      }
    }
    return segs.back().b;
  }
};

struct Attachment {
  int object = -1;
  int robot = -1;
  double t0 = 0.0, t1 = 0.0;
  bool open = false;  // still held when the schedule ends
};

struct PlacementSpan {
  double t0 = 0.0, t1 = 0.0;
  int pose = -1;
};

// Contact waiver around a transition: the participants may touch near the
// anchor during the adjoining motion windows (grasp contact, handover meet,
// arm resting against a freshly placed object).
struct WaiverEvent {
  double t0 = 0.0, t1 = 0.0;
  Vec2 anchor;
  double radius = 0.0;
  std::vector<std::pair<char, int>> participants;  // ('r', id) / ('o', id)
};

struct TimedPlan {
  std::vector<double> start, end;
  double makespan = 0.0;
  std::vector<EntityTrack> robot_tracks;
  std::vector<EntityTrack> object_tracks;
  std::vector<Attachment> attachments;
  std::vector<std::vector<PlacementSpan>> placements;
  std::vector<WaiverEvent> waivers;

  bool attached(int object, int robot, double t) const {
    for (const auto& a : attachments) {
      if (a.object == object && a.robot == robot && t >= a.t0 && t <= a.t1) return true;
    }
    return false;
  }
};

struct DependencyGraph {
  std::vector<std::vector<int>> preds;  // per plan arc
};

// Latest-producer rule: arc j depends on the latest arc whose head produced
// an entity state consumed by j's tail.
inline DependencyGraph dependency_graph(const OptimisticSchedule& plan,
                                        const World& world) {
  DependencyGraph dep;
  dep.preds.resize(plan.arcs.size());
  std::map<int, int> robot_producer;
  std::map<int, int> object_producer;
  for (size_t i = 0; i < plan.arcs.size(); ++i) {
    const PlanArc& a = plan.arcs[i];
    std::set<int> preds;
    const auto consume_robot = [&](int r) {
      auto it = robot_producer.find(r);
      if (it != robot_producer.end()) preds.insert(it->second);
    };
    const auto consume_object = [&](int o) {
      auto it = object_producer.find(o);
      if (it != object_producer.end()) preds.insert(it->second);
    };
    switch (a.kind) {
      case PlanArc::Kind::Source:
        for (const auto& r : world.robots) robot_producer[r.id] = static_cast<int>(i);
        for (const auto& ob : world.objects) object_producer[ob.id] = static_cast<int>(i);
        break;
      case PlanArc::Kind::Sink:
        for (const auto& r : world.robots) consume_robot(r.id);
        for (const auto& ob : world.objects) consume_object(ob.id);
        break;
      case PlanArc::Kind::Move:
        for (int r : a.robots) {
          consume_robot(r);
          robot_producer[r] = static_cast<int>(i);
        }
        if (a.carried >= 0) {
          consume_object(a.carried);
          object_producer[a.carried] = static_cast<int>(i);
        }
        break;
      case PlanArc::Kind::Transition:
        for (int r : a.robots) {
          consume_robot(r);
          robot_producer[r] = static_cast<int>(i);
        }
        consume_object(a.object);
        object_producer[a.object] = static_cast<int>(i);
        break;
    }
    for (int p : preds) {
      if (p >= static_cast<int>(i)) throw std::runtime_error("dependency cycle");
      dep.preds[i].push_back(p);
    }
  }
  return dep;
}

// Longest-path start times. Arcs in a sync group are forced to start
// together (composite replacements must execute in lockstep).
inline void schedule_times(const DependencyGraph& dep, const OptimisticSchedule& plan,
                           const std::vector<std::pair<int, int>>& sync_pairs,
                           std::vector<double>& start, std::vector<double>& end,
                           double& makespan) {
  const size_t n = plan.arcs.size();
  start.assign(n, 0.0);
  end.assign(n, 0.0);
  for (int pass = 0; pass < 2 + 2 * static_cast<int>(sync_pairs.size()); ++pass) {
    for (size_t i = 0; i < n; ++i) {
      double s = start[i];  // keep sync floor from previous pass
      if (pass == 0) s = 0.0;
      for (int p : dep.preds[i]) s = std::max(s, end[static_cast<size_t>(p)]);
      start[i] = s;
      end[i] = s + plan.arcs[i].duration;
    }
    bool changed = false;
    for (auto [a, b] : sync_pairs) {
      const double s = std::max(start[static_cast<size_t>(a)], start[static_cast<size_t>(b)]);
      if (start[static_cast<size_t>(a)] != s || start[static_cast<size_t>(b)] != s) {
        start[static_cast<size_t>(a)] = start[static_cast<size_t>(b)] = s;
        end[static_cast<size_t>(a)] = s + plan.arcs[static_cast<size_t>(a)].duration;
        end[static_cast<size_t>(b)] = s + plan.arcs[static_cast<size_t>(b)].duration;
        changed = true;
      }
    }
    if (!changed && pass > 0) break;
  }
  makespan = 0.0;
  for (size_t i = 0; i < n; ++i) makespan = std::max(makespan, end[i]);
}

namespace resolve_detail {

inline void append_hold(EntityTrack& tr, double until, Vec2 at) {
  const double t0 = tr.segs.empty() ? 0.0 : tr.segs.back().t1;
  if (until > t0) tr.segs.push_back({t0, until, at, at});
}

// Copy [t0, t1] of src into dst (used for carried objects riding a gripper).
inline void copy_span(EntityTrack& dst, const EntityTrack& src, double t0, double t1) {
  for (const auto& s : src.segs) {
    if (s.t1 <= t0 || s.t0 >= t1) continue;
    const double a = std::max(s.t0, t0);
    const double b = std::min(s.t1, t1);
    const double dur = s.t1 - s.t0;
    Vec2 pa = s.a, pb = s.b;
    if (dur > 0.0) {
      pa = s.a + (s.b - s.a) * ((a - s.t0) / dur);
      pb = s.a + (s.b - s.a) * ((b - s.t0) / dur);
    }
    dst.segs.push_back({a, b, pa, pb});
  }
}

}  // namespace resolve_detail

// Expand the timed plan into per-entity piecewise-linear tracks plus
// attachments, placements and contact waivers. This is the planner-side
// replay model; the harness validator re-implements its own from the
// serialized form.
inline TimedPlan build_timed_plan(const OptimisticSchedule& plan, const World& world,
                                  const PoseTable& table,
                                  const std::vector<std::pair<int, int>>& sync_pairs) {
  (void)table;
  TimedPlan out;
  const DependencyGraph dep = dependency_graph(plan, world);
  schedule_times(dep, plan, sync_pairs, out.start, out.end, out.makespan);

  const int nr = static_cast<int>(world.robots.size());
  const int no = static_cast<int>(world.objects.size());
  out.robot_tracks.resize(static_cast<size_t>(nr));
  out.object_tracks.resize(static_cast<size_t>(no));
  out.placements.resize(static_cast<size_t>(no));

  // robot tracks: holds between their move arcs
  for (const auto& r : world.robots) {
    EntityTrack& tr = out.robot_tracks[static_cast<size_t>(r.id)];
    Vec2 cur = r.base;
    for (size_t i = 0; i < plan.arcs.size(); ++i) {
      const PlanArc& a = plan.arcs[i];
      if (a.kind != PlanArc::Kind::Move) continue;
      if (a.robots.size() != 1 || a.robots[0] != r.id) continue;
      if (a.path.waypoints.size() < 2) continue;
      resolve_detail::append_hold(tr, out.start[i], cur);
      for (size_t w = 0; w + 1 < a.path.waypoints.size(); ++w) {
        tr.segs.push_back({out.start[i] + a.times[w], out.start[i] + a.times[w + 1],
                           a.path.waypoints[w].limbs[0].effector,
                           a.path.waypoints[w + 1].limbs[0].effector});
      }
      cur = a.path.waypoints.back().limbs[0].effector;
    }
    resolve_detail::append_hold(tr, out.makespan, cur);
    if (tr.segs.empty()) tr.segs.push_back({0.0, out.makespan, cur, cur});
  }

  // object tracks: static placements and carried spans
  for (const auto& ob : world.objects) {
    EntityTrack& tr = out.object_tracks[static_cast<size_t>(ob.id)];
    Vec2 cur = ob.start;
    int cur_pose = kStartPose;
    double t_cursor = 0.0;
    int holder = -1;
    double hold_since = 0.0;
    for (size_t i = 0; i < plan.arcs.size(); ++i) {
      const PlanArc& a = plan.arcs[i];
      if (a.kind != PlanArc::Kind::Transition || a.object != ob.id) continue;
      const double t = out.start[i];
      if (a.action == TaskAction::Pick) {
        resolve_detail::append_hold(tr, t, cur);
        out.placements[static_cast<size_t>(ob.id)].push_back({t_cursor, t, cur_pose});
        holder = a.robots[0];
        hold_since = t;
      } else if (a.action == TaskAction::Place) {
        resolve_detail::copy_span(tr, out.robot_tracks[static_cast<size_t>(holder)],
                                  hold_since, t);
        out.attachments.push_back({ob.id, holder, hold_since, t});
        holder = -1;
        cur = a.anchor;
        cur_pose = a.pose;
        t_cursor = t;
      } else if (a.action == TaskAction::Handover) {
        resolve_detail::copy_span(tr, out.robot_tracks[static_cast<size_t>(holder)],
                                  hold_since, t);
        out.attachments.push_back({ob.id, holder, hold_since, t});
        holder = a.robots[1];
        hold_since = t;
      }
    }
    if (holder >= 0) {
      resolve_detail::copy_span(tr, out.robot_tracks[static_cast<size_t>(holder)],
                                hold_since, out.makespan);
      out.attachments.push_back({ob.id, holder, hold_since, out.makespan, true});
    } else {
      resolve_detail::append_hold(tr, out.makespan, cur);
      out.placements[static_cast<size_t>(ob.id)].push_back(
          {t_cursor, out.makespan, cur_pose});
    }
    if (tr.segs.empty()) tr.segs.push_back({0.0, out.makespan, cur, cur});
  }

  // contact waivers around each transition
  double max_arm = 0.0, max_obj = 0.0;
  for (const auto& r : world.robots) max_arm = std::max(max_arm, r.arm_halfwidth);
  for (const auto& ob : world.objects) max_obj = std::max(max_obj, ob.radius);
  const double ds = world.collision_resolution();
  for (size_t i = 0; i < plan.arcs.size(); ++i) {
    const PlanArc& a = plan.arcs[i];
    if (a.kind != PlanArc::Kind::Transition) continue;
    WaiverEvent w;
    w.anchor = a.anchor;
    w.radius = 2.0 * max_arm + max_obj + ds;
    w.t0 = out.start[i];
    w.t1 = out.end[i];
    for (int r : a.robots) {
      w.participants.push_back({'r', r});
      // adjoining in-move: the robot's latest move before this transition
      int last_move = -1;
      for (size_t j = 0; j < i; ++j) {
        const PlanArc& m = plan.arcs[j];
        if (m.kind == PlanArc::Kind::Move && m.robots.size() == 1 && m.robots[0] == r) {
          last_move = static_cast<int>(j);
        }
      }
      if (last_move >= 0) {
        w.t0 = std::min(w.t0, out.start[static_cast<size_t>(last_move)]);
      }
      // adjoining out-move: contact may persist until the robot next departs
      bool found = false;
      for (size_t j = i + 1; j < plan.arcs.size() && !found; ++j) {
        const PlanArc& m = plan.arcs[j];
        if (m.kind == PlanArc::Kind::Move && m.robots.size() == 1 && m.robots[0] == r) {
          w.t1 = std::max(w.t1, out.end[j]);
          found = true;
        }
      }
      if (!found) w.t1 = out.makespan;
    }
    w.participants.push_back({'o', a.object});
    out.waivers.push_back(w);
  }
  return out;
}

struct MotionConflict {
  enum class Kind { ArcArc, ArcVertex };
  Kind kind = Kind::ArcArc;
  double t = 0.0;
  int arc_a = -1;  // plan arc index of the (first) moving participant
  int arc_b = -1;  // second moving arc for ArcArc
  char static_kind = 0;  // 'r' or 'o' for ArcVertex
  int static_id = -1;
  Vec2 point;              // collision location
  double blocker_radius = 0.0;
};

namespace resolve_detail {

inline Vec2 segment_closest_point(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 <= 0.0) return a;
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

// Representative contact point between two core segments.
inline Vec2 contact_point(Vec2 a1, Vec2 b1, Vec2 a2, Vec2 b2) {
  Vec2 best_p = a1, best_q = a2;
  double best = std::numeric_limits<double>::infinity();
  const auto consider = [&](Vec2 p, Vec2 qa, Vec2 qb, bool swap) {
    const Vec2 q = segment_closest_point(p, qa, qb);
    const double d = dist(p, q);
    if (d < best) {
      best = d;
      best_p = swap ? q : p;
      best_q = swap ? p : q;
    }
  };
  consider(a1, a2, b2, false);
  consider(b1, a2, b2, false);
  consider(a2, a1, b1, true);
  consider(b2, a1, b1, true);
  return (best_p + best_q) * 0.5;
}

struct BodyState {
  char kind = 0;  // 'r' robot, 'o' object
  int id = -1;
  Vec2 pos;       // effector / center
  Shape shape;
  bool moving = false;
  int arc = -1;   // plan arc index when moving
};

inline bool waived(const TimedPlan& timed, const BodyState& a, const BodyState& b,
                   double t) {
  for (const auto& w : timed.waivers) {
    if (t < w.t0 || t > w.t1) continue;
    bool has_a = false, has_b = false;
    for (const auto& [k, id] : w.participants) {
      if (k == a.kind && id == a.id) has_a = true;
      if (k == b.kind && id == b.id) has_b = true;
    }
    if (!has_a || !has_b) continue;
    if (dist(a.pos, w.anchor) <= w.radius && dist(b.pos, w.anchor) <= w.radius) {
      return true;
    }
  }
  return false;
}

}  // namespace resolve_detail

// Sample the timed plan at resolution dt and return the earliest pairwise
// conflict, or nullopt. Pairs coupled by a grasp or by a transition contact
// waiver are exempt.
inline std::optional<MotionConflict> find_motion_conflict(
    const OptimisticSchedule& plan, const TimedPlan& timed, const World& world,
    double dt) {
  const auto active_arc = [&](int robot, double t) {
    for (size_t i = 0; i < plan.arcs.size(); ++i) {
      const PlanArc& a = plan.arcs[i];
      if (a.kind == PlanArc::Kind::Move && a.robots.size() == 1 &&
          a.robots[0] == robot && timed.start[i] < t && t < timed.end[i]) {
        return static_cast<int>(i);
      }
    }
    return -1;
  };
  const auto last_move_before = [&](int robot, double t) {
    int best = -1;
    for (size_t i = 0; i < plan.arcs.size(); ++i) {
      const PlanArc& a = plan.arcs[i];
      if (a.kind == PlanArc::Kind::Move && a.robots.size() == 1 &&
          a.robots[0] == robot && timed.start[i] <= t) {
        best = static_cast<int>(i);
      }
    }
    return best;
  };

  const long n_steps = static_cast<long>(std::floor(timed.makespan / dt));
  for (long step = 0; step <= n_steps + 1; ++step) {
    const double t = step <= n_steps ? step * dt : timed.makespan;
    if (step == n_steps + 1 && timed.makespan <= n_steps * dt) break;

    std::vector<resolve_detail::BodyState> bodies;
    for (const auto& r : world.robots) {
      resolve_detail::BodyState b;
      b.kind = 'r';
      b.id = r.id;
      b.pos = timed.robot_tracks[static_cast<size_t>(r.id)].pos(t);
      b.shape = Capsule{r.base, b.pos, r.arm_halfwidth};
      b.arc = active_arc(r.id, t);
      b.moving = b.arc >= 0;
      bodies.push_back(b);
    }
    for (const auto& ob : world.objects) {
      resolve_detail::BodyState b;
      b.kind = 'o';
      b.id = ob.id;
      b.pos = timed.object_tracks[static_cast<size_t>(ob.id)].pos(t);
      b.shape = Disc{b.pos, ob.radius};
      for (const auto& at : timed.attachments) {
        if (at.object == ob.id && t > at.t0 && t < at.t1) {
          const int arc = active_arc(at.robot, t);
          if (arc >= 0) {
            b.moving = true;
            b.arc = arc;
          }
        }
      }
      bodies.push_back(b);
    }

    for (size_t i = 0; i < bodies.size(); ++i) {
      for (size_t j = i + 1; j < bodies.size(); ++j) {
        const auto& A = bodies[i];
        const auto& B = bodies[j];
        if (A.kind == 'r' && B.kind == 'o' && timed.attached(B.id, A.id, t)) continue;
        if (A.kind == 'o' && B.kind == 'r' && timed.attached(A.id, B.id, t)) continue;
        if (A.moving && B.moving && A.arc == B.arc) continue;
        if (!collides(A.shape, B.shape)) continue;
        if (resolve_detail::waived(timed, A, B, t)) continue;

        MotionConflict c;
        c.t = t;
        c.point = resolve_detail::contact_point(
            detail::core_a(A.shape), detail::core_b(A.shape), detail::core_a(B.shape),
            detail::core_b(B.shape));
        if (A.moving && B.moving) {
          c.kind = MotionConflict::Kind::ArcArc;
          c.arc_a = std::min(A.arc, B.arc);
          c.arc_b = std::max(A.arc, B.arc);
        } else if (A.moving || B.moving) {
          const auto& mover = A.moving ? A : B;
          const auto& blocker = A.moving ? B : A;
          c.kind = MotionConflict::Kind::ArcVertex;
          c.arc_a = mover.arc;
          c.static_kind = blocker.kind;
          c.static_id = blocker.id;
          c.blocker_radius = blocker.kind == 'o'
                                 ? world.object(blocker.id).radius
                                 : world.robot(blocker.id).arm_halfwidth;
        } else {
          // static-static contact: attribute to the most recent move of the
          // later-settled side so replanning has a target
          const auto settle_arc = [&](const resolve_detail::BodyState& b) {
            if (b.kind == 'r') return last_move_before(b.id, t);
            int robot = -1;
            double latest = -1.0;
            for (const auto& at : timed.attachments) {
              if (at.object == b.id && at.t1 <= t + 1e-12 && at.t1 > latest) {
                latest = at.t1;
                robot = at.robot;
              }
            }
            return robot >= 0 ? last_move_before(robot, latest) : -1;
          };
          const int sa = settle_arc(A);
          const int sb = settle_arc(B);
          if (sa < 0 && sb < 0) continue;  // initial statics; scenario-level issue
          const bool a_later = sa >= sb;
          const auto& blocker = a_later ? B : A;
          c.kind = MotionConflict::Kind::ArcVertex;
          c.arc_a = a_later ? sa : sb;
          c.static_kind = blocker.kind;
          c.static_id = blocker.id;
          c.blocker_radius = blocker.kind == 'o'
                                 ? world.object(blocker.id).radius
                                 : world.robot(blocker.id).arm_halfwidth;
        }
        return c;
      }
    }
  }
  return std::nullopt;
}

struct ResolveBudgets {
  int max_iterations = 50;
  int arcvertex_replans = 3;
  double region_clearance = 0.05;
};

struct ResolveOutcome {
  enum class Kind { Valid, MotionFeedback, TaskFeedback, Exhausted };
  Kind kind = Kind::Exhausted;
  TimedPlan timed;
  std::vector<MotionConstraint> cms;
  std::vector<TaskConstraint> cts;
  long conflicts = 0;
  long subproblems = 0;
};

// Outer loop of the coordination stage: find the earliest conflict, carve a
// subproblem, solve it in a composite or constrained space, update the plan,
// repeat. Unsolvable conflicts feed constraints back to the motion or task
// layer.
class Resolver {
 public:
  Resolver(const TaskSpace& ts, const PoseTable& table, MotionState& state,
           const MotionParams& params, const ResolveBudgets& budgets)
      : ts_(ts), table_(table), world_(ts.world()), state_(state), params_(params),
        budgets_(budgets) {}

  ResolveOutcome resolve_all(OptimisticSchedule& plan,
                             std::vector<std::pair<int, int>>& sync_pairs, Rng& rng) {
    ResolveOutcome out;
    const double dt = world_.collision_resolution() / world_.max_speed();
    std::map<std::tuple<int, char, int>, int> retries;
    for (int iter = 0; iter < budgets_.max_iterations; ++iter) {
      TimedPlan timed = build_timed_plan(plan, world_, table_, sync_pairs);
      auto conflict = find_motion_conflict(plan, timed, world_, dt);
      if (!conflict) {
        out.kind = ResolveOutcome::Kind::Valid;
        out.timed = std::move(timed);
        return out;
      }
      out.conflicts++;
      if (conflict->kind == MotionConflict::Kind::ArcArc) {
        out.subproblems++;
        if (!solve_arc_arc(plan, timed, *conflict, sync_pairs,
                           rng.fork(static_cast<std::uint64_t>(iter)))) {
          out.kind = ResolveOutcome::Kind::MotionFeedback;
          out.cms.push_back(arc_arc_constraint(plan, *conflict));
          return out;
        }
      } else {
        out.subproblems++;
        auto key = std::make_tuple(conflict->arc_a, conflict->static_kind,
                                   conflict->static_id);
        if (!solve_arc_vertex(plan, timed, *conflict,
                              rng.fork(static_cast<std::uint64_t>(iter) * 7919u))) {
          const int n = ++retries[key];
          if (n >= budgets_.arcvertex_replans) {
            return arc_vertex_feedback(plan, timed, *conflict, std::move(out));
          }
        } else {
          retries[key] = 0;
        }
      }
    }
    out.kind = ResolveOutcome::Kind::Exhausted;
    return out;
  }

 private:
  // Frozen geometry over a window: objects placed throughout it and robots
  // that do not move during it, parked at their configuration.
  std::vector<Shape> window_statics(const OptimisticSchedule& plan,
                                    const TimedPlan& timed, double t0, double t1,
                                    const std::set<int>& skip_robots,
                                    const std::set<int>& skip_objects) const {
    std::vector<Shape> out;
    for (const auto& ob : world_.objects) {
      if (skip_objects.count(ob.id)) continue;
      for (const auto& span : timed.placements[static_cast<size_t>(ob.id)]) {
        if (span.t0 <= t0 + 1e-12 && span.t1 >= t1 - 1e-12) {
          out.push_back(Disc{table_.position(ob.id, span.pose), ob.radius});
          break;
        }
      }
    }
    for (const auto& r : world_.robots) {
      if (skip_robots.count(r.id)) continue;
      bool moves = false;
      for (size_t i = 0; i < plan.arcs.size(); ++i) {
        const PlanArc& a = plan.arcs[i];
        if (a.kind == PlanArc::Kind::Move && a.robots.size() == 1 &&
            a.robots[0] == r.id && timed.start[i] < t1 && timed.end[i] > t0) {
          moves = true;
          break;
        }
      }
      if (!moves) {
        out.push_back(
            Capsule{r.base, timed.robot_tracks[static_cast<size_t>(r.id)].pos(t0),
                    r.arm_halfwidth});
      }
    }
    return out;
  }

  bool solve_arc_arc(OptimisticSchedule& plan, const TimedPlan& timed,
                     const MotionConflict& c,
                     std::vector<std::pair<int, int>>& sync_pairs, Rng rng) {
    PlanArc& arc_a = plan.arcs[static_cast<size_t>(c.arc_a)];
    PlanArc& arc_b = plan.arcs[static_cast<size_t>(c.arc_b)];
    const ElementKey joint = element_joint(arc_a.element, arc_b.element);

    // map each arc's single limb onto its joint slot
    const auto slot_of = [&](const PlanArc& a) {
      for (size_t s = 0; s < joint.slots.size(); ++s) {
        if (joint.slots[s].first == a.robots[0] && joint.slots[s].second == a.carried) {
          return static_cast<int>(s);
        }
      }
      throw std::logic_error("joint slot mismatch");
    };
    const int sa = slot_of(arc_a);
    const int sb = slot_of(arc_b);

    const auto joint_config = [&](const Config& qa, const Config& qb) {
      std::vector<Vec2> eff(joint.slots.size());
      eff[static_cast<size_t>(sa)] = qa.limbs[0].effector;
      eff[static_cast<size_t>(sb)] = qb.limbs[0].effector;
      return element_config(joint, eff);
    };
    const Config start = joint_config(arc_a.path.waypoints.front(),
                                      arc_b.path.waypoints.front());
    const Config goal =
        joint_config(arc_a.path.waypoints.back(), arc_b.path.waypoints.back());

    const double t0 = std::max(timed.start[static_cast<size_t>(c.arc_a)],
                               timed.start[static_cast<size_t>(c.arc_b)]);
    const double t1 = std::min(timed.end[static_cast<size_t>(c.arc_a)],
                               timed.end[static_cast<size_t>(c.arc_b)]);
    std::set<int> skip_r{arc_a.robots[0], arc_b.robots[0]};
    std::set<int> skip_o;
    if (arc_a.carried >= 0) skip_o.insert(arc_a.carried);
    if (arc_b.carried >= 0) skip_o.insert(arc_b.carried);
    const auto statics = window_statics(plan, timed, t0, t1, skip_r, skip_o);

    // Anchor contacts (a shared transition point, a grasp target, a freshly
    // released disc touched at departure) carry the same waiver the timed
    // replay applies.
    const double waiver_radius = motion_detail::contact_waiver_radius(world_);
    std::vector<Disc> waivers;
    for (const Config* q : {&start, &goal}) {
      const Vec2 pa = q->limbs[0].effector;
      const Vec2 pb = q->limbs[1].effector;
      // identical effector points mean a shared transition anchor
      if (dist(pa, pb) <= 1e-9) {
        waivers.push_back(Disc{pa, waiver_radius});
      }
    }
    add_endpoint_contact_waivers(statics, start, goal, waiver_radius, waivers);

    Roadmap& rm = state_.roadmap(joint, params_);
    // subproblem solves get a wider repair budget than schedule tracing
    LazyPathParams lp = params_.lazy;
    lp.repair_rounds = 6;
    lp.max_iterations = 400;
    lp.global_samples = 120;
    auto path = LazyPath(rm, world_, state_.counters)
                    .query(start, goal, statics, {}, lp, rng, waivers);
    if (!path) return false;
    (void)waiver_radius;

    // split the joint path per limb; both arcs share the joint timing
    const double joint_len = path->total_length;
    std::vector<double> cum{0.0};
    for (size_t w = 1; w < path->waypoints.size(); ++w) {
      cum.push_back(cum.back() +
                    config_distance(path->waypoints[w - 1], path->waypoints[w]));
    }
    const auto project = [&](int slot, int robot, int carried) {
      Path p;
      for (const auto& q : path->waypoints) {
        Config single;
        single.limbs.push_back(
            {robot, q.limbs[static_cast<size_t>(slot)].effector, carried});
        p.waypoints.push_back(single);
      }
      p = make_path(std::move(p.waypoints));
      return p;
    };
    Path pa = project(sa, arc_a.robots[0], arc_a.carried);
    Path pb = project(sb, arc_b.robots[0], arc_b.carried);
    const double ta = pa.total_length / world_.robot(arc_a.robots[0]).speed;
    const double tb = pb.total_length / world_.robot(arc_b.robots[0]).speed;
    const double T = std::max(ta, tb);
    std::vector<double> times;
    for (double cl : cum) times.push_back(joint_len > 0.0 ? T * cl / joint_len : 0.0);

    arc_a.path = std::move(pa);
    arc_b.path = std::move(pb);
    arc_a.times = times;
    arc_b.times = times;
    arc_a.duration = T;
    arc_b.duration = T;
    arc_a.hm_arc = register_replacement(arc_a);
    arc_b.hm_arc = register_replacement(arc_b);

    // stale couplings of either arc are superseded by the new joint solution
    std::vector<std::pair<int, int>> keep;
    for (auto [x, y] : sync_pairs) {
      if (x != c.arc_a && y != c.arc_a && x != c.arc_b && y != c.arc_b) {
        keep.push_back({x, y});
      }
    }
    keep.push_back({c.arc_a, c.arc_b});
    sync_pairs = std::move(keep);
    return true;
  }

  bool solve_arc_vertex(OptimisticSchedule& plan, const TimedPlan& timed,
                        const MotionConflict& c, Rng rng) {
    PlanArc& arc = plan.arcs[static_cast<size_t>(c.arc_a)];
    if (arc.kind != PlanArc::Kind::Move) return false;
    const double t0 = timed.start[static_cast<size_t>(c.arc_a)];
    const double t1 = timed.end[static_cast<size_t>(c.arc_a)];
    std::set<int> skip_r{arc.robots[0]};
    std::set<int> skip_o;
    if (arc.carried >= 0) skip_o.insert(arc.carried);
    auto statics = window_statics(plan, timed, t0, t1, skip_r, skip_o);
    // make sure the blocker is present even if it is not static over the
    // whole window
    if (c.static_kind == 'o' && !skip_o.count(c.static_id)) {
      statics.push_back(Disc{timed.object_tracks[static_cast<size_t>(c.static_id)].pos(c.t),
                             world_.object(c.static_id).radius});
    } else if (c.static_kind == 'r' && !skip_r.count(c.static_id)) {
      statics.push_back(
          Capsule{world_.robot(c.static_id).base,
                  timed.robot_tracks[static_cast<size_t>(c.static_id)].pos(c.t),
                  world_.robot(c.static_id).arm_halfwidth});
    }
    const std::vector<Disc> regions{
        Disc{c.point, c.blocker_radius + world_.robot(arc.robots[0]).arm_halfwidth +
                          budgets_.region_clearance}};
    std::vector<Disc> waivers;
    add_endpoint_contact_waivers(statics, arc.path.waypoints.front(),
                                 arc.path.waypoints.back(),
                                 motion_detail::contact_waiver_radius(world_), waivers);
    Roadmap& rm = state_.roadmap(arc.element, params_);
    LazyPathParams lp = params_.lazy;
    lp.repair_rounds = 5;
    auto path = LazyPath(rm, world_, state_.counters)
                    .query(arc.path.waypoints.front(), arc.path.waypoints.back(),
                           statics, regions, lp, rng, waivers);
    if (!path) return false;
    arc.path = std::move(*path);
    arc.times = motion_detail::waypoint_times(arc.path,
                                              world_.robot(arc.robots[0]).speed);
    arc.duration = arc.times.back();
    arc.hm_arc = register_replacement(arc);
    return true;
  }

  MotionConstraint arc_arc_constraint(const OptimisticSchedule& plan,
                                      const MotionConflict& c) const {
    MotionConstraint cm;
    cm.sig_a = task_signature(
        ts_.graph().arc(plan.arcs[static_cast<size_t>(c.arc_a)].task_arc).payload);
    cm.sig_b = task_signature(
        ts_.graph().arc(plan.arcs[static_cast<size_t>(c.arc_b)].task_arc).payload);
    double r = 0.0;
    for (const PlanArc* a : {&plan.arcs[static_cast<size_t>(c.arc_a)],
                             &plan.arcs[static_cast<size_t>(c.arc_b)]}) {
      r = std::max(r, world_.robot(a->robots[0]).arm_halfwidth);
      if (a->carried >= 0) r = std::max(r, world_.object(a->carried).radius);
    }
    cm.region = Disc{c.point, 2.0 * r + budgets_.region_clearance};
    return cm;
  }

  ResolveOutcome arc_vertex_feedback(const OptimisticSchedule& plan,
                                     const TimedPlan& timed, const MotionConflict& c,
                                     ResolveOutcome out) const {
    const PlanArc& arc = plan.arcs[static_cast<size_t>(c.arc_a)];
    if (c.static_kind == 'o') {
      // find the blocker's registered pose at the conflict time
      int pose = kStartPose;
      for (const auto& span : timed.placements[static_cast<size_t>(c.static_id)]) {
        if (span.t0 <= c.t && c.t <= span.t1) pose = span.pose;
      }
      TaskConstraint ct;
      ct.kind = ConstraintKind::Frontier;
      ct.v_pre = ts_.object_at_vertex(c.static_id, pose);
      ct.v_post = head_object_state(ts_, ts_.graph().arc(arc.task_arc).payload);
      out.cts.push_back(ct);
      out.kind = ResolveOutcome::Kind::TaskFeedback;
      return out;
    }
    // robot blockers have no task-space vertex; fall back to a motion region
    MotionConstraint cm;
    cm.sig_a = task_signature(ts_.graph().arc(arc.task_arc).payload);
    cm.sig_b = "parked:r" + std::to_string(c.static_id);
    cm.region = Disc{c.point, c.blocker_radius +
                                  world_.robot(arc.robots[0]).arm_halfwidth +
                                  budgets_.region_clearance};
    out.cms.push_back(cm);
    out.kind = ResolveOutcome::Kind::MotionFeedback;
    return out;
  }

  // Disc statics touched by a path endpoint are transition contacts; license
  // them with a waiver disc around the touched disc, as the timed replay does.
  void add_endpoint_contact_waivers(const std::vector<Shape>& statics,
                                    const Config& start, const Config& goal,
                                    double radius, std::vector<Disc>& out) const {
    for (const auto& st : statics) {
      const auto* d = std::get_if<Disc>(&st);
      if (d == nullptr) continue;
      for (const Config* q : {&start, &goal}) {
        bool touched = false;
        for (const auto& s : motion_detail::limb_shapes(world_, *q)) {
          if (collides(s, st)) touched = true;
        }
        if (touched) {
          out.push_back(Disc{d->center, radius});
          break;
        }
      }
    }
  }

  int register_replacement(const PlanArc& arc) {
    const int elem_vid = arc.carried >= 0
                             ? *ts_.find_holding_vertex(arc.robots[0], arc.carried)
                             : ts_.robot_free_vertex(arc.robots[0]);
    const int t = state_.ensure_vertex(elem_vid, arc.path.waypoints.front());
    const int h = state_.ensure_vertex(elem_vid, arc.path.waypoints.back());
    return state_.ensure_arc(MotionArcKind::Move, arc.task_arc, {t}, {h},
                             arc.path.total_length);
  }

  const TaskSpace& ts_;
  const PoseTable& table_;
  const World& world_;
  MotionState& state_;
  MotionParams params_;
  ResolveBudgets budgets_;
};

}  // namespace lazydash
