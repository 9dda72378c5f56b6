#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lazydash/rng.hpp"

namespace lazydash {

// Planar world model: capsule arms, disc objects, thick-segment walls.
// Units are meters; speeds m/s. All predicates are pure functions over
// immutable world data.

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2&) const = default;

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
};

inline double dist(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Closest distance from point p to segment [a,b].
inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.norm2();
  if (len2 <= 0.0) return dist(p, a);
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return dist(p, a + ab * t);
}

// Closest distance between segments [a1,b1] and [a2,b2].
inline double segment_segment_distance(Vec2 a1, Vec2 b1, Vec2 a2, Vec2 b2) {
  const auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
  };
  const double d1 = orient(a2, b2, a1);
  const double d2 = orient(a2, b2, b1);
  const double d3 = orient(a1, b1, a2);
  const double d4 = orient(a1, b1, b2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return 0.0;  // proper intersection
  }
  double d = point_segment_distance(a1, a2, b2);
  d = std::min(d, point_segment_distance(b1, a2, b2));
  d = std::min(d, point_segment_distance(a2, a1, b1));
  d = std::min(d, point_segment_distance(b2, a1, b1));
  return d;
}

struct Disc {
  Vec2 center;
  double r = 0.0;
};

// Arm body: the segment from base to effector, inflated by r.
struct Capsule {
  Vec2 a;  // base
  Vec2 b;  // effector
  double r = 0.0;
};

// Wall: a segment inflated by halfwidth.
struct Wall {
  Vec2 a;
  Vec2 b;
  double halfwidth = 0.0;
};

using Shape = std::variant<Disc, Capsule, Wall>;

namespace detail {
inline Vec2 core_a(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return d->center;
  if (const auto* c = std::get_if<Capsule>(&s)) return c->a;
  return std::get<Wall>(s).a;
}
inline Vec2 core_b(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return d->center;
  if (const auto* c = std::get_if<Capsule>(&s)) return c->b;
  return std::get<Wall>(s).b;
}
inline double radius(const Shape& s) {
  if (const auto* d = std::get_if<Disc>(&s)) return d->r;
  if (const auto* c = std::get_if<Capsule>(&s)) return c->r;
  return std::get<Wall>(s).halfwidth;
}
}  // namespace detail

// Tangency convention: core distance exactly equal to the radius sum counts
// as non-colliding, with tolerance 1e-9.
inline constexpr double kTangencyTol = 1e-9;

// Every shape reduces to a segment (or point) plus a radius, so one
// segment-segment distance covers all nine pairings.
inline bool collides(const Shape& s1, const Shape& s2) {
  const double d = segment_segment_distance(detail::core_a(s1), detail::core_b(s1),
                                            detail::core_a(s2), detail::core_b(s2));
  return d + kTangencyTol < detail::radius(s1) + detail::radius(s2);
}

// Collision test with an extra clearance margin, used wherever sampled
// sweeps need slack between samples.
inline bool collides_with_clearance(const Shape& s1, const Shape& s2,
                                    double clearance) {
  const double d = segment_segment_distance(detail::core_a(s1), detail::core_b(s1),
                                            detail::core_a(s2), detail::core_b(s2));
  return d + kTangencyTol < detail::radius(s1) + detail::radius(s2) + clearance;
}

struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(Vec2 p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return std::max(0.0, width()) * std::max(0.0, height()); }

  // Shrink by m on every side; may become empty (area() == 0).
  Rect inset(double m) const { return {x0 + m, y0 + m, x1 - m, y1 - m}; }
};

struct Surface {
  std::string name;
  Rect rect;
};

struct RobotModel {
  int id = 0;
  Vec2 base;
  double reach = 0.0;
  double arm_halfwidth = 0.0;
  double speed = 1.0;
};

struct ObjectModel {
  int id = 0;
  double radius = 0.0;
  Vec2 start;
  Vec2 goal;
};

struct World {
  Rect bounds;
  std::vector<Wall> walls;
  std::vector<Surface> surfaces;
  std::vector<RobotModel> robots;
  std::vector<ObjectModel> objects;

  const RobotModel& robot(int id) const { return robots.at(static_cast<size_t>(id)); }
  const ObjectModel& object(int id) const { return objects.at(static_cast<size_t>(id)); }

  // Edge-validation resolution: half the smallest body radius bounds tunneling.
  double collision_resolution() const {
    double r = 1e9;
    for (const auto& rb : robots) r = std::min(r, rb.arm_halfwidth);
    for (const auto& ob : objects) r = std::min(r, ob.radius);
    return r / 2.0;
  }

  double max_speed() const {
    double v = 0.0;
    for (const auto& rb : robots) v = std::max(v, rb.speed);
    return v;
  }
};

// One moving body slot: a robot arm, optionally carrying an object whose
// center rides at the effector.
struct Limb {
  int robot = -1;
  Vec2 effector;
  int carried = -1;  // object id, or -1 when empty-handed

  bool operator==(const Limb&) const = default;
};

// Element-scoped configuration: one limb per robot in the element.
struct Config {
  std::vector<Limb> limbs;

  bool operator==(const Config&) const = default;
};

inline double config_distance(const Config& a, const Config& b) {
  double acc = 0.0;
  for (size_t i = 0; i < a.limbs.size(); ++i) {
    acc += (a.limbs[i].effector - b.limbs[i].effector).norm2();
  }
  return std::sqrt(acc);
}

// Piecewise-linear configuration path.
struct Path {
  std::vector<Config> waypoints;
  double total_length = 0.0;
};

inline Path make_path(std::vector<Config> waypoints) {
  Path p;
  p.waypoints = std::move(waypoints);
  for (size_t i = 1; i < p.waypoints.size(); ++i) {
    p.total_length += config_distance(p.waypoints[i - 1], p.waypoints[i]);
  }
  return p;
}

// Arc-length interpolation; s in [0,1].
inline Config interpolate(const Path& path, double s) {
  if (path.waypoints.empty()) throw std::invalid_argument("interpolate: empty path");
  if (path.waypoints.size() == 1 || path.total_length <= 0.0) return path.waypoints.front();
  s = std::clamp(s, 0.0, 1.0);
  double target = s * path.total_length;
  for (size_t i = 1; i < path.waypoints.size(); ++i) {
    const double seg = config_distance(path.waypoints[i - 1], path.waypoints[i]);
    if (target <= seg || i + 1 == path.waypoints.size()) {
      const double t = seg > 0.0 ? std::clamp(target / seg, 0.0, 1.0) : 0.0;
      Config out = path.waypoints[i - 1];
      for (size_t k = 0; k < out.limbs.size(); ++k) {
        const Vec2 a = path.waypoints[i - 1].limbs[k].effector;
        const Vec2 b = path.waypoints[i].limbs[k].effector;
        out.limbs[k].effector = a + (b - a) * t;
      }
      return out;
    }
    target -= seg;
  }
  return path.waypoints.back();
}

// Stability predicate: inside some surface inset by the object radius, clear
// of walls and of the given placed discs.
inline bool stable_pose_valid(const World& world, int object_id, Vec2 p,
                              const std::vector<Disc>& placed) {
  const double r = world.object(object_id).radius;
  bool on_surface = false;
  for (const auto& s : world.surfaces) {
    if (s.rect.inset(r).area() >= 0.0 && s.rect.inset(r).contains(p)) {
      on_surface = true;
      break;
    }
  }
  if (!on_surface) return false;
  const Disc d{p, r};
  for (const auto& w : world.walls) {
    if (collides(Shape{d}, Shape{w})) return false;
  }
  for (const auto& other : placed) {
    if (collides(Shape{d}, Shape{other})) return false;
  }
  return true;
}

struct PoseSampleOptions {
  int attempts = 100;
  int surface = -1;                    // restrict to one surface index, or -1 = any
  std::vector<int> required_reach;     // robot ids that must reach the pose
};

// Rejection-sample a stable pose; surfaces weighted by inset area.
// Returns nullopt after `attempts` failures.
inline std::optional<Vec2> sample_stable_pose(const World& world, int object_id,
                                              const std::vector<Disc>& blocked, Rng& rng,
                                              const PoseSampleOptions& opt = {}) {
  const double r = world.object(object_id).radius;
  std::vector<size_t> candidates;
  std::vector<double> cumulative;
  double total = 0.0;
  for (size_t i = 0; i < world.surfaces.size(); ++i) {
    if (opt.surface >= 0 && static_cast<size_t>(opt.surface) != i) continue;
    const double a = world.surfaces[i].rect.inset(r).area();
    if (a <= 0.0) continue;
    candidates.push_back(i);
    total += a;
    cumulative.push_back(total);
  }
  if (candidates.empty()) return std::nullopt;
  for (int k = 0; k < opt.attempts; ++k) {
    const double pick = rng.uniform(0.0, total);
    size_t idx = candidates.size() - 1;
    for (size_t i = 0; i < cumulative.size(); ++i) {
      if (pick <= cumulative[i]) {
        idx = i;
        break;
      }
    }
    const Rect area = world.surfaces[candidates[idx]].rect.inset(r);
    const Vec2 p{rng.uniform(area.x0, area.x1), rng.uniform(area.y0, area.y1)};
    if (!stable_pose_valid(world, object_id, p, blocked)) continue;
    bool reachable = true;
    for (int rid : opt.required_reach) {
      if (dist(p, world.robot(rid).base) > world.robot(rid).reach) {
        reachable = false;
        break;
      }
    }
    if (!reachable) continue;
    return p;
  }
  return std::nullopt;
}

// Planar grasp: effector coincident with the object center. The reach disc is
// closed, so a point exactly at distance `reach` is graspable. No collision
// check here; that is deferred to conflict detection and the motion layer.
inline std::optional<Config> grasp_config(const RobotModel& robot, Vec2 p) {
  if (dist(p, robot.base) > robot.reach) return std::nullopt;
  Config c;
  c.limbs.push_back(Limb{robot.id, p, -1});
  return c;
}

}  // namespace lazydash
