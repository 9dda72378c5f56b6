#pragma once

#include <cmath>

#include "lazydash/scenario.hpp"

namespace lazydash {

// Scenario generators: planar analogs of five rearrangement families.
//
//   sorting   — robot bases on a ring, every object's goal in the sector of
//               the opposite robot, so delivery needs handover chains.
//   wall      — rooms separated by walls with a central gap; objects cross
//               via handovers at the gap; a planted blocker's goal sits in
//               the gap mouth and must be placed last.
//   shelfwall — goals come in collinear front/rear pairs seen from the
//               placing robot; the rear slot must be filled first.
//   stocking  — non-monotone restocking; the minimal form is the two-object
//               swap on one narrow strip with a single robot.
//   lab       — cyclic slot shift on a tightly packed row with a small
//               staging strip; move-outs are forced through staging.

struct GeneratorParams {
  int robots = 2;
  int objects = 2;
  int walls = 1;  // wall family only
};

namespace gen_detail {

constexpr double kArm = 0.04;
constexpr double kObj = 0.05;
constexpr double kWallHalf = 0.03;
constexpr double kSpeed = 1.0;

// minimum separation between registered poses, and from robot bases
constexpr double kPoseSep = 0.24;
constexpr double kBaseClear = 0.17;

inline bool far_from(const std::vector<Vec2>& pts, Vec2 p, double min_d) {
  for (const auto& q : pts) {
    if (dist(p, q) < min_d) return false;
  }
  return true;
}

inline Vec2 sample_in_disc(Rng& rng, Vec2 c, double r) {
  const double rad = r * std::sqrt(rng.uniform());
  const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  return c + Vec2{rad * std::cos(ang), rad * std::sin(ang)};
}

struct PoseConstraints {
  const World* world = nullptr;
  std::vector<Vec2> taken;

  bool ok(Vec2 p, int only_robot) const {
    for (const auto& r : world->robots) {
      const double d = dist(p, r.base);
      if (r.id == only_robot) {
        if (d > r.reach - 0.08) return false;
      } else if (only_robot >= 0) {
        if (d <= r.reach + 0.05) return false;  // exclusive reach
      }
      if (d < kBaseClear) return false;
    }
    if (!far_from(taken, p, kPoseSep)) return false;
    std::vector<Disc> placed;
    return stable_pose_valid(*world, 0, p, placed);
  }
};

}  // namespace gen_detail

inline Scenario generate_sorting(const GeneratorParams& p, std::uint64_t seed) {
  using namespace gen_detail;
  if (p.robots < 2 || p.robots > 8 || p.objects < 1 || p.objects > 16) {
    throw InputError("sorting: robots in [2,8], objects in [1,16]");
  }
  Rng rng(seed ^ 0x5071u);
  Scenario s;
  World& w = s.world;
  const double cx = 2.5, cy = 2.5, ring = 1.2;
  w.bounds = {0, 0, 5, 5};
  w.surfaces = {{"table", {0.3, 0.3, 4.7, 4.7}}};
  const double adj = 2.0 * ring * std::sin(3.14159265358979323846 / p.robots);
  const double reach = p.robots == 2 ? 1.55 : 0.66 * adj;
  for (int i = 0; i < p.robots; ++i) {
    const double a = 2.0 * 3.14159265358979323846 * i / p.robots;
    w.robots.push_back({i, {cx + ring * std::cos(a), cy + ring * std::sin(a)}, reach,
                        kArm, kSpeed});
  }
  // one dummy object so PoseConstraints::ok can call stable_pose_valid
  w.objects.push_back({0, kObj, {}, {}});
  PoseConstraints pc{&w, {}};
  for (int j = 0; j < p.objects; ++j) {
    const int own = j % p.robots;
    const int dst = (own + p.robots / 2) % p.robots;
    Vec2 start, goal;
    bool ok = false;
    for (int tries = 0; tries < 4000 && !ok; ++tries) {
      start = sample_in_disc(rng, w.robots[static_cast<size_t>(own)].base,
                             w.robots[static_cast<size_t>(own)].reach - 0.1);
      if (!pc.ok(start, own)) continue;
      pc.taken.push_back(start);
      ok = false;
      for (int t2 = 0; t2 < 4000; ++t2) {
        goal = sample_in_disc(rng, w.robots[static_cast<size_t>(dst)].base,
                              w.robots[static_cast<size_t>(dst)].reach - 0.1);
        if (pc.ok(goal, dst)) {
          ok = true;
          break;
        }
      }
      if (!ok) pc.taken.pop_back();
    }
    if (!ok) throw InputError("sorting: failed to place objects; too crowded");
    pc.taken.push_back(goal);
    if (j == 0) {
      w.objects[0] = {0, kObj, start, goal};
    } else {
      w.objects.push_back({j, kObj, start, goal});
    }
  }
  s.meta = {{"family", "sorting"},
            {"robots", p.robots},
            {"objects", p.objects},
            {"seed", seed}};
  validate_scenario(s);
  return s;
}

inline Scenario generate_wall(const GeneratorParams& p, std::uint64_t seed) {
  using namespace gen_detail;
  const int cols = p.walls + 1;
  if (p.walls < 1 || p.walls > 3 || p.objects < 1 || p.objects > 12) {
    throw InputError("wall: walls in [1,3], objects in [1,12]");
  }
  Rng rng(seed ^ 0xAA11u);
  Scenario s;
  World& w = s.world;
  const double col_w = 2.2, height = 3.0, gap_half = 0.35, mid = height / 2.0;
  w.bounds = {0, 0, col_w * cols, height};
  for (int k = 1; k < cols; ++k) {
    const double x = col_w * k;
    w.walls.push_back({{x, 0}, {x, mid - gap_half}, kWallHalf});
    w.walls.push_back({{x, mid + gap_half}, {x, height}, kWallHalf});
  }
  for (int k = 0; k < cols; ++k) {
    w.surfaces.push_back({"room" + std::to_string(k),
                          {col_w * k + 0.22, 0.3, col_w * (k + 1) - 0.22, height - 0.3}});
  }
  for (int k = 0; k < cols; ++k) {
    w.robots.push_back({k, {col_w * k + col_w / 2.0, mid}, 1.45, kArm, kSpeed});
  }
  // planted blocker: a first-column object whose goal sits in the gap mouth,
  // square on the handover corridor
  w.objects.push_back(
      {0, kObj, {}, {col_w - 0.30, mid + 0.03}});
  PoseConstraints pc{&w, {}};
  pc.taken.push_back(w.objects[0].goal);
  Vec2 bstart;
  for (int tries = 0;; ++tries) {
    bstart = sample_in_disc(rng, w.robots[0].base, w.robots[0].reach - 0.1);
    if (pc.ok(bstart, 0)) break;
    if (tries > 8000) throw InputError("wall: blocker placement failed");
  }
  w.objects[0].start = bstart;
  pc.taken.push_back(bstart);
  for (int j = 1; j < p.objects; ++j) {
    Vec2 start, goal;
    bool ok = false;
    for (int tries = 0; tries < 8000 && !ok; ++tries) {
      start = sample_in_disc(rng, w.robots[0].base, w.robots[0].reach - 0.1);
      if (!pc.ok(start, 0)) continue;
      pc.taken.push_back(start);
      ok = false;
      for (int t2 = 0; t2 < 8000; ++t2) {
        goal = sample_in_disc(rng, w.robots[static_cast<size_t>(cols - 1)].base,
                              w.robots[static_cast<size_t>(cols - 1)].reach - 0.1);
        if (pc.ok(goal, cols - 1)) {
          ok = true;
          break;
        }
      }
      if (!ok) pc.taken.pop_back();
    }
    if (!ok) throw InputError("wall: failed to place objects; too crowded");
    pc.taken.push_back(goal);
    w.objects.push_back({j, kObj, start, goal});
  }
  s.meta = {{"family", "wall"},
            {"robots", cols},
            {"objects", p.objects},
            {"walls", p.walls},
            {"seed", seed},
            {"blocker", 0}};
  validate_scenario(s);
  return s;
}

inline Scenario generate_shelfwall(const GeneratorParams& p, std::uint64_t seed) {
  using namespace gen_detail;
  const int pairs = p.objects / 2;
  if (p.objects % 2 != 0 || pairs < 1 || pairs > 3) {
    throw InputError("shelfwall: objects must be 2, 4 or 6");
  }
  Rng rng(seed ^ 0x57E1u);
  Scenario s;
  World& w = s.world;
  const double xw = 2.2, height = 3.0;
  w.bounds = {0, 0, 4.4, height};
  // the shelf is a wall with a pass above it for handovers
  w.walls.push_back({{xw, 0}, {xw, 2.1}, kWallHalf});
  w.surfaces = {{"west", {0.22, 0.3, xw - 0.12, height - 0.3}},
                {"east", {xw + 0.22, 0.3, 4.18, height - 0.3}}};
  w.robots = {{0, {xw - 1.1, 1.5}, 1.45, kArm, kSpeed},
              {1, {xw + 1.1, 1.5}, 1.45, kArm, kSpeed}};
  // front/rear goal pairs, collinear with the west robot's base
  const double angles[3] = {0.0, 0.75, -0.75};
  PoseConstraints pc{&w, {}};
  w.objects.push_back({0, kObj, {}, {}});
  std::vector<Vec2> goals;
  for (int k = 0; k < pairs; ++k) {
    const Vec2 dir{std::cos(angles[k]), std::sin(angles[k])};
    goals.push_back(w.robots[0].base + dir * 0.88);  // rear, nearer the shelf
    goals.push_back(w.robots[0].base + dir * 0.64);  // front, nearer the base
  }
  // object starts stay clear of the over-wall transfer corridors
  const Vec2 window{xw, 2.35};
  const auto corridor_clear = [&](Vec2 p) {
    return point_segment_distance(p, w.robots[0].base, window) > 0.22 &&
           point_segment_distance(p, w.robots[1].base, window) > 0.22;
  };
  for (int j = 0; j < p.objects; ++j) {
    Vec2 start;
    bool ok = false;
    for (int tries = 0; tries < 8000 && !ok; ++tries) {
      start = sample_in_disc(rng, w.robots[1].base, w.robots[1].reach - 0.1);
      if (pc.ok(start, 1) && corridor_clear(start)) ok = true;
    }
    if (!ok) throw InputError("shelfwall: failed to place starts");
    pc.taken.push_back(start);
    if (j == 0) {
      w.objects[0] = {0, kObj, start, goals[0]};
    } else {
      w.objects.push_back({j, kObj, start, goals[static_cast<size_t>(j)]});
    }
    pc.taken.push_back(goals[static_cast<size_t>(j)]);
  }
  s.meta = {{"family", "shelfwall"},
            {"robots", 2},
            {"objects", p.objects},
            {"seed", seed},
            {"rear_objects", Json::array()},
            {"front_of", Json::array()}};
  for (int k = 0; k < pairs; ++k) {
    s.meta["rear_objects"].push_back(2 * k);       // even ids take rear slots
    s.meta["front_of"].push_back({2 * k + 1, 2 * k});  // front id, its rear id
  }
  validate_scenario(s);
  return s;
}

inline Scenario generate_stocking(const GeneratorParams& p, std::uint64_t seed) {
  using namespace gen_detail;
  Rng rng(seed ^ 0x570Cu);
  Scenario s;
  World& w = s.world;
  if (p.robots == 1) {
    // two-object swap on one narrow strip
    if (p.objects != 2) throw InputError("stocking: single-robot form needs 2 objects");
    w.bounds = {0, 0, 3, 2};
    w.surfaces = {{"strip", {0.9, 1.0, 2.1, 1.4}}};
    w.robots = {{0, {1.5, 0.5}, 1.3, kArm, kSpeed}};
    const double jitter = rng.uniform(-0.03, 0.03);
    w.objects = {{0, kObj, {1.2 + jitter, 1.2}, {1.8 + jitter, 1.2}},
                 {1, kObj, {1.8 + jitter, 1.2}, {1.2 + jitter, 1.2}}};
    s.meta = {{"family", "stocking"},
              {"robots", 1},
              {"objects", 2},
              {"variant", "swap"},
              {"seed", seed}};
    validate_scenario(s);
    return s;
  }
  // two-robot restock: existing front items stay in place (start == goal),
  // new items must be stocked behind them after a handover
  const int rows = p.objects / 2;
  if (p.robots != 2 || p.objects % 2 != 0 || rows < 1 || rows > 3) {
    throw InputError("stocking: two-robot form needs 2, 4 or 6 objects");
  }
  w.bounds = {0, 0, 4.4, 3};
  w.surfaces = {{"table", {0.22, 0.3, 4.18, 2.7}}};
  w.robots = {{0, {1.1, 1.5}, 1.45, kArm, kSpeed}, {1, {3.3, 1.5}, 1.45, kArm, kSpeed}};
  const double row_y[3] = {1.5, 1.9, 1.1};
  PoseConstraints pc{&w, {}};
  w.objects.push_back({0, kObj, {}, {}});
  int id = 0;
  for (int k = 0; k < rows; ++k) {
    const Vec2 front{1.75, row_y[k]};
    const Vec2 rear{1.99, row_y[k]};
    Vec2 nstart;
    bool ok = false;
    for (int tries = 0; tries < 8000 && !ok; ++tries) {
      nstart = sample_in_disc(rng, w.robots[1].base, w.robots[1].reach - 0.1);
      if (pc.ok(nstart, 1)) ok = true;
    }
    if (!ok) throw InputError("stocking: failed to place new items");
    // existing front item: goal equals start
    if (id == 0) {
      w.objects[0] = {0, kObj, front, front};
    } else {
      w.objects.push_back({id, kObj, front, front});
    }
    pc.taken.push_back(front);
    id++;
    w.objects.push_back({id, kObj, nstart, rear});
    pc.taken.push_back(nstart);
    pc.taken.push_back(rear);
    id++;
  }
  s.meta = {{"family", "stocking"},
            {"robots", 2},
            {"objects", p.objects},
            {"variant", "restock"},
            {"seed", seed}};
  validate_scenario(s);
  return s;
}

inline Scenario generate_lab(const GeneratorParams& p, std::uint64_t seed) {
  using namespace gen_detail;
  if (p.objects < 2 || p.objects > 4) throw InputError("lab: objects in [2,4]");
  Rng rng(seed ^ 0x1AB0u);
  (void)rng;
  Scenario s;
  World& w = s.world;
  w.bounds = {0, 0, 4, 3};
  const int n = p.objects;
  const double pitch = 0.3, x0 = 2.0 - pitch * (n - 1) / 2.0, row = 2.2;
  // the slot row is exactly as deep as an object, so move-outs must go to the
  // staging strip below
  w.surfaces = {{"containers", {x0 - 0.06, row - 0.06, x0 + pitch * (n - 1) + 0.06,
                                row + 0.06}},
                {"staging", {1.55, 0.6, 2.45, 0.95}}};
  w.robots = {{0, {1.3, 1.5}, 1.35, kArm, kSpeed}, {1, {2.7, 1.5}, 1.35, kArm, kSpeed}};
  for (int j = 0; j < n; ++j) {
    const Vec2 start{x0 + pitch * j, row};
    const Vec2 goal{x0 + pitch * ((j + 1) % n), row};
    w.objects.push_back({j, kObj, start, goal});
  }
  s.meta = {{"family", "lab"}, {"robots", 2}, {"objects", n}, {"seed", seed}};
  validate_scenario(s);
  return s;
}

inline Scenario generate_scenario(const std::string& family, const GeneratorParams& p,
                                  std::uint64_t seed) {
  if (family == "sorting") return generate_sorting(p, seed);
  if (family == "wall") return generate_wall(p, seed);
  if (family == "shelfwall") return generate_shelfwall(p, seed);
  if (family == "stocking") return generate_stocking(p, seed);
  if (family == "lab") return generate_lab(p, seed);
  throw InputError("unknown scenario family: " + family);
}

}  // namespace lazydash
