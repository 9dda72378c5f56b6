#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

namespace lazydash {

// Independent replay validator. Re-implements timed replay directly from the
// serialized scenario and report JSON, sharing no code with the resolver's
// internal checker: its own segment math, its own track evaluation, its own
// pair rules. PASS means zero collisions on the sampling grid, continuous
// tracks, reach admissibility, and a correct final state.

namespace validate_detail {

struct P {
  double x = 0, y = 0;
};

inline double pdist(P a, P b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double seg_point(P p, P a, P b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  if (len2 <= 0.0) return pdist(p, a);
  double t = ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return pdist(p, {a.x + vx * t, a.y + vy * t});
}

inline double cross(P o, P a, P b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline double seg_seg(P a1, P b1, P a2, P b2) {
  const double d1 = cross(a2, b2, a1), d2 = cross(a2, b2, b1);
  const double d3 = cross(a1, b1, a2), d4 = cross(a1, b1, b2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return 0.0;
  }
  double d = seg_point(a1, a2, b2);
  d = std::min(d, seg_point(b1, a2, b2));
  d = std::min(d, seg_point(a2, a1, b1));
  d = std::min(d, seg_point(b2, a1, b1));
  return d;
}

struct Seg {
  double t0, t1;
  P a, b;
};

struct Track {
  std::vector<Seg> segs;

  P at(double t) const {
    if (segs.empty()) return {};
    if (t <= segs.front().t0) return segs.front().a;
    for (const auto& s : segs) {
      if (t <= s.t1) {
        const double dur = s.t1 - s.t0;
        if (dur <= 0.0) return s.b;
        const double u = (t - s.t0) / dur;
        return {s.a.x + (s.b.x - s.a.x) * u, s.a.y + (s.b.y - s.a.y) * u};
      }
    }
    return segs.back().b;
  }
};

inline Track parse_track(const nlohmann::ordered_json& j) {
  Track tr;
  for (const auto& s : j) {
    tr.segs.push_back({s.at(0).get<double>(),
                       s.at(1).get<double>(),
                       {s.at(2).get<double>(), s.at(3).get<double>()},
                       {s.at(4).get<double>(), s.at(5).get<double>()}});
  }
  return tr;
}

constexpr double kTol = 1e-6;

}  // namespace validate_detail

inline std::vector<std::string> validate_schedule(const nlohmann::ordered_json& scenario,
                                                  const nlohmann::ordered_json& report,
                                                  double dt_override = 0.0) {
  using namespace validate_detail;
  std::vector<std::string> violations;
  const auto fail = [&](const std::string& m) { violations.push_back(m); };

  if (!report.contains("execution")) {
    fail("report has no execution section");
    return violations;
  }
  const auto& ex = report.at("execution");
  const double makespan = ex.at("makespan").get<double>();
  const double dt = dt_override > 0.0 ? dt_override : ex.at("dt").get<double>();

  struct Body {
    char kind;
    int id;
    double radius;   // disc radius or arm halfwidth
    P base;          // robots only
    double reach = 0.0;
    P start, goal;   // objects only
    Track track;
  };
  std::vector<Body> robots, objects;
  for (const auto& r : ex.at("robots")) {
    Body b{'r', r.at("id").get<int>(), r.at("arm_halfwidth").get<double>(),
           {r.at("base").at(0).get<double>(), r.at("base").at(1).get<double>()},
           r.at("reach").get<double>(),
           {},
           {},
           parse_track(r.at("segments"))};
    robots.push_back(std::move(b));
  }
  for (const auto& o : ex.at("objects")) {
    Body b{'o', o.at("id").get<int>(), o.at("radius").get<double>(), {}, 0.0,
           {o.at("start").at(0).get<double>(), o.at("start").at(1).get<double>()},
           {o.at("goal").at(0).get<double>(), o.at("goal").at(1).get<double>()},
           parse_track(o.at("segments"))};
    objects.push_back(std::move(b));
  }

  struct Wall {
    P a, b;
    double halfwidth;
  };
  std::vector<Wall> walls;
  for (const auto& wj : scenario.value("walls", nlohmann::ordered_json::array())) {
    walls.push_back({{wj.at("a").at(0).get<double>(), wj.at("a").at(1).get<double>()},
                     {wj.at("b").at(0).get<double>(), wj.at("b").at(1).get<double>()},
                     wj.at("halfwidth").get<double>()});
  }

  // track sanity: contiguous in time and space
  const auto check_track = [&](const Body& b) {
    double t = 0.0;
    P pos = b.track.segs.empty() ? P{} : b.track.segs.front().a;
    for (const auto& s : b.track.segs) {
      if (std::abs(s.t0 - t) > kTol) {
        fail("track time gap for " + std::string(1, b.kind) + std::to_string(b.id));
      }
      if (pdist(s.a, pos) > kTol) {
        fail("track position jump for " + std::string(1, b.kind) + std::to_string(b.id));
      }
      t = s.t1;
      pos = s.b;
    }
    if (std::abs(t - makespan) > kTol) {
      fail("track does not cover the makespan for " + std::string(1, b.kind) +
           std::to_string(b.id));
    }
  };
  for (const auto& b : robots) check_track(b);
  for (const auto& b : objects) check_track(b);

  // endpoint states
  for (const auto& b : robots) {
    if (!b.track.segs.empty() && pdist(b.track.segs.front().a, b.base) > kTol) {
      fail("robot " + std::to_string(b.id) + " does not start at its base");
    }
  }
  for (const auto& b : objects) {
    if (!b.track.segs.empty() && pdist(b.track.segs.front().a, b.start) > kTol) {
      fail("object " + std::to_string(b.id) + " does not start at its start pose");
    }
    if (pdist(b.track.at(makespan), b.goal) > kTol) {
      fail("object " + std::to_string(b.id) + " does not end at its goal");
    }
  }

  struct Attachment {
    int object, robot;
    double t0, t1;
    bool open;
  };
  std::vector<Attachment> attachments;
  for (const auto& a : ex.value("attachments", nlohmann::ordered_json::array())) {
    attachments.push_back({a.at(0).get<int>(), a.at(1).get<int>(), a.at(2).get<double>(),
                           a.at(3).get<double>(), a.size() > 4 && a.at(4).get<int>() != 0});
  }
  for (const auto& a : attachments) {
    if (a.open) {
      fail("robot " + std::to_string(a.robot) + " still holds object " +
           std::to_string(a.object) + " at the end");
    }
  }

  struct Waiver {
    double t0, t1, radius;
    P anchor;
    std::vector<std::pair<char, int>> participants;
  };
  std::vector<Waiver> waivers;
  for (const auto& wj : ex.value("waivers", nlohmann::ordered_json::array())) {
    Waiver wv{wj.at("t0").get<double>(), wj.at("t1").get<double>(),
              wj.at("radius").get<double>(),
              {wj.at("anchor").at(0).get<double>(), wj.at("anchor").at(1).get<double>()},
              {}};
    for (const auto& pj : wj.at("participants")) {
      wv.participants.push_back({pj.at(0).get<std::string>().at(0), pj.at(1).get<int>()});
    }
    waivers.push_back(std::move(wv));
  }

  const auto attached = [&](int object, int robot, double t) {
    for (const auto& a : attachments) {
      if (a.object == object && a.robot == robot && t >= a.t0 && t <= a.t1) return true;
    }
    return false;
  };
  const auto waived = [&](char ka, int ia, P pa, char kb, int ib, P pb, double t) {
    for (const auto& wv : waivers) {
      if (t < wv.t0 || t > wv.t1) continue;
      bool ha = false, hb = false;
      for (const auto& [k, id] : wv.participants) {
        if (k == ka && id == ia) ha = true;
        if (k == kb && id == ib) hb = true;
      }
      if (ha && hb && pdist(pa, wv.anchor) <= wv.radius && pdist(pb, wv.anchor) <= wv.radius) {
        return true;
      }
    }
    return false;
  };

  const long n_steps = static_cast<long>(std::floor(makespan / dt));
  long reported = 0;
  for (long step = 0; step <= n_steps + 1 && reported < 25; ++step) {
    const double t = step <= n_steps ? step * dt : makespan;
    if (step == n_steps + 1 && makespan <= n_steps * dt) break;
    std::vector<P> rpos, opos;
    for (const auto& b : robots) rpos.push_back(b.track.at(t));
    for (const auto& b : objects) opos.push_back(b.track.at(t));

    for (size_t i = 0; i < robots.size(); ++i) {
      if (pdist(rpos[i], robots[i].base) > robots[i].reach + kTol) {
        fail("robot " + std::to_string(robots[i].id) + " beyond reach at t=" +
             std::to_string(t));
        reported++;
      }
      for (const auto& wall : walls) {
        if (seg_seg(robots[i].base, rpos[i], wall.a, wall.b) + 1e-9 <
            robots[i].radius + wall.halfwidth) {
          fail("robot " + std::to_string(robots[i].id) + " hits a wall at t=" +
               std::to_string(t));
          reported++;
        }
      }
      for (size_t j = i + 1; j < robots.size(); ++j) {
        if (seg_seg(robots[i].base, rpos[i], robots[j].base, rpos[j]) + 1e-9 <
            robots[i].radius + robots[j].radius) {
          if (waived('r', robots[i].id, rpos[i], 'r', robots[j].id, rpos[j], t)) continue;
          fail("robots " + std::to_string(robots[i].id) + "," +
               std::to_string(robots[j].id) + " collide at t=" + std::to_string(t));
          reported++;
        }
      }
      for (size_t j = 0; j < objects.size(); ++j) {
        if (attached(objects[j].id, robots[i].id, t)) continue;
        if (seg_point(opos[j], robots[i].base, rpos[i]) + 1e-9 <
            robots[i].radius + objects[j].radius) {
          if (waived('r', robots[i].id, rpos[i], 'o', objects[j].id, opos[j], t)) continue;
          fail("robot " + std::to_string(robots[i].id) + " hits object " +
               std::to_string(objects[j].id) + " at t=" + std::to_string(t));
          reported++;
        }
      }
    }
    for (size_t i = 0; i < objects.size(); ++i) {
      for (const auto& wall : walls) {
        if (seg_point(opos[i], wall.a, wall.b) + 1e-9 <
            objects[i].radius + wall.halfwidth) {
          fail("object " + std::to_string(objects[i].id) + " hits a wall at t=" +
               std::to_string(t));
          reported++;
        }
      }
      for (size_t j = i + 1; j < objects.size(); ++j) {
        bool same_hand = false;
        for (const auto& a : attachments) {
          for (const auto& b : attachments) {
            if (a.object == objects[i].id && b.object == objects[j].id &&
                a.robot == b.robot && t >= a.t0 && t <= a.t1 && t >= b.t0 && t <= b.t1) {
              same_hand = true;
            }
          }
        }
        if (same_hand) continue;
        if (pdist(opos[i], opos[j]) + 1e-9 < objects[i].radius + objects[j].radius) {
          if (waived('o', objects[i].id, opos[i], 'o', objects[j].id, opos[j], t)) {
            continue;
          }
          fail("objects " + std::to_string(objects[i].id) + "," +
               std::to_string(objects[j].id) + " collide at t=" + std::to_string(t));
          reported++;
        }
      }
    }
  }
  return violations;
}

}  // namespace lazydash
