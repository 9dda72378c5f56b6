#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "lazydash/geometry.hpp"

namespace lazydash {

using Json = nlohmann::ordered_json;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Scenario {
  World world;
  Json meta;  // generator metadata, opaque to the planner
};

inline Json vec_json(Vec2 v) { return Json::array({v.x, v.y}); }

inline Vec2 vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw InputError(std::string("expected [x, y] for ") + what);
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline Json scenario_to_json(const Scenario& s) {
  Json j;
  j["bounds"] = {s.world.bounds.x0, s.world.bounds.y0, s.world.bounds.x1,
                 s.world.bounds.y1};
  j["walls"] = Json::array();
  for (const auto& w : s.world.walls) {
    j["walls"].push_back(
        {{"a", vec_json(w.a)}, {"b", vec_json(w.b)}, {"halfwidth", w.halfwidth}});
  }
  j["surfaces"] = Json::array();
  for (const auto& sf : s.world.surfaces) {
    j["surfaces"].push_back(
        {{"name", sf.name},
         {"rect", {sf.rect.x0, sf.rect.y0, sf.rect.x1, sf.rect.y1}}});
  }
  j["robots"] = Json::array();
  for (const auto& r : s.world.robots) {
    j["robots"].push_back({{"id", r.id},
                           {"base", vec_json(r.base)},
                           {"reach", r.reach},
                           {"arm_halfwidth", r.arm_halfwidth},
                           {"speed", r.speed}});
  }
  j["objects"] = Json::array();
  for (const auto& ob : s.world.objects) {
    j["objects"].push_back({{"id", ob.id},
                            {"radius", ob.radius},
                            {"start", vec_json(ob.start)},
                            {"goal", vec_json(ob.goal)}});
  }
  j["meta"] = s.meta.is_null() ? Json::object() : s.meta;
  return j;
}

inline void validate_scenario(const Scenario& s) {
  const World& w = s.world;
  if (w.bounds.width() <= 0.0 || w.bounds.height() <= 0.0) {
    throw InputError("bounds must have positive area");
  }
  if (w.robots.empty()) throw InputError("at least one robot required");
  if (w.objects.empty()) throw InputError("at least one object required");
  for (const auto& wall : w.walls) {
    if (wall.halfwidth <= 0.0) throw InputError("wall halfwidth must be positive");
  }
  for (const auto& sf : w.surfaces) {
    if (!w.bounds.contains({sf.rect.x0, sf.rect.y0}) ||
        !w.bounds.contains({sf.rect.x1, sf.rect.y1})) {
      throw InputError("surface " + sf.name + " outside bounds");
    }
  }
  for (size_t i = 0; i < w.robots.size(); ++i) {
    const auto& r = w.robots[i];
    if (r.id != static_cast<int>(i)) throw InputError("robot ids must be 0..n-1");
    if (!w.bounds.contains(r.base)) throw InputError("robot base outside bounds");
    if (r.arm_halfwidth <= 0.0 || r.reach <= r.arm_halfwidth) {
      throw InputError("robot reach must exceed arm halfwidth > 0");
    }
    if (r.speed <= 0.0) throw InputError("robot speed must be positive");
  }
  std::vector<Disc> placed;
  for (size_t i = 0; i < w.objects.size(); ++i) {
    const auto& ob = w.objects[i];
    if (ob.id != static_cast<int>(i)) throw InputError("object ids must be 0..n-1");
    if (ob.radius <= 0.0) throw InputError("object radius must be positive");
    if (!stable_pose_valid(w, ob.id, ob.start, placed)) {
      throw InputError("object " + std::to_string(ob.id) + " start pose unstable");
    }
    if (!stable_pose_valid(w, ob.id, ob.goal, {})) {
      throw InputError("object " + std::to_string(ob.id) + " goal pose unstable");
    }
    placed.push_back({ob.start, ob.radius});
  }
}

inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  try {
    const auto& b = j.at("bounds");
    s.world.bounds = {b.at(0).get<double>(), b.at(1).get<double>(),
                      b.at(2).get<double>(), b.at(3).get<double>()};
    for (const auto& wj : j.value("walls", Json::array())) {
      s.world.walls.push_back({vec_from(wj.at("a"), "wall.a"),
                               vec_from(wj.at("b"), "wall.b"),
                               wj.at("halfwidth").get<double>()});
    }
    for (const auto& sj : j.at("surfaces")) {
      const auto& r = sj.at("rect");
      s.world.surfaces.push_back(
          {sj.value("name", std::string("surface")),
           Rect{r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                r.at(3).get<double>()}});
    }
    for (const auto& rj : j.at("robots")) {
      s.world.robots.push_back({rj.at("id").get<int>(), vec_from(rj.at("base"), "base"),
                                rj.at("reach").get<double>(),
                                rj.at("arm_halfwidth").get<double>(),
                                rj.at("speed").get<double>()});
    }
    for (const auto& oj : j.at("objects")) {
      s.world.objects.push_back({oj.at("id").get<int>(), oj.at("radius").get<double>(),
                                 vec_from(oj.at("start"), "start"),
                                 vec_from(oj.at("goal"), "goal")});
    }
    s.meta = j.value("meta", Json::object());
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
  validate_scenario(s);
  return s;
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw InputError(std::string("invalid JSON in ") + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace lazydash
