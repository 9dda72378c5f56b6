#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "lazydash/geometry.hpp"
#include "lazydash/hypergraph.hpp"

namespace lazydash {

// Task space hypergraph H_T: vertices for robot-only, object-at-pose and
// robot-holding-object elements plus source/sink; hyperarcs for pick, place
// and handover transitions plus the source/sink arcs.

enum class TaskVertexKind { RobotFree, ObjectAt, Holding, Source, Sink };

struct TaskVertex {
  TaskVertexKind kind = TaskVertexKind::Source;
  int robot = -1;
  int object = -1;
  int pose = -1;  // pose id for ObjectAt
};

enum class TaskAction { Pick, Place, Handover, SourceArc, SinkArc };

inline const char* to_string(TaskAction a) {
  switch (a) {
    case TaskAction::Pick: return "pick";
    case TaskAction::Place: return "place";
    case TaskAction::Handover: return "handover";
    case TaskAction::SourceArc: return "source";
    case TaskAction::SinkArc: return "sink";
  }
  return "?";
}

struct TaskArc {
  TaskAction action = TaskAction::SourceArc;
  int robot = -1;    // actor (giver for handover)
  int robot2 = -1;   // receiver for handover
  int object = -1;
  int pose = -1;     // pick source pose / place target pose
};

enum class PoseProvenance { Start, Goal, Moveout };

struct PoseEntry {
  Vec2 p;
  PoseProvenance provenance = PoseProvenance::Moveout;
};

// Registered stable poses per object. Pose ids are per-object, never reused;
// id 0 is the start pose and id 1 the goal pose.
struct PoseTable {
  std::vector<std::vector<PoseEntry>> poses;  // indexed by object id

  static PoseTable from_world(const World& world) {
    PoseTable t;
    t.poses.resize(world.objects.size());
    for (const auto& ob : world.objects) {
      t.poses[static_cast<size_t>(ob.id)].push_back({ob.start, PoseProvenance::Start});
      t.poses[static_cast<size_t>(ob.id)].push_back({ob.goal, PoseProvenance::Goal});
    }
    return t;
  }

  int register_pose(int object, Vec2 p, PoseProvenance prov) {
    auto& list = poses.at(static_cast<size_t>(object));
    list.push_back({p, prov});
    return static_cast<int>(list.size()) - 1;
  }

  const PoseEntry& entry(int object, int pose) const {
    return poses.at(static_cast<size_t>(object)).at(static_cast<size_t>(pose));
  }

  Vec2 position(int object, int pose) const { return entry(object, pose).p; }

  int count(int object) const {
    return static_cast<int>(poses.at(static_cast<size_t>(object)).size());
  }
};

inline constexpr int kStartPose = 0;
inline constexpr int kGoalPose = 1;

inline std::vector<int> reachable_robots(const World& world, Vec2 p) {
  std::vector<int> out;
  for (const auto& r : world.robots) {
    if (dist(p, r.base) <= r.reach) out.push_back(r.id);
  }
  return out;
}

// Movable-entity key: robots are 0..R-1, object j is R+j.
inline int robot_entity(int robot) { return robot; }
inline int object_entity(const World& world, int object) {
  return static_cast<int>(world.robots.size()) + object;
}
inline int num_entities(const World& world) {
  return static_cast<int>(world.robots.size() + world.objects.size());
}

class TaskSpace {
 public:
  using Graph = Hypergraph<TaskVertex, TaskArc>;

  // Closure construction over the registered poses. Errors with
  // std::runtime_error when some object cannot be transported from start to
  // goal by any handover chain.
  static TaskSpace build(const World& world, const PoseTable& table) {
    TaskSpace ts;
    ts.world_ = &world;
    ts.source_ = ts.hg_.add_vertex({TaskVertexKind::Source});
    ts.sink_ = ts.hg_.add_vertex({TaskVertexKind::Sink});
    for (const auto& r : world.robots) {
      ts.robot_free_[r.id] = ts.hg_.add_vertex({TaskVertexKind::RobotFree, r.id});
    }
    for (const auto& ob : world.objects) {
      for (int p = 0; p < table.count(ob.id); ++p) {
        ts.add_object_vertex(ob.id, p);
      }
    }
    ts.check_transportable(table);
    // Holding vertices are pose-agnostic: one per (robot, object) pair with at
    // least one reachable registered pose or a reachable handover partner.
    for (const auto& r : world.robots) {
      for (const auto& ob : world.objects) {
        if (ts.pair_useful(r.id, ob.id, table)) ts.holding_vertex(r.id, ob.id);
      }
    }
    for (const auto& ob : world.objects) {
      for (int p = 0; p < table.count(ob.id); ++p) {
        ts.add_pose_arcs(ob.id, p, table);
      }
    }
    ts.add_handover_arcs();
    ts.add_source_sink_arcs(table);
    return ts;
  }

  // Register one new pose and close over it; all existing ids are unchanged.
  void expand_with_pose(PoseTable& table, int object, Vec2 new_pose) {
    std::vector<Disc> anchored;
    for (const auto& ob : world_->objects) {
      if (ob.id == object) continue;
      anchored.push_back({ob.start, ob.radius});
      anchored.push_back({ob.goal, ob.radius});
    }
    if (!stable_pose_valid(*world_, object, new_pose, anchored)) {
      throw std::invalid_argument("expand_with_pose: pose fails the stability predicate");
    }
    const int pose = table.register_pose(object, new_pose, PoseProvenance::Moveout);
    add_object_vertex(object, pose);
    add_pose_arcs(object, pose, table);
  }

  const Graph& graph() const { return hg_; }
  const World& world() const { return *world_; }

  int source_vertex() const { return source_; }
  int sink_vertex() const { return sink_; }
  int source_arc() const { return source_arc_; }
  int sink_arc() const { return sink_arc_; }

  int robot_free_vertex(int robot) const { return robot_free_.at(robot); }

  int object_at_vertex(int object, int pose) const {
    return object_at_.at({object, pose});
  }

  std::optional<int> find_holding_vertex(int robot, int object) const {
    auto it = holding_.find({robot, object});
    if (it == holding_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<int> find_pick_place_arc(TaskAction action, int robot, int object,
                                         int pose) const {
    auto it = pick_place_arcs_.find({static_cast<int>(action), robot, object, pose});
    if (it == pick_place_arcs_.end()) return std::nullopt;
    return it->second;
  }

  // Entities covered by a vertex: Holding covers both its robot and object.
  std::vector<int> covered_entities(int vid) const {
    const TaskVertex& v = hg_.vertex(vid);
    switch (v.kind) {
      case TaskVertexKind::RobotFree: return {robot_entity(v.robot)};
      case TaskVertexKind::ObjectAt: return {object_entity(*world_, v.object)};
      case TaskVertexKind::Holding:
        return {robot_entity(v.robot), object_entity(*world_, v.object)};
      default: return {};
    }
  }

 private:
  int add_object_vertex(int object, int pose) {
    const int id = hg_.add_vertex({TaskVertexKind::ObjectAt, -1, object, pose});
    object_at_[{object, pose}] = id;
    return id;
  }

  int holding_vertex(int robot, int object) {
    auto it = holding_.find({robot, object});
    if (it != holding_.end()) return it->second;
    const int id = hg_.add_vertex({TaskVertexKind::Holding, robot, object});
    holding_[{robot, object}] = id;
    return id;
  }

  bool robots_can_meet(int a, int b) const {
    const auto& ra = world_->robot(a);
    const auto& rb = world_->robot(b);
    // positive-area reach-disc intersection
    return dist(ra.base, rb.base) < ra.reach + rb.reach;
  }

  bool pair_useful(int robot, int object, const PoseTable& table) const {
    for (int p = 0; p < table.count(object); ++p) {
      if (dist(table.position(object, p), world_->robot(robot).base) <=
          world_->robot(robot).reach) {
        return true;
      }
    }
    for (const auto& other : world_->robots) {
      if (other.id == robot) continue;
      if (!robots_can_meet(robot, other.id)) continue;
      for (int p = 0; p < table.count(object); ++p) {
        if (dist(table.position(object, p), other.base) <= other.reach) return true;
      }
    }
    return false;
  }

  void add_pose_arcs(int object, int pose, const PoseTable& table) {
    const Vec2 p = table.position(object, pose);
    const int at = object_at_vertex(object, pose);
    for (const auto& r : world_->robots) {
      if (!grasp_config(r, p)) continue;
      const int hold = holding_vertex(r.id, object);
      const int pick = hg_.add_hyperarc({robot_free_vertex(r.id), at}, {hold},
                                        {TaskAction::Pick, r.id, -1, object, pose});
      const int place = hg_.add_hyperarc({hold}, {robot_free_vertex(r.id), at},
                                         {TaskAction::Place, r.id, -1, object, pose});
      pick_place_arcs_[{static_cast<int>(TaskAction::Pick), r.id, object, pose}] = pick;
      pick_place_arcs_[{static_cast<int>(TaskAction::Place), r.id, object, pose}] =
          place;
    }
  }

  void add_handover_arcs() {
    for (const auto& [key, giver_hold] : holding_) {
      const auto [giver, object] = key;
      for (const auto& r : world_->robots) {
        if (r.id == giver || !robots_can_meet(giver, r.id)) continue;
        auto it = holding_.find({r.id, object});
        if (it == holding_.end()) continue;
        hg_.add_hyperarc({giver_hold, robot_free_vertex(r.id)},
                         {robot_free_vertex(giver), it->second},
                         {TaskAction::Handover, giver, r.id, object, -1});
      }
    }
  }

  void add_source_sink_arcs(const PoseTable& table) {
    std::vector<int> start_head, goal_tail;
    for (const auto& r : world_->robots) {
      start_head.push_back(robot_free_vertex(r.id));
      goal_tail.push_back(robot_free_vertex(r.id));
    }
    for (const auto& ob : world_->objects) {
      start_head.push_back(object_at_vertex(ob.id, kStartPose));
      goal_tail.push_back(object_at_vertex(ob.id, kGoalPose));
    }
    (void)table;
    source_arc_ = hg_.add_hyperarc({source_}, start_head, {TaskAction::SourceArc});
    sink_arc_ = hg_.add_hyperarc(goal_tail, {sink_}, {TaskAction::SinkArc});
  }

  // Transportability scan: some robot must reach the start, some robot must
  // reach the goal, and the two must be connected by handover reach overlaps.
  void check_transportable(const PoseTable& table) const {
    const int n = static_cast<int>(world_->robots.size());
    // union-find over robots linked by positive-area reach intersections
    std::vector<int> parent(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) parent[static_cast<size_t>(i)] = i;
    auto find = [&](int x) {
      while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)];
      return x;
    };
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (robots_can_meet(i, j)) parent[static_cast<size_t>(find(i))] = find(j);
      }
    }
    for (const auto& ob : world_->objects) {
      bool ok = false;
      for (int a = 0; a < n && !ok; ++a) {
        if (dist(table.position(ob.id, kStartPose), world_->robot(a).base) >
            world_->robot(a).reach) {
          continue;
        }
        for (int b = 0; b < n && !ok; ++b) {
          if (dist(table.position(ob.id, kGoalPose), world_->robot(b).base) >
              world_->robot(b).reach) {
            continue;
          }
          if (find(a) == find(b)) ok = true;
        }
      }
      if (!ok) {
        throw std::runtime_error("unsolvable input: object " + std::to_string(ob.id) +
                                 " cannot be transported from start to goal");
      }
    }
  }

  Graph hg_;
  const World* world_ = nullptr;
  int source_ = -1;
  int sink_ = -1;
  int source_arc_ = -1;
  int sink_arc_ = -1;
  std::map<int, int> robot_free_;
  std::map<std::pair<int, int>, int> object_at_;  // (object, pose) -> vertex
  std::map<std::pair<int, int>, int> holding_;    // (robot, object) -> vertex
  std::map<std::tuple<int, int, int, int>, int> pick_place_arcs_;
};

}  // namespace lazydash
