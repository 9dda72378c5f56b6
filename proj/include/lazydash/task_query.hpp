#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "lazydash/task_space.hpp"

namespace lazydash {

// Greedy task-extended query: depth-first expansion over H_T guided by a
// distance heuristic, with backtracking, frontier/history constraint gating
// and partial-hyperarc semantics (an arc expands only when its full tail is
// covered by the frontier).

enum class ConstraintKind { Frontier, History };

struct TaskConstraint {
  ConstraintKind kind = ConstraintKind::Frontier;
  int v_pre = -1;   // task vertex that must be absent (frontier / history)
  int v_post = -1;  // task vertex whose production is blocked

  bool operator==(const TaskConstraint&) const = default;
  auto operator<=>(const TaskConstraint&) const = default;
};

using ConstraintSet = std::vector<TaskConstraint>;

struct ScheduleStep {
  int arc = -1;
  std::map<int, int> frontier_before;  // entity -> task vertex id
};

struct UnvalidatedSchedule {
  std::vector<ScheduleStep> steps;

  bool empty() const { return steps.empty(); }
};

enum class TaskQueryFailure { Exhausted, Budget };

struct TaskQueryStats {
  long expansions = 0;
  long backtracks = 0;
};

struct TaskQueryResult {
  std::optional<UnvalidatedSchedule> schedule;
  TaskQueryFailure failure = TaskQueryFailure::Exhausted;
  TaskQueryStats stats;
};

inline bool constraint_blocks(const std::map<int, int>& frontier,
                              const std::set<int>& history_heads,
                              const Hypergraph<TaskVertex, TaskArc>::Hyperarc& arc,
                              const ConstraintSet& constraints) {
  for (const auto& c : constraints) {
    bool head_hit = false;
    for (int h : arc.head) {
      if (h == c.v_post) {
        head_hit = true;
        break;
      }
    }
    if (!head_hit) continue;
    if (c.kind == ConstraintKind::Frontier) {
      for (const auto& [entity, vid] : frontier) {
        if (vid == c.v_pre) return true;
      }
    } else {
      if (history_heads.count(c.v_pre)) return true;
    }
  }
  return false;
}

// Per-arc heuristic: base-to-pose distance for pick/place, base-to-base for
// handover, zero for source/sink.
inline double heuristic_cost(const TaskArc& arc, const World& world,
                             const PoseTable& table) {
  switch (arc.action) {
    case TaskAction::Pick:
    case TaskAction::Place:
      return dist(world.robot(arc.robot).base, table.position(arc.object, arc.pose));
    case TaskAction::Handover:
      return dist(world.robot(arc.robot).base, world.robot(arc.robot2).base);
    default:
      return 0.0;
  }
}

namespace detail {

struct SearchNode {
  std::map<int, int> frontier;       // entity -> task vertex
  std::map<int, int> object_pose;    // object -> last registered pose id
  std::vector<int> history;          // expanded arc ids
  std::set<int> history_heads;       // vertices that appeared in any head
  std::vector<int> candidates;       // ordered expandable arcs
  size_t next = 0;
};

// Candidate gating depends only on the frontier and on which history-
// constraint preconditions have appeared in heads, so search states are keyed
// by exactly that. Dead states are memoized across branches.
inline std::vector<int> state_signature(const SearchNode& n,
                                        const std::set<int>& relevant_heads) {
  std::vector<int> sig;
  sig.reserve(n.frontier.size() * 2 + relevant_heads.size() + 1);
  for (const auto& [e, v] : n.frontier) {
    sig.push_back(e);
    sig.push_back(v);
  }
  sig.push_back(-1);
  for (int v : n.history_heads) {
    if (relevant_heads.count(v)) sig.push_back(v);
  }
  return sig;
}

}  // namespace detail

class TaskQuery {
 public:
  TaskQuery(const TaskSpace& ts, const PoseTable& table)
      : ts_(ts), table_(table), world_(ts.world()) {}

  // Expandable arcs at a node, ordered by ascending heuristic-plus-cost-to-go.
  // Partial arcs (tail only partially in the frontier) are not returned.
  std::vector<int> expandable_arcs(const std::map<int, int>& frontier,
                                   const std::set<int>& history_heads,
                                   const std::map<int, int>& object_pose,
                                   const ConstraintSet& constraints) const {
    const auto& hg = ts_.graph();
    std::set<int> in_frontier;
    for (const auto& [e, v] : frontier) in_frontier.insert(v);

    std::set<int> seen;
    std::vector<std::pair<std::vector<double>, int>> ordered;
    for (int vid : in_frontier) {
      for (int aid : hg.forward_star(vid)) {
        if (!seen.insert(aid).second) continue;
        const auto& arc = hg.arc(aid);
        bool full = true;
        for (int t : arc.tail) {
          if (!in_frontier.count(t)) {
            full = false;
            break;
          }
        }
        if (!full) continue;
        if (constraint_blocks(frontier, history_heads, arc, constraints)) continue;
        ordered.push_back({order_key(aid, arc, frontier, object_pose), aid});
      }
    }
    std::sort(ordered.begin(), ordered.end());
    std::vector<int> out;
    out.reserve(ordered.size());
    for (auto& [k, aid] : ordered) out.push_back(aid);
    return out;
  }

  TaskQueryResult query(const ConstraintSet& constraints, long budget = 100000) const {
    TaskQueryResult result;
    const auto& hg = ts_.graph();

    std::set<int> relevant_heads;
    for (const auto& c : constraints) {
      if (c.kind == ConstraintKind::History) relevant_heads.insert(c.v_pre);
    }

    detail::SearchNode root;
    for (const auto& r : world_.robots) {
      root.frontier[robot_entity(r.id)] = ts_.source_vertex();
    }
    for (const auto& ob : world_.objects) {
      root.frontier[object_entity(world_, ob.id)] = ts_.source_vertex();
      root.object_pose[ob.id] = kStartPose;
    }
    root.candidates = {ts_.source_arc()};

    std::vector<detail::SearchNode> stack{root};
    std::set<std::vector<int>> on_path{detail::state_signature(root, relevant_heads)};
    std::set<std::vector<int>> dead;  // fully explored, sink-free subtrees

    while (!stack.empty()) {
      detail::SearchNode& node = stack.back();
      if (node.next >= node.candidates.size()) {
        const auto sig = detail::state_signature(node, relevant_heads);
        on_path.erase(sig);
        dead.insert(sig);
        stack.pop_back();
        result.stats.backtracks++;
        continue;
      }
      const int aid = node.candidates[node.next++];
      const auto& arc = hg.arc(aid);

      if (++result.stats.expansions > budget) {
        result.failure = TaskQueryFailure::Budget;
        return result;
      }

      detail::SearchNode child;
      child.frontier = node.frontier;
      child.object_pose = node.object_pose;
      child.history = node.history;
      child.history_heads = node.history_heads;
      apply_arc(aid, child.frontier, child.object_pose, child.history,
                child.history_heads);

      if (aid == ts_.sink_arc()) {
        result.schedule = build_schedule(stack, child);
        return result;
      }

      const auto sig = detail::state_signature(child, relevant_heads);
      if (on_path.count(sig)) continue;  // no-progress cycle
      if (dead.count(sig)) continue;     // known dead end

      child.candidates = expandable_arcs(child.frontier, child.history_heads,
                                         child.object_pose, constraints);
      on_path.insert(sig);
      stack.push_back(std::move(child));
    }
    result.failure = TaskQueryFailure::Exhausted;
    return result;
  }

  // Applies head coverage over the frontier; tails are implicitly consumed.
  void apply_arc(int aid, std::map<int, int>& frontier, std::map<int, int>& object_pose,
                 std::vector<int>& history, std::set<int>& history_heads) const {
    const auto& arc = ts_.graph().arc(aid);
    for (int h : arc.head) {
      for (int e : ts_.covered_entities(h)) frontier[e] = h;
      history_heads.insert(h);
    }
    if (arc.payload.action == TaskAction::Place) {
      object_pose[arc.payload.object] = arc.payload.pose;
    } else if (arc.payload.action == TaskAction::Pick) {
      object_pose[arc.payload.object] = arc.payload.pose;
    }
    history.push_back(aid);
  }

  // Straight-line remaining cost over objects not resting at their goals.
  double cost_to_go(const std::map<int, int>& frontier,
                    const std::map<int, int>& object_pose) const {
    double acc = 0.0;
    for (const auto& ob : world_.objects) {
      const int vid = frontier.at(object_entity(world_, ob.id));
      const TaskVertex& v = ts_.graph().vertex(vid);
      if (v.kind == TaskVertexKind::ObjectAt && v.pose == kGoalPose) continue;
      const int pose = object_pose.count(ob.id) ? object_pose.at(ob.id) : kStartPose;
      acc += dist(table_.position(ob.id, pose), ob.goal);
    }
    return acc;
  }

 private:
  static int action_rank(TaskAction a) {
    switch (a) {
      case TaskAction::SinkArc: return 0;
      case TaskAction::Pick: return 1;
      case TaskAction::Place: return 2;
      case TaskAction::Handover: return 3;
      case TaskAction::SourceArc: return 4;
    }
    return 5;
  }

  std::vector<double> order_key(int aid,
                                const Hypergraph<TaskVertex, TaskArc>::Hyperarc& arc,
                                const std::map<int, int>& frontier,
                                const std::map<int, int>& object_pose) const {
    // Successor cost-to-go. A held object is measured from its holder's
    // base, so handing it toward the goal-side robot counts as progress.
    std::map<int, int> pose_after = object_pose;
    if (arc.payload.action == TaskAction::Place) {
      pose_after[arc.payload.object] = arc.payload.pose;
    }
    std::map<int, int> holder_after;  // object -> robot, successor state
    for (const auto& [e, vid] : frontier) {
      const TaskVertex& v = ts_.graph().vertex(vid);
      if (v.kind == TaskVertexKind::Holding) holder_after[v.object] = v.robot;
    }
    switch (arc.payload.action) {
      case TaskAction::Pick:
        holder_after[arc.payload.object] = arc.payload.robot;
        break;
      case TaskAction::Place:
        holder_after.erase(arc.payload.object);
        break;
      case TaskAction::Handover:
        holder_after[arc.payload.object] = arc.payload.robot2;
        break;
      default:
        break;
    }
    double ctg = 0.0;
    for (const auto& ob : world_.objects) {
      auto held = holder_after.find(ob.id);
      if (held != holder_after.end()) {
        ctg += dist(world_.robot(held->second).base, ob.goal);
        continue;
      }
      const int pose = pose_after.count(ob.id) ? pose_after.at(ob.id) : kStartPose;
      if (pose != kGoalPose) ctg += dist(table_.position(ob.id, pose), ob.goal);
    }
    double h = heuristic_cost(arc.payload, world_, table_);
    // regressive moves stay available for non-monotone plans but rank behind
    // everything useful: placing back where the object was just lifted, and
    // lifting an object that already rests at its goal
    if (arc.payload.action == TaskAction::Place &&
        object_pose.count(arc.payload.object) &&
        object_pose.at(arc.payload.object) == arc.payload.pose) {
      h += 1e6;
    }
    if (arc.payload.action == TaskAction::Pick && arc.payload.pose == kGoalPose) {
      h += 1e6;
    }
    return {h + ctg,
            static_cast<double>(action_rank(arc.payload.action)),
            static_cast<double>(arc.payload.robot),
            static_cast<double>(arc.payload.robot2),
            static_cast<double>(arc.payload.object),
            static_cast<double>(arc.payload.pose),
            static_cast<double>(aid)};
  }

  UnvalidatedSchedule build_schedule(const std::vector<detail::SearchNode>& stack,
                                     const detail::SearchNode& terminal) const {
    UnvalidatedSchedule out;
    // stack[i] is the node *before* expanding terminal.history[i].
    for (size_t i = 0; i < terminal.history.size(); ++i) {
      ScheduleStep step;
      step.arc = terminal.history[i];
      step.frontier_before = stack[i].frontier;
      out.steps.push_back(std::move(step));
    }
    return out;
  }

  const TaskSpace& ts_;
  const PoseTable& table_;
  const World& world_;
};

inline TaskQueryResult query_task_plan(const TaskSpace& ts, const PoseTable& table,
                                       const ConstraintSet& constraints,
                                       long budget = 100000) {
  return TaskQuery(ts, table).query(constraints, budget);
}

}  // namespace lazydash
