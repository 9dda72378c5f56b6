#pragma once

#include <cstring>

#include "lazydash/resolve.hpp"
#include "lazydash/task_query.hpp"

namespace lazydash {

// Eager baseline: precompute the motion feasibility of every possible action
// (all roadmaps fully validated, all transition configurations sampled), then
// answer a combined task-and-motion query over that representation. Kept for
// head-to-head comparison against the lazy pipeline.

struct EagerModel {
  struct Candidate {
    int task_arc = -1;
    Vec2 anchor;
  };
  std::vector<Candidate> candidates;
  std::map<int, std::vector<int>> by_arc;  // task arc -> candidate indices
};

inline EagerModel build_eager_motion_hypergraph(const TaskSpace& ts,
                                                const PoseTable& table,
                                                MotionState& state,
                                                const MotionParams& params, Rng& rng) {
  const World& world = ts.world();
  EagerModel model;

  // every element's roadmap, with every edge validated up front
  const auto& hg = ts.graph();
  for (int v = 0; v < hg.num_vertices(); ++v) {
    const TaskVertex& tv = hg.vertex(v);
    ElementKey key;
    if (tv.kind == TaskVertexKind::RobotFree) {
      key = element_free(tv.robot);
    } else if (tv.kind == TaskVertexKind::Holding) {
      key = element_holding(tv.robot, tv.object);
    } else {
      continue;
    }
    Roadmap& rm = state.roadmap(key, params);
    for (auto& e : rm.edges) {
      if (e.status != EdgeStatus::Unknown) continue;
      const bool ok = motion_detail::sweep(
          world, rm.vertices[static_cast<size_t>(e.u)],
          rm.vertices[static_cast<size_t>(e.v)], [&](const Config& q) {
            return motion_detail::config_intrinsic_valid(world, q, state.counters);
          });
      e.status = ok ? EdgeStatus::Valid : EdgeStatus::Invalid;
      state.counters.validated_edges++;
    }
  }

  // every transition configuration, kept when clear of the permanent
  // environment
  const auto wall_clear = [&](const TaskArc& arc, Vec2 h) {
    std::vector<Shape> shapes;
    shapes.push_back(Capsule{world.robot(arc.robot).base, h,
                             world.robot(arc.robot).arm_halfwidth});
    if (arc.action == TaskAction::Handover) {
      shapes.push_back(Capsule{world.robot(arc.robot2).base, h,
                               world.robot(arc.robot2).arm_halfwidth});
    }
    shapes.push_back(Disc{h, world.object(arc.object).radius});
    state.counters.collision_checks++;
    const double clearance = world.collision_resolution() / 2.0 + 1e-6;
    for (const auto& s : shapes) {
      for (const auto& w : world.walls) {
        if (collides_with_clearance(s, Shape{w}, clearance)) return false;
      }
    }
    return true;
  };
  for (int aid = 0; aid < hg.num_hyperarcs(); ++aid) {
    const TaskArc& arc = hg.arc(aid).payload;
    if (arc.action == TaskAction::Pick || arc.action == TaskAction::Place) {
      const Vec2 h = table.position(arc.object, arc.pose);
      if (!wall_clear(arc, h)) continue;
      model.by_arc[aid].push_back(static_cast<int>(model.candidates.size()));
      model.candidates.push_back({aid, h});
      make_transition_plan_arc(ts, state, arc, h, -1, aid);
    } else if (arc.action == TaskAction::Handover) {
      Rng hrng = rng.fork(static_cast<std::uint64_t>(aid));
      for (int k = 0; k < params.transition_resamples; ++k) {
        const Vec2 h = sample_handover_point(world, arc.robot, arc.robot2, arc.object,
                                             hrng, 50);
        if (!wall_clear(arc, h)) continue;
        model.by_arc[aid].push_back(static_cast<int>(model.candidates.size()));
        model.candidates.push_back({aid, h});
        make_transition_plan_arc(ts, state, arc, h, -1, aid);
      }
    }
  }
  return model;
}

enum class BaselineFailure { Exhausted, Budget };

struct BaselineResult {
  std::optional<OptimisticSchedule> plan;
  BaselineFailure failure = BaselineFailure::Exhausted;
  long expansions = 0;
  long backtracks = 0;
};

// Greedy hyperpath search over the eager motion representation. Nodes carry
// explicit configurations; every candidate's motion cost is computed before
// ordering, so the query pays for path searches on each expansion.
class BaselineQuery {
 public:
  BaselineQuery(const TaskSpace& ts, const PoseTable& table, MotionState& state,
                const EagerModel& model, const MotionParams& params)
      : ts_(ts), table_(table), world_(ts.world()), state_(state), model_(model),
        params_(params), gate_(ts, table) {}

  BaselineResult query(const ConstraintSet& constraints,
                       const std::vector<MotionConstraint>& cms, long budget) {
    cms_ = &cms;
    BaselineResult result;
    Node root;
    for (const auto& r : world_.robots) {
      root.frontier[robot_entity(r.id)] = ts_.source_vertex();
      root.eff[r.id] = r.base;
      root.carried[r.id] = -1;
    }
    for (const auto& ob : world_.objects) {
      root.frontier[object_entity(world_, ob.id)] = ts_.source_vertex();
      root.object_pose[ob.id] = kStartPose;
    }
    root.candidates.push_back({{0.0}, ts_.source_arc(), -1, {}});

    std::vector<Node> stack{root};
    std::set<std::vector<int>> on_path{signature(root)};
    std::set<std::vector<int>> dead;
    while (!stack.empty()) {
      Node& node = stack.back();
      if (node.next >= node.candidates.size()) {
        const auto sig = signature(node);
        on_path.erase(sig);
        dead.insert(sig);
        stack.pop_back();
        result.backtracks++;
        continue;
      }
      const Candidate cand = node.candidates[node.next++];
      if (++result.expansions > budget) {
        result.failure = BaselineFailure::Budget;
        return result;
      }
      Node child = expand(node, cand, constraints, static_cast<int>(stack.size()));
      if (cand.aid == ts_.sink_arc()) {
        OptimisticSchedule plan;
        for (const auto& n : stack) {
          for (const auto& a : n.delta) plan.arcs.push_back(a);
        }
        for (const auto& a : child.delta) plan.arcs.push_back(a);
        result.plan = std::move(plan);
        return result;
      }
      const auto sig = signature(child);
      if (on_path.count(sig)) continue;
      if (dead.count(sig)) continue;
      build_candidates(child, constraints);
      on_path.insert(sig);
      stack.push_back(std::move(child));
    }
    result.failure = BaselineFailure::Exhausted;
    return result;
  }

 private:
  struct Candidate {
    std::vector<double> key;
    int aid = -1;
    int cand = -1;  // index into model_.candidates, -1 for source/sink
    std::vector<PlanArc> moves;
  };

  struct Node {
    std::map<int, int> frontier, object_pose;
    std::set<int> heads;
    std::map<int, Vec2> eff;
    std::map<int, int> carried;
    std::vector<Candidate> candidates;
    size_t next = 0;
    std::vector<PlanArc> delta;
  };

  // Feasibility in the combined query depends on explicit configurations, so
  // the memo key carries them (as exact bit patterns) alongside the frontier.
  static std::vector<int> signature(const Node& n) {
    std::vector<int> sig;
    for (const auto& [e, v] : n.frontier) {
      sig.push_back(e);
      sig.push_back(v);
    }
    sig.push_back(-1);
    for (int v : n.heads) sig.push_back(v);
    sig.push_back(-2);
    for (const auto& [r, p] : n.eff) {
      std::uint64_t bx, by;
      std::memcpy(&bx, &p.x, 8);
      std::memcpy(&by, &p.y, 8);
      sig.push_back(r);
      sig.push_back(static_cast<int>(bx ^ (bx >> 32)));
      sig.push_back(static_cast<int>(by ^ (by >> 32)));
      sig.push_back(n.carried.at(r));
    }
    return sig;
  }

  std::vector<Shape> placed_statics(const Node& n, int except_object) const {
    std::vector<Shape> out;
    for (const auto& [entity, vid] : n.frontier) {
      const TaskVertex& v = ts_.graph().vertex(vid);
      if (v.kind != TaskVertexKind::ObjectAt || v.object == except_object) continue;
      out.push_back(
          Disc{table_.position(v.object, v.pose), world_.object(v.object).radius});
    }
    return out;
  }

  // Shortest path over validated edges with query-context gating. Newly
  // inserted anchor edges are validated immediately (the representation stays
  // fully evaluated).
  std::optional<Path> eager_path(Roadmap& rm, const Config& start, const Config& goal,
                                 const std::vector<Shape>& statics,
                                 const std::vector<Disc>& regions,
                                 const std::vector<Disc>& waivers) {
    const int s = rm.insert_anchor(start);
    const int g = rm.insert_anchor(goal);
    for (int vid : {s, g}) {
      for (int eid : rm.adj[static_cast<size_t>(vid)]) {
        auto& e = rm.edges[static_cast<size_t>(eid)];
        if (e.status != EdgeStatus::Unknown) continue;
        const bool ok = motion_detail::sweep(
            world_, rm.vertices[static_cast<size_t>(e.u)],
            rm.vertices[static_cast<size_t>(e.v)], [&](const Config& q) {
              return motion_detail::config_intrinsic_valid(world_, q, state_.counters);
            });
        e.status = ok ? EdgeStatus::Valid : EdgeStatus::Invalid;
        state_.counters.validated_edges++;
      }
    }
    if (!motion_detail::config_context_valid(world_, start, statics, regions,
                                             state_.counters, waivers) ||
        !motion_detail::config_context_valid(world_, goal, statics, regions,
                                             state_.counters, waivers)) {
      return std::nullopt;
    }
    // Dijkstra over valid edges; context checked on demand
    const size_t n = rm.vertices.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> pred(n, -1);
    std::vector<char> done(n, 0);
    std::map<int, bool> ctx;
    const auto context_ok = [&](int eid) {
      auto it = ctx.find(eid);
      if (it != ctx.end()) return it->second;
      const auto& e = rm.edges[static_cast<size_t>(eid)];
      const bool ok = motion_detail::sweep(
          world_, rm.vertices[static_cast<size_t>(e.u)],
          rm.vertices[static_cast<size_t>(e.v)], [&](const Config& q) {
            return motion_detail::config_context_valid(world_, q, statics, regions,
                                                       state_.counters, waivers);
          });
      ctx[eid] = ok;
      return ok;
    };
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[static_cast<size_t>(s)] = 0.0;
    pq.push({0.0, s});
    while (!pq.empty()) {
      const auto [d, u] = pq.top();
      pq.pop();
      if (done[static_cast<size_t>(u)]) continue;
      done[static_cast<size_t>(u)] = 1;
      if (u == g) break;
      for (int eid : rm.adj[static_cast<size_t>(u)]) {
        const auto& e = rm.edges[static_cast<size_t>(eid)];
        if (e.status != EdgeStatus::Valid) continue;
        const int v = e.u == u ? e.v : e.u;
        if (done[static_cast<size_t>(v)]) continue;
        const double nd = d + e.length;
        if (nd < dist[static_cast<size_t>(v)] && context_ok(eid)) {
          dist[static_cast<size_t>(v)] = nd;
          pred[static_cast<size_t>(v)] = eid;
          pq.push({nd, v});
        }
      }
    }
    if (!done[static_cast<size_t>(g)]) return std::nullopt;
    std::vector<Config> wps;
    int cur = g;
    std::vector<int> rev;
    while (cur != s) {
      const int eid = pred[static_cast<size_t>(cur)];
      rev.push_back(eid);
      const auto& e = rm.edges[static_cast<size_t>(eid)];
      cur = e.u == cur ? e.v : e.u;
    }
    wps.push_back(start);
    for (auto it = rev.rbegin(); it != rev.rend(); ++it) {
      const auto& e = rm.edges[static_cast<size_t>(*it)];
      cur = e.u == cur ? e.v : e.u;
      wps.push_back(rm.vertices[static_cast<size_t>(cur)]);
    }
    return make_path(std::move(wps));
  }

  std::optional<std::vector<PlanArc>> plan_moves(const Node& n, const TaskArc& arc,
                                                 Vec2 h, int aid) {
    std::vector<PlanArc> out;
    const auto participants = arc.action == TaskAction::Handover
                                  ? std::vector<int>{arc.robot, arc.robot2}
                                  : std::vector<int>{arc.robot};
    const auto regions = active_regions(*cms_, task_signature(arc));
    for (int rid : participants) {
      const int carried = n.carried.at(rid);
      const Vec2 from = n.eff.at(rid);
      if (from == h) continue;
      const ElementKey elem =
          carried >= 0 ? element_holding(rid, carried) : element_free(rid);
      Roadmap& rm = state_.roadmap(elem, params_);
      const Config start = motion_detail::single_config(rid, from, carried);
      const Config goal = motion_detail::single_config(rid, h, carried);
      // transition contacts are licensed by waiver discs at the anchors
      const auto statics = placed_statics(n, -1);
      std::vector<Disc> waivers;
      const double wr = motion_detail::contact_waiver_radius(world_);
      if (arc.action == TaskAction::Pick && rid == arc.robot && carried < 0) {
        waivers.push_back(Disc{h, wr});
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
      auto path = eager_path(rm, start, goal, statics, regions, waivers);
      if (!path) return std::nullopt;
      PlanArc move;
      move.kind = PlanArc::Kind::Move;
      move.task_arc = aid;
      move.action = arc.action;
      move.element = elem;
      move.robots = {rid};
      move.carried = carried;
      move.object = carried;
      move.path = std::move(*path);
      move.times = motion_detail::waypoint_times(move.path, world_.robot(rid).speed);
      move.duration = move.times.back();
      const int elem_vid = carried >= 0 ? *ts_.find_holding_vertex(rid, carried)
                                        : ts_.robot_free_vertex(rid);
      const int t = state_.ensure_vertex(elem_vid, move.path.waypoints.front());
      const int hd = state_.ensure_vertex(elem_vid, move.path.waypoints.back());
      move.hm_arc = state_.ensure_arc(MotionArcKind::Move, aid, {t}, {hd},
                                      move.path.total_length);
      out.push_back(std::move(move));
    }
    return out;
  }

  bool transition_clear(const Node& n, const TaskArc& arc, Vec2 h,
                        const std::vector<Disc>& regions) {
    const auto statics = placed_statics(n, arc.object);
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
      for (const auto& rg : regions) {
        if (collides(s, Shape{rg})) return false;
      }
    }
    return true;
  }

  void build_candidates(Node& n, const ConstraintSet& constraints) {
    const auto arcs =
        gate_.expandable_arcs(n.frontier, n.heads, n.object_pose, constraints);
    for (int aid : arcs) {
      const TaskArc& arc = ts_.graph().arc(aid).payload;
      if (arc.action == TaskAction::SinkArc || arc.action == TaskAction::SourceArc) {
        n.candidates.push_back({{0.0}, aid, -1, {}});
        continue;
      }
      auto it = model_.by_arc.find(aid);
      if (it == model_.by_arc.end()) continue;
      const auto regions = active_regions(*cms_, task_signature(arc));
      for (int ci : it->second) {
        const Vec2 h = model_.candidates[static_cast<size_t>(ci)].anchor;
        if (!transition_clear(n, arc, h, regions)) continue;
        auto moves = plan_moves(n, arc, h, aid);
        if (!moves) continue;
        double cost = 0.0;
        for (const auto& m : *moves) cost += m.path.total_length;
        // regressive moves rank behind everything useful
        if (arc.action == TaskAction::Place && n.object_pose.count(arc.object) &&
            n.object_pose.at(arc.object) == arc.pose) {
          cost += 1e6;
        }
        if (arc.action == TaskAction::Pick && arc.pose == kGoalPose) {
          cost += 1e6;
        }
        std::map<int, int> pose_after = n.object_pose;
        if (arc.action == TaskAction::Place) pose_after[arc.object] = arc.pose;
        std::map<int, int> holder_after;
        for (const auto& [r2, c2] : n.carried) {
          if (c2 >= 0) holder_after[c2] = r2;
        }
        switch (arc.action) {
          case TaskAction::Pick: holder_after[arc.object] = arc.robot; break;
          case TaskAction::Place: holder_after.erase(arc.object); break;
          case TaskAction::Handover: holder_after[arc.object] = arc.robot2; break;
          default: break;
        }
        double ctg = 0.0;
        for (const auto& ob : world_.objects) {
          auto held = holder_after.find(ob.id);
          if (held != holder_after.end()) {
            ctg += dist(world_.robot(held->second).base, ob.goal);
            continue;
          }
          const int pose = pose_after.count(ob.id) ? pose_after.at(ob.id) : kStartPose;
          if (pose == kGoalPose) continue;
          ctg += dist(table_.position(ob.id, pose), ob.goal);
        }
        Candidate c;
        c.key = {cost + ctg,
                 static_cast<double>(arc.action == TaskAction::Pick
                                         ? 1
                                         : arc.action == TaskAction::Place ? 2 : 3),
                 static_cast<double>(arc.robot),
                 static_cast<double>(arc.robot2),
                 static_cast<double>(arc.object),
                 static_cast<double>(arc.pose),
                 static_cast<double>(ci)};
        c.aid = aid;
        c.cand = ci;
        c.moves = std::move(*moves);
        n.candidates.push_back(std::move(c));
      }
    }
    std::sort(n.candidates.begin(), n.candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.key < b.key; });
  }

  Node expand(const Node& parent, const Candidate& cand, const ConstraintSet& constraints,
              int depth) {
    (void)constraints;
    Node child;
    child.frontier = parent.frontier;
    child.object_pose = parent.object_pose;
    child.heads = parent.heads;
    child.eff = parent.eff;
    child.carried = parent.carried;
    const auto& arc = ts_.graph().arc(cand.aid);
    for (int h : arc.head) {
      for (int e : ts_.covered_entities(h)) child.frontier[e] = h;
      child.heads.insert(h);
    }
    const TaskArc& payload = arc.payload;
    if (payload.action == TaskAction::SourceArc) {
      std::map<int, Vec2> eff0 = child.eff;
      child.delta.push_back(make_source_plan_arc(ts_, state_, depth, cand.aid, eff0));
      return child;
    }
    if (payload.action == TaskAction::SinkArc) {
      child.delta.push_back(make_sink_plan_arc(ts_, state_, depth, cand.aid, child.eff));
      return child;
    }
    const Vec2 h = model_.candidates[static_cast<size_t>(cand.cand)].anchor;
    for (auto m : cand.moves) {
      m.schedule_index = depth;
      child.delta.push_back(std::move(m));
    }
    child.delta.push_back(
        make_transition_plan_arc(ts_, state_, payload, h, depth, cand.aid));
    switch (payload.action) {
      case TaskAction::Pick:
        child.carried[payload.robot] = payload.object;
        child.eff[payload.robot] = h;
        child.object_pose[payload.object] = payload.pose;
        break;
      case TaskAction::Place:
        child.carried[payload.robot] = -1;
        child.eff[payload.robot] = h;
        child.object_pose[payload.object] = payload.pose;
        break;
      case TaskAction::Handover:
        child.carried[payload.robot] = -1;
        child.carried[payload.robot2] = payload.object;
        child.eff[payload.robot] = h;
        child.eff[payload.robot2] = h;
        break;
      default:
        break;
    }
    return child;
  }

  const TaskSpace& ts_;
  const PoseTable& table_;
  const World& world_;
  MotionState& state_;
  const EagerModel& model_;
  MotionParams params_;
  TaskQuery gate_;
  const std::vector<MotionConstraint>* cms_ = nullptr;
};

}  // namespace lazydash
