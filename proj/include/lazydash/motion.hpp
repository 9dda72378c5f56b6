#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <variant>
#include <vector>

#include "lazydash/task_conflict.hpp"

namespace lazydash {

// Motion layer: per-element lazy roadmaps, the motion hypergraph, the
// motion-extended query that traces an anchored schedule, and the eager
// baseline that pre-validates everything.

// A motion element is the set of limbs moving together: one arm, one arm plus
// its carried object, or (in coordination subproblems) two of those.
struct ElementKey {
  std::vector<std::pair<int, int>> slots;  // (robot, carried object) sorted

  bool operator<(const ElementKey& o) const { return slots < o.slots; }
  bool operator==(const ElementKey&) const = default;
};

inline ElementKey element_free(int robot) { return {{{robot, -1}}}; }
inline ElementKey element_holding(int robot, int object) { return {{{robot, object}}}; }

inline ElementKey element_joint(const ElementKey& a, const ElementKey& b) {
  ElementKey out = a;
  out.slots.insert(out.slots.end(), b.slots.begin(), b.slots.end());
  std::sort(out.slots.begin(), out.slots.end());
  return out;
}

inline Config element_config(const ElementKey& key, const std::vector<Vec2>& effectors) {
  Config c;
  for (size_t i = 0; i < key.slots.size(); ++i) {
    c.limbs.push_back({key.slots[i].first, effectors[i], key.slots[i].second});
  }
  return c;
}

enum class EdgeStatus { Unknown, Valid, Invalid };

struct MotionCounters {
  long validated_edges = 0;   // first-time edge status determinations
  long collision_checks = 0;  // config-level collision evaluations
  long lazy_queries = 0;
  long search_rounds = 0;
};

namespace motion_detail {

inline bool collides_pad(const Shape& a, const Shape& b, double pad) {
  const double d = segment_segment_distance(detail::core_a(a), detail::core_b(a),
                                            detail::core_a(b), detail::core_b(b));
  return d + kTangencyTol < detail::radius(a) + detail::radius(b) + pad;
}

inline std::vector<Shape> limb_shapes(const World& world, const Config& q) {
  std::vector<Shape> out;
  for (const auto& limb : q.limbs) {
    const auto& r = world.robot(limb.robot);
    out.push_back(Capsule{r.base, limb.effector, r.arm_halfwidth});
    if (limb.carried >= 0) {
      out.push_back(Disc{limb.effector, world.object(limb.carried).radius});
    }
  }
  return out;
}

// Environment-intrinsic validity: arms and carried discs against walls.
// Checks are padded by half the collision resolution so sampled sweeps cover
// the gaps between samples. This is what roadmap edge statuses persist.
inline bool config_intrinsic_valid(const World& world, const Config& q,
                                   MotionCounters& counters) {
  counters.collision_checks++;
  const double pad = world.collision_resolution() / 2.0;
  const auto shapes = limb_shapes(world, q);
  for (const auto& s : shapes) {
    for (const auto& w : world.walls) {
      if (collides_pad(s, Shape{w}, pad)) return false;
    }
  }
  return true;
}

// Radius of the contact exemption around a transition anchor: wide enough
// for grasp and handover contacts, narrower than the pose separation the
// generators guarantee.
inline double contact_waiver_radius(const World& world) {
  double max_arm = 0.0, max_obj = 0.0;
  for (const auto& r : world.robots) max_arm = std::max(max_arm, r.arm_halfwidth);
  for (const auto& ob : world.objects) max_obj = std::max(max_obj, ob.radius);
  return 2.0 * max_arm + max_obj + world.collision_resolution();
}

// Query-context validity: statics, constraint regions, and mutual limb
// separation for composite elements. A contact waiver disc exempts transition
// contacts: limb pairs whose effectors both sit inside it, and limb-vs-disc
// pairs whose effector and disc center both sit inside it.
inline bool config_context_valid(const World& world, const Config& q,
                                 const std::vector<Shape>& statics,
                                 const std::vector<Disc>& regions,
                                 MotionCounters& counters,
                                 const std::vector<Disc>& contact_waivers = {}) {
  counters.collision_checks++;
  const double pad = world.collision_resolution() / 2.0;
  for (size_t li = 0; li < q.limbs.size(); ++li) {
    Config single;
    single.limbs.push_back(q.limbs[li]);
    for (const auto& s : limb_shapes(world, single)) {
      for (const auto& st : statics) {
        if (!collides_pad(s, st, pad)) continue;
        bool waived = false;
        if (const auto* d = std::get_if<Disc>(&st)) {
          for (const auto& wv : contact_waivers) {
            if (dist(q.limbs[li].effector, wv.center) <= wv.r &&
                dist(d->center, wv.center) <= wv.r) {
              waived = true;
              break;
            }
          }
        }
        if (!waived) return false;
      }
      for (const auto& rg : regions) {
        if (collides_pad(s, Shape{rg}, pad)) return false;
      }
    }
  }
  if (q.limbs.size() > 1) {
    for (size_t i = 0; i < q.limbs.size(); ++i) {
      for (size_t j = i + 1; j < q.limbs.size(); ++j) {
        bool waived = false;
        for (const auto& wv : contact_waivers) {
          if (dist(q.limbs[i].effector, wv.center) <= wv.r &&
              dist(q.limbs[j].effector, wv.center) <= wv.r) {
            waived = true;
            break;
          }
        }
        if (waived) continue;
        Config a, b;
        a.limbs.push_back(q.limbs[i]);
        b.limbs.push_back(q.limbs[j]);
        // padded wider: both bodies move between sweep samples
        for (const auto& sa : limb_shapes(world, a)) {
          for (const auto& sb : limb_shapes(world, b)) {
            if (collides_pad(sa, sb, 2.0 * pad)) return false;
          }
        }
      }
    }
  }
  return true;
}

inline Config lerp_config(const Config& a, const Config& b, double t) {
  Config out = a;
  for (size_t i = 0; i < out.limbs.size(); ++i) {
    out.limbs[i].effector =
        a.limbs[i].effector + (b.limbs[i].effector - a.limbs[i].effector) * t;
  }
  return out;
}

template <typename Pred>
inline bool sweep(const World& world, const Config& a, const Config& b, Pred&& ok) {
  const double ds = world.collision_resolution();
  const double len = config_distance(a, b);
  const int n = std::max(1, static_cast<int>(std::ceil(len / ds)));
  for (int i = 0; i <= n; ++i) {
    if (!ok(lerp_config(a, b, static_cast<double>(i) / n))) return false;
  }
  return true;
}

}  // namespace motion_detail

struct RoadmapEdge {
  int u = -1;
  int v = -1;
  double length = 0.0;
  EdgeStatus status = EdgeStatus::Unknown;
};

// Per-element lazy roadmap. Vertices and edges only grow; edge statuses move
// Unknown -> Valid/Invalid exactly once (environment-intrinsic validity).
class Roadmap {
 public:
  ElementKey key;
  std::vector<Config> vertices;
  std::vector<RoadmapEdge> edges;
  std::vector<std::vector<int>> adj;  // vertex -> incident edge ids
  int k_neighbors = 8;

  int add_vertex(Config q) {
    vertices.push_back(std::move(q));
    adj.emplace_back();
    return static_cast<int>(vertices.size()) - 1;
  }

  void connect(int vid, int k) {
    std::vector<std::pair<double, int>> near;
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
      if (i == vid) continue;
      near.push_back({config_distance(vertices[static_cast<size_t>(vid)],
                                      vertices[static_cast<size_t>(i)]),
                      i});
    }
    std::sort(near.begin(), near.end());
    const int want = std::min<int>(k, static_cast<int>(near.size()));
    for (int n = 0; n < want; ++n) {
      add_edge(vid, near[static_cast<size_t>(n)].second,
               near[static_cast<size_t>(n)].first);
    }
  }

  // Anchors are inserted on demand; exact duplicates reuse the existing id.
  int insert_anchor(const Config& q) {
    for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
      if (vertices[static_cast<size_t>(i)] == q) return i;
    }
    const int id = add_vertex(q);
    connect(id, k_neighbors);
    return id;
  }

  int valid_edges() const {
    int n = 0;
    for (const auto& e : edges) n += e.status != EdgeStatus::Unknown ? 1 : 0;
    return n;
  }

 private:
  void add_edge(int u, int v, double length) {
    if (u > v) std::swap(u, v);
    for (int eid : adj[static_cast<size_t>(u)]) {
      if ((edges[static_cast<size_t>(eid)].u == u &&
           edges[static_cast<size_t>(eid)].v == v)) {
        return;
      }
    }
    const int id = static_cast<int>(edges.size());
    edges.push_back({u, v, length, EdgeStatus::Unknown});
    adj[static_cast<size_t>(u)].push_back(id);
    adj[static_cast<size_t>(v)].push_back(id);
  }
};

inline Config sample_element_config(const ElementKey& key, const World& world,
                                    Rng& rng) {
  Config q;
  for (const auto& [robot, carried] : key.slots) {
    const auto& r = world.robot(robot);
    const double rad = r.reach * std::sqrt(rng.uniform());
    const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    q.limbs.push_back(
        {robot, r.base + Vec2{rad * std::cos(ang), rad * std::sin(ang)}, carried});
  }
  return q;
}

inline Roadmap build_lazy_roadmap(const ElementKey& key, const World& world,
                                  int n_samples, int k_neighbors, Rng& rng) {
  Roadmap rm;
  rm.key = key;
  rm.k_neighbors = k_neighbors;
  for (int i = 0; i < n_samples; ++i) {
    rm.add_vertex(sample_element_config(key, world, rng));
  }
  for (int i = 0; i < n_samples; ++i) rm.connect(i, k_neighbors);
  return rm;
}

struct LazyPathParams {
  int max_iterations = 200;
  double timeout_s = 2.0;
  int repair_rounds = 3;
  int local_samples = 20;
  int global_samples = 50;
};

// Lazy-PRM query: repeatedly take the shortest path treating Unknown edges as
// usable, validate Unknown edges along it, and return once an all-valid path
// appears. Constraint-region and static-context invalidity is query-local;
// wall validity persists on the roadmap.
class LazyPath {
 public:
  LazyPath(Roadmap& rm, const World& world, MotionCounters& counters)
      : rm_(rm), world_(world), counters_(counters) {}

  std::optional<Path> query(const Config& start, const Config& goal,
                            const std::vector<Shape>& statics,
                            const std::vector<Disc>& regions,
                            const LazyPathParams& params, Rng& rng,
                            const std::vector<Disc>& contact_waivers = {}) {
    counters_.lazy_queries++;
    waivers_ = &contact_waivers;
    const auto t0 = std::chrono::steady_clock::now();
    const int s = rm_.insert_anchor(start);
    const int g = rm_.insert_anchor(goal);
    if (!motion_detail::config_intrinsic_valid(world_, start, counters_) ||
        !motion_detail::config_intrinsic_valid(world_, goal, counters_) ||
        !motion_detail::config_context_valid(world_, start, statics, regions,
                                             counters_, contact_waivers) ||
        !motion_detail::config_context_valid(world_, goal, statics, regions,
                                             counters_, contact_waivers)) {
      return std::nullopt;
    }
    if (s == g) {
      Path p;
      p.waypoints = {start};
      return p;
    }

    std::map<int, bool> context_ok;  // query-local edge verdicts
    std::vector<int> broken;         // edges found unusable this query
    int repairs_used = 0;

    for (int iter = 0; iter < params.max_iterations; ++iter) {
      counters_.search_rounds++;
      if (std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >
          params.timeout_s) {
        return std::nullopt;
      }
      auto edge_path = dijkstra(s, g, context_ok);
      if (!edge_path) {
        if (repairs_used >= params.repair_rounds) return std::nullopt;
        repair(repairs_used, broken, params, rng);
        repairs_used++;
        continue;
      }
      bool all_good = true;
      for (int eid : *edge_path) {
        auto& e = rm_.edges[static_cast<size_t>(eid)];
        if (e.status == EdgeStatus::Unknown) {
          const bool ok = motion_detail::sweep(
              world_, rm_.vertices[static_cast<size_t>(e.u)],
              rm_.vertices[static_cast<size_t>(e.v)], [&](const Config& q) {
                return motion_detail::config_intrinsic_valid(world_, q, counters_);
              });
          e.status = ok ? EdgeStatus::Valid : EdgeStatus::Invalid;
          counters_.validated_edges++;
          if (!ok) {
            broken.push_back(eid);
            all_good = false;
            break;
          }
        }
        auto it = context_ok.find(eid);
        if (it == context_ok.end()) {
          const bool ok = motion_detail::sweep(
              world_, rm_.vertices[static_cast<size_t>(e.u)],
              rm_.vertices[static_cast<size_t>(e.v)], [&](const Config& q) {
                return motion_detail::config_context_valid(world_, q, statics, regions,
                                                           counters_, *waivers_);
              });
          context_ok[eid] = ok;
          if (!ok) {
            broken.push_back(eid);
            all_good = false;
            break;
          }
        } else if (!it->second) {
          all_good = false;
          break;
        }
      }
      if (all_good) return assemble(s, g, *edge_path, start, goal);
    }
    return std::nullopt;
  }

 private:
  bool usable(int eid, const std::map<int, bool>& context_ok) const {
    const auto& e = rm_.edges[static_cast<size_t>(eid)];
    if (e.status == EdgeStatus::Invalid) return false;
    auto it = context_ok.find(eid);
    return it == context_ok.end() || it->second;
  }

  // Deterministic Dijkstra; ties resolved by vertex id via the heap ordering.
  std::optional<std::vector<int>> dijkstra(int s, int g,
                                           const std::map<int, bool>& context_ok) const {
    const size_t n = rm_.vertices.size();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<int> pred_edge(n, -1);
    std::vector<char> done(n, 0);
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
      for (int eid : rm_.adj[static_cast<size_t>(u)]) {
        if (!usable(eid, context_ok)) continue;
        const auto& e = rm_.edges[static_cast<size_t>(eid)];
        const int v = e.u == u ? e.v : e.u;
        if (done[static_cast<size_t>(v)]) continue;
        const double nd = d + e.length;
        if (nd < dist[static_cast<size_t>(v)]) {
          dist[static_cast<size_t>(v)] = nd;
          pred_edge[static_cast<size_t>(v)] = eid;
          pq.push({nd, v});
        }
      }
    }
    if (!done[static_cast<size_t>(g)]) return std::nullopt;
    std::vector<int> path;
    int cur = g;
    while (cur != s) {
      const int eid = pred_edge[static_cast<size_t>(cur)];
      path.push_back(eid);
      const auto& e = rm_.edges[static_cast<size_t>(eid)];
      cur = e.u == cur ? e.v : e.u;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  // Repair ladder: two local rounds seeding around broken edge midpoints,
  // then one global round of uniform samples.
  void repair(int round, const std::vector<int>& broken, const LazyPathParams& params,
              Rng& rng) {
    if (round < 2 && !broken.empty()) {
      for (int i = 0; i < params.local_samples; ++i) {
        const int eid = broken[static_cast<size_t>(rng.uniform_int(broken.size()))];
        const auto& e = rm_.edges[static_cast<size_t>(eid)];
        const Config mid = motion_detail::lerp_config(
            rm_.vertices[static_cast<size_t>(e.u)],
            rm_.vertices[static_cast<size_t>(e.v)], 0.5);
        const double radius = std::max(e.length, 4.0 * world_.collision_resolution());
        Config q = mid;
        bool ok = true;
        for (auto& limb : q.limbs) {
          const auto& r = world_.robot(limb.robot);
          bool placed = false;
          for (int tries = 0; tries < 20; ++tries) {
            const double rad = radius * std::sqrt(rng.uniform());
            const double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
            const Vec2 p =
                limb.effector + Vec2{rad * std::cos(ang), rad * std::sin(ang)};
            if (dist(p, r.base) <= r.reach) {
              limb.effector = p;
              placed = true;
              break;
            }
          }
          if (!placed) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        const int vid = rm_.add_vertex(q);
        rm_.connect(vid, rm_.k_neighbors);
      }
    } else {
      for (int i = 0; i < params.global_samples; ++i) {
        const int vid = rm_.add_vertex(sample_element_config(rm_.key, world_, rng));
        rm_.connect(vid, rm_.k_neighbors);
      }
    }
  }

  Path assemble(int s, int g, const std::vector<int>& edge_path, const Config& start,
                const Config& goal) const {
    std::vector<Config> wps{start};
    int cur = s;
    for (int eid : edge_path) {
      const auto& e = rm_.edges[static_cast<size_t>(eid)];
      cur = e.u == cur ? e.v : e.u;
      wps.push_back(rm_.vertices[static_cast<size_t>(cur)]);
    }
    (void)g;
    (void)goal;
    return make_path(std::move(wps));
  }

  Roadmap& rm_;
  const World& world_;
  MotionCounters& counters_;
  const std::vector<Disc>* waivers_ = nullptr;
};

}  // namespace lazydash
