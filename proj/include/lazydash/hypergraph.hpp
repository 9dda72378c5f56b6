#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lazydash {

/// Generic directed hypergraph: hyperarcs connect a non-empty tail vertex set
/// to a non-empty head vertex set. Ids are dense, stable, and never reused;
/// there is no removal API — invalidated content is masked by constraints at
/// higher layers, never deleted, so counts are monotone non-decreasing.
template <typename V, typename E>
class Hypergraph {
 public:
  struct Hyperarc {
    std::vector<int> tail;
    std::vector<int> head;
    E payload;
  };

  int add_vertex(V payload) {
    vertices_.push_back(std::move(payload));
    forward_star_.emplace_back();
    return static_cast<int>(vertices_.size()) - 1;
  }

  int add_hyperarc(std::vector<int> tail, std::vector<int> head, E payload) {
    if (tail.empty() || head.empty()) {
      throw std::invalid_argument("hyperarc tail and head must be non-empty");
    }
    for (int v : tail) check_vertex(v);
    for (int v : head) check_vertex(v);
    const int id = static_cast<int>(arcs_.size());
    for (int v : tail) forward_star_[static_cast<size_t>(v)].push_back(id);
    arcs_.push_back(Hyperarc{std::move(tail), std::move(head), std::move(payload)});
    return id;
  }

  const V& vertex(int id) const {
    check_vertex(id);
    return vertices_[static_cast<size_t>(id)];
  }

  const Hyperarc& arc(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= arcs_.size()) {
      throw std::out_of_range("unknown hyperarc id");
    }
    return arcs_[static_cast<size_t>(id)];
  }

  /// Arcs that have v in their tail, in insertion order.
  const std::vector<int>& forward_star(int v) const {
    check_vertex(v);
    return forward_star_[static_cast<size_t>(v)];
  }

  std::pair<int, int> counts() const {
    return {static_cast<int>(vertices_.size()), static_cast<int>(arcs_.size())};
  }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_hyperarcs() const { return static_cast<int>(arcs_.size()); }

 private:
  void check_vertex(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= vertices_.size()) {
      throw std::out_of_range("unknown vertex id");
    }
  }

  std::vector<V> vertices_;
  std::vector<Hyperarc> arcs_;
  std::vector<std::vector<int>> forward_star_;
};

}  // namespace lazydash
