#include <catch2/catch_amalgamated.hpp>

#include "lazydash/geometry.hpp"

using namespace lazydash;

namespace {

// Dense point-sampling oracle: minimum distance from a capsule's axis samples
// to the disc center. Independent of the closed-form segment distance.
bool sampling_oracle_collides(const Capsule& c, const Disc& d, int samples) {
  double best = 1e18;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const Vec2 p = c.a + (c.b - c.a) * t;
    best = std::min(best, dist(p, d.center));
  }
  return best < c.r + d.r;
}

World test_world() {
  World w;
  w.bounds = {0, 0, 4, 4};
  w.surfaces = {{"table", {0.5, 0.5, 3.5, 3.5}}};
  w.robots = {{0, {2, 2}, 1.5, 0.05, 1.0}};
  w.objects = {{0, 0.1, {1, 1}, {3, 3}}};
  return w;
}

}  // namespace

TEST_CASE("collides on basic pairs") {
  REQUIRE_FALSE(collides(Shape{Disc{{0, 0}, 1}}, Shape{Disc{{3, 0}, 1}}));
  REQUIRE(collides(Shape{Capsule{{0, 0}, {2, 0}, 0.1}}, Shape{Disc{{1, 0.05}, 0.1}}));
  // tangency counts as non-colliding
  REQUIRE_FALSE(collides(Shape{Disc{{0, 0}, 1}}, Shape{Disc{{2, 0}, 1}}));
  // degenerate zero-length capsule behaves as a disc
  REQUIRE(collides(Shape{Capsule{{0, 0}, {0, 0}, 0.5}}, Shape{Disc{{0.7, 0}, 0.3}}));
}

TEST_CASE("collides is symmetric") {
  Rng rng(11);
  for (int i = 0; i < 500; ++i) {
    const auto v = [&] { return Vec2{rng.uniform(-2, 2), rng.uniform(-2, 2)}; };
    const Shape shapes[3] = {Shape{Disc{v(), rng.uniform(0.01, 1)}},
                             Shape{Capsule{v(), v(), rng.uniform(0.01, 0.5)}},
                             Shape{Wall{v(), v(), rng.uniform(0.01, 0.3)}}};
    const auto& a = shapes[rng.uniform_int(3)];
    const auto& b = shapes[rng.uniform_int(3)];
    REQUIRE(collides(a, b) == collides(b, a));
  }
}

TEST_CASE("collides agrees with the dense sampling oracle") {
  Rng rng(1234);
  int mismatches = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    const Capsule c{{rng.uniform(-2, 2), rng.uniform(-2, 2)},
                    {rng.uniform(-2, 2), rng.uniform(-2, 2)},
                    rng.uniform(0.01, 0.5)};
    const Disc d{{rng.uniform(-2, 2), rng.uniform(-2, 2)}, rng.uniform(0.01, 0.5)};
    const bool closed_form = collides(Shape{c}, Shape{d});
    const bool sampled = sampling_oracle_collides(c, d, 10000);
    if (closed_form != sampled) {
      // disagreement is only allowed at sampling-resolution tangency
      const double exact = point_segment_distance(d.center, c.a, c.b);
      const double margin = dist(c.a, c.b) / 10000.0;
      REQUIRE(std::abs(exact - (c.r + d.r)) <= margin + 1e-9);
      mismatches++;
    }
  }
  REQUIRE(mismatches <= trials / 1000);
}

TEST_CASE("stable_pose_valid basics") {
  const World w = test_world();
  REQUIRE(stable_pose_valid(w, 0, {2, 2}, {}));
  REQUIRE_FALSE(stable_pose_valid(w, 0, {2, 2}, {Disc{{2.05, 2}, 0.1}}));
  REQUIRE_FALSE(stable_pose_valid(w, 0, {0.1, 0.1}, {}));  // outside every surface
  // inset by the object radius: hugging the surface edge is unstable
  REQUIRE_FALSE(stable_pose_valid(w, 0, {0.55, 2}, {}));
}

TEST_CASE("sample_stable_pose postcondition and determinism") {
  const World w = test_world();
  Rng a(99), b(99);
  const auto pa = sample_stable_pose(w, 0, {}, a);
  const auto pb = sample_stable_pose(w, 0, {}, b);
  REQUIRE(pa.has_value());
  REQUIRE(pa == pb);
  REQUIRE(stable_pose_valid(w, 0, *pa, {}));
}

TEST_CASE("sample_stable_pose returns none on a fully blocked surface") {
  World w = test_world();
  w.surfaces = {{"slot", {1.0, 1.0, 1.4, 1.4}}};
  w.objects[0].radius = 0.1;
  // tile the inset area with discs so no stable point remains
  std::vector<Disc> blocked;
  for (double x = 1.0; x <= 1.45; x += 0.15) {
    for (double y = 1.0; y <= 1.45; y += 0.15) {
      blocked.push_back({{x, y}, 0.1});
    }
  }
  // grid oracle at 1 cm resolution: no inset point is free
  bool any_free = false;
  for (double x = 1.1; x <= 1.3001; x += 0.01) {
    for (double y = 1.1; y <= 1.3001; y += 0.01) {
      if (stable_pose_valid(w, 0, {x, y}, blocked)) any_free = true;
    }
  }
  REQUIRE_FALSE(any_free);
  Rng rng(5);
  REQUIRE_FALSE(sample_stable_pose(w, 0, blocked, rng).has_value());
}

TEST_CASE("grasp_config reach rules") {
  const RobotModel r{0, {0, 0}, 2.0, 0.05, 1.0};
  const auto c = grasp_config(r, {1, 1});
  REQUIRE(c.has_value());
  REQUIRE(c->limbs[0].effector == Vec2{1, 1});
  REQUIRE_FALSE(grasp_config(r, {3, 0}).has_value());
  // boundary: the reach disc is closed
  REQUIRE(grasp_config(r, {2, 0}).has_value());
}

TEST_CASE("interpolate arc-length parameterization") {
  Config a, b;
  a.limbs = {{0, {0, 0}, -1}};
  b.limbs = {{0, {2, 0}, -1}};
  const Path p = make_path({a, b});
  REQUIRE(interpolate(p, 0.5).limbs[0].effector == Vec2{1, 0});
  REQUIRE(interpolate(p, 0.0).limbs[0].effector == Vec2{0, 0});
  REQUIRE(interpolate(p, 1.0).limbs[0].effector == Vec2{2, 0});
  REQUIRE_THROWS_AS(interpolate(Path{}, 0.5), std::invalid_argument);
}

TEST_CASE("interpolate is continuous and reach-admissible on random paths") {
  Rng rng(321);
  const RobotModel robot{0, {0, 0}, 2.0, 0.05, 1.0};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Config> wps;
    const int n = 2 + static_cast<int>(rng.uniform_int(5));
    for (int i = 0; i < n; ++i) {
      const double rad = robot.reach * std::sqrt(rng.uniform());
      const double ang = rng.uniform(0, 6.283185307179586);
      Config c;
      c.limbs = {{0, {rad * std::cos(ang), rad * std::sin(ang)}, -1}};
      wps.push_back(c);
    }
    const Path p = make_path(std::move(wps));
    const double eps = 1e-4;
    for (int i = 0; i < 100; ++i) {
      const double s = rng.uniform();
      const auto q = interpolate(p, s);
      REQUIRE(dist(q.limbs[0].effector, robot.base) <= robot.reach + 1e-9);
      if (s + eps <= 1.0) {
        const auto q2 = interpolate(p, s + eps);
        REQUIRE(config_distance(q, q2) <= p.total_length * eps + 1e-9);
      }
    }
  }
}
