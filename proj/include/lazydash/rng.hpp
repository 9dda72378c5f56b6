#pragma once

#include <cstdint>
#include <string_view>

namespace lazydash {

// Deterministic, platform-independent PRNG (splitmix64 core). All randomness
// in the planner flows from one master seed through fork() so that replanning
// iterations draw fresh but reproducible streams.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits; avoids the
  // implementation-defined std::uniform_real_distribution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n) { return next_u64() % n; }

  // Derive an independent child stream. Forking does not advance this
  // generator, so the same (stream, tag) pair always yields the same child.
  Rng fork(std::uint64_t tag) const {
    std::uint64_t z = state_ ^ (0x632be59bd9b4e019ull + tag * 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return Rng(z ^ (z >> 31));
  }

  Rng fork(std::string_view tag) const { return fork(fnv1a(tag)); }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }

 private:
  std::uint64_t state_;
};

}  // namespace lazydash
