#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace leakscope {

// Seeded generator whose draws are identical on every platform. The standard
// distributions are implementation-defined, so all draws go through the raw
// 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t operator()() { return engine_(); }

  // Uniform in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound);
  // Uniform in [lo, hi].
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }
  // Uniform in [0, 1) with 53 random bits.
  double unit();
  bool chance(double p) { return unit() < p; }
  // Index drawn proportionally to non-negative weights (at least one positive).
  std::size_t weighted(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

}  // namespace leakscope
