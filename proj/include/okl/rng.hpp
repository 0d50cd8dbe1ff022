#pragma once

#include <cstdint>
#include <random>

namespace okl {

// Deterministic sample stream used by every randomized component.
//
// The engine is std::mt19937_64, whose output sequence is pinned by the
// standard for a given 64-bit seed. Uniform variates are derived from the
// raw bits with the fixed mapping below instead of
// std::uniform_real_distribution (whose output is implementation-defined),
// so streams are bit-identical per seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on [-halfwidth, halfwidth].
  double symmetric(double halfwidth) { return uniform(-halfwidth, halfwidth); }

  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace okl
