#pragma once

#include <cstdint>
#include <random>

namespace curvctmc {

/// Independent random stream identified by (seed, stream index).
///
/// Each stream is a mt19937_64 seeded through std::seed_seq from the four
/// 32-bit halves of seed and index, so a path's draws depend only on its
/// index and never on scheduling. Variates are derived from raw 64-bit
/// outputs here instead of std distributions, whose algorithms differ
/// between standard libraries.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t index);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  /// Exponential with the given rate (> 0).
  double exponential(double rate);
  /// Standard normal by Box-Muller.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace curvctmc
