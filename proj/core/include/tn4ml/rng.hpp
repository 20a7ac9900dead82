#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace tn4ml {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the independent sub-stream `id` of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id);

/// Counter-based generator: draw n is mix64(key + (n + 1) * 0x9E3779B97F4A7C15),
/// i.e. SplitMix64 keyed by mix64(seed). Normals use Box-Muller on two
/// 53-bit uniforms; uniform integers use rejection sampling. Everything is
/// fixed-width integer arithmetic plus libm, so sequences are identical
/// across platforms and standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  /// Fisher-Yates shuffle.
  void shuffle(std::span<std::size_t> values);

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tn4ml
