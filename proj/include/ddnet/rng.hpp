#pragma once

#include <cstdint>
#include <string_view>

namespace ddnet {

/// Counter-based generator: draw n is a SplitMix64 hash of (seed, n).
/// Only integer arithmetic is involved, so a seed yields the same stream on
/// every platform. All randomness in the toolkit flows through this type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept;
  /// Unit-mean exponential variate.
  double exponential() noexcept;

  /// Independent child stream keyed by a label, e.g. derive("init").
  Rng derive(std::string_view label) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace ddnet
