#pragma once

#include <cstdint>
#include <random>

#include "rankwatch/numerics.hpp"

namespace rankwatch {

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for replicate `index` of a run seeded with `master`:
/// mix64(master + 0x9E3779B97F4A7C15 * (index + 1)). Distinct indices give
/// statistically independent mt19937_64 streams.
std::uint64_t child_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seedable 64-bit generator (mt19937_64) with platform-independent normal,
/// uniform and Bernoulli draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal();
  double uniform();  // [0, 1)
  bool bernoulli(double p);

  Vector normal_vector(Index n);
  Matrix normal_matrix(Index rows, Index cols);

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rankwatch
