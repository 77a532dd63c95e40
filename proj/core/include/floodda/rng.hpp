#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace floodda {

/// 64-bit finalizing mix (splitmix64). Bijective on uint64.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a named substream of a root seed.
///
/// Every random draw in the toolkit comes from a substream addressed by
/// (root seed, stream name, up to three integer indices). Streams are
/// independent of evaluation order and thread schedule, which is what makes
/// whole experiments reproducible from a single seed.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name,
                             std::uint64_t i0 = 0, std::uint64_t i1 = 0,
                             std::uint64_t i2 = 0);

/// Deterministic generator wrapper around mt19937_64.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Substream constructor, see substream_seed().
  Rng(std::uint64_t root, std::string_view name, std::uint64_t i0 = 0,
      std::uint64_t i1 = 0, std::uint64_t i2 = 0)
      : gen_(substream_seed(root, name, i0, i1, i2)) {}

  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(gen_);
  }

  /// Uniform on [0,1).
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
  }

  std::uint64_t u64() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

private:
  std::mt19937_64 gen_;
};

} // namespace floodda
