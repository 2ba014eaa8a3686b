#pragma once

#include <cstdint>

namespace slin {

/// SplitMix64 run in counter mode: draw i of stream (seed, stream) is
/// mix64(key + (i + 1) * 0x9E3779B97F4A7C15) with key = mix64(seed ^ mix64(stream)).
/// Integer output is bit-exact on every platform. Normals use the Marsaglia
/// polar method and depend on std::log/std::sqrt of the host libm.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  static std::uint64_t mix64(std::uint64_t z);

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double next_uniform();
  /// Uniform integer in [0, bound); bound > 0.
  std::uint64_t next_below(std::uint64_t bound);
  double next_normal();

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace slin
