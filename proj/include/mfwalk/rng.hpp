#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace mfw {

/// Mixing step of SplitMix64; used to derive independent stream keys.
std::uint64_t splitmix64(std::uint64_t x);

/// Hash of a seed and a path of stream identifiers, e.g.
/// stream_key(seed, {n, delta_index, lambda_index, replicate}).
std::uint64_t stream_key(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

/// Random stream used by every stochastic routine.
///
/// A 64-bit Mersenne Twister keyed by stream_key(): the same (seed, path)
/// always yields the same sequence, and distinct paths give streams that
/// can run concurrently without coordination. Variates are produced from
/// raw engine output so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);
  static Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on {0, ..., n - 1}.
  std::uint64_t index(std::uint64_t n);
  /// Exponential with the given rate (> 0).
  double exponential(double rate);

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mfw
