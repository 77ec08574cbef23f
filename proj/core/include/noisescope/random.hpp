#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace noisescope {

/// Seedable random stream. Every stream is addressed by a master seed plus a
/// path of indices (trial, checkpoint, ...); distinct paths give independent
/// substreams, so Monte Carlo trials are reproducible regardless of the order
/// or thread they run on.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);
  RandomStream(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  /// Independent child stream; does not advance this stream.
  [[nodiscard]] RandomStream substream(std::uint64_t index) const;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next_u64() { return engine_(); }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t key_lo, std::uint64_t key_hi);

  std::uint64_t seed_;
  std::uint64_t key_lo_;
  std::uint64_t key_hi_;
  std::mt19937_64 engine_;
};

}  // namespace noisescope
