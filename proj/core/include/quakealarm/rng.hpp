#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>

namespace quakealarm {

/// Seeded random stream. Identical (seed, stream_id) pairs produce identical
/// sequences; Monte-Carlo replicate r draws from stream_id = r so results do
/// not depend on the order in which replicates run.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream_id = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer on [0, n); n must be positive.
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p) { return uniform01() < p; }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace quakealarm
