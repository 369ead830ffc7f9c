#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace shed {

// Finalizer from SplitMix64; also used to hash seeds and tags together.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + 0x9e3779b97f4a7c15ULL));
}

/// Counter-based random stream (SplitMix64). State is a single 64-bit
/// counter, so the integer sequence is identical on every platform.
/// Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed = 0) : seed_(seed), counter_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(counter_);
  }

  /// Independent child stream keyed by `tag`; does not advance this stream.
  RandomStream derive(std::uint64_t tag) const { return RandomStream(combine_seed(seed_, tag)); }

  std::uint64_t seed() const { return seed_; }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), unbiased (rejection on the top range).
  std::uint64_t uniform_index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; the second variate of each pair is cached.
  double gaussian();

  bool operator==(const RandomStream&) const = default;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// n i.i.d. standard normal draws.
Eigen::VectorXd sample_gaussian(RandomStream& stream, int n);

}  // namespace shed
