#pragma once

#include <cstdint>

namespace adpp {

// Seeded, splittable randomness source. Every sampling operation takes one
// explicitly. The generator is SplitMix64; all distributions are implemented
// by hand so that a fixed seed yields the same draws on every build.
//
// Two derivation mechanisms support deterministic parallelism:
//   - split(key): an independent child stream, parent state untouched.
//   - keyed(seed, a, b): a counter-based stream for item-level draws, so a
//     draw keyed by (iteration, j) does not depend on evaluation order.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  static RandomStream keyed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return RandomStream(mix(mix(seed ^ kGolden) ^ mix(a)) ^ mix(b ^ kGolden2));
  }

  RandomStream split(std::uint64_t key) const {
    return RandomStream::keyed(state_, key, 0x5eedu);
  }

  std::uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01() < p;
  }

  // Uniform integer in [0, n), unbiased via rejection.
  std::uint64_t uniform_index(std::uint64_t n);

  // Exact Poisson draw. Inversion by sequential search for mean < 30,
  // Hormann's PTRS transformed rejection otherwise.
  long long poisson(double mean);

  // Standard normal via Box-Muller (second value discarded).
  double normal();

 private:
  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kGolden2 = 0xD1B54A32D192ED03ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

}  // namespace adpp
