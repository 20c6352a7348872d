#include "adpp/random.hpp"

#include <cmath>

#include "adpp/errors.hpp"

namespace adpp {

std::uint64_t RandomStream::uniform_index(std::uint64_t n) {
  if (n == 0) throw ConfigError("uniform_index: n must be positive");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

namespace {

constexpr double kPtrsThreshold = 30.0;

}  // namespace

long long RandomStream::poisson(double mean) {
  if (!(mean >= 0.0)) throw ConfigError("poisson: mean must be nonnegative");
  if (mean == 0.0) return 0;
  if (mean < kPtrsThreshold) {
    // Inversion by sequential search.
    const double p0 = std::exp(-mean);
    double p = p0;
    double cum = p0;
    const double u = uniform01();
    long long k = 0;
    while (u > cum) {
      ++k;
      p *= mean / static_cast<double>(k);
      cum += p;
      if (p <= 0.0) break;  // underflow guard on the extreme tail
    }
    return k;
  }
  // PTRS rejection (Hormann 1993), exact for mean >= ~10.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mean = std::log(mean);
  for (;;) {
    const double u = uniform01() - 0.5;
    const double v = uniform01();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_mean - mean - std::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<long long>(kf);
  }
}

double RandomStream::normal() {
  double u1;
  do {
    u1 = uniform01();
  } while (u1 <= 0.0);
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace adpp
