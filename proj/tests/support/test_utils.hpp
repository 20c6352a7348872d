#pragma once

#include <cstdint>
#include <vector>

#include "adpp/kernel.hpp"
#include "adpp/linalg.hpp"
#include "adpp/random.hpp"

namespace adpp::test {

inline Matrix random_gaussian(int rows, int cols, RandomStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline Matrix random_psd(int n, RandomStream& rng, double scale = 1.0) {
  const Matrix b = random_gaussian(n, n, rng);
  return (scale / n) * (b * b.transpose());
}

inline KernelSource random_rbf_source(int n, int d, double sigma, std::uint64_t seed) {
  RandomStream rng(seed);
  return KernelSource::from_features(random_gaussian(n, d, rng), KernelFunction::Rbf, sigma);
}

// Smallest alpha with d_eff(alpha L) == target, by bisection on the spectrum.
inline double solve_alpha_for_deff(const Vector& eigenvalues, double target) {
  double lo = 1e-12, hi = 1e12;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (effective_dimension_spectrum(eigenvalues, mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace adpp::test
