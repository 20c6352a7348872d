#pragma once

#include <vector>

#include "adpp/linalg.hpp"

namespace adpp {

// Subset-size law of a random-size DPP: the sum of independent
// Bernoulli(lambda_i / (lambda_i + 1)) indicators over the kernel spectrum.
class SizeDistribution {
 public:
  // Exact pmf by iterative convolution of the Bernoulli factors,
  // O(n^2) arithmetic with extended-precision accumulation.
  static SizeDistribution from_eigenvalues(const Vector& eigenvalues, double alpha);
  static SizeDistribution from_bernoulli(const std::vector<double>& probs);

  const std::vector<double>& pmf() const { return pmf_; }
  int size_support() const { return static_cast<int>(pmf_.size()) - 1; }

  double mean() const;
  // Argmax of the pmf, ties broken downward.
  int mode() const;
  // Smallest m with P(X <= m) >= 1/2.
  int median() const;

  double prob_at(int k) const;
  double prob_below(int k) const;  // P(X < k)
  double prob_above(int k) const;  // P(X > k)

  bool is_unimodal(double tol = 1e-12) const;
  bool is_log_concave(double tol = 1e-12) const;

 private:
  explicit SizeDistribution(std::vector<double> pmf) : pmf_(std::move(pmf)) {}
  std::vector<double> pmf_;
};

// p(mode) >= c / sqrt(mode + 1).
bool mode_probability_bound_holds(const SizeDistribution& dist, double c);

// If p(k) < c / (12 sqrt(3(k+1))): a mode below k forces
// P(X > k) <= 1/2 - c/12, and a mode above k forces P(X < k) <= 1/2 - c/12.
// Vacuously true when p(k) is above the threshold.
bool branching_property_holds(const SizeDistribution& dist, int k, double c);

}  // namespace adpp
