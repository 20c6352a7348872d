#include "adpp/poisson_binomial.hpp"

#include <cmath>

#include "adpp/errors.hpp"

namespace adpp {

namespace {

// Extended precision keeps |sum(pmf) - 1| within 1e-10 up to n = 10000.
std::vector<double> convolve_bernoulli(const std::vector<double>& probs) {
  std::vector<long double> pmf(1, 1.0L);
  pmf.reserve(probs.size() + 1);
  for (const double p : probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("Bernoulli probability outside [0,1]: " + std::to_string(p));
    const long double q = static_cast<long double>(p);
    pmf.push_back(0.0L);
    for (std::size_t j = pmf.size() - 1; j > 0; --j)
      pmf[j] = pmf[j] * (1.0L - q) + pmf[j - 1] * q;
    pmf[0] *= (1.0L - q);
  }
  std::vector<double> out(pmf.size());
  for (std::size_t j = 0; j < pmf.size(); ++j) out[j] = static_cast<double>(pmf[j]);
  return out;
}

}  // namespace

SizeDistribution SizeDistribution::from_eigenvalues(const Vector& eigenvalues, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("size_pmf requires alpha > 0");
  std::vector<double> probs(static_cast<std::size_t>(eigenvalues.size()));
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double lam = eigenvalues(i);
    if (lam < 0.0) throw ConfigError("size_pmf requires nonnegative eigenvalues");
    const double al = alpha * lam;
    probs[static_cast<std::size_t>(i)] = al / (al + 1.0);
  }
  return SizeDistribution(convolve_bernoulli(probs));
}

SizeDistribution SizeDistribution::from_bernoulli(const std::vector<double>& probs) {
  return SizeDistribution(convolve_bernoulli(probs));
}

double SizeDistribution::mean() const {
  double acc = 0.0;
  for (std::size_t j = 1; j < pmf_.size(); ++j) acc += static_cast<double>(j) * pmf_[j];
  return acc;
}

int SizeDistribution::mode() const {
  int best = 0;
  for (std::size_t j = 1; j < pmf_.size(); ++j)
    if (pmf_[j] > pmf_[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
  return best;
}

int SizeDistribution::median() const {
  double cum = 0.0;
  for (std::size_t j = 0; j < pmf_.size(); ++j) {
    cum += pmf_[j];
    if (cum >= 0.5) return static_cast<int>(j);
  }
  return static_cast<int>(pmf_.size()) - 1;
}

double SizeDistribution::prob_at(int k) const {
  if (k < 0 || k >= static_cast<int>(pmf_.size())) return 0.0;
  return pmf_[static_cast<std::size_t>(k)];
}

double SizeDistribution::prob_below(int k) const {
  double acc = 0.0;
  for (int j = 0; j < k && j < static_cast<int>(pmf_.size()); ++j)
    acc += pmf_[static_cast<std::size_t>(j)];
  return acc;
}

double SizeDistribution::prob_above(int k) const {
  double acc = 0.0;
  for (int j = k + 1; j < static_cast<int>(pmf_.size()); ++j)
    acc += pmf_[static_cast<std::size_t>(j)];
  return acc;
}

bool SizeDistribution::is_unimodal(double tol) const {
  const int m = mode();
  for (int j = 1; j <= m; ++j)
    if (pmf_[static_cast<std::size_t>(j)] < pmf_[static_cast<std::size_t>(j - 1)] * (1.0 - tol) - tol)
      return false;
  for (std::size_t j = static_cast<std::size_t>(m) + 1; j < pmf_.size(); ++j)
    if (pmf_[j] > pmf_[j - 1] * (1.0 + tol) + tol) return false;
  return true;
}

bool SizeDistribution::is_log_concave(double tol) const {
  for (std::size_t j = 1; j + 1 < pmf_.size(); ++j) {
    const double lhs = pmf_[j] * pmf_[j];
    const double rhs = pmf_[j - 1] * pmf_[j + 1];
    if (lhs < rhs * (1.0 - tol) - tol) return false;
  }
  return true;
}

bool mode_probability_bound_holds(const SizeDistribution& dist, double c) {
  const int m = dist.mode();
  return dist.prob_at(m) >= c / std::sqrt(static_cast<double>(m) + 1.0);
}

bool branching_property_holds(const SizeDistribution& dist, int k, double c) {
  const double threshold = c / (12.0 * std::sqrt(3.0 * (static_cast<double>(k) + 1.0)));
  if (dist.prob_at(k) >= threshold) return true;
  const int m = dist.mode();
  const double cap = 0.5 - c / 12.0;
  if (m < k) return dist.prob_above(k) <= cap;
  if (m > k) return dist.prob_below(k) <= cap;
  return true;
}

}  // namespace adpp
