#include "adpp/bruteforce.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "adpp/errors.hpp"

namespace adpp {

std::uint32_t subset_mask(const std::vector<ItemIndex>& subset) {
  std::uint32_t mask = 0;
  for (const ItemIndex i : subset) mask |= (1u << static_cast<unsigned>(i));
  return mask;
}

namespace {

double subset_det(const Matrix& l, std::uint32_t mask, int n) {
  std::vector<Eigen::Index> idx;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << static_cast<unsigned>(i))) idx.push_back(i);
  if (idx.empty()) return 1.0;
  Matrix sub(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) sub(a, b) = l(idx[a], idx[b]);
  return sub.determinant();
}

void check_enumeration_size(const Matrix& l) {
  if (l.rows() != l.cols()) throw ConfigError("enumerate: matrix must be square");
  if (l.rows() > kEnumerationCap)
    throw Unsupported("enumerate: n = " + std::to_string(l.rows()) + " exceeds cap " +
                      std::to_string(kEnumerationCap));
}

}  // namespace

SubsetDistribution enumerate_dpp(const Matrix& l) {
  check_enumeration_size(l);
  const int n = static_cast<int>(l.rows());
  const std::uint32_t count = 1u << static_cast<unsigned>(n);
  SubsetDistribution dist;
  dist.n = n;
  dist.prob.resize(count);
  Matrix shifted = l;
  shifted.diagonal().array() += 1.0;
  const double normalization = shifted.determinant();
  for (std::uint32_t mask = 0; mask < count; ++mask)
    dist.prob[mask] = std::max(0.0, subset_det(l, mask, n)) / normalization;
  return dist;
}

SubsetDistribution enumerate_kdpp(const Matrix& l, int k) {
  check_enumeration_size(l);
  const int n = static_cast<int>(l.rows());
  if (k < 0 || k > n) throw ConfigError("enumerate_kdpp: k out of range");
  const std::uint32_t count = 1u << static_cast<unsigned>(n);
  SubsetDistribution dist;
  dist.n = n;
  dist.prob.assign(count, 0.0);
  double normalization = 0.0;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    if (std::popcount(mask) != k) continue;
    const double d = std::max(0.0, subset_det(l, mask, n));
    dist.prob[mask] = d;
    normalization += d;
  }
  if (!(normalization > 0.0)) throw InfeasibleSize("enumerate_kdpp: all size-k determinants vanish");
  for (double& p : dist.prob) p /= normalization;
  return dist;
}

namespace {

// Regularized incomplete gamma Q(a, x) via series / continued fraction.
double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw ConfigError("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // Lower series, then complement.
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - gln);
    return std::max(0.0, 1.0 - p);
  }
  // Continued fraction (modified Lentz).
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

struct PooledCells {
  std::vector<double> observed;
  std::vector<double> expected;
};

// Pools ascending-expectation cells until each pooled cell reaches
// min_expected; a light leftover is merged into the previous cell.
PooledCells pool_cells(const std::vector<double>& observed, const std::vector<double>& expected,
                       double min_expected) {
  std::vector<std::size_t> order(expected.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return expected[a] < expected[b]; });
  PooledCells out;
  double obs_acc = 0.0, exp_acc = 0.0;
  for (const std::size_t idx : order) {
    obs_acc += observed[idx];
    exp_acc += expected[idx];
    if (exp_acc >= min_expected) {
      out.observed.push_back(obs_acc);
      out.expected.push_back(exp_acc);
      obs_acc = 0.0;
      exp_acc = 0.0;
    }
  }
  if (exp_acc > 0.0 || obs_acc > 0.0) {
    if (!out.expected.empty()) {
      out.observed.back() += obs_acc;
      out.expected.back() += exp_acc;
    } else {
      out.observed.push_back(obs_acc);
      out.expected.push_back(exp_acc);
    }
  }
  return out;
}

}  // namespace

double chi_square_sf(double x, double dof) {
  if (dof <= 0.0) throw ConfigError("chi_square_sf: dof must be positive");
  if (x <= 0.0) return 1.0;
  return gamma_q(dof / 2.0, x / 2.0);
}

double chi_square_gof(const std::vector<std::int64_t>& observed,
                      const std::vector<double>& expected_probs, double min_expected) {
  if (observed.size() != expected_probs.size())
    throw ConfigError("chi_square_gof: cell count mismatch");
  const double total = static_cast<double>(std::accumulate(observed.begin(), observed.end(),
                                                           std::int64_t{0}));
  std::vector<double> obs(observed.size()), expect(observed.size());
  for (std::size_t i = 0; i < observed.size(); ++i) {
    obs[i] = static_cast<double>(observed[i]);
    expect[i] = expected_probs[i] * total;
  }
  const PooledCells cells = pool_cells(obs, expect, min_expected);
  if (cells.expected.size() < 2)
    throw Unsupported("chi_square_gof: fewer than two cells after pooling");
  double stat = 0.0;
  for (std::size_t i = 0; i < cells.expected.size(); ++i) {
    if (!(cells.expected[i] > 0.0))
      throw Unsupported("chi_square_gof: zero expected mass in pooled cell");
    const double diff = cells.observed[i] - cells.expected[i];
    stat += diff * diff / cells.expected[i];
  }
  return chi_square_sf(stat, static_cast<double>(cells.expected.size()) - 1.0);
}

double chi_square_two_sample(const std::vector<std::int64_t>& a,
                             const std::vector<std::int64_t>& b, double min_expected) {
  if (a.size() != b.size()) throw ConfigError("chi_square_two_sample: cell count mismatch");
  const double na = static_cast<double>(std::accumulate(a.begin(), a.end(), std::int64_t{0}));
  const double nb = static_cast<double>(std::accumulate(b.begin(), b.end(), std::int64_t{0}));
  if (!(na > 0.0) || !(nb > 0.0)) throw ConfigError("chi_square_two_sample: empty sample");

  // Pool on the combined counts so both samples use identical cells.
  std::vector<double> combined(a.size()), obs_a(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    combined[i] = static_cast<double>(a[i] + b[i]);
    obs_a[i] = static_cast<double>(a[i]);
  }
  const double scale = min_expected * (na + nb) / std::min(na, nb);
  const PooledCells cells = pool_cells(obs_a, combined, scale);
  if (cells.expected.size() < 2)
    throw Unsupported("chi_square_two_sample: fewer than two cells after pooling");

  const double ka = std::sqrt(nb / na);
  const double kb = std::sqrt(na / nb);
  double stat = 0.0;
  for (std::size_t i = 0; i < cells.expected.size(); ++i) {
    const double ai = cells.observed[i];
    const double bi = cells.expected[i] - ai;  // pooled combined minus sample a
    const double denom = ai + bi;
    if (!(denom > 0.0)) continue;
    const double diff = ka * ai - kb * bi;
    stat += diff * diff / denom;
  }
  return chi_square_sf(stat, static_cast<double>(cells.expected.size()) - 1.0);
}

}  // namespace adpp
