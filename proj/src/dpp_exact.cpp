#include "adpp/dpp_exact.hpp"

#include <algorithm>
#include <cmath>

#include "adpp/errors.hpp"

namespace adpp {

namespace {

constexpr double kDegeneracyFloor = 1e-12;
constexpr double kProbSlack = 1e-9;

// Modified Gram-Schmidt with one re-orthogonalization pass.
void orthonormalize(Matrix& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index p = 0; p < c; ++p)
        v.col(c) -= v.col(p).dot(v.col(c)) * v.col(p);
    const double nrm = v.col(c).norm();
    if (nrm < kDegeneracyFloor)
      throw NumericalFailure("projection DPP: degenerate basis column");
    v.col(c) /= nrm;
  }
}

// Samples |cols(v)| items from the projection DPP spanned by the orthonormal
// columns of v.
std::vector<ItemIndex> sample_projection_dpp(Matrix v, RandomStream& rng) {
  std::vector<ItemIndex> out;
  while (v.cols() > 0) {
    const Eigen::Index rows = v.rows();
    Vector rowsq = v.rowwise().squaredNorm();
    const double total = rowsq.sum();
    if (!(total > 0.0)) throw NumericalFailure("projection DPP: vanishing selection mass");
    for (Eigen::Index a = 0; a < rows; ++a) {
      const double p = rowsq(a) / total;
      if (p < -kProbSlack || p > 1.0 + kProbSlack)
        throw NumericalFailure("projection DPP: conditional probability out of range");
    }

    const double u = rng.uniform01() * total;
    double cum = 0.0;
    Eigen::Index picked = rows - 1;
    for (Eigen::Index a = 0; a < rows; ++a) {
      cum += std::max(0.0, rowsq(a));
      if (u <= cum) {
        picked = a;
        break;
      }
    }
    out.push_back(static_cast<ItemIndex>(picked));

    if (v.cols() == 1) break;

    // Pivot on the column with the largest component in the picked row,
    // eliminate that row from the remaining columns, drop the pivot.
    Eigen::Index pivot = 0;
    v.row(picked).cwiseAbs().maxCoeff(&pivot);
    const double pval = v(picked, pivot);
    if (std::fabs(pval) < kDegeneracyFloor)
      throw NumericalFailure("projection DPP: degenerate pivot");
    const Vector pcol = v.col(pivot);
    for (Eigen::Index c = 0; c < v.cols(); ++c) {
      if (c == pivot) continue;
      v.col(c) -= (v(picked, c) / pval) * pcol;
    }
    // Drop the pivot column in place.
    if (pivot != v.cols() - 1) v.col(pivot) = v.col(v.cols() - 1);
    v.conservativeResize(Eigen::NoChange, v.cols() - 1);
    orthonormalize(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<ItemIndex> sample_dpp(const Matrix& m, RandomStream& rng) {
  if (m.rows() == 0) return {};
  const EigenDecomposition eig = eigendecompose_psd(m);
  std::vector<Eigen::Index> chosen;
  for (Eigen::Index i = 0; i < eig.eigenvalues.size(); ++i) {
    const double lam = eig.eigenvalues(i);
    if (rng.bernoulli(lam / (lam + 1.0))) chosen.push_back(i);
  }
  if (chosen.empty()) return {};
  Matrix v(m.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c)
    v.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors.col(chosen[c]);
  return sample_projection_dpp(std::move(v), rng);
}

std::vector<double> elementary_symmetric(const Vector& values, int k_max) {
  std::vector<double> e(static_cast<std::size_t>(k_max) + 1, 0.0);
  e[0] = 1.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double lam = values(i);
    for (int k = std::min<int>(k_max, static_cast<int>(i) + 1); k >= 1; --k)
      e[static_cast<std::size_t>(k)] += lam * e[static_cast<std::size_t>(k) - 1];
  }
  return e;
}

std::vector<ItemIndex> sample_kdpp_small(const Matrix& m, int k, RandomStream& rng) {
  if (k < 0) throw ConfigError("sample_kdpp_small: k must be nonnegative");
  if (k == 0) return {};
  const EigenDecomposition eig = eigendecompose_psd(m);
  const Eigen::Index n_eigs = eig.eigenvalues.size();
  const double lam_max = n_eigs > 0 ? eig.eigenvalues(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < n_eigs; ++i)
    if (eig.eigenvalues(i) > kDegeneracyFloor * std::max(lam_max, 1.0)) ++rank;
  if (k > rank)
    throw InfeasibleSize("sample_kdpp_small: k = " + std::to_string(k) +
                         " exceeds numerical rank " + std::to_string(rank));

  // E[l][j] = e_l(lambda_1..lambda_j); eigenvector-subset selection walks the
  // table backwards.
  std::vector<std::vector<double>> e(static_cast<std::size_t>(k) + 1,
                                     std::vector<double>(static_cast<std::size_t>(n_eigs) + 1, 0.0));
  for (Eigen::Index j = 0; j <= n_eigs; ++j) e[0][static_cast<std::size_t>(j)] = 1.0;
  for (int l = 1; l <= k; ++l)
    for (Eigen::Index j = 1; j <= n_eigs; ++j)
      e[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)] =
          e[static_cast<std::size_t>(l)][static_cast<std::size_t>(j - 1)] +
          eig.eigenvalues(j - 1) * e[static_cast<std::size_t>(l) - 1][static_cast<std::size_t>(j - 1)];

  std::vector<Eigen::Index> chosen;
  int remaining = k;
  Eigen::Index i = n_eigs;
  while (remaining > 0 && i > 0) {
    if (i == remaining) {
      // Only one way to finish: take every remaining eigenvector.
      for (Eigen::Index j = i; j >= 1; --j) chosen.push_back(j - 1);
      remaining = 0;
      break;
    }
    const double denom = e[static_cast<std::size_t>(remaining)][static_cast<std::size_t>(i)];
    if (denom > 0.0) {
      const double marg = eig.eigenvalues(i - 1) *
                          e[static_cast<std::size_t>(remaining) - 1][static_cast<std::size_t>(i - 1)] /
                          denom;
      if (rng.uniform01() < marg) {
        chosen.push_back(i - 1);
        --remaining;
      }
    }
    --i;
  }
  if (remaining != 0) throw NumericalFailure("sample_kdpp_small: selection underflow");

  Matrix v(m.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c)
    v.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors.col(chosen[c]);
  return sample_projection_dpp(std::move(v), rng);
}

}  // namespace adpp
