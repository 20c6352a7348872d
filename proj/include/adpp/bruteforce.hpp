#pragma once

#include <cstdint>
#include <vector>

#include "adpp/linalg.hpp"

namespace adpp {

// Ground-truth subset distribution for small n; probabilities are indexed by
// the subset bitmask.
struct SubsetDistribution {
  int n = 0;
  std::vector<double> prob;  // size 2^n

  double at(std::uint32_t mask) const { return prob[mask]; }
};

inline constexpr int kEnumerationCap = 14;

std::uint32_t subset_mask(const std::vector<ItemIndex>& subset);

// All 2^n probabilities of DPP(L): Pr(S) = det(L_S) / det(I + L).
SubsetDistribution enumerate_dpp(const Matrix& l);

// Probabilities of the k-DPP: Pr(S) = det(L_S) / sum_{|S'|=k} det(L_{S'}),
// zero mass on subsets of other sizes.
SubsetDistribution enumerate_kdpp(const Matrix& l, int k);

// Upper tail of the chi-square distribution with `dof` degrees of freedom.
double chi_square_sf(double x, double dof);

// Pearson goodness-of-fit p-value. Cells with expected count below
// min_expected are pooled. Throws Unsupported if fewer than two cells remain.
double chi_square_gof(const std::vector<std::int64_t>& observed,
                      const std::vector<double>& expected_probs,
                      double min_expected = 5.0);

// Two-sample chi-square homogeneity test over parallel count vectors.
double chi_square_two_sample(const std::vector<std::int64_t>& a,
                             const std::vector<std::int64_t>& b,
                             double min_expected = 5.0);

}  // namespace adpp
