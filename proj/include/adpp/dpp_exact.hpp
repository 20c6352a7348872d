#pragma once

#include <vector>

#include "adpp/linalg.hpp"
#include "adpp/random.hpp"

namespace adpp {

// Random-size DPP on a small dense PSD matrix: Pr(S) = det(M_S) / det(I + M).
// Eigendecomposes M, keeps eigenvector i with probability
// lambda_i / (lambda_i + 1), then samples the induced projection DPP by
// sequential conditional selection with re-orthogonalization.
std::vector<ItemIndex> sample_dpp(const Matrix& m, RandomStream& rng);

// Fixed-size k-DPP on a small dense PSD matrix:
// Pr(S) = det(M_S) / e_k(lambda). Throws InfeasibleSize when k exceeds the
// numerical rank.
std::vector<ItemIndex> sample_kdpp_small(const Matrix& m, int k, RandomStream& rng);

// e_0 .. e_{k_max} of the given values via the standard recurrence.
std::vector<double> elementary_symmetric(const Vector& values, int k_max);

}  // namespace adpp
