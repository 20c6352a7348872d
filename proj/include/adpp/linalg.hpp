#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace adpp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ItemIndex = std::int64_t;

// Negative eigenvalues above -kTolPsd * lambda_max are clipped to zero;
// anything below that rejects the input as non-PSD.
inline constexpr double kTolPsd = 1e-8;
inline constexpr double kTolSym = 1e-9;

struct EigenDecomposition {
  Vector eigenvalues;   // descending, clipped to >= 0
  Matrix eigenvectors;  // orthonormal columns, matching order
};

// Symmetric eigendecomposition with PSD clipping.
EigenDecomposition eigendecompose_psd(const Matrix& m);

// log det(I + scale * M) through a Cholesky factorization; the 0x0 matrix
// gives 0. Falls back to eigenvalue clipping if the direct factorization
// fails, and throws NumericalFailure if that fails too.
double log_det_i_plus(const Matrix& m, double scale);

// tr(sM (sM + I)^-1) = sum_i s*lambda_i / (s*lambda_i + 1).
double effective_dimension(const Matrix& m, double scale);
double effective_dimension_spectrum(const Vector& eigenvalues, double scale);

// U clip(Lambda) U^T for a symmetric M.
Matrix psd_clip(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = kTolSym);

}  // namespace adpp
