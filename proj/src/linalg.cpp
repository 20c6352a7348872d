#include "adpp/linalg.hpp"

#include <cmath>

#include "adpp/errors.hpp"

namespace adpp {

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

EigenDecomposition eigendecompose_psd(const Matrix& m) {
  if (!is_symmetric(m)) throw NumericalFailure("eigendecompose_psd: matrix not symmetric");
  const Eigen::Index n = m.rows();
  if (n == 0) return {Vector(0), Matrix(0, 0)};

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("eigendecompose_psd: eigensolver did not converge");

  Vector evals = solver.eigenvalues();  // ascending
  Matrix evecs = solver.eigenvectors();
  const double lam_max = std::max(0.0, evals(n - 1));
  const double floor = -kTolPsd * std::max(lam_max, 1e-300);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (evals(i) < floor)
      throw NumericalFailure("eigendecompose_psd: matrix is not PSD (eigenvalue " +
                             std::to_string(evals(i)) + " below clip threshold)");
    if (evals(i) < 0.0) evals(i) = 0.0;
  }

  EigenDecomposition out;
  out.eigenvalues = evals.reverse();
  out.eigenvectors = evecs.rowwise().reverse();
  return out;
}

Matrix psd_clip(const Matrix& m) {
  if (m.size() == 0) return m;
  EigenDecomposition d = eigendecompose_psd(m);
  return d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
}

double log_det_i_plus(const Matrix& m, double scale) {
  const Eigen::Index n = m.rows();
  if (n == 0) return 0.0;
  if (!is_symmetric(m)) throw NumericalFailure("log_det_i_plus: matrix not symmetric");

  auto try_cholesky = [n](const Matrix& a) -> std::pair<bool, double> {
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) return {false, 0.0};
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) acc += std::log(llt.matrixL()(i, i));
    return {true, 2.0 * acc};
  };

  Matrix shifted = scale * m;
  shifted.diagonal().array() += 1.0;
  auto [ok, value] = try_cholesky(shifted);
  if (ok) return value;

  // Retry on the PSD-clipped input.
  Matrix clipped = scale * psd_clip(m);
  clipped.diagonal().array() += 1.0;
  auto [ok2, value2] = try_cholesky(clipped);
  if (ok2) return value2;
  throw NumericalFailure("log_det_i_plus: factorization failed after PSD clipping");
}

double effective_dimension_spectrum(const Vector& eigenvalues, double scale) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    const double sl = scale * std::max(0.0, eigenvalues(i));
    acc += sl / (sl + 1.0);
  }
  return acc;
}

double effective_dimension(const Matrix& m, double scale) {
  if (m.size() == 0 || scale == 0.0) return 0.0;
  return effective_dimension_spectrum(eigendecompose_psd(m).eigenvalues, scale);
}

}  // namespace adpp
