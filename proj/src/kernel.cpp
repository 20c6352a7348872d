#include "adpp/kernel.hpp"

#include <cmath>

#include "adpp/errors.hpp"

namespace adpp {

namespace {
constexpr double kKappaSlack = 1e-9;
}

KernelFunction kernel_function_from_name(const std::string& name) {
  if (name == "rbf") return KernelFunction::Rbf;
  if (name == "linear") return KernelFunction::Linear;
  if (name == "cosine") return KernelFunction::Cosine;
  throw ConfigError("unknown kernel function: " + name);
}

KernelSource KernelSource::from_explicit(Matrix l, ItemIndex explicit_cap) {
  if (l.rows() != l.cols()) throw ConfigError("explicit kernel must be square");
  if (l.rows() > explicit_cap)
    throw ConfigError("explicit kernel exceeds the configured cap of " +
                      std::to_string(explicit_cap) + " items");
  if (!is_symmetric(l)) throw NumericalFailure("explicit kernel is not symmetric");
  l = ((l + l.transpose()) * 0.5).eval();  // exact symmetry for entry reads

  KernelSource src;
  src.explicit_ = true;
  src.n_ = l.rows();
  src.kappa_sq_ = l.size() == 0 ? 1.0 : std::max(l.cwiseAbs().maxCoeff(), 1e-300);
  src.dense_ = std::move(l);
  return src;
}

KernelSource KernelSource::from_features(Matrix points, KernelFunction f, double sigma) {
  KernelSource src;
  src.explicit_ = false;
  src.n_ = points.rows();
  src.func_ = f;
  src.sigma_ = sigma;
  src.sq_norms_ = points.rowwise().squaredNorm();
  switch (f) {
    case KernelFunction::Rbf:
      if (!(sigma > 0.0)) throw ConfigError("rbf kernel requires sigma > 0");
      src.kappa_sq_ = 1.0;
      break;
    case KernelFunction::Cosine: {
      src.kappa_sq_ = 1.0;
      src.inv_norms_ = Vector(src.n_);
      for (ItemIndex i = 0; i < src.n_; ++i) {
        const double nrm = std::sqrt(src.sq_norms_(i));
        src.inv_norms_(i) = nrm > 0.0 ? 1.0 / nrm : 0.0;
      }
      break;
    }
    case KernelFunction::Linear:
      src.kappa_sq_ = src.n_ == 0 ? 1.0 : std::max(src.sq_norms_.maxCoeff(), 1e-300);
      break;
  }
  src.points_ = std::move(points);
  return src;
}

void KernelSource::check_range(ItemIndex i) const {
  if (i < 0 || i >= n_) throw ConfigError("item index " + std::to_string(i) + " out of range");
}

double KernelSource::raw_entry(ItemIndex i, ItemIndex j) const {
  if (explicit_) return dense_(i, j);
  if (i > j) std::swap(i, j);  // canonical order keeps feature kernels exactly symmetric
  switch (func_) {
    case KernelFunction::Rbf: {
      const double d2 = sq_norms_(i) + sq_norms_(j) - 2.0 * points_.row(i).dot(points_.row(j));
      return std::exp(-std::max(0.0, d2) / (2.0 * sigma_ * sigma_));
    }
    case KernelFunction::Linear:
      return points_.row(i).dot(points_.row(j));
    case KernelFunction::Cosine:
      return points_.row(i).dot(points_.row(j)) * inv_norms_(i) * inv_norms_(j);
  }
  return 0.0;
}

double KernelSource::entry(ItemIndex i, ItemIndex j) const {
  check_range(i);
  check_range(j);
  const double v = raw_entry(i, j);
  if (std::fabs(v) > kappa_sq_ * (1.0 + kKappaSlack))
    throw KappaBoundViolated("kernel entry (" + std::to_string(i) + "," + std::to_string(j) +
                             ") = " + std::to_string(v) + " exceeds kappa^2 = " +
                             std::to_string(kappa_sq_));
  return v;
}

Matrix KernelSource::block(std::span<const ItemIndex> rows, std::span<const ItemIndex> cols) const {
  Matrix b(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t c = 0; c < cols.size(); ++c) b(a, c) = entry(rows[a], cols[c]);
  return b;
}

void KernelSource::column(std::span<const ItemIndex> rows, ItemIndex j, double* out) const {
  for (std::size_t a = 0; a < rows.size(); ++a) out[a] = entry(rows[a], j);
}

Matrix KernelSource::materialize() const {
  if (explicit_) return dense_;
  Matrix l(n_, n_);
  for (ItemIndex i = 0; i < n_; ++i)
    for (ItemIndex j = 0; j <= i; ++j) {
      const double v = raw_entry(i, j);
      l(i, j) = v;
      l(j, i) = v;
    }
  return l;
}

double KernelSource::trace() const {
  double acc = 0.0;
  for (ItemIndex i = 0; i < n_; ++i) acc += raw_entry(i, i);
  return acc;
}

}  // namespace adpp
