#pragma once

#include <span>
#include <string>
#include <vector>

#include "adpp/linalg.hpp"

namespace adpp {

enum class KernelFunction { Rbf, Linear, Cosine };

KernelFunction kernel_function_from_name(const std::string& name);

// Similarity-matrix abstraction. Entries are served on demand; the full n x n
// matrix is materialized only in explicit mode, which is capped so the
// sublinear paths never depend on it. Immutable after construction and safe
// for concurrent reads.
//
// Every entry is bounded: |L_ij| <= kappa_sq. RBF and cosine declare
// kappa_sq = 1 exactly; the linear kernel declares max_i ||x_i||^2.
class KernelSource {
 public:
  static KernelSource from_explicit(Matrix l, ItemIndex explicit_cap = kDefaultExplicitCap);
  // points: one row per item.
  static KernelSource from_features(Matrix points, KernelFunction f, double sigma = 1.0);

  ItemIndex n() const { return n_; }
  double kappa_sq() const { return kappa_sq_; }

  // L_ij, with the opportunistic kappa^2 check.
  double entry(ItemIndex i, ItemIndex j) const;
  double diagonal(ItemIndex i) const { return entry(i, i); }

  // Block with multiset semantics: duplicated indices yield duplicated
  // rows/columns.
  Matrix block(std::span<const ItemIndex> rows, std::span<const ItemIndex> cols) const;

  // Column L_{rows, j} as a vector (hot path for marginal computation).
  void column(std::span<const ItemIndex> rows, ItemIndex j, double* out) const;

  bool is_explicit() const { return explicit_; }
  // Dense n x n matrix; explicit mode returns the stored matrix, feature mode
  // materializes (intended for small-n oracles only).
  Matrix materialize() const;

  double trace() const;

  static constexpr ItemIndex kDefaultExplicitCap = 20000;

 private:
  KernelSource() = default;
  double raw_entry(ItemIndex i, ItemIndex j) const;
  void check_range(ItemIndex i) const;

  bool explicit_ = false;
  ItemIndex n_ = 0;
  double kappa_sq_ = 1.0;
  Matrix dense_;        // explicit mode
  Matrix points_;       // feature mode, n x d
  Vector sq_norms_;     // cached ||x_i||^2
  Vector inv_norms_;    // cosine: 1/||x_i||, 0 for zero vectors
  KernelFunction func_ = KernelFunction::Rbf;
  double sigma_ = 1.0;
};

}  // namespace adpp
