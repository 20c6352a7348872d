#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "adpp/kernel.hpp"
#include "adpp/linalg.hpp"
#include "adpp/parallel.hpp"

namespace adpp {

// Weighted item subset (D, W) defining the Nystrom approximation. Weights are
// stored as W itself; cores use W^-1 = diag(1/w_j).
struct Dictionary {
  std::vector<ItemIndex> indices;
  std::vector<double> weights;
  std::uint64_t generation = 0;

  int m() const { return static_cast<int>(indices.size()); }
  static Dictionary full(ItemIndex n);  // D = [n], W = I
};

std::string dictionary_to_json(const Dictionary& dict, double alpha, double q);
Dictionary dictionary_from_json(const std::string& json_text);

// Per-item marginal cache for a fixed (alpha, dictionary generation). Each
// entry starts as the alpha*kappa^2 upper bound and is lowered to the exact
// Eq.-(1)-style value once computed. Concurrent reads are fine; duplicate
// computations of the same item write identical values.
class MarginalCache {
 public:
  MarginalCache(ItemIndex n, double upper_bound);

  double upper_bound() const { return upper_; }
  bool has(ItemIndex i) const { return flags_[static_cast<std::size_t>(i)].load(std::memory_order_acquire) != 0; }
  double get(ItemIndex i) const { return values_[static_cast<std::size_t>(i)]; }
  void put(ItemIndex i, double value);

  std::int64_t hits() const { return hits_.load(std::memory_order_relaxed); }
  std::int64_t misses() const { return misses_.load(std::memory_order_relaxed); }
  std::int64_t distinct_computed() const { return computed_.load(std::memory_order_relaxed); }
  void count_hit() const { hits_.fetch_add(1, std::memory_order_relaxed); }
  void count_miss() const { misses_.fetch_add(1, std::memory_order_relaxed); }

 private:
  double upper_;
  std::vector<double> values_;
  std::unique_ptr<std::atomic<std::uint8_t>[]> owned_flags_;
  std::atomic<std::uint8_t>* flags_;
  mutable std::atomic<std::int64_t> hits_{0}, misses_{0};
  std::atomic<std::int64_t> computed_{0};
};

// Dictionary factorizations. L_DD is stored once; each rescaling gets a
// Cholesky factor of C = alpha L_DD + W^-1, built on demand and cached, after
// which every marginal costs one O(m^2) triangular solve plus m kernel
// entries. Working with C instead of W^1/2 L_DD W^1/2 keeps the arithmetic
// stable under the extreme weights BLESS can produce. Immutable and
// read-shareable; the factor cache is internally synchronized.
class DictionaryCore {
 public:
  DictionaryCore(const KernelSource& src, Dictionary dict);

  // Per-alpha state: the factorization plus the two compressed-matrix
  // functionals the sampler needs. Note d_eff(a L_hat) = m - tr(C^-1 W^-1)
  // and logdet(I + a L_hat) = logdet(C) + sum_j log w_j.
  struct AlphaFactor {
    double alpha = 0.0;
    Eigen::LLT<Matrix> llt;  // of C, possibly after PSD-clipping L_DD
    double s_tilde = 0.0;
    double log_det = 0.0;
  };

  const Dictionary& dictionary() const { return dict_; }
  int m() const { return dict_.m(); }

  std::shared_ptr<const AlphaFactor> factor(double alpha) const;

  double s_tilde(double alpha) const { return factor(alpha)->s_tilde; }
  double log_det_i_alpha_lhat(double alpha) const { return factor(alpha)->log_det; }

  // Approximate marginal l_i, clamped to [0, alpha * kappa^2]. A pre-clamp
  // value above alpha*kappa^2*(1+1e-6) increments the diagnostics counter; a
  // value below -1e-6 throws NumericalFailure.
  double marginal(double alpha, ItemIndex i) const;
  double marginal(const AlphaFactor& factor, ItemIndex i) const;

  // Cached batch: computes marginals for every item in `items` that is not
  // already in the cache. The parallel path and the serial reference produce
  // identical cache contents.
  void marginals_batch(double alpha, std::span<const ItemIndex> items, MarginalCache& cache,
                       ExecMode mode) const;

  std::int64_t overshoot_warnings() const { return overshoot_.load(std::memory_order_relaxed); }

 private:
  const KernelSource* src_;
  Dictionary dict_;
  Matrix ldd_;
  Vector inv_w_;
  mutable std::mutex factor_mutex_;
  mutable std::map<double, std::shared_ptr<const AlphaFactor>> factors_;
  mutable std::atomic<std::int64_t> overshoot_{0};
};

// L_hat = W^1/2 L_DD W^1/2 (symmetrized).
Matrix compressed_matrix(const KernelSource& src, const Dictionary& dict);

// Test-only spectral-sandwich certificate of (eps, alpha)-accuracy:
//   (1-eps)(I/a + Phi^T Phi) <= I/a + Phi_D^T W Phi_D <= (1+eps)(I/a + Phi^T Phi)
// checked through extreme generalized eigenvalues. The feature map comes from
// an eigendecomposition of the materialized kernel, so n must stay small.
bool certify_accuracy(const KernelSource& src, const Dictionary& dict, double alpha, double eps,
                      ItemIndex n_cap = 2000);

}  // namespace adpp
