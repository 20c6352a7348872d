#include "adpp/dictionary.hpp"

#include <omp.h>

#include <cmath>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "adpp/errors.hpp"

namespace adpp {

using nlohmann::json;

Dictionary Dictionary::full(ItemIndex n) {
  Dictionary d;
  d.indices.resize(static_cast<std::size_t>(n));
  std::iota(d.indices.begin(), d.indices.end(), ItemIndex{0});
  d.weights.assign(static_cast<std::size_t>(n), 1.0);
  return d;
}

std::string dictionary_to_json(const Dictionary& dict, double alpha, double q) {
  json j;
  j["alpha"] = alpha;
  j["indices"] = dict.indices;
  j["weights"] = dict.weights;
  j["q"] = q;
  return j.dump();
}

Dictionary dictionary_from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  Dictionary d;
  d.indices = j.at("indices").get<std::vector<ItemIndex>>();
  d.weights = j.at("weights").get<std::vector<double>>();
  return d;
}

MarginalCache::MarginalCache(ItemIndex n, double upper_bound)
    : upper_(upper_bound),
      values_(static_cast<std::size_t>(n), upper_bound),
      owned_flags_(new std::atomic<std::uint8_t>[static_cast<std::size_t>(n)]),
      flags_(owned_flags_.get()) {
  for (ItemIndex i = 0; i < n; ++i) flags_[static_cast<std::size_t>(i)].store(0, std::memory_order_relaxed);
}

void MarginalCache::put(ItemIndex i, double value) {
  const auto idx = static_cast<std::size_t>(i);
  values_[idx] = value;
  std::uint8_t expected = 0;
  if (flags_[idx].compare_exchange_strong(expected, 1, std::memory_order_release))
    computed_.fetch_add(1, std::memory_order_relaxed);
}

namespace {

void validate_dictionary(const Dictionary& dict, ItemIndex n) {
  if (dict.m() == 0) throw EmptyDictionary("dictionary has no elements");
  if (dict.indices.size() != dict.weights.size())
    throw ConfigError("dictionary index/weight length mismatch");
  std::set<ItemIndex> seen;
  for (std::size_t j = 0; j < dict.indices.size(); ++j) {
    const ItemIndex i = dict.indices[j];
    if (i < 0 || i >= n) throw ConfigError("dictionary index out of range");
    if (!seen.insert(i).second) throw ConfigError("dictionary contains duplicate indices");
    if (!(dict.weights[j] > 0.0)) throw ConfigError("dictionary weights must be positive");
  }
}

constexpr double kOvershootSlack = 1e-6;
constexpr double kNegativeFloor = -1e-6;

}  // namespace

Matrix compressed_matrix(const KernelSource& src, const Dictionary& dict) {
  validate_dictionary(dict, src.n());
  const int m = dict.m();
  Matrix ldd = src.block(dict.indices, dict.indices);
  Vector sqrt_w(m);
  for (int j = 0; j < m; ++j) sqrt_w(j) = std::sqrt(dict.weights[static_cast<std::size_t>(j)]);
  Matrix lhat = sqrt_w.asDiagonal() * ldd * sqrt_w.asDiagonal();
  return ((lhat + lhat.transpose()) * 0.5).eval();
}

DictionaryCore::DictionaryCore(const KernelSource& src, Dictionary dict)
    : src_(&src), dict_(std::move(dict)) {
  validate_dictionary(dict_, src.n());
  ldd_ = src.block(dict_.indices, dict_.indices);
  ldd_ = ((ldd_ + ldd_.transpose()) * 0.5).eval();
  inv_w_ = Vector(dict_.m());
  for (int j = 0; j < dict_.m(); ++j) inv_w_(j) = 1.0 / dict_.weights[static_cast<std::size_t>(j)];
}

std::shared_ptr<const DictionaryCore::AlphaFactor> DictionaryCore::factor(double alpha) const {
  if (!(alpha > 0.0)) throw ConfigError("dictionary core requires alpha > 0");
  {
    std::lock_guard<std::mutex> lock(factor_mutex_);
    const auto it = factors_.find(alpha);
    if (it != factors_.end()) return it->second;
  }

  const int m = dict_.m();
  auto built = std::make_shared<AlphaFactor>();
  built->alpha = alpha;
  Matrix c = alpha * ldd_;
  c.diagonal() += inv_w_;
  built->llt.compute(c);
  if (built->llt.info() != Eigen::Success) {
    c = alpha * psd_clip(ldd_);
    c.diagonal() += inv_w_;
    built->llt.compute(c);
    if (built->llt.info() != Eigen::Success)
      throw NumericalFailure("dictionary core is not positive definite after clipping");
  }

  // logdet(I + a L_hat) = logdet(C) + sum_j log w_j.
  double logdet_c = 0.0;
  for (int j = 0; j < m; ++j) logdet_c += std::log(built->llt.matrixLLT()(j, j));
  logdet_c *= 2.0;
  double log_w = 0.0;
  for (int j = 0; j < m; ++j) log_w += std::log(dict_.weights[static_cast<std::size_t>(j)]);
  built->log_det = logdet_c + log_w;

  // d_eff(a L_hat) = m - tr(C^-1 W^-1).
  const Matrix inv_c = built->llt.solve(Matrix::Identity(m, m));
  double trace = 0.0;
  for (int j = 0; j < m; ++j) trace += inv_c(j, j) * inv_w_(j);
  built->s_tilde = static_cast<double>(m) - trace;

  std::lock_guard<std::mutex> lock(factor_mutex_);
  return factors_.try_emplace(alpha, std::move(built)).first->second;
}

double DictionaryCore::marginal(const AlphaFactor& factor, ItemIndex i) const {
  const double alpha = factor.alpha;
  const int m = dict_.m();
  Vector g(m);
  src_->column(dict_.indices, i, g.data());
  const Vector y = factor.llt.matrixL().solve(g);
  const double raw = alpha * src_->diagonal(i) - alpha * alpha * y.squaredNorm();
  const double cap = alpha * src_->kappa_sq();
  if (raw < kNegativeFloor)
    throw NumericalFailure("approximate marginal for item " + std::to_string(i) +
                           " is negative beyond tolerance: " + std::to_string(raw));
  if (raw > cap * (1.0 + kOvershootSlack)) overshoot_.fetch_add(1, std::memory_order_relaxed);
  return std::min(std::max(raw, 0.0), cap);
}

double DictionaryCore::marginal(double alpha, ItemIndex i) const {
  return marginal(*factor(alpha), i);
}

void DictionaryCore::marginals_batch(double alpha, std::span<const ItemIndex> items,
                                     MarginalCache& cache, ExecMode mode) const {
  // Distinct misses, preserving first-seen order.
  std::vector<ItemIndex> todo;
  todo.reserve(items.size());
  {
    std::set<ItemIndex> seen;
    for (const ItemIndex i : items) {
      if (cache.has(i)) {
        cache.count_hit();
        continue;
      }
      if (seen.insert(i).second) todo.push_back(i);
      cache.count_miss();
    }
  }
  if (todo.empty()) return;
  const std::shared_ptr<const AlphaFactor> f = factor(alpha);
  if (mode == ExecMode::Parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(todo.size()); ++t) {
      try {
        const ItemIndex i = todo[static_cast<std::size_t>(t)];
        cache.put(i, marginal(*f, i));
      } catch (...) {
#pragma omp critical(adpp_marginal_failure)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (const ItemIndex i : todo) cache.put(i, marginal(*f, i));
  }
}

int hardware_threads() { return omp_get_max_threads(); }

bool certify_accuracy(const KernelSource& src, const Dictionary& dict, double alpha, double eps,
                      ItemIndex n_cap) {
  if (!(alpha > 0.0) || eps < 0.0) throw ConfigError("certify_accuracy: invalid parameters");
  if (src.n() > n_cap)
    throw Unsupported("certify_accuracy: n = " + std::to_string(src.n()) +
                      " above the certification cap " + std::to_string(n_cap));
  const ItemIndex n = src.n();
  const Matrix l = src.materialize();
  const EigenDecomposition eig = eigendecompose_psd(l);

  // Feature map Phi = Lambda^1/2 U^T; columns are phi(i), Phi^T Phi = L.
  Matrix phi = eig.eigenvalues.cwiseSqrt().asDiagonal() * eig.eigenvectors.transpose();

  Matrix a = phi * phi.transpose();  // = U Lambda U^T in feature space coords
  a.diagonal().array() += 1.0 / alpha;
  Matrix b = Matrix::Zero(n, n);
  for (std::size_t j = 0; j < dict.indices.size(); ++j) {
    const Vector col = phi.col(dict.indices[j]);
    b += dict.weights[j] * (col * col.transpose());
  }
  b.diagonal().array() += 1.0 / alpha;

  // Extreme generalized eigenvalues of (B, A).
  const EigenDecomposition ea = eigendecompose_psd((a + a.transpose()) * 0.5);
  Vector inv_sqrt = ea.eigenvalues;
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i) {
    if (!(ea.eigenvalues(i) > 0.0))
      throw NumericalFailure("certify_accuracy: singular reference operator");
    inv_sqrt(i) = 1.0 / std::sqrt(ea.eigenvalues(i));
  }
  const Matrix whiten = ea.eigenvectors * inv_sqrt.asDiagonal() * ea.eigenvectors.transpose();
  const Matrix mid = whiten * ((b + b.transpose()) * 0.5) * whiten;
  Eigen::SelfAdjointEigenSolver<Matrix> solver((mid + mid.transpose()) * 0.5);
  if (solver.info() != Eigen::Success)
    throw NumericalFailure("certify_accuracy: eigensolver failed");
  const double lo = solver.eigenvalues().minCoeff();
  const double hi = solver.eigenvalues().maxCoeff();
  constexpr double kFpSlack = 1e-9;
  return lo >= 1.0 - eps - kFpSlack && hi <= 1.0 + eps + kFpSlack;
}

}  // namespace adpp
