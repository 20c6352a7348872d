#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "adpp/dictionary.hpp"
#include "adpp/kernel.hpp"
#include "adpp/parallel.hpp"
#include "adpp/random.hpp"

namespace adpp {

// The three strictly equivalent proposal mechanisms. Uniform is the
// production path; the per-item reformulations exist as alternate backends
// for equivalence testing and for the dense regime.
enum class ProposalBackend { Uniform, PoissonPerItem, BinomialPerItem };

struct AlphaSamplerConfig {
  double alpha = 1.0;
  double r = 1.0;                // proposal oversampling, >= 1
  int max_rejections = 64;       // consecutive rejections before doubling r
  bool r_doubling = true;
  bool dense_proposal = false;   // opt-in: propose with PoissonPerItem instead
  ExecMode exec = ExecMode::Parallel;
};

// Per-draw statistics.
struct SampleTrace {
  std::int64_t loop_iterations = 0;
  std::vector<std::int64_t> u_values;
  std::vector<std::int64_t> t_values;
  std::vector<double> accept_log_ratios;
  std::vector<double> r_history;
  std::int64_t observed_items = 0;  // distinct marginals computed this draw
  double beta = 0.0;                // observed_items / n
  double seconds_proposal = 0.0;
  double seconds_acceptance = 0.0;
  double seconds_finish = 0.0;
};

std::string trace_to_json(const SampleTrace& trace);

// One proposed multiset sigma with its marginals (aligned with sigma).
struct IntermediateSample {
  std::vector<ItemIndex> sigma;
  std::vector<double> marginals;
  std::int64_t u_draw = 0;

  int t() const { return static_cast<int>(sigma.size()); }
};

// Rejection sampler for DPP(alpha L): uniform intermediate sample, cached
// approximate marginals, determinant-ratio acceptance, exact finisher. The
// output law is exactly DPP(alpha L) for any dictionary; the dictionary only
// affects the rejection rate. Item-level randomness is counter-based keyed by
// (draw, iteration, item slot), so serial and parallel execution consume
// identical randomness.
class RescaledDppSampler {
 public:
  RescaledDppSampler(const KernelSource& src, Dictionary dict, AlphaSamplerConfig cfg);
  RescaledDppSampler(const KernelSource& src, std::shared_ptr<const DictionaryCore> core,
                     AlphaSamplerConfig cfg);

  std::pair<std::vector<ItemIndex>, SampleTrace> sample(RandomStream& rng);
  // Test-only reformulations; identical output law.
  std::pair<std::vector<ItemIndex>, SampleTrace> sample_backend_b(RandomStream& rng);
  std::pair<std::vector<ItemIndex>, SampleTrace> sample_backend_c(RandomStream& rng);

  // One pre-acceptance proposal (exposed for backend-equivalence tests).
  IntermediateSample propose(ProposalBackend backend, RandomStream& rng);

  // s_tilde - t/r + logdet(I + a L~_sigma) - logdet(I + a L^), mathematically
  // <= 0; the caller exponentiates and clamps.
  double acceptance_log_ratio(const IntermediateSample& proposal) const;

  // L~_sigma with entries L[sigma_i, sigma_j] / (r sqrt(l_i l_j)).
  Matrix rescaled_submatrix(const IntermediateSample& proposal) const;

  double s_tilde() const { return s_tilde_; }
  double log_det_i_alpha_lhat() const { return logdet_lhat_; }
  double current_r() const { return r_; }
  double alpha() const { return cfg_.alpha; }
  const MarginalCache& cache() const { return cache_; }
  const DictionaryCore& core() const { return *core_; }
  std::int64_t ratio_overshoot_warnings() const { return ratio_overshoot_; }

 private:
  std::pair<std::vector<ItemIndex>, SampleTrace> sample_with(ProposalBackend backend,
                                                             RandomStream& rng);
  void check_intensity() const;

  const KernelSource* src_;
  std::shared_ptr<const DictionaryCore> core_;
  AlphaSamplerConfig cfg_;
  double r_;
  double s_tilde_ = 0.0;
  double logdet_lhat_ = 0.0;
  MarginalCache cache_;
  std::uint64_t draw_counter_ = 0;
  std::int64_t ratio_overshoot_ = 0;
};

// One-shot convenience wrapper.
std::pair<std::vector<ItemIndex>, SampleTrace> sample_rescaled_dpp(const KernelSource& src,
                                                                   Dictionary dict,
                                                                   const AlphaSamplerConfig& cfg,
                                                                   RandomStream& rng);

}  // namespace adpp
