#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "adpp/alpha_sampler.hpp"
#include "adpp/bless.hpp"
#include "adpp/kernel.hpp"
#include "adpp/random.hpp"

namespace adpp {

struct BinarySearchConfig {
  double c = 0.25;   // mode-probability constant, calibrated empirically
  double C = 4.0;    // per-step sample-count constant
  double delta = 0.1;
  int max_steps_override = -1;  // < 0: ceil(log(alpha_max / alpha_min))
};

enum class SearchExit {
  TightInterval,       // ratio fell below 1 + 1/(k+3)^2
  FrequencyThreshold,  // observed size-k frequency cleared the bar
  Exhausted,           // loop bound hit; alpha_min returned, low confidence
};

struct BinarySearchResult {
  double alpha_hat = 0.0;
  int steps = 0;
  std::int64_t oracle_calls = 0;
  bool low_confidence = false;  // loop bound exhausted without a confident exit
  SearchExit exit = SearchExit::TightInterval;
};

using DppOracle = std::function<std::vector<ItemIndex>(double alpha, RandomStream& rng)>;

// Binary search over the rescaling in log-scale: geometric midpoints, an
// early exit once the interval is tight or the observed size-k frequency is
// large enough, and branching on which side of k the sample sizes fall.
BinarySearchResult binary_search_alpha(const DppOracle& oracle, const SearchInterval& interval,
                                       int k, const BinarySearchConfig& cfg, RandomStream& rng);

// Repeatedly draws from `draw_once` until the sample has exactly k elements.
std::vector<ItemIndex> rejection_sample_size_k(
    const std::function<std::vector<ItemIndex>(RandomStream&)>& draw_once, int k,
    std::int64_t patience, RandomStream& rng, std::int64_t* rejections = nullptr);

struct KdppConfig {
  BlessConfig bless;
  BinarySearchConfig search;
  double r = 0.0;  // <= 0 picks max(1, dhat at alpha_max)
  int max_rejections = 64;
  bool r_doubling = true;
  std::int64_t size_patience = 10000;
  ExecMode exec = ExecMode::Parallel;
};

struct KdppResult {
  std::vector<ItemIndex> sample;
  double alpha_hat = 0.0;
  int search_steps = 0;
  std::int64_t oracle_calls = 0;
  std::int64_t size_rejections = 0;
  bool low_confidence = false;
  SearchInterval interval;
  double deff_estimate = 0.0;
  std::int64_t dictionary_size = 0;
  double beta = 0.0;  // fraction of items observed across all phases
  SampleTrace trace;  // trace of the returned draw
  double seconds_bless = 0.0;
  double seconds_search = 0.0;
  double seconds_sampling = 0.0;
};

// Reusable end-to-end state: dictionary + interval construction and the
// rescaling search run once, then any number of exact k-DPP draws.
class KdppPipeline {
 public:
  KdppPipeline(const KernelSource& src, int k, KdppConfig cfg, RandomStream& rng);

  std::vector<ItemIndex> draw(RandomStream& rng, SampleTrace* trace = nullptr,
                              std::int64_t* size_rejections = nullptr);

  double alpha_hat() const { return search_.alpha_hat; }
  const BinarySearchResult& search() const { return search_; }
  const BlessResult& bless() const { return bless_; }
  const SearchInterval& interval() const { return bless_.interval; }
  double beta() const { return observed_.fraction(); }
  std::int64_t dictionary_size() const { return trivial_ ? 0 : bless_.dictionary.m(); }
  double seconds_bless() const { return seconds_bless_; }
  double seconds_search() const { return seconds_search_; }
  bool trivial_full_set() const { return trivial_; }

 private:
  RescaledDppSampler& sampler_at(double alpha);
  void absorb_observed(const RescaledDppSampler& sampler);

  const KernelSource* src_;
  int k_;
  KdppConfig cfg_;
  bool trivial_ = false;  // k == n
  BlessResult bless_;
  std::shared_ptr<const DictionaryCore> core_;
  BinarySearchResult search_;
  std::map<double, std::unique_ptr<RescaledDppSampler>> samplers_;
  ObservedItems observed_;
  double seconds_bless_ = 0.0;
  double seconds_search_ = 0.0;
};

// End-to-end exact k-DPP sample: BLESS-I, binary search with the rescaled
// sampler as oracle, then size rejection.
KdppResult sample_kdpp(const KernelSource& src, int k, const KdppConfig& cfg, RandomStream& rng);

}  // namespace adpp
