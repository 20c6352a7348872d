#include "adpp/kdpp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "adpp/errors.hpp"

namespace adpp {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

BinarySearchResult binary_search_alpha(const DppOracle& oracle, const SearchInterval& interval,
                                       int k, const BinarySearchConfig& cfg, RandomStream& rng) {
  if (!(interval.alpha_min > 0.0) || !(interval.alpha_max >= interval.alpha_min))
    throw ConfigError("binary_search_alpha: invalid interval");
  if (k < 1) throw ConfigError("binary_search_alpha: k must be positive");
  if (!(cfg.c > 0.0 && cfg.c < 1.0) || !(cfg.C > 0.0) || !(cfg.delta > 0.0 && cfg.delta < 1.0))
    throw ConfigError("binary_search_alpha: invalid constants");

  double lo = interval.alpha_min;
  double hi = interval.alpha_max;
  const double gamma = hi / lo;
  const double kd = static_cast<double>(k);
  const double tight = 1.0 + 1.0 / ((kd + 3.0) * (kd + 3.0));
  const double accept_threshold = 0.5 * cfg.c / (12.0 * std::sqrt(3.0 * (kd + 1.0)));

  int max_steps = cfg.max_steps_override;
  if (max_steps < 0)
    max_steps = std::max(1, static_cast<int>(std::ceil(std::log(std::max(gamma, 1.0)))));

  BinarySearchResult result;
  for (int s = 1; s <= max_steps; ++s) {
    if (hi / lo < tight) {
      result.alpha_hat = lo;
      result.exit = SearchExit::TightInterval;
      return result;
    }
    const double mid = std::sqrt(lo * hi);
    const auto t = static_cast<std::int64_t>(std::max(
        1.0, std::ceil(cfg.C * std::sqrt(kd) * std::log(static_cast<double>(s) / cfg.delta))));

    std::int64_t at_k = 0, below_k = 0, above_k = 0;
    for (std::int64_t i = 0; i < t; ++i) {
      const auto size = static_cast<std::int64_t>(oracle(mid, rng).size());
      ++result.oracle_calls;
      if (size == k)
        ++at_k;
      else if (size < k)
        ++below_k;
      else
        ++above_k;
    }
    result.steps = s;

    if (static_cast<double>(at_k) / static_cast<double>(t) >= accept_threshold) {
      result.alpha_hat = mid;
      result.exit = SearchExit::FrequencyThreshold;
      return result;
    }
    if (below_k > above_k)
      lo = mid;
    else
      hi = mid;
  }
  // Exactness of the downstream size rejection does not depend on the
  // returned rescaling, so fall back rather than fail.
  result.alpha_hat = lo;
  result.low_confidence = true;
  result.exit = SearchExit::Exhausted;
  return result;
}

std::vector<ItemIndex> rejection_sample_size_k(
    const std::function<std::vector<ItemIndex>(RandomStream&)>& draw_once, int k,
    std::int64_t patience, RandomStream& rng, std::int64_t* rejections) {
  for (std::int64_t attempt = 0; attempt < patience; ++attempt) {
    std::vector<ItemIndex> s = draw_once(rng);
    if (static_cast<int>(s.size()) == k) {
      std::sort(s.begin(), s.end());
      return s;
    }
    if (rejections) ++(*rejections);
  }
  throw InfeasibleSize("size rejection: no size-" + std::to_string(k) + " sample within " +
                       std::to_string(patience) + " draws (k may exceed the kernel rank)");
}

KdppPipeline::KdppPipeline(const KernelSource& src, int k, KdppConfig cfg, RandomStream& rng)
    : src_(&src), k_(k), cfg_(cfg), observed_(src.n()) {
  const ItemIndex n = src.n();
  if (k < 1 || static_cast<ItemIndex>(k) > n)
    throw ConfigError("sample_kdpp: k must satisfy 1 <= k <= n");

  if (static_cast<ItemIndex>(k) == n) {
    // Only one subset of size n exists.
    trivial_ = true;
    bless_.interval.alpha_min = bless_.interval.alpha_max = 1.0;
    search_.alpha_hat = 1.0;
    return;
  }

  auto t0 = std::chrono::steady_clock::now();
  bless_ = bless_i(src, k, cfg_.bless, rng, &observed_);
  seconds_bless_ = seconds_since(t0);
  core_ = std::make_shared<const DictionaryCore>(src, bless_.dictionary);

  t0 = std::chrono::steady_clock::now();
  const DppOracle oracle = [this](double alpha, RandomStream& r) {
    return sampler_at(alpha).sample(r).first;
  };
  search_ = binary_search_alpha(oracle, bless_.interval, k_, cfg_.search, rng);
  seconds_search_ = seconds_since(t0);
}

RescaledDppSampler& KdppPipeline::sampler_at(double alpha) {
  auto it = samplers_.find(alpha);
  if (it == samplers_.end()) {
    AlphaSamplerConfig scfg;
    scfg.alpha = alpha;
    scfg.r = cfg_.r > 0.0 ? cfg_.r : std::max(1.0, bless_.deff_alpha_max);
    scfg.max_rejections = cfg_.max_rejections;
    scfg.r_doubling = cfg_.r_doubling;
    scfg.exec = cfg_.exec;
    it = samplers_.emplace(alpha, std::make_unique<RescaledDppSampler>(*src_, core_, scfg)).first;
  }
  return *it->second;
}

void KdppPipeline::absorb_observed(const RescaledDppSampler& sampler) {
  const ItemIndex n = src_->n();
  for (ItemIndex i = 0; i < n; ++i)
    if (sampler.cache().has(i)) observed_.mark(i);
}

std::vector<ItemIndex> KdppPipeline::draw(RandomStream& rng, SampleTrace* trace,
                                          std::int64_t* size_rejections) {
  if (trivial_) {
    std::vector<ItemIndex> all(static_cast<std::size_t>(src_->n()));
    std::iota(all.begin(), all.end(), ItemIndex{0});
    return all;
  }
  RescaledDppSampler& sampler = sampler_at(search_.alpha_hat);
  const auto draw_once = [&](RandomStream& r) {
    auto [subset, t] = sampler.sample(r);
    if (trace) *trace = std::move(t);
    return subset;
  };
  std::vector<ItemIndex> out =
      rejection_sample_size_k(draw_once, k_, cfg_.size_patience, rng, size_rejections);
  absorb_observed(sampler);
  return out;
}

KdppResult sample_kdpp(const KernelSource& src, int k, const KdppConfig& cfg, RandomStream& rng) {
  KdppResult result;
  KdppPipeline pipeline(src, k, cfg, rng);

  const auto t0 = std::chrono::steady_clock::now();
  result.sample = pipeline.draw(rng, &result.trace, &result.size_rejections);
  result.seconds_sampling = seconds_since(t0);

  result.alpha_hat = pipeline.alpha_hat();
  result.search_steps = pipeline.search().steps;
  result.oracle_calls = pipeline.search().oracle_calls;
  result.low_confidence = pipeline.search().low_confidence;
  result.interval = pipeline.interval();
  result.deff_estimate = pipeline.bless().deff_alpha_max;
  result.dictionary_size = pipeline.dictionary_size();
  result.beta = pipeline.beta();
  result.seconds_bless = pipeline.seconds_bless();
  result.seconds_search = pipeline.seconds_search();
  return result;
}

}  // namespace adpp
