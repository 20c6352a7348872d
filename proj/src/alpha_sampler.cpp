#include "adpp/alpha_sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "adpp/dpp_exact.hpp"
#include "adpp/errors.hpp"

namespace adpp {

using nlohmann::json;

namespace {

constexpr double kIntensityCap = 2147483648.0;  // 2^31
constexpr double kRatioSlack = 1e-6;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string trace_to_json(const SampleTrace& trace) {
  json j;
  j["iterations"] = trace.loop_iterations;
  j["u_values"] = trace.u_values;
  j["t_values"] = trace.t_values;
  j["beta"] = trace.beta;
  j["accept_log_ratios"] = trace.accept_log_ratios;
  j["r_history"] = trace.r_history;
  return j.dump();
}

RescaledDppSampler::RescaledDppSampler(const KernelSource& src, Dictionary dict,
                                       AlphaSamplerConfig cfg)
    : RescaledDppSampler(src, std::make_shared<const DictionaryCore>(src, std::move(dict)), cfg) {}

RescaledDppSampler::RescaledDppSampler(const KernelSource& src,
                                       std::shared_ptr<const DictionaryCore> core,
                                       AlphaSamplerConfig cfg)
    : src_(&src),
      core_(std::move(core)),
      cfg_(cfg),
      r_(cfg.r),
      cache_(src.n(), cfg.alpha * src.kappa_sq()) {
  if (!(cfg_.alpha > 0.0)) throw ConfigError("alpha sampler requires alpha > 0");
  if (!(r_ >= 1.0)) throw ConfigError("alpha sampler requires r >= 1");
  s_tilde_ = core_->s_tilde(cfg_.alpha);
  logdet_lhat_ = core_->log_det_i_alpha_lhat(cfg_.alpha);
  check_intensity();
}

void RescaledDppSampler::check_intensity() const {
  const double intensity =
      r_ * std::exp(1.0 / r_) * cfg_.alpha * static_cast<double>(src_->n()) * src_->kappa_sq();
  if (!(intensity <= kIntensityCap))
    throw ConfigError("uniform proposal intensity " + std::to_string(intensity) +
                      " exceeds 2^31; lower alpha or r");
}

IntermediateSample RescaledDppSampler::propose(ProposalBackend backend, RandomStream& rng) {
  const double alpha = cfg_.alpha;
  const double cap = alpha * src_->kappa_sq();
  const ItemIndex n = src_->n();
  const std::uint64_t iter_seed = rng.next_u64();

  IntermediateSample out;
  switch (backend) {
    case ProposalBackend::Uniform: {
      check_intensity();
      const double intensity = r_ * std::exp(1.0 / r_) * alpha * static_cast<double>(n) *
                               src_->kappa_sq();
      const long long u = rng.poisson(intensity);
      out.u_draw = u;
      std::vector<ItemIndex> rho(static_cast<std::size_t>(u));
      for (long long j = 0; j < u; ++j)
        rho[static_cast<std::size_t>(j)] =
            static_cast<ItemIndex>(rng.uniform_index(static_cast<std::uint64_t>(n)));
      core_->marginals_batch(alpha, rho, cache_, cfg_.exec);
      for (long long j = 0; j < u; ++j) {
        const ItemIndex item = rho[static_cast<std::size_t>(j)];
        const double l = cache_.get(item);
        RandomStream z = RandomStream::keyed(iter_seed, static_cast<std::uint64_t>(j), 0x21u);
        if (z.bernoulli(l / cap)) {
          out.sigma.push_back(item);
          out.marginals.push_back(l);
        }
      }
      break;
    }
    case ProposalBackend::PoissonPerItem: {
      std::vector<ItemIndex> all(static_cast<std::size_t>(n));
      for (ItemIndex i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
      core_->marginals_batch(alpha, all, cache_, cfg_.exec);
      const double scale = r_ * std::exp(1.0 / r_);
      long long total_u = 0;
      for (ItemIndex i = 0; i < n; ++i) {
        const double l = cache_.get(i);
        RandomStream s = RandomStream::keyed(iter_seed, static_cast<std::uint64_t>(i), 0x5u);
        const long long copies = l > 0.0 ? s.poisson(scale * l) : 0;
        total_u += copies;
        for (long long c = 0; c < copies; ++c) {
          out.sigma.push_back(i);
          out.marginals.push_back(l);
        }
      }
      out.u_draw = total_u;
      break;
    }
    case ProposalBackend::BinomialPerItem: {
      const double per_item = r_ * std::exp(1.0 / r_) * cap;
      // First pass fixes u_i from the keyed streams, so the marginal batch for
      // the touched items can run in parallel before any thinning draw.
      std::vector<long long> u_i(static_cast<std::size_t>(n), 0);
      std::vector<ItemIndex> touched;
      long long total_u = 0;
      for (ItemIndex i = 0; i < n; ++i) {
        RandomStream s = RandomStream::keyed(iter_seed, static_cast<std::uint64_t>(i), 0xBu);
        const long long u = s.poisson(per_item);
        u_i[static_cast<std::size_t>(i)] = u;
        total_u += u;
        if (u > 0) touched.push_back(i);
      }
      out.u_draw = total_u;
      core_->marginals_batch(alpha, touched, cache_, cfg_.exec);
      for (const ItemIndex i : touched) {
        const double l = cache_.get(i);
        RandomStream s = RandomStream::keyed(iter_seed, static_cast<std::uint64_t>(i), 0xB15u);
        long long copies = 0;
        for (long long trial = 0; trial < u_i[static_cast<std::size_t>(i)]; ++trial)
          if (s.bernoulli(l / cap)) ++copies;
        for (long long c = 0; c < copies; ++c) {
          out.sigma.push_back(i);
          out.marginals.push_back(l);
        }
      }
      break;
    }
  }
  return out;
}

Matrix RescaledDppSampler::rescaled_submatrix(const IntermediateSample& proposal) const {
  const int t = proposal.t();
  Matrix block = src_->block(proposal.sigma, proposal.sigma);
  for (int a = 0; a < t; ++a)
    for (int b = 0; b < t; ++b)
      block(a, b) /= r_ * std::sqrt(proposal.marginals[static_cast<std::size_t>(a)] *
                                    proposal.marginals[static_cast<std::size_t>(b)]);
  return block;
}

double RescaledDppSampler::acceptance_log_ratio(const IntermediateSample& proposal) const {
  const double t_over_r = static_cast<double>(proposal.t()) / r_;
  const double logdet_sigma =
      proposal.t() == 0 ? 0.0 : log_det_i_plus(rescaled_submatrix(proposal), cfg_.alpha);
  return s_tilde_ - t_over_r + logdet_sigma - logdet_lhat_;
}

std::pair<std::vector<ItemIndex>, SampleTrace> RescaledDppSampler::sample_with(
    ProposalBackend backend, RandomStream& rng) {
  SampleTrace trace;
  trace.r_history.push_back(r_);
  const std::int64_t observed_before = cache_.distinct_computed();
  ++draw_counter_;

  int consecutive_rejections = 0;
  for (;;) {
    ++trace.loop_iterations;

    auto t0 = std::chrono::steady_clock::now();
    IntermediateSample proposal = propose(backend, rng);
    trace.seconds_proposal += seconds_since(t0);
    trace.u_values.push_back(proposal.u_draw);
    trace.t_values.push_back(proposal.t());

    t0 = std::chrono::steady_clock::now();
    const double log_ratio = acceptance_log_ratio(proposal);
    if (log_ratio > kRatioSlack) ++ratio_overshoot_;
    trace.accept_log_ratios.push_back(log_ratio);
    const bool accepted = rng.bernoulli(std::exp(std::min(0.0, log_ratio)));
    trace.seconds_acceptance += seconds_since(t0);

    if (accepted) {
      t0 = std::chrono::steady_clock::now();
      std::vector<ItemIndex> final_set;
      if (proposal.t() > 0) {
        const Matrix scaled = cfg_.alpha * rescaled_submatrix(proposal);
        const std::vector<ItemIndex> positions = sample_dpp(scaled, rng);
        std::set<ItemIndex> dedup;
        for (const ItemIndex pos : positions)
          dedup.insert(proposal.sigma[static_cast<std::size_t>(pos)]);
        final_set.assign(dedup.begin(), dedup.end());
      }
      trace.seconds_finish += seconds_since(t0);
      trace.observed_items = cache_.distinct_computed() - observed_before;
      trace.beta = static_cast<double>(trace.observed_items) / static_cast<double>(src_->n());
      return {std::move(final_set), std::move(trace)};
    }

    if (++consecutive_rejections >= cfg_.max_rejections) {
      if (cfg_.r_doubling) {
        r_ *= 2.0;
        trace.r_history.push_back(r_);
        consecutive_rejections = 0;
        check_intensity();
      } else {
        trace.observed_items = cache_.distinct_computed() - observed_before;
        trace.beta = static_cast<double>(trace.observed_items) / static_cast<double>(src_->n());
        throw BudgetExhausted("alpha sampler: " + std::to_string(cfg_.max_rejections) +
                                  " consecutive rejections with r doubling disabled",
                              trace_to_json(trace));
      }
    }
  }
}

std::pair<std::vector<ItemIndex>, SampleTrace> RescaledDppSampler::sample(RandomStream& rng) {
  return sample_with(cfg_.dense_proposal ? ProposalBackend::PoissonPerItem
                                         : ProposalBackend::Uniform,
                     rng);
}

std::pair<std::vector<ItemIndex>, SampleTrace> RescaledDppSampler::sample_backend_b(
    RandomStream& rng) {
  return sample_with(ProposalBackend::PoissonPerItem, rng);
}

std::pair<std::vector<ItemIndex>, SampleTrace> RescaledDppSampler::sample_backend_c(
    RandomStream& rng) {
  return sample_with(ProposalBackend::BinomialPerItem, rng);
}

std::pair<std::vector<ItemIndex>, SampleTrace> sample_rescaled_dpp(const KernelSource& src,
                                                                   Dictionary dict,
                                                                   const AlphaSamplerConfig& cfg,
                                                                   RandomStream& rng) {
  RescaledDppSampler sampler(src, std::move(dict), cfg);
  return sampler.sample(rng);
}

}  // namespace adpp
