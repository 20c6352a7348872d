#include "adpp/bless.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "adpp/errors.hpp"

namespace adpp {

using nlohmann::json;

std::string interval_to_json(const SearchInterval& interval) {
  json levels = json::array();
  for (const auto& [alpha, deff] : interval.deff_by_level)
    levels.push_back({{"alpha", alpha}, {"deff", deff}});
  json j;
  j["alpha_min"] = interval.alpha_min;
  j["alpha_max"] = interval.alpha_max;
  j["deff_by_level"] = levels;
  return j.dump();
}

Dictionary bless_round(const KernelSource& src, const Dictionary& prev, double alpha, double q,
                       double b, RandomStream& rng, ExecMode exec, RoundStats* stats,
                       ObservedItems* observed) {
  if (!(b > 0.0 && b <= 1.0)) throw ConfigError("bless_round: b must be in (0, 1]");
  if (!(q > 0.0)) throw ConfigError("bless_round: q must be positive");
  const ItemIndex n = src.n();
  const DictionaryCore core(src, prev);
  MarginalCache cache(n, alpha * src.kappa_sq());
  const std::uint64_t round_seed = rng.next_u64();

  std::vector<ItemIndex> touched;
  for (ItemIndex j = 0; j < n; ++j) {
    RandomStream gate = RandomStream::keyed(round_seed, static_cast<std::uint64_t>(j), 0x6A7Eu);
    if (gate.bernoulli(b)) touched.push_back(j);
  }
  core.marginals_batch(alpha, touched, cache, exec);

  Dictionary out;
  out.generation = prev.generation + 1;
  for (const ItemIndex j : touched) {
    if (observed) observed->mark(j);
    const double l = cache.get(j);
    const double keep_mass = std::min(q * l, b);
    RandomStream keep = RandomStream::keyed(round_seed, static_cast<std::uint64_t>(j), 0x4EE9u);
    if (keep.bernoulli(keep_mass / b)) {
      out.indices.push_back(j);
      out.weights.push_back(1.0 / keep_mass);
    }
  }
  if (stats) {
    stats->alpha = alpha;
    stats->b = b;
    stats->touched = static_cast<std::int64_t>(touched.size());
    stats->kept = static_cast<std::int64_t>(out.indices.size());
  }
  return out;
}

namespace {

Dictionary initial_dictionary(ItemIndex n, int k, double q, double alpha0, double kappa_sq,
                              RandomStream& rng, ObservedItems* observed) {
  const double draw_count = std::ceil(q * std::max(static_cast<double>(k - 1), 1.0));
  const auto draws = static_cast<std::int64_t>(draw_count);
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(n), 0);
  Dictionary d;
  const double weight = 1.0 / (q * alpha0 * kappa_sq);
  for (std::int64_t t = 0; t < draws; ++t) {
    const auto j = static_cast<ItemIndex>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    if (taken[static_cast<std::size_t>(j)]) continue;  // merge duplicate uniform draws
    taken[static_cast<std::size_t>(j)] = 1;
    d.indices.push_back(j);
    d.weights.push_back(weight);
    if (observed) observed->mark(j);
  }
  return d;
}

}  // namespace

BlessResult bless_i(const KernelSource& src, int k, const BlessConfig& cfg, RandomStream& rng,
                    ObservedItems* observed) {
  const ItemIndex n = src.n();
  if (n < 1) throw ConfigError("bless_i: empty kernel");
  if (k < 1) throw ConfigError("bless_i: k must be at least 1");
  const double kappa_sq = src.kappa_sq();

  ObservedItems local(n);
  ObservedItems* obs = observed ? observed : &local;

  double q = cfg.q;
  std::string last_failure;
  for (int restart = 0; restart <= cfg.max_restarts; ++restart, q *= 2.0) {
    const double alpha0 = std::max(static_cast<double>(k - 1), 1.0) /
                          (static_cast<double>(n) * kappa_sq);
    const double dhat0 = std::max(static_cast<double>(k - 1) / 2.0, 0.25);
    const double crossing = dhat0;
    const double exit_threshold = 2.0 * (static_cast<double>(k) + 2.0);

    BlessResult result;
    result.q_used = q;
    result.restarts = restart;
    result.interval.deff_by_level.emplace_back(alpha0, dhat0);

    Dictionary dict = initial_dictionary(n, k, q, alpha0, kappa_sq, rng, obs);
    double alpha = alpha0;
    double dhat = dhat0;
    double alpha_min = -1.0;
    int plateau_streak = 0;
    bool empty_round = false;
    bool exited = false;

    for (int level = 1; level <= cfg.max_levels; ++level) {
      if (dhat > exit_threshold) {
        exited = true;
        break;
      }
      const double alpha_next = 2.0 * alpha;
      const double b = std::min(q * alpha_next * kappa_sq, 1.0);
      RoundStats stats;
      Dictionary next = bless_round(src, dict, alpha_next, q, b, rng, cfg.exec, &stats, obs);
      result.rounds.push_back(stats);
      if (next.m() == 0) {
        empty_round = true;
        last_failure = "empty dictionary at alpha = " + std::to_string(alpha_next);
        break;
      }
      const double dhat_next = static_cast<double>(next.m()) / q;
      result.interval.deff_by_level.emplace_back(alpha_next, dhat_next);
      if (alpha_min < 0.0 && dhat <= crossing && dhat_next > crossing) alpha_min = alpha;

      plateau_streak = dhat_next <= dhat * 1.05 ? plateau_streak + 1 : 0;
      alpha = alpha_next;
      dhat = dhat_next;
      dict = std::move(next);

      // A flat stretch of estimates means the spectrum cannot reach the exit
      // threshold (rank-limited kernel); accept the current level and move on.
      if (plateau_streak >= 4 && dhat <= exit_threshold) {
        result.plateau_exit = true;
        exited = true;
        break;
      }
    }
    if (empty_round) {
      if (!cfg.q_doubling) throw EmptyDictionary("bless_i: " + last_failure);
      continue;
    }
    if (!exited && !(dhat > exit_threshold)) {
      last_failure = "doubling levels exhausted without reaching the size threshold";
      continue;
    }

    result.interval.alpha_min = alpha_min > 0.0 ? alpha_min : alpha0;
    result.interval.alpha_max = alpha;
    result.deff_alpha_max = dhat;

    // Final high-accuracy dictionary at alpha_max.
    double q_final = cfg.q_dpp * q * dhat * dhat;
    if (cfg.final_dictionary_cap > 0.0)
      q_final = std::min(q_final, cfg.final_dictionary_cap / std::max(dhat, 0.25));
    q_final = std::max(q_final, 1.0);
    const double b_final = std::min(q_final * alpha * kappa_sq, 1.0);
    RoundStats final_stats;
    Dictionary final_dict =
        bless_round(src, dict, alpha, q_final, b_final, rng, cfg.exec, &final_stats, obs);
    result.rounds.push_back(final_stats);
    if (final_dict.m() == 0) {
      last_failure = "empty final dictionary at alpha_max = " + std::to_string(alpha);
      if (!cfg.q_doubling) throw EmptyDictionary("bless_i: " + last_failure);
      continue;
    }
    result.q_final = q_final;
    result.dictionary = std::move(final_dict);
    result.items_observed = obs->count();
    return result;
  }
  throw BudgetExhausted("bless_i: restart budget exhausted (" + last_failure + ")");
}

}  // namespace adpp
