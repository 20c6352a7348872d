#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adpp/dictionary.hpp"
#include "adpp/kernel.hpp"
#include "adpp/parallel.hpp"
#include "adpp/random.hpp"

namespace adpp {

struct BlessConfig {
  double q = 2.0;        // oversampling for the doubling rounds
  double q_dpp = 1.0;    // multiplier on q * dhat^2 for the final dictionary
  double delta = 0.1;    // informational failure probability
  bool q_doubling = true;  // double q and restart when a round comes back empty
  int max_restarts = 10;
  int max_levels = 64;
  // Cap on the expected final dictionary size (0 disables). Keeps the final
  // construction from touching a constant fraction of large datasets; the
  // sampler stays exact for any dictionary.
  double final_dictionary_cap = 400.0;
  ExecMode exec = ExecMode::Parallel;
};

// [alpha_min, alpha_max] bracketing the rescaling at which k becomes the mode
// of |S|, plus the per-level effective-dimension estimates.
struct SearchInterval {
  double alpha_min = 0.0;
  double alpha_max = 0.0;
  std::vector<std::pair<double, double>> deff_by_level;  // (alpha, dhat)
};

std::string interval_to_json(const SearchInterval& interval);

struct RoundStats {
  double alpha = 0.0;
  double b = 0.0;
  std::int64_t touched = 0;
  std::int64_t kept = 0;
};

// Distinct-items-observed bookkeeping shared across pipeline phases.
class ObservedItems {
 public:
  explicit ObservedItems(ItemIndex n) : seen_(static_cast<std::size_t>(n), 0) {}
  void mark(ItemIndex i) {
    auto& s = seen_[static_cast<std::size_t>(i)];
    if (!s) {
      s = 1;
      ++count_;
    }
  }
  std::int64_t count() const { return count_; }
  double fraction() const {
    return seen_.empty() ? 0.0 : static_cast<double>(count_) / static_cast<double>(seen_.size());
  }

 private:
  std::vector<std::uint8_t> seen_;
  std::int64_t count_ = 0;
};

struct BlessResult {
  SearchInterval interval;
  Dictionary dictionary;          // final dictionary for alpha_max
  double deff_alpha_max = 0.0;    // dhat at the alpha_max level
  double q_used = 0.0;
  double q_final = 0.0;
  int restarts = 0;
  bool plateau_exit = false;      // spectrum too flat/low-rank to cross the threshold
  std::vector<RoundStats> rounds;
  std::int64_t items_observed = 0;
};

// One sampling round: Bernoulli(b) gate over all items, approximate marginals
// under the previous dictionary, keep with probability min(q*l, b)/b and
// weight 1/min(q*l, b). Item-level draws are counter-based, so serial and
// parallel execution agree.
Dictionary bless_round(const KernelSource& src, const Dictionary& prev, double alpha, double q,
                       double b, RandomStream& rng, ExecMode exec = ExecMode::Parallel,
                       RoundStats* stats = nullptr, ObservedItems* observed = nullptr);

// Doubling-alpha dictionary construction producing the search interval, the
// per-level effective-dimension estimates, and the final high-accuracy
// dictionary at alpha_max.
BlessResult bless_i(const KernelSource& src, int k, const BlessConfig& cfg, RandomStream& rng,
                    ObservedItems* observed = nullptr);

}  // namespace adpp
