#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adpp/bless.hpp"
#include "adpp/errors.hpp"
#include "adpp/poisson_binomial.hpp"
#include "support/test_utils.hpp"

using namespace adpp;

namespace {

// Prop.-3-style oversampling at desk scale: keep the log factor, drop the
// giant absolute constant (which saturates the keep rule for small n).
double theory_q(ItemIndex n, double delta) {
  return std::log(12.0 * static_cast<double>(n) * static_cast<double>(n) / delta);
}

}  // namespace

TEST_CASE("interval brackets on the identity kernel") {
  // n/q must sit well above the exit threshold 2(k+2), otherwise the keep
  // rule saturates and the size estimate cannot cross it.
  const ItemIndex n = 400;
  const int k = 3;
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(n, n));
  BlessConfig cfg;
  cfg.q = theory_q(n, 0.1);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(1000 + seed);
    const BlessResult result = bless_i(src, k, cfg, rng);
    const double lo_bound = 0.25 * (k - 1) / static_cast<double>(n);  // tr(L) = n
    const double hi_bound = 8.0 * (k + 2) / effective_dimension(Matrix::Identity(n, n), 1.0);
    const bool pass = result.interval.alpha_min >= lo_bound &&
                      result.interval.alpha_min <= result.interval.alpha_max &&
                      result.interval.alpha_max <= hi_bound;
    ok += pass ? 1 : 0;
  }
  CHECK(ok >= 9);
}

TEST_CASE("interval ordering holds on every run") {
  const KernelSource src = test::random_rbf_source(120, 4, 1.5, 1101);
  BlessConfig cfg;  // practical q = 2
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RandomStream rng(1200 + seed);
    const BlessResult result = bless_i(src, 4, cfg, rng);
    CHECK(result.interval.alpha_min < result.interval.alpha_max);
    CHECK(result.dictionary.m() >= 1);
    for (const double w : result.dictionary.weights) CHECK(w > 0.0);
  }
}

TEST_CASE("a mode-k rescaling exists inside the interval") {
  const ItemIndex n = 400;
  const int k = 4;
  const KernelSource src = test::random_rbf_source(n, 4, 2.0, 1301);
  const Vector eigs = eigendecompose_psd(src.materialize()).eigenvalues;
  BlessConfig cfg;
  cfg.q = theory_q(n, 0.1);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(1300 + seed);
    const BlessResult result = bless_i(src, k, cfg, rng);
    bool found = false;
    const double lo = std::log(result.interval.alpha_min);
    const double hi = std::log(result.interval.alpha_max);
    for (int g = 0; g <= 200 && !found; ++g) {
      const double alpha = std::exp(lo + (hi - lo) * g / 200.0);
      found = SizeDistribution::from_eigenvalues(eigs, alpha).mode() == k;
    }
    ok += found ? 1 : 0;
  }
  CHECK(ok >= 9);
}

TEST_CASE("dense round computes a marginal for every item") {
  const KernelSource src = test::random_rbf_source(30, 3, 1.0, 1401);
  RandomStream rng(14);
  Dictionary prev = Dictionary::full(30);
  RoundStats stats;
  (void)bless_round(src, prev, 0.5, 2.0, 1.0, rng, ExecMode::Serial, &stats);
  CHECK(stats.touched == 30);
}

TEST_CASE("saturated keep rule keeps every touched item at weight 1/b") {
  const ItemIndex n = 40;
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(n, n));
  RandomStream rng(15);
  // alpha = 3: l_j = 3/4, q = 2 => q*l = 1.5 saturates b = 1.
  const Dictionary d = bless_round(src, Dictionary::full(n), 3.0, 2.0, 1.0, rng);
  CHECK(d.m() == n);
  for (const double w : d.weights) CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("round size concentrates around q times the effective dimension") {
  const ItemIndex n = 300;
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(n, n));
  const double q = theory_q(n, 0.1);
  const double alpha = 0.03;  // q * alpha < 1, so the keep rule never saturates
  const double b = std::min(q * alpha, 1.0);
  const double deff = effective_dimension(Matrix::Identity(n, n), alpha);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(1500 + seed);
    const Dictionary d = bless_round(src, Dictionary::full(n), alpha, q, b, rng);
    const double ratio = static_cast<double>(d.m()) / q;
    ok += (ratio >= 0.5 * deff && ratio <= 2.0 * deff) ? 1 : 0;
  }
  CHECK(ok >= 9);
}

TEST_CASE("touched fraction per round stays near b") {
  const ItemIndex n = 400;
  const KernelSource src = test::random_rbf_source(n, 4, 1.5, 1601);
  BlessConfig cfg;
  RandomStream rng(16);
  const BlessResult result = bless_i(src, 4, cfg, rng);
  for (const RoundStats& round : result.rounds) {
    const double expected = round.b * static_cast<double>(n);
    const double slack = 3.0 * std::sqrt(expected * (1.0 - round.b) + 1.0);
    CHECK(static_cast<double>(round.touched) <= expected + slack);
  }
}

TEST_CASE("effective-dimension estimates mostly grow along the doubling path") {
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(200, 200));
  BlessConfig cfg;  // practical q
  int violations = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(1700 + seed);
    const BlessResult result = bless_i(src, 4, cfg, rng);
    bool monotone = true;
    for (std::size_t i = 1; i < result.interval.deff_by_level.size(); ++i)
      monotone &= result.interval.deff_by_level[i].second >=
                  result.interval.deff_by_level[i - 1].second * 0.999;
    violations += monotone ? 0 : 1;
  }
  CHECK(violations <= 1);
}

TEST_CASE("q doubling rescues an initially empty construction") {
  const KernelSource src = test::random_rbf_source(60, 3, 1.0, 1801);
  BlessConfig cfg;
  cfg.q = 1e-4;
  cfg.q_doubling = true;
  cfg.max_restarts = 40;
  RandomStream rng(18);
  const BlessResult result = bless_i(src, 3, cfg, rng);
  CHECK(result.restarts > 0);
  CHECK(result.dictionary.m() >= 1);
  CHECK(result.q_used > cfg.q);
}

TEST_CASE("empty rounds without doubling raise EmptyDictionary") {
  const KernelSource src = test::random_rbf_source(60, 3, 1.0, 1901);
  BlessConfig cfg;
  cfg.q = 1e-6;
  cfg.q_doubling = false;
  RandomStream rng(19);
  CHECK_THROWS_AS(bless_i(src, 3, cfg, rng), EmptyDictionary);
}

TEST_CASE("k = 1 is supported") {
  const KernelSource src = test::random_rbf_source(50, 3, 1.0, 2001);
  BlessConfig cfg;
  RandomStream rng(20);
  const BlessResult result = bless_i(src, 1, cfg, rng);
  CHECK(result.interval.alpha_min > 0.0);
  CHECK(result.interval.alpha_min <= result.interval.alpha_max);
  CHECK(result.dictionary.m() >= 1);
}

TEST_CASE("rank-limited spectra exit through the plateau path") {
  Vector v = Vector::Ones(50);
  const Matrix rank1 = v * v.transpose();
  const KernelSource src = KernelSource::from_explicit(rank1);
  BlessConfig cfg;
  RandomStream rng(21);
  const BlessResult result = bless_i(src, 5, cfg, rng);
  CHECK(result.plateau_exit);
  CHECK(result.interval.alpha_max >= result.interval.alpha_min);
}

TEST_CASE("final dictionary certifies at eps = 1/deff") {
  const ItemIndex n = 300;
  const int k = 3;
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(n, n));
  BlessConfig cfg;
  cfg.q = theory_q(n, 0.1);
  int ok = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomStream rng(2200 + seed);
    const BlessResult result = bless_i(src, k, cfg, rng);
    const double eps = 1.0 / result.deff_alpha_max;
    ok += certify_accuracy(src, result.dictionary, result.interval.alpha_max, eps) ? 1 : 0;
  }
  CHECK(ok >= 9);
}

TEST_CASE("interval json shape") {
  SearchInterval interval;
  interval.alpha_min = 0.5;
  interval.alpha_max = 2.0;
  interval.deff_by_level = {{0.5, 1.0}, {1.0, 2.5}};
  const std::string j = interval_to_json(interval);
  CHECK(j.find("\"alpha_min\":0.5") != std::string::npos);
  CHECK(j.find("\"alpha_max\":2.0") != std::string::npos);
  CHECK(j.find("\"deff_by_level\"") != std::string::npos);
}
