#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>

#include "adpp/bless.hpp"
#include "adpp/dictionary.hpp"
#include "adpp/parallel.hpp"
#include "support/test_utils.hpp"

using namespace adpp;

TEST_CASE("hardware threads reported") { CHECK(hardware_threads() >= 1); }

TEST_CASE("parallel marginal batches match the serial reference bit for bit") {
  const KernelSource src = test::random_rbf_source(500, 6, 1.5, 4101);
  Dictionary dict;
  RandomStream rng(41);
  for (int j = 0; j < 25; ++j) {
    dict.indices.push_back(static_cast<ItemIndex>(rng.uniform_index(500)));
    dict.weights.push_back(0.5 + rng.uniform01());
  }
  std::sort(dict.indices.begin(), dict.indices.end());
  dict.indices.erase(std::unique(dict.indices.begin(), dict.indices.end()), dict.indices.end());
  dict.weights.resize(dict.indices.size());

  const DictionaryCore core(src, dict);
  const double alpha = 0.05;
  std::vector<ItemIndex> items;
  for (int i = 0; i < 400; ++i) items.push_back(static_cast<ItemIndex>(rng.uniform_index(500)));

  MarginalCache serial(500, alpha * src.kappa_sq());
  MarginalCache parallel(500, alpha * src.kappa_sq());
  core.marginals_batch(alpha, items, serial, ExecMode::Serial);
  core.marginals_batch(alpha, items, parallel, ExecMode::Parallel);
  CHECK(serial.distinct_computed() == parallel.distinct_computed());
  for (ItemIndex i = 0; i < 500; ++i) {
    REQUIRE(serial.has(i) == parallel.has(i));
    if (serial.has(i)) CHECK(serial.get(i) == parallel.get(i));
  }
}

TEST_CASE("parallel and serial bless rounds agree exactly") {
  const KernelSource src = test::random_rbf_source(300, 4, 1.5, 4201);
  Dictionary prev;
  prev.indices = {3, 50, 120, 260};
  prev.weights = {1.0, 1.0, 1.0, 1.0};

  RandomStream rng_serial(42), rng_parallel(42);
  const Dictionary a = bless_round(src, prev, 0.05, 4.0, 0.6, rng_serial, ExecMode::Serial);
  const Dictionary b = bless_round(src, prev, 0.05, 4.0, 0.6, rng_parallel, ExecMode::Parallel);
  CHECK(a.indices == b.indices);
  CHECK(a.weights == b.weights);
}
