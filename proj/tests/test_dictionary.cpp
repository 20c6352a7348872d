#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "adpp/dictionary.hpp"
#include "adpp/errors.hpp"
#include "support/test_utils.hpp"

using namespace adpp;

namespace {

// Direct dense evaluation of the approximate marginal:
// l_i = a (L_ii - a L_iD (a L_DD + W^-1)^-1 L_Di).
double direct_marginal(const Matrix& l, const Dictionary& dict, double alpha, ItemIndex i) {
  const int m = dict.m();
  Matrix core(m, m);
  Vector cross(m);
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) core(a, b) = alpha * l(dict.indices[a], dict.indices[b]);
    core(a, a) += 1.0 / dict.weights[static_cast<std::size_t>(a)];
    cross(a) = l(dict.indices[static_cast<std::size_t>(a)], i);
  }
  return alpha * (l(i, i) - alpha * cross.dot(core.llt().solve(cross)));
}

}  // namespace

TEST_CASE("scalar core pins the factorization") {
  Matrix l(1, 1);
  l << 1.0;
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {0};
  dict.weights = {2.0};
  const DictionaryCore core(src, dict);
  // L_hat = w * L_00 = 2, so det(I + a L_hat) = 3 at a = 1 and the
  // marginal is a(L_00 - a L_00 (a L_00 + 1/w)^-1 L_00) = 1/3.
  CHECK(core.log_det_i_alpha_lhat(1.0) == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(core.marginal(1.0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("empty dictionary cannot build a core") {
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(3, 3));
  CHECK_THROWS_AS(DictionaryCore(src, Dictionary{}), EmptyDictionary);
}

TEST_CASE("marginals match the direct formula on a random dictionary") {
  RandomStream rng(71);
  const Matrix l = test::random_psd(12, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {1, 3, 4, 8, 11};
  for (int j = 0; j < 5; ++j) dict.weights.push_back(0.5 + rng.uniform01());
  const DictionaryCore core(src, dict);
  for (const double alpha : {0.3, 1.0, 2.5})
    for (ItemIndex i = 0; i < 12; ++i)
      CHECK(core.marginal(alpha, i) ==
            doctest::Approx(direct_marginal(l, dict, alpha, i)).epsilon(1e-10));
}

TEST_CASE("full dictionary reproduces the exact ridge leverage scores") {
  RandomStream rng(72);
  const Matrix l = test::random_psd(10, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  const DictionaryCore core(src, Dictionary::full(10));
  for (const double alpha : {0.5, 1.0, 2.0}) {
    const Matrix rls =
        alpha * l * (Matrix::Identity(10, 10) + alpha * l).inverse();
    for (ItemIndex i = 0; i < 10; ++i)
      CHECK(std::fabs(core.marginal(alpha, i) - rls(i, i)) <= 1e-9);
  }
}

TEST_CASE("unit-weight scalar dictionary gives the scalar leverage score") {
  // With L = [2], D = {0}, w = 1: l_0 = aL/(aLw + 1) = 2/3 at a = 1.
  Matrix l(1, 1);
  l << 2.0;
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {0};
  dict.weights = {1.0};
  const DictionaryCore core(src, dict);
  CHECK(core.marginal(1.0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("no cross interaction leaves the diagonal term") {
  Matrix l = Matrix::Identity(4, 4);  // L_{i,D} = 0 for i not in D
  l(0, 0) = 0.7;
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {2};
  dict.weights = {1.5};
  const DictionaryCore core(src, dict);
  CHECK(core.marginal(0.9, 0) == doctest::Approx(0.9 * 0.7).epsilon(1e-12));
}

TEST_CASE("marginal bounds after clamping") {
  RandomStream rng(73);
  const Matrix l = test::random_psd(15, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {0, 5, 9};
  dict.weights = {2.0, 0.1, 7.0};
  const DictionaryCore core(src, dict);
  for (const double alpha : {0.2, 1.0, 4.0})
    for (ItemIndex i = 0; i < 15; ++i) {
      const double v = core.marginal(alpha, i);
      CHECK(v >= 0.0);
      CHECK(v <= alpha * l(i, i) + 1e-9);
      CHECK(v <= alpha * src.kappa_sq());
    }
}

TEST_CASE("exact marginals are monotone in alpha on diagonal kernels") {
  Matrix l = Matrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) l(i, i) = 0.5 + i;
  const KernelSource src = KernelSource::from_explicit(l);
  const DictionaryCore core(src, Dictionary::full(5));
  for (ItemIndex i = 0; i < 5; ++i) {
    double prev = 0.0;
    for (const double alpha : {0.1, 0.2, 0.5, 1.0, 2.0, 5.0}) {
      const double cur = core.marginal(alpha, i);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("compressed matrix") {
  Matrix l(1, 1);
  l << 4.0;
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {0};
  dict.weights = {0.25};
  CHECK(compressed_matrix(src, dict)(0, 0) == doctest::Approx(1.0));

  RandomStream rng(74);
  const Matrix big = test::random_psd(8, rng);
  const KernelSource src2 = KernelSource::from_explicit(big);
  const Matrix identity_weights = compressed_matrix(src2, Dictionary::full(8));
  CHECK((identity_weights - big).cwiseAbs().maxCoeff() < 1e-12);

  Dictionary sub;
  sub.indices = {1, 4, 6};
  sub.weights = {0.3, 2.0, 1.1};
  const Matrix lhat = compressed_matrix(src2, sub);
  CHECK(is_symmetric(lhat));
  CHECK(eigendecompose_psd(lhat).eigenvalues.minCoeff() >= 0.0);
}

TEST_CASE("marginal cache stores exact recomputations and counts") {
  RandomStream rng(75);
  const Matrix l = test::random_psd(9, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  Dictionary dict;
  dict.indices = {2, 7};
  dict.weights = {1.0, 1.0};
  const DictionaryCore core(src, dict);
  const double alpha = 0.8;

  MarginalCache cache(9, alpha * src.kappa_sq());
  const std::vector<ItemIndex> items = {3, 3, 5, 3, 8};
  core.marginals_batch(alpha, items, cache, ExecMode::Serial);
  CHECK(cache.distinct_computed() == 3);
  CHECK(cache.misses() == 5);

  core.marginals_batch(alpha, items, cache, ExecMode::Serial);
  CHECK(cache.distinct_computed() == 3);
  CHECK(cache.hits() == 5);

  // Cached values equal direct recomputation bit for bit.
  for (const ItemIndex i : {3, 5, 8}) CHECK(cache.get(i) == core.marginal(alpha, i));
  CHECK(cache.upper_bound() == alpha * src.kappa_sq());
  CHECK_FALSE(cache.has(0));
}

TEST_CASE("dictionary json round trip") {
  Dictionary dict;
  dict.indices = {4, 2, 9};
  dict.weights = {1.0, 0.5, 2.25};
  const std::string text = dictionary_to_json(dict, 0.125, 2.0);
  const Dictionary back = dictionary_from_json(text);
  CHECK(back.indices == dict.indices);
  CHECK(back.weights == dict.weights);
  CHECK(text.find("\"alpha\":0.125") != std::string::npos);
  CHECK(text.find("\"q\":2.0") != std::string::npos);
}

TEST_CASE("accuracy certificate: exact dictionary") {
  RandomStream rng(76);
  const Matrix l = test::random_psd(8, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  CHECK(certify_accuracy(src, Dictionary::full(8), 1.0, 0.0));
  CHECK(certify_accuracy(src, Dictionary::full(8), 0.3, 0.1));
}

TEST_CASE("accuracy certificate: empty dictionary reduces to the largest marginal") {
  RandomStream rng(77);
  const Matrix l = test::random_psd(7, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  const double alpha = 1.3;
  const double lam_max = eigendecompose_psd(l).eigenvalues(0);
  const double largest_marginal = alpha * lam_max / (alpha * lam_max + 1.0);
  CHECK(certify_accuracy(src, Dictionary{}, alpha, largest_marginal + 1e-6));
  CHECK_FALSE(certify_accuracy(src, Dictionary{}, alpha, largest_marginal - 1e-3));
}

TEST_CASE("accuracy certificate refuses large n") {
  const KernelSource src = KernelSource::from_explicit(Matrix::Identity(12, 12));
  CHECK_THROWS_AS(certify_accuracy(src, Dictionary::full(12), 1.0, 0.5, 10), Unsupported);
}
