#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "adpp/errors.hpp"
#include "adpp/io.hpp"
#include "adpp/kernel.hpp"
#include "support/test_utils.hpp"

using namespace adpp;

TEST_CASE("explicit kernel entry and symmetry") {
  Matrix l(2, 2);
  l << 1.0, 0.5, 0.5, 1.0;
  const KernelSource src = KernelSource::from_explicit(l);
  CHECK(src.entry(0, 1) == 0.5);
  CHECK(src.kappa_sq() == 1.0);
  CHECK_THROWS_AS(src.entry(2, 0), ConfigError);
}

TEST_CASE("rbf kernel of identical points is one") {
  Matrix x(2, 3);
  x << 1.0, 2.0, 3.0, 1.0, 2.0, 3.0;
  const KernelSource src = KernelSource::from_features(x, KernelFunction::Rbf, 1.0);
  CHECK(src.entry(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(src.kappa_sq() == 1.0);
}

TEST_CASE("linear kernel dot product and kappa bound") {
  Matrix x(2, 2);
  x << 1.0, 2.0, 3.0, 4.0;
  const KernelSource src = KernelSource::from_features(x, KernelFunction::Linear);
  CHECK(src.entry(0, 1) == doctest::Approx(11.0));
  CHECK(src.kappa_sq() == doctest::Approx(25.0));
}

TEST_CASE("cosine kernel normalizes and maps zero vectors to zero") {
  Matrix x(3, 2);
  x << 2.0, 0.0, 0.0, 5.0, 0.0, 0.0;
  const KernelSource src = KernelSource::from_features(x, KernelFunction::Cosine);
  CHECK(src.entry(0, 0) == doctest::Approx(1.0));
  CHECK(src.entry(0, 1) == doctest::Approx(0.0));
  CHECK(src.entry(2, 2) == doctest::Approx(0.0));
}

TEST_CASE("kernel symmetry on random pairs for every kernel type") {
  RandomStream rng(31);
  const Matrix x = test::random_gaussian(40, 5, rng);
  const KernelSource sources[] = {
      KernelSource::from_features(x, KernelFunction::Rbf, 1.5),
      KernelSource::from_features(x, KernelFunction::Linear),
      KernelSource::from_features(x, KernelFunction::Cosine),
      KernelSource::from_explicit(test::random_psd(40, rng)),
  };
  for (const KernelSource& src : sources) {
    for (int rep = 0; rep < 1000; ++rep) {
      const auto i = static_cast<ItemIndex>(rng.uniform_index(40));
      const auto j = static_cast<ItemIndex>(rng.uniform_index(40));
      CHECK(src.entry(i, j) == src.entry(j, i));
      CHECK(std::fabs(src.entry(i, j)) <= src.kappa_sq() * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("kernel block supports multiset indexing") {
  Matrix l(1, 1);
  l << 2.0;
  const KernelSource src = KernelSource::from_explicit(l);
  const std::vector<ItemIndex> rows = {0, 0};
  const std::vector<ItemIndex> cols = {0};
  const Matrix b = src.block(rows, cols);
  REQUIRE(b.rows() == 2);
  CHECK(b(0, 0) == 2.0);
  CHECK(b(1, 0) == 2.0);

  const Matrix empty = src.block(std::vector<ItemIndex>{}, std::vector<ItemIndex>{});
  CHECK(empty.rows() == 0);
  CHECK(empty.cols() == 0);
}

TEST_CASE("kernel block reads the requested cross section") {
  RandomStream rng(32);
  const Matrix l = test::random_psd(3, rng);
  const KernelSource src = KernelSource::from_explicit(l);
  const std::vector<ItemIndex> rows = {1};
  const std::vector<ItemIndex> cols = {0, 2};
  const Matrix b = src.block(rows, cols);
  CHECK(b(0, 0) == l(1, 0));
  CHECK(b(0, 1) == l(1, 2));
}

TEST_CASE("explicit mode rejects matrices beyond the cap") {
  CHECK_THROWS_AS(KernelSource::from_explicit(Matrix::Identity(11, 11), 10), ConfigError);
}

TEST_CASE("csv ingestion with and without header") {
  const char* path = "test_kernel_io_tmp.csv";
  {
    std::ofstream out(path);
    out << "a,b\n1,2\n3,4\n";
  }
  const Matrix with_header = load_csv(path, true);
  CHECK(with_header.rows() == 2);
  CHECK(with_header(1, 1) == 4.0);
  CHECK_THROWS_AS(load_csv(path, false), IngestError);  // header row is non-numeric
  std::remove(path);
  CHECK_THROWS_AS(load_csv("does_not_exist.csv", false), IngestError);
}

TEST_CASE("csv ingestion rejects ragged rows") {
  const char* path = "test_kernel_io_ragged.csv";
  {
    std::ofstream out(path);
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(load_csv(path, false), IngestError);
  std::remove(path);
}

TEST_CASE("f32bin round trip") {
  const char* path = "test_kernel_io_tmp.bin";
  RandomStream rng(33);
  Matrix pts = test::random_gaussian(7, 3, rng);
  for (ItemIndex i = 0; i < pts.rows(); ++i)
    for (ItemIndex j = 0; j < pts.cols(); ++j)
      pts(i, j) = static_cast<double>(static_cast<float>(pts(i, j)));
  save_f32bin(path, pts);
  const Matrix back = load_f32bin(path);
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 3);
  CHECK((back - pts).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path);
}

TEST_CASE("f32bin rejects bad magic") {
  const char* path = "test_kernel_io_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE";
  }
  CHECK_THROWS_AS(load_f32bin(path), IngestError);
  std::remove(path);
}

TEST_CASE("synthetic generator is deterministic") {
  const Matrix a = synthetic_gaussian_mixture(50, 20, 99);
  const Matrix b = synthetic_gaussian_mixture(50, 20, 99);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  const Matrix c = synthetic_gaussian_mixture(50, 20, 100);
  CHECK((a - c).cwiseAbs().maxCoeff() > 0.0);
  // Values already sit on the f32 grid.
  CHECK(a(0, 0) == static_cast<double>(static_cast<float>(a(0, 0))));
}
