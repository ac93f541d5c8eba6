#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "unilamp/hadamard.hpp"
#include "unilamp/rng.hpp"

using namespace unilamp;

namespace {

std::vector<double> basis(std::size_t m, std::size_t j) {
  std::vector<double> e(m, 0.0);
  e[j] = 1.0;
  return e;
}

}  // namespace

TEST(Fwht, FirstBasisVectorIsConstant) {
  auto v = basis(4, 0);
  fwht_inplace(v);
  for (double x : v) EXPECT_DOUBLE_EQ(x, 0.5);
}

TEST(Fwht, TwoPoint) {
  std::vector<double> v{1.0, 1.0};
  fwht_inplace(v);
  EXPECT_NEAR(v[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(v[1], 0.0, 1e-15);
}

TEST(Fwht, RejectsNonPowerOfTwo) {
  std::vector<double> v(6, 1.0);
  EXPECT_THROW(fwht_inplace(v), Error);
  std::vector<double> one(1, 1.0);
  EXPECT_THROW(fwht_inplace(one), Error);
}

TEST(Fwht, MatchesEntryFormulaOnBasisVectors) {
  for (std::size_t m = 2; m <= 256; m *= 2) {
    for (std::size_t j = 0; j < m; ++j) {
      auto v = basis(m, j);
      fwht_inplace(v);
      for (std::size_t i = 0; i < m; ++i) ASSERT_NEAR(v[i], hadamard_entry(i + 1, j + 1, m), 1e-14);
    }
  }
}

TEST(Fwht, InvolutionOnRandomVectors) {
  CounterRng rng(derive_seed(11, "fwht-test"));
  for (std::size_t m = 2; m <= (std::size_t{1} << 14); m *= 2) {
    std::vector<double> v(m);
    for (double& x : v) x = rng.normal();
    auto w = v;
    fwht_inplace(w);
    fwht_inplace(w);
    for (std::size_t i = 0; i < m; ++i) ASSERT_NEAR(w[i], v[i], 1e-12) << "m=" << m;
  }
}

TEST(HadamardEntry, FirstRowAndSignExample) {
  for (std::size_t j = 1; j <= 8; ++j) EXPECT_DOUBLE_EQ(hadamard_entry(1, j, 8), 1.0 / std::sqrt(8.0));
  EXPECT_DOUBLE_EQ(hadamard_entry(2, 2, 2), -1.0 / std::sqrt(2.0));
  EXPECT_THROW(hadamard_entry(0, 1, 8), Error);
  EXPECT_THROW(hadamard_entry(1, 9, 8), Error);
}

TEST(XorIndex, IdentityAndInverse) {
  const std::size_t m = 64;
  for (std::size_t i = 1; i <= m; ++i) {
    EXPECT_EQ(xor_index(i, i, m), 1u);
    EXPECT_EQ(xor_index(1, i, m), i);
    for (std::size_t j = 1; j <= m; ++j) {
      EXPECT_EQ(xor_index(xor_index(i, j, m), j, m), i);
      EXPECT_EQ(xor_index(i, j, m), xor_index(j, i, m));
    }
  }
  EXPECT_THROW(xor_index(65, 1, m), Error);
}

TEST(XorIndex, ColumnProductIdentityExhaustive) {
  const std::size_t m = 64;
  const double root = std::sqrt(static_cast<double>(m));
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t k = xor_index(i, j, m);
      for (std::size_t r = 1; r <= m; ++r)
        ASSERT_NEAR(root * hadamard_entry(r, i, m) * hadamard_entry(r, j, m), hadamard_entry(r, k, m), 1e-13);
    }
}

TEST(Rng, StreamsAreDeterministicAndDistinct) {
  CounterRng a(derive_seed(5, "x", 0));
  CounterRng b(derive_seed(5, "x", 0));
  CounterRng c(derive_seed(5, "x", 1));
  for (int i = 0; i < 100; ++i) {
    const auto va = a();
    EXPECT_EQ(va, b());
    EXPECT_NE(va, c());
  }
}

TEST(Rng, NormalMoments) {
  CounterRng rng(derive_seed(3, "normal"));
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, BelowIsInRange) {
  CounterRng rng(derive_seed(9, "below"));
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.below(7), 7u);
}
