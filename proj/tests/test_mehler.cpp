#include <gtest/gtest.h>

#include <cmath>

#include "unilamp/oracles/mehler.hpp"

using namespace unilamp;

namespace {

const QuadratureRule& quad() {
  static const QuadratureRule rule;
  return rule;
}

ScalarFn he(int j) {
  return [j](double z) { return hermite(j, z); };
}

ScalarFn clipped_h2(double clip = 25.0) {
  return [clip](double z) { return std::min(z * z, clip) - 1.0; };
}

}  // namespace

TEST(Mehler, IndependentCaseIsProductOfMeans) {
  const std::vector<ScalarFn> fs{[](double z) { return z * z; }, [](double z) { return std::cos(z); }};
  const double expected = 1.0 * std::exp(-0.5);
  for (int t = 0; t <= 6; ++t) EXPECT_NEAR(hermite_truncated_product(fs, Matrix::Identity(2, 2), t, quad()), expected, 1e-12);
}

TEST(Mehler, LinearKernel) {
  const double rho = 0.3;
  for (int t = 1; t <= 6; ++t) EXPECT_NEAR(hermite_truncated_product({he(1), he(1)}, equicorrelation(2, rho), t, quad()), rho, 1e-12);
  EXPECT_NEAR(hermite_truncated_product({he(1), he(1)}, equicorrelation(2, rho), 0, quad()), 0.0, 1e-12);
}

TEST(Mehler, QuadraticKernelMatchesQuadrature) {
  const double rho = 0.1;
  const Matrix s = equicorrelation(2, rho);
  const double trunc = hermite_truncated_product({he(2), he(2)}, s, 4, quad());
  EXPECT_NEAR(trunc, 2.0 * rho * rho, 1e-12);
  EXPECT_NEAR(gaussian_product_quadrature({he(2), he(2)}, s, QuadratureRule(20)), 2.0 * rho * rho, 1e-12);
}

TEST(Mehler, ClippedQuadraticTruncationConverges) {
  const double rho = 0.1;
  const Matrix s = equicorrelation(2, rho);
  const std::vector<ScalarFn> fs{clipped_h2(), clipped_h2()};
  const double oracle = gaussian_product_quadrature(fs, s, QuadratureRule(20));
  double prev = std::numeric_limits<double>::infinity();
  for (int t = 0; t <= 5; ++t) {
    const double err = std::abs(hermite_truncated_product(fs, s, t, quad()) - oracle);
    EXPECT_LE(err, prev + 1e-15) << "t=" << t;
    prev = err;
  }
  const double e4 = std::abs(hermite_truncated_product(fs, s, 4, quad()) - oracle);
  const double e1 = std::abs(hermite_truncated_product(fs, s, 1, quad()) - oracle);
  EXPECT_LE(e4, 1e-3);
  EXPECT_LE(e4, e1);
}

TEST(Mehler, ThreeVariables) {
  Matrix s = equicorrelation(3, 0.1);
  s(0, 2) = s(2, 0) = 0.05;
  const std::vector<ScalarFn> fs{he(1), he(1), he(2)};
  // E Z1 Z2 (Z3² − 1) = 2 Σ13 Σ23 by Wick's theorem.
  const double exact = 2.0 * 0.05 * 0.1;
  EXPECT_NEAR(hermite_truncated_product(fs, s, 4, quad()), exact, 1e-12);
  EXPECT_NEAR(gaussian_product_quadrature(fs, s, QuadratureRule(8)), exact, 1e-10);
}

TEST(Mehler, MonteCarloAgreement) {
  const double rho = 0.05;
  const Matrix s = equicorrelation(2, rho);
  const auto lin = mc_gaussian_product({he(1), he(1)}, s, 200000, 3);
  EXPECT_NEAR(lin.mean, rho, 3.0 * lin.stderr_);
  const std::vector<ScalarFn> fs{clipped_h2(), clipped_h2()};
  const auto mc = mc_gaussian_product(fs, s, 400000, 4);
  EXPECT_NEAR(mc.mean, hermite_truncated_product(fs, s, 4, quad()), 3.0 * mc.stderr_);
  const auto indep = mc_gaussian_product({he(2), he(3)}, Matrix::Identity(2, 2), 100000, 5);
  EXPECT_NEAR(indep.mean, 0.0, 3.0 * indep.stderr_);
  const auto again = mc_gaussian_product({he(2), he(3)}, Matrix::Identity(2, 2), 100000, 5, 3);
  EXPECT_EQ(indep.mean, again.mean);
}

TEST(Mehler, Validation) {
  Matrix bad = equicorrelation(2, 0.1);
  bad(0, 0) = 2.0;
  EXPECT_THROW(hermite_truncated_product({he(1), he(1)}, bad, 2, quad()), Error);
  EXPECT_THROW(hermite_truncated_product({he(1), he(1)}, equicorrelation(2, 1.0), 2, quad()), Error);
  EXPECT_THROW(hermite_truncated_product({he(1), he(1)}, equicorrelation(2, 0.1), 7, quad()), Error);
  EXPECT_THROW(hermite_truncated_product({he(1), he(1), he(1), he(1)}, equicorrelation(4, 0.1), 2, quad()), Error);
  EXPECT_THROW(mc_gaussian_product({he(1), he(1)}, equicorrelation(2, -1.0), 10, 1), Error);
}
