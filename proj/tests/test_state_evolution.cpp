#include <gtest/gtest.h>

#include <cmath>

#include "unilamp/eta.hpp"
#include "unilamp/quadrature.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/state_evolution.hpp"

using namespace unilamp;

namespace {

const QuadratureRule& quad() {
  static const QuadratureRule rule(200);
  return rule;
}

EtaFunction spectral_eta(double kappa) {
  TrimConfig cfg;
  calibrate(cfg, kappa, quad());
  return EtaFunction::spectral(cfg);
}

}  // namespace

TEST(EtaMoments, ConstantEtaGivesZeros) {
  const auto eta = EtaFunction::custom([](double) { return 0.3; }, 1.0, 0.0);
  const auto mom = eta_moments(eta, quad());
  EXPECT_NEAR(mom.m1, 0.0, 1e-14);
  EXPECT_NEAR(mom.m2, 0.0, 1e-14);
  EXPECT_NEAR(mom.m3, 0.0, 1e-14);
}

TEST(EtaMoments, SquareGivesExactGaussianMoments) {
  // η(y) = y², η̄ = H₂: m1 = 2, m2 = 15 − 6 + 1 = 10, m3 = 2.
  const auto eta = EtaFunction::custom([](double y) { return std::min(y * y, 400.0); }, 400.0, 40.0, Centering::gaussian_expectation, "square", 20.0);
  const auto mom = eta_moments(eta, quad());
  EXPECT_NEAR(mom.m1, 2.0, 1e-9);
  EXPECT_NEAR(mom.m2, 10.0, 1e-9);
  EXPECT_NEAR(mom.m3, 2.0, 1e-9);
}

TEST(EtaMoments, SpectralReferenceValues) {
  const auto mom = eta_moments(spectral_eta(0.4), quad());
  // 30-digit adaptive integration (mpmath).
  EXPECT_NEAR(mom.m1, 0.13918889868167196, 1e-12);
  EXPECT_NEAR(mom.m2, 0.024403201256115855, 1e-12);
  EXPECT_NEAR(mom.m3, 0.017623940344434127, 1e-12);
  EXPECT_GE(mom.m2, mom.m1 * mom.m1);
}

TEST(EtaMoments, QuadratureOrderStable) {
  const auto eta = spectral_eta(0.4);
  const auto a = eta_moments(eta, quad());
  const auto b = eta_moments(eta, QuadratureRule(2 * QuadratureRule::default_order));
  EXPECT_LT(std::abs(a.m1 - b.m1), 1e-10);
  EXPECT_LT(std::abs(a.m2 - b.m2), 1e-10);
  EXPECT_LT(std::abs(a.m3 - b.m3), 1e-10);
}

TEST(EtaMoments, MatchMonteCarlo) {
  const auto eta = spectral_eta(0.4);
  const auto mom = eta_moments(eta, quad());
  const double c = eta.gaussian_mean(quad());
  CounterRng rng(derive_seed(8, "mc-moments"));
  const int n = 2000000;
  double s[3] = {0, 0, 0};
  double s2[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    const double e = eta(std::abs(z)) - c;
    const double v[3] = {z * z * e, z * z * e * e, e * e};
    for (int k = 0; k < 3; ++k) {
      s[k] += v[k];
      s2[k] += v[k] * v[k];
    }
  }
  const double exact[3] = {mom.m1, mom.m2, mom.m3};
  for (int k = 0; k < 3; ++k) {
    const double mean = s[k] / n;
    const double se = std::sqrt((s2[k] / n - mean * mean) / n);
    EXPECT_NEAR(exact[k], mean, 3.0 * se) << "moment " << k + 1;
  }
}

TEST(SeStep, ZeroSignalAndConstantEta) {
  const EtaMoments mom{0.1, 0.05, 0.02};
  const auto s = se_step({0.0, 2.0, 0}, 0.4, mom);
  EXPECT_EQ(s.alpha, 0.0);
  EXPECT_NEAR(s.sigma2, 1.5 * 2.0 * 0.02, 1e-15);
  EXPECT_EQ(s.t, 1);
  const auto z = se_step({0.7, 1.0, 0}, 0.4, EtaMoments{});
  EXPECT_EQ(z.alpha, 0.0);
  EXPECT_EQ(z.sigma2, 0.0);
  EXPECT_THROW(se_step({1.0, 0.0, 0}, 0.4, EtaMoments{0.5, 0.0, 0.0}), Error);
}

TEST(SeRun, ReferenceTrajectory) {
  const auto traj = se_run(0.5, 1.0, 0.4, spectral_eta(0.4), 3, quad());
  ASSERT_EQ(traj.size(), 4u);
  EXPECT_NEAR(traj[1].alpha, 0.10439167401125397, 1e-12);
  EXPECT_NEAR(traj[1].sigma2, 0.028322029919113359, 1e-12);
  EXPECT_NEAR(traj[2].alpha, 0.021795243205743835, 1e-13);
  EXPECT_NEAR(traj[2].sigma2, 0.00083093551077506888, 1e-14);
  EXPECT_NEAR(traj[3].alpha, 0.0045504838474600166, 1e-14);
  EXPECT_NEAR(traj[3].sigma2, 2.5550409821761292e-5, 1e-15);
}

TEST(SeRun, ZeroIterationsAndLinearity) {
  const auto eta = spectral_eta(0.4);
  EXPECT_EQ(se_run(0.5, 1.0, 0.4, eta, 0, quad()).size(), 1u);
  const auto a = se_run(0.5, 0.0, 0.4, eta, 6, quad());
  const auto b = se_run(1.5, 0.0, 0.4, eta, 6, quad());
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_NEAR(b[t].alpha, 3.0 * a[t].alpha, 1e-15);
  for (std::size_t t = 1; t < a.size(); ++t) EXPECT_LT(std::abs(a[t].alpha), std::abs(a[t - 1].alpha));
}

TEST(SeRun, TimeVaryingEta) {
  const auto eta = spectral_eta(0.4);
  const auto flat = EtaFunction::custom([](double) { return 1.0; }, 1.0, 0.0);
  const auto traj = se_run(0.5, 1.0, 0.4, std::vector<EtaFunction>{eta, flat}, 3, quad());
  EXPECT_GT(traj[1].alpha, 0.0);
  EXPECT_NEAR(traj[2].alpha, 0.0, 1e-15);
  EXPECT_NEAR(traj[3].sigma2, 0.0, 1e-15);
}

TEST(Predict, Limits) {
  const auto p = se_predict_observables({0.3, 0.0, 4}, 0.4);
  EXPECT_DOUBLE_EQ(p.cos2, 1.0);
  const auto q = se_predict_observables({0.0, 1.0, 4}, 0.4);
  EXPECT_DOUBLE_EQ(q.cos2, 0.0);
  const auto r = se_predict_observables({0.5, 1.0, 2}, 0.4);
  EXPECT_DOUBLE_EQ(r.znorm, 1.25);
  EXPECT_DOUBLE_EQ(r.xnorm, 0.25 + 0.6);
  const auto init = se_predict_observables({0.5, 1.0, 0}, 0.4);
  EXPECT_DOUBLE_EQ(init.xnorm, 0.25 + 0.4);
}
