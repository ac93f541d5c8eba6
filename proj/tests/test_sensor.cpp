#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"

using namespace unilamp;

namespace {

Vector gaussian(Eigen::Index len, std::uint64_t seed) {
  CounterRng rng(derive_seed(seed, "test-vector"));
  Vector v(len);
  for (Eigen::Index i = 0; i < len; ++i) v[i] = rng.normal();
  return v;
}

// Dense A assembled column by column from the entry formula / explicit basis.
Matrix dense_hadamard_A(const SubsampledSensor& s) {
  const auto m = s.m();
  Matrix a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(s.n()));
  for (std::size_t c = 0; c < s.n(); ++c)
    for (std::size_t r = 0; r < m; ++r)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = hadamard_entry(r + 1, s.selection()[c], m);
  return a;
}

class BothKinds : public ::testing::TestWithParam<EnsembleKind> {};

}  // namespace

TEST(SampleSensor, Validation) {
  EXPECT_THROW(sample_sensor(EnsembleKind::hadamard, 12, 4, 1), Error);
  EXPECT_THROW(sample_sensor(EnsembleKind::hadamard, 16, 0, 1), Error);
  EXPECT_THROW(sample_sensor(EnsembleKind::hadamard, 16, 16, 1), Error);
  EXPECT_NO_THROW(sample_sensor(EnsembleKind::haar, 12, 5, 1));
  SensorLimits small;
  small.haar_max_m = 32;
  EXPECT_THROW(sample_sensor(EnsembleKind::haar, 64, 8, 1, small), Error);
}

TEST(SampleSensor, SelectionSortedDistinct) {
  const auto s = sample_sensor(EnsembleKind::hadamard, 1024, 410, 17);
  const auto& sel = s.selection();
  ASSERT_EQ(sel.size(), 410u);
  EXPECT_TRUE(std::is_sorted(sel.begin(), sel.end()));
  EXPECT_EQ(std::adjacent_find(sel.begin(), sel.end()), sel.end());
  EXPECT_GE(sel.front(), 1u);
  EXPECT_LE(sel.back(), 1024u);
  EXPECT_DOUBLE_EQ(s.kappa(), 410.0 / 1024.0);
}

TEST(SampleSensor, SelectionIsUniform) {
  // Chi-square over 2000 seeds, m=1024, n=410; 1023 dof, 1% critical value ~ 1131.
  const std::size_t m = 1024;
  const std::size_t n = 410;
  const int seeds = 2000;
  std::vector<double> hits(m, 0.0);
  for (int k = 0; k < seeds; ++k) {
    const auto s = sample_sensor(EnsembleKind::hadamard, m, n, static_cast<std::uint64_t>(k));
    for (auto i : s.selection()) hits[i - 1] += 1.0;
  }
  const double expected = static_cast<double>(seeds) * static_cast<double>(n) / static_cast<double>(m);
  double chi2 = 0.0;
  for (double h : hits) chi2 += (h - expected) * (h - expected) / expected;
  // Each seed draws without replacement, which only shrinks the variance.
  EXPECT_LT(chi2, 1131.0);
}

TEST_P(BothKinds, Deterministic) {
  const auto kind = GetParam();
  const auto a = sample_sensor(kind, 64, 20, 99);
  const auto b = sample_sensor(kind, 64, 20, 99);
  EXPECT_EQ(a.selection(), b.selection());
  EXPECT_TRUE((a.dense().array() == b.dense().array()).all());
}

TEST_P(BothKinds, OrthonormalColumns) {
  const auto s = sample_sensor(GetParam(), 256, 100, 3);
  const Matrix a = s.dense();
  const Matrix gram = a.transpose() * a;
  EXPECT_LE((gram - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff(), 1e-10);
  const Vector x = gaussian(100, 1);
  EXPECT_NEAR(s.apply_A(x).squaredNorm(), x.squaredNorm(), 1e-9 * x.squaredNorm());
}

TEST_P(BothKinds, AdjointIdentity) {
  const auto s = sample_sensor(GetParam(), 128, 50, 4);
  const Vector x = gaussian(50, 2);
  const Vector z = gaussian(128, 3);
  const double lhs = s.apply_A(x).dot(z);
  const double rhs = x.dot(s.apply_At(z));
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
  EXPECT_LE((s.apply_At(s.apply_A(x)) - x).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(s.apply_A(Vector::Zero(50)).isZero(0.0));
  EXPECT_THROW(s.apply_A(Vector::Zero(49)), Error);
  EXPECT_THROW(s.apply_At(Vector::Zero(127)), Error);
}

TEST_P(BothKinds, ApplyMatchesDense) {
  const auto s = sample_sensor(GetParam(), 256, 90, 5);
  const Matrix a = s.dense();
  const Vector x = gaussian(90, 4);
  const Vector z = gaussian(256, 5);
  EXPECT_LE((s.apply_A(x) - a * x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((s.apply_At(z) - a.transpose() * z).cwiseAbs().maxCoeff(), 1e-12);
}

TEST_P(BothKinds, PsiProperties) {
  const auto s = sample_sensor(GetParam(), 256, 100, 6);
  const PsiOperator psi(s);
  const double kappa = s.kappa();
  const Matrix dense = psi.dense();
  const Matrix a = s.dense();
  EXPECT_LE((dense - (a * a.transpose() - kappa * Matrix::Identity(256, 256))).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((dense - dense.transpose()).cwiseAbs().maxCoeff(), 0.0);

  const Vector v = gaussian(256, 7);
  EXPECT_LE((psi.apply(v) - dense * v).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(psi.apply(v).norm(), std::max(kappa, 1.0 - kappa) * v.norm() + 1e-9);

  const Vector range = s.apply_A(gaussian(100, 8));
  EXPECT_LE((psi.apply(range) - (1.0 - kappa) * range).cwiseAbs().maxCoeff(), 1e-10);

  double trace = 0.0;
  for (std::size_t a_ = 1; a_ <= 256; ++a_) {
    Vector e = Vector::Zero(256);
    e[static_cast<Eigen::Index>(a_ - 1)] = 1.0;
    trace += psi.apply(e)[static_cast<Eigen::Index>(a_ - 1)];
  }
  EXPECT_NEAR(trace, 0.0, 1e-9);

  for (std::size_t a_ : {1u, 17u, 200u})
    for (std::size_t b : {1u, 5u, 256u}) {
      Vector e = Vector::Zero(256);
      e[static_cast<Eigen::Index>(b - 1)] = 1.0;
      EXPECT_NEAR(psi.entry(a_, b), psi.apply(e)[static_cast<Eigen::Index>(a_ - 1)], 1e-13);
    }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(dense, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  for (Eigen::Index i = 0; i < 156; ++i) EXPECT_NEAR(ev[i], -kappa, 1e-8);
  for (Eigen::Index i = 156; i < 256; ++i) EXPECT_NEAR(ev[i], 1.0 - kappa, 1e-8);
}

TEST_P(BothKinds, PsiBlockMatchesEntries) {
  const auto s = sample_sensor(GetParam(), 128, 40, 8);
  const PsiOperator psi(s);
  const std::vector<std::size_t> labels{3, 77, 128, 1};
  const Matrix b = psi.block(labels);
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = 0; j < labels.size(); ++j)
      EXPECT_NEAR(b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), psi.entry(labels[i], labels[j]), 1e-13);
}

INSTANTIATE_TEST_SUITE_P(Ensembles, BothKinds, ::testing::Values(EnsembleKind::hadamard, EnsembleKind::haar),
                         [](const auto& info) { return std::string(to_string(info.param)); });

TEST(HadamardSensor, MatchesEntryFormula) {
  const auto s = sample_sensor(EnsembleKind::hadamard, 256, 70, 9);
  EXPECT_LE((s.dense() - dense_hadamard_A(s)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(HadamardPsi, DiagonalIsExactlyZero) {
  const auto s = sample_sensor(EnsembleKind::hadamard, 512, 205, 10);
  const PsiOperator psi(s);
  for (std::size_t a = 1; a <= 512; ++a) ASSERT_EQ(psi.entry(a, a), 0.0);
  const Matrix d = psi.dense();
  for (Eigen::Index a = 0; a < 512; ++a) ASSERT_EQ(d(a, a), 0.0);
}

TEST(HadamardPsi, ConcentrationTail) {
  // P(|Ψ_ab| >= eps) <= 4 exp(-eps² m / 8) at eps = 4/√m, over fresh sensors.
  const std::size_t m = 1024;
  const double eps = 4.0 / std::sqrt(static_cast<double>(m));
  const int seeds = 10000;
  int exceed = 0;
  for (int k = 0; k < seeds; ++k) {
    const auto s = sample_sensor(EnsembleKind::hadamard, m, m / 2, derive_seed(21, "tail", static_cast<std::uint64_t>(k)));
    if (std::abs(PsiOperator(s).entry(3, 100)) >= eps) ++exceed;
  }
  EXPECT_LE(static_cast<double>(exceed) / seeds, 4.0 * std::exp(-eps * eps * static_cast<double>(m) / 8.0));
}

TEST(HaarSensor, OrthogonalityOfKeptColumns) {
  const auto s = sample_sensor(EnsembleKind::haar, 64, 63, 11);
  const Matrix a = s.dense();
  EXPECT_LE((a.transpose() * a - Matrix::Identity(63, 63)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(HaarSensor, EntrySecondMomentMatchesFiniteM) {
  // E (√m Ψ_ab)² = κ(1−κ) m² / ((m−1)(m+2)) for a ≠ b.
  const std::size_t m = 32;
  const std::size_t n = 16;
  const double kappa = 0.5;
  const int seeds = 4000;
  double acc = 0.0;
  double acc2 = 0.0;
  for (int k = 0; k < seeds; ++k) {
    const auto s = sample_sensor(EnsembleKind::haar, m, n, derive_seed(4, "haar-moment", static_cast<std::uint64_t>(k)));
    const double v = static_cast<double>(m) * std::pow(PsiOperator(s).entry(2, 9), 2);
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / seeds;
  const double se = std::sqrt((acc2 / seeds - mean * mean) / seeds);
  const double md = static_cast<double>(m);
  EXPECT_NEAR(mean, kappa * (1.0 - kappa) * md * md / ((md - 1.0) * (md + 2.0)), 4.0 * se);
}
