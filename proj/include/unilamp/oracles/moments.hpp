#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/oracles/partition.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"
#include "unilamp/stats.hpp"

namespace unilamp {

/// M(Ψ; w, π, a) = ∏_{i<j} Ψ_{a_i a_j}^{w_ij}, with each Ψ entry multiplied by `scale`.
inline double matrix_moment(const Matrix& psi, const WeightedGraph& w, const Labelling& a, double scale = 1.0) {
  const auto& v = a.values();
  require(v.size() == w.k(), ErrorKind::invalid_dimension, "matrix_moment: labelling length must equal k");
  double out = 1.0;
  for (std::size_t i = 1; i <= w.k(); ++i)
    for (std::size_t j = i + 1; j <= w.k(); ++j) {
      const int e = w(i, j);
      if (e == 0) continue;
      require(v[i - 1] <= static_cast<std::size_t>(psi.rows()) && v[j - 1] <= static_cast<std::size_t>(psi.rows()),
              ErrorKind::out_of_range, "matrix_moment: label exceeds matrix size");
      out *= std::pow(scale * psi(static_cast<Eigen::Index>(v[i - 1] - 1), static_cast<Eigen::Index>(v[j - 1] - 1)), e);
    }
  return out;
}

/// The same moment written over block pairs: ∏_{s≤t} (scale·block(s,t))^{W_st},
/// where `block` is Ψ restricted to the block values a_{V_1}, …, a_{V_|π|}.
inline double matrix_moment_blocks(const Matrix& block, const Eigen::MatrixXi& big_w, double scale = 1.0) {
  require(block.rows() == big_w.rows() && block.cols() == big_w.cols(), ErrorKind::invalid_dimension,
          "matrix_moment_blocks: block matrix must be |pi| x |pi|");
  double out = 1.0;
  for (Eigen::Index s = 0; s < big_w.rows(); ++s)
    for (Eigen::Index t = s; t < big_w.cols(); ++t)
      if (big_w(s, t) != 0) out *= std::pow(scale * block(s, t), big_w(s, t));
  return out;
}

/// E Z^p for Z ~ N(0, var): 0 for odd p, var^{p/2} (p−1)!! for even p.
inline double gaussian_moment(int p, double var) {
  require(p >= 0, ErrorKind::invalid_input, "gaussian_moment: negative order");
  if (p % 2 == 1) return 0.0;
  double out = 1.0;
  for (int k = p - 1; k > 0; k -= 2) out *= k;
  return out * std::pow(var, p / 2);
}

/// Limit of E M(√m Ψ; w, π, a) for a conflict-free labelling.
///
/// Haar: independent Gaussians per block pair s ≤ t, variance κ(1−κ) off the
/// diagonal and 2κ(1−κ) on it. Hadamard: 0 unless (w, π) is disassortative,
/// otherwise independent Gaussians of variance κ(1−κ) per pair s < t.
inline double gaussian_moment_limit(const WeightedGraph& w, const Partition& pi, double kappa, EnsembleKind kind) {
  require(kappa > 0.0 && kappa < 1.0, ErrorKind::invalid_input, "gaussian_moment_limit: kappa must lie in (0, 1)");
  const auto big_w = wst(w, pi);
  const double var = kappa * (1.0 - kappa);
  double out = 1.0;
  for (Eigen::Index s = 0; s < big_w.rows(); ++s) {
    if (big_w(s, s) != 0) {
      if (kind == EnsembleKind::hadamard) return 0.0;
      out *= gaussian_moment(big_w(s, s), 2.0 * var);
    }
    for (Eigen::Index t = s + 1; t < big_w.cols(); ++t) out *= gaussian_moment(big_w(s, t), var);
  }
  return out;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
  std::size_t exact_zero = 0;  // trials whose value was exactly 0.0
};

/// Monte-Carlo E M(√m Ψ; w, π, a) over fresh sensors, one derived stream per trial.
inline MonteCarloEstimate mc_matrix_moment(EnsembleKind kind, const WeightedGraph& w, const Partition& pi,
                                           const Labelling& a, std::size_t m, double kappa, std::size_t trials,
                                           std::uint64_t seed, unsigned threads = 1) {
  require(trials >= 1, ErrorKind::invalid_input, "mc_matrix_moment: trials must be >= 1");
  require(m <= SensorLimits{}.dense_max_m, ErrorKind::size_limit, "mc_matrix_moment: m capped at 2^12");
  const std::size_t n = subsample_size(m, kappa);
  const auto big_w = wst(w, pi);
  const double scale = std::sqrt(static_cast<double>(m));
  const std::string role = "mc-moment:" + std::string(to_string(kind));
  const auto values = parallel_map(trials, threads, [&](std::size_t trial) {
    const auto sensor = sample_sensor(kind, m, n, derive_seed(seed, role, trial));
    const Matrix block = PsiOperator(sensor).block(a.block_values());
    return matrix_moment_blocks(block, big_w, scale);
  });
  const auto summary = summarize(values);
  MonteCarloEstimate out;
  out.mean = summary.mean;
  out.stderr_ = summary.stderr_;
  out.trials = trials;
  for (double v : values) out.exact_zero += v == 0.0 ? 1 : 0;
  return out;
}

}  // namespace unilamp
