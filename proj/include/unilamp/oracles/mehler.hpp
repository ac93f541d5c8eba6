#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/quadrature.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"
#include "unilamp/stats.hpp"

namespace unilamp {

using ScalarFn = std::function<double(double)>;

inline void require_correlation(const Matrix& sigma, std::size_t k, const char* what) {
  require(static_cast<std::size_t>(sigma.rows()) == k && sigma.rows() == sigma.cols(), ErrorKind::invalid_dimension,
          std::string(what) + ": Sigma must be k x k");
  for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
    require(std::abs(sigma(i, i) - 1.0) <= 1e-14, ErrorKind::invalid_input, std::string(what) + ": Sigma needs unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      require(sigma(i, j) == sigma(j, i), ErrorKind::invalid_input, std::string(what) + ": Sigma must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
  require(eig.eigenvalues().minCoeff() > 0.0, ErrorKind::invalid_input, std::string(what) + ": Sigma must be positive definite");
}

inline constexpr std::size_t max_mehler_k = 3;
inline constexpr int max_mehler_order = 6;

/// Σ_{‖w‖≤t} ∏_i f̂_i(d_i(w)) ∏_{i<j} Σ_ij^{w_ij} / w_ij!  over graphs w on [k].
inline double hermite_truncated_product(const std::vector<ScalarFn>& fs, const Matrix& sigma, int t,
                                        const QuadratureRule& quad) {
  const std::size_t k = fs.size();
  require(k >= 1 && k <= max_mehler_k, ErrorKind::size_limit, "hermite_truncated_product: k must lie in [1, 3]");
  require(t >= 0 && t <= max_mehler_order, ErrorKind::size_limit, "hermite_truncated_product: t must lie in [0, 6]");
  require_correlation(sigma, k, "hermite_truncated_product");

  // f̂_i(j) for j ≤ t (a vertex degree never exceeds ‖w‖).
  std::vector<std::vector<double>> coeff(k, std::vector<double>(static_cast<std::size_t>(t) + 1));
  for (std::size_t i = 0; i < k; ++i)
    for (int j = 0; j <= t; ++j) coeff[i][static_cast<std::size_t>(j)] = hermite_coeff(fs[i], j, quad);

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) edges.emplace_back(i, j);

  std::vector<int> w(edges.size(), 0);
  double total = 0.0;
  auto recurse = [&](auto&& self, std::size_t e, int used) -> void {
    if (e == edges.size()) {
      std::vector<int> degree(k, 0);
      double term = 1.0;
      for (std::size_t q = 0; q < edges.size(); ++q) {
        degree[edges[q].first] += w[q];
        degree[edges[q].second] += w[q];
        term *= std::pow(sigma(static_cast<Eigen::Index>(edges[q].first), static_cast<Eigen::Index>(edges[q].second)), w[q]) /
                factorial(w[q]);
      }
      for (std::size_t i = 0; i < k; ++i) term *= coeff[i][static_cast<std::size_t>(degree[i])];
      total += term;
      return;
    }
    for (int v = 0; used + v <= t; ++v) {
      w[e] = v;
      self(self, e + 1, used + v);
    }
    w[e] = 0;
  };
  recurse(recurse, 0, 0);
  return total;
}

/// E ∏ f_i(z_i), z ~ N(0, Σ), by tensor-product quadrature over z = L g (k ≤ 3).
inline double gaussian_product_quadrature(const std::vector<ScalarFn>& fs, const Matrix& sigma, const QuadratureRule& quad) {
  const std::size_t k = fs.size();
  require(k >= 1 && k <= max_mehler_k, ErrorKind::size_limit, "gaussian_product_quadrature: k must lie in [1, 3]");
  require_correlation(sigma, k, "gaussian_product_quadrature");
  const Matrix l = sigma.llt().matrixL();
  const auto& x = quad.nodes();
  const auto& w = quad.weights();
  const std::size_t q = x.size();
  double total = 0.0;
  if (k == 1) return quad.expect(fs[0]);
  for (std::size_t a = 0; a < q; ++a) {
    const double f0 = fs[0](l(0, 0) * x[a]);
    if (f0 == 0.0) continue;
    for (std::size_t b = 0; b < q; ++b) {
      const double z1 = l(1, 0) * x[a] + l(1, 1) * x[b];
      const double f01 = w[a] * w[b] * f0 * fs[1](z1);
      if (k == 2) {
        total += f01;
        continue;
      }
      double inner = 0.0;
      for (std::size_t c = 0; c < q; ++c) inner += w[c] * fs[2](l(2, 0) * x[a] + l(2, 1) * x[b] + l(2, 2) * x[c]);
      total += f01 * inner;
    }
  }
  return total;
}

/// Monte-Carlo E ∏ f_i(z_i), z ~ N(0, Σ) via Cholesky, one stream per sample.
inline MeanStderr mc_gaussian_product(const std::vector<ScalarFn>& fs, const Matrix& sigma, std::size_t samples,
                                      std::uint64_t seed, unsigned threads = 1) {
  const std::size_t k = fs.size();
  require(k >= 1, ErrorKind::invalid_input, "mc_gaussian_product: need at least one function");
  require(samples >= 2, ErrorKind::invalid_input, "mc_gaussian_product: need at least two samples");
  require_correlation(sigma, k, "mc_gaussian_product");
  const Matrix l = sigma.llt().matrixL();
  // Samples are drawn in fixed-size chunks so the result does not depend on `threads`.
  constexpr std::size_t chunk = 4096;
  const std::size_t chunks = (samples + chunk - 1) / chunk;
  std::vector<double> values(samples);
  parallel_for(chunks, threads, [&](std::size_t c) {
    CounterRng rng(derive_seed(seed, "mehler-mc", c));
    Vector g(static_cast<Eigen::Index>(k));
    const std::size_t end = std::min(samples, (c + 1) * chunk);
    for (std::size_t s = c * chunk; s < end; ++s) {
      for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = rng.normal();
      const Vector z = l * g;
      double prod = 1.0;
      for (std::size_t i = 0; i < k; ++i) prod *= fs[i](z[static_cast<Eigen::Index>(i)]);
      values[s] = prod;
    }
  });
  return summarize(values);
}

/// Unit-diagonal k×k matrix with every off-diagonal entry equal to rho.
inline Matrix equicorrelation(std::size_t k, double rho) {
  Matrix s = Matrix::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), rho);
  s.diagonal().setOnes();
  return s;
}

}  // namespace unilamp
