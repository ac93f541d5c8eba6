#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "unilamp/error.hpp"

namespace unilamp {

/// Symmetric rule for E f(Z), Z ~ N(0, 1): Σ_i w_i f(z_i).
///
/// Composite Gauss–Legendre against the Gaussian density on graded panels of
/// the half line, mirrored to the negative axis: geometric panels
/// [2^-k-1, 2^-k] resolve features near zero down to width 2^-20, unit panels
/// cover [1, 14], and the mass beyond 14 (about 1e-44) is dropped. `order` is
/// the number of Legendre points per panel; from 8 on, Σ w_i and E Z² are
/// exact to 1e-12. Panel edges sit on the integers,
/// so integrands with a kink there (clipping at z² = L, L a square) stay
/// smooth inside each panel.
///
/// A plain Gauss–Hermite rule is not used: the spectral denoiser has poles at
/// ±i·sqrt(μ/(1−μ)), close to the real axis for small μ, and Gauss–Hermite
/// converges too slowly there.
class QuadratureRule {
 public:
  static constexpr int default_order = 200;
  static constexpr double cutoff = 14.0;
  static constexpr int geometric_panels = 20;

  explicit QuadratureRule(int order = default_order) : order_(order) {
    require(order >= 2, ErrorKind::invalid_input, "QuadratureRule: order must be >= 2, got " + std::to_string(order));
    std::vector<double> edges{0.0};
    for (int k = geometric_panels; k >= 0; --k) edges.push_back(std::ldexp(1.0, -k));
    for (double z = 2.0; z <= cutoff; z += 1.0) edges.push_back(z);

    const auto [x, w] = legendre(order);
    const double inv_root_2pi = 1.0 / std::sqrt(2.0 * M_PI);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      const double mid = 0.5 * (edges[p] + edges[p + 1]);
      const double half = 0.5 * (edges[p + 1] - edges[p]);
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double z = mid + half * x[i];
        half_nodes_.push_back(z);
        half_weights_.push_back(half * w[i] * inv_root_2pi * std::exp(-0.5 * z * z));
      }
    }
    const std::size_t h = half_nodes_.size();
    nodes_.resize(2 * h);
    weights_.resize(2 * h);
    for (std::size_t i = 0; i < h; ++i) {
      nodes_[h - 1 - i] = -half_nodes_[i];
      nodes_[h + i] = half_nodes_[i];
      weights_[h - 1 - i] = weights_[h + i] = half_weights_[i];
    }
  }

  int order() const noexcept { return order_; }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  template <typename F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < half_nodes_.size(); ++i) acc += half_weights_[i] * (f(half_nodes_[i]) + f(-half_nodes_[i]));
    return acc;
  }

  /// E f(Z) for even f: evaluates f on z > 0 only.
  template <typename F>
  double expect_even(F&& f) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < half_nodes_.size(); ++i) acc += 2.0 * half_weights_[i] * f(half_nodes_[i]);
    return acc;
  }

 private:
  // Gauss–Legendre nodes and weights on [-1, 1] by Golub–Welsch.
  static std::pair<std::vector<double>, std::vector<double>> legendre(int order) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
      const double kk = static_cast<double>(k);
      jacobi(k, k - 1) = jacobi(k - 1, k) = kk / std::sqrt(4.0 * kk * kk - 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    require(solver.info() == Eigen::Success, ErrorKind::numeric_failure, "QuadratureRule: eigensolver failed");
    std::vector<double> x(static_cast<std::size_t>(order));
    std::vector<double> w(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
      const double v0 = solver.eigenvectors()(0, i);
      x[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
      w[static_cast<std::size_t>(i)] = 2.0 * v0 * v0;
    }
    for (int i = 0; i < order / 2; ++i) {
      const auto lo = static_cast<std::size_t>(i);
      const auto hi = static_cast<std::size_t>(order - 1 - i);
      const double z = 0.5 * (x[hi] - x[lo]);
      x[lo] = -z;
      x[hi] = z;
      w[lo] = w[hi] = 0.5 * (w[lo] + w[hi]);
    }
    if (order % 2 == 1) x[static_cast<std::size_t>(order / 2)] = 0.0;
    return {std::move(x), std::move(w)};
  }

  int order_;
  std::vector<double> half_nodes_;
  std::vector<double> half_weights_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Probabilists' Hermite polynomial He_j(z) via He_{j+1} = z He_j − j He_{j−1}.
inline double hermite(int j, double z) {
  require(j >= 0, ErrorKind::invalid_input, "hermite: degree must be >= 0");
  if (j == 0) return 1.0;
  double prev = 1.0;
  double cur = z;
  for (int k = 1; k < j; ++k) {
    const double next = z * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// He_0..He_jmax at z in one pass.
inline std::vector<double> hermite_all(int jmax, double z) {
  std::vector<double> h(static_cast<std::size_t>(jmax) + 1);
  h[0] = 1.0;
  if (jmax >= 1) h[1] = z;
  for (int k = 1; k < jmax; ++k) h[static_cast<std::size_t>(k) + 1] = z * h[static_cast<std::size_t>(k)] - k * h[static_cast<std::size_t>(k) - 1];
  return h;
}

/// f̂(j) = E f(Z) He_j(Z). With this normalisation E He_j² = j!.
template <typename F>
double hermite_coeff(F&& f, int j, const QuadratureRule& quad) {
  require(j >= 0 && j <= 12, ErrorKind::invalid_input, "hermite_coeff: degree must lie in [0, 12]");
  return quad.expect([&](double z) { return f(z) * hermite(j, z); });
}

inline double factorial(int j) {
  double r = 1.0;
  for (int k = 2; k <= j; ++k) r *= k;
  return r;
}

}  // namespace unilamp
