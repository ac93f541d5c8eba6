#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/hadamard.hpp"
#include "unilamp/rng.hpp"

namespace unilamp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class EnsembleKind { hadamard, haar };

inline std::string_view to_string(EnsembleKind kind) {
  return kind == EnsembleKind::hadamard ? "hadamard" : "haar";
}

inline EnsembleKind parse_ensemble(std::string_view name) {
  if (name == "hadamard") return EnsembleKind::hadamard;
  if (name == "haar") return EnsembleKind::haar;
  fail(ErrorKind::invalid_input, "unknown ensemble '" + std::string(name) + "' (expected hadamard or haar)");
}

/// Size caps. Haar storage is m·n doubles; dense assembly is for oracles only.
struct SensorLimits {
  std::size_t haar_max_m = std::size_t{1} << 13;
  std::size_t dense_max_m = std::size_t{1} << 12;
};

/// Matrix-free sensing operator A = U P S with orthonormal columns.
///
/// Hadamard: U = H, applied by the fast transform in O(m log m).
///
/// Haar: the n kept columns of a Haar-distributed U are represented as
/// Q_thin·D, where Q_thin = H_1 ⋯ H_n [I_n; 0] is the product of the
/// Householder reflectors Gaussian QR would produce and D = sign(diag R)
/// makes the R diagonal positive. Because a Gaussian column stays i.i.d.
/// Gaussian after any fixed reflection, reflector k is built from a fresh
/// Gaussian vector of length m-k+1; this is the law of QR applied to an
/// m×n Gaussian matrix at O(mn) cost. Right-invariance of Haar measure lets
/// these columns sit at the positions in `selection()`.
class SubsampledSensor {
 public:
  static SubsampledSensor sample(EnsembleKind kind, std::size_t m, std::size_t n, std::uint64_t seed,
                                 const SensorLimits& limits = {}) {
    require(n > 0 && n < m, ErrorKind::invalid_input,
            "sample_sensor: need 0 < n < m, got n=" + std::to_string(n) + " m=" + std::to_string(m));
    if (kind == EnsembleKind::hadamard) {
      require(is_power_of_two(m) && m >= 2, ErrorKind::invalid_dimension,
              "sample_sensor: Hadamard ensemble needs m = 2^l, got m=" + std::to_string(m));
    } else {
      require(m <= limits.haar_max_m, ErrorKind::size_limit,
              "sample_sensor: Haar ensemble capped at m <= " + std::to_string(limits.haar_max_m));
    }

    SubsampledSensor s;
    s.kind_ = kind;
    s.m_ = m;
    s.n_ = n;
    s.kappa_ = static_cast<double>(n) / static_cast<double>(m);
    s.seed_ = seed;
    s.limits_ = limits;

    CounterRng pick(derive_seed(seed, "selection"));
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), std::size_t{1});
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(pick.below(m - i));
      std::swap(perm[i], perm[j]);
    }
    s.selection_.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(s.selection_.begin(), s.selection_.end());
    s.selected_.assign(m, 0);
    for (std::size_t idx : s.selection_) s.selected_[idx - 1] = 1;

    if (kind == EnsembleKind::haar) s.sample_haar_columns();
    return s;
  }

  EnsembleKind kind() const noexcept { return kind_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }
  double kappa() const noexcept { return kappa_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const SensorLimits& limits() const noexcept { return limits_; }

  /// Kept column indices of U, 1-based, ascending.
  const std::vector<std::size_t>& selection() const noexcept { return selection_; }

  /// 0-based membership mask of the selection; B = diag(mask).
  bool is_selected(std::size_t zero_based) const noexcept { return selected_[zero_based] != 0; }

  Vector apply_A(const Vector& x) const {
    require(static_cast<std::size_t>(x.size()) == n_, ErrorKind::invalid_dimension,
            "apply_A: expected length " + std::to_string(n_) + ", got " + std::to_string(x.size()));
    if (kind_ == EnsembleKind::hadamard) {
      Vector v = Vector::Zero(static_cast<Eigen::Index>(m_));
      for (std::size_t j = 0; j < n_; ++j) v[static_cast<Eigen::Index>(selection_[j] - 1)] = x[static_cast<Eigen::Index>(j)];
      fwht_inplace(std::span<double>(v.data(), m_));
      return v;
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(m_));
    v.head(static_cast<Eigen::Index>(n_)) = signs_.cwiseProduct(x);
    v.applyOnTheLeft(householders());
    return v;
  }

  Vector apply_At(const Vector& z) const {
    require(static_cast<std::size_t>(z.size()) == m_, ErrorKind::invalid_dimension,
            "apply_At: expected length " + std::to_string(m_) + ", got " + std::to_string(z.size()));
    if (kind_ == EnsembleKind::hadamard) {
      Vector u = z;
      fwht_inplace(std::span<double>(u.data(), m_));
      Vector out(static_cast<Eigen::Index>(n_));
      for (std::size_t j = 0; j < n_; ++j) out[static_cast<Eigen::Index>(j)] = u[static_cast<Eigen::Index>(selection_[j] - 1)];
      return out;
    }
    Vector u = z;
    u.applyOnTheLeft(householders().adjoint());
    return signs_.cwiseProduct(u.head(static_cast<Eigen::Index>(n_)));
  }

  /// Row a of A (1-based), i.e. Aᵀ e_a.
  Vector row(std::size_t a) const {
    require_index(a, m_, "SubsampledSensor::row");
    if (kind_ == EnsembleKind::hadamard) {
      Vector out(static_cast<Eigen::Index>(n_));
      const double scale = 1.0 / std::sqrt(static_cast<double>(m_));
      for (std::size_t j = 0; j < n_; ++j) out[static_cast<Eigen::Index>(j)] = walsh_sign(a, selection_[j]) * scale;
      return out;
    }
    Vector e = Vector::Zero(static_cast<Eigen::Index>(m_));
    e[static_cast<Eigen::Index>(a - 1)] = 1.0;
    return apply_At(e);
  }

  /// Dense m×n copy of A, for oracle comparisons at desk scale.
  Matrix dense() const {
    require(m_ <= limits_.dense_max_m, ErrorKind::size_limit,
            "dense sensor assembly capped at m <= " + std::to_string(limits_.dense_max_m));
    const auto m = static_cast<Eigen::Index>(m_);
    const auto n = static_cast<Eigen::Index>(n_);
    if (kind_ == EnsembleKind::hadamard) {
      Matrix a(m, n);
      for (Eigen::Index j = 0; j < n; ++j) {
        Vector e = Vector::Zero(m);
        e[static_cast<Eigen::Index>(selection_[static_cast<std::size_t>(j)] - 1)] = 1.0;
        fwht_inplace(std::span<double>(e.data(), m_));
        a.col(j) = e;
      }
      return a;
    }
    // Backward accumulation in blocks: reflectors k >= k0 never touch the
    // leading k0 columns of [I; 0], so only the trailing block is updated.
    Matrix a = Matrix::Identity(m, n);
    constexpr Eigen::Index block = 48;
    for (Eigen::Index k1 = n; k1 > 0; k1 -= block) {
      const Eigen::Index k0 = std::max<Eigen::Index>(0, k1 - block);
      const auto seq = Eigen::householderSequence(reflectors_.block(k0, k0, m - k0, k1 - k0), tau_.segment(k0, k1 - k0));
      a.bottomRightCorner(m - k0, n - k0).applyOnTheLeft(seq);
    }
    return a * signs_.asDiagonal();
  }

 private:
  SubsampledSensor() = default;

  Eigen::HouseholderSequence<Matrix, Vector> householders() const {
    return Eigen::householderSequence(reflectors_, tau_);
  }

  void sample_haar_columns() {
    const auto m = static_cast<Eigen::Index>(m_);
    const auto n = static_cast<Eigen::Index>(n_);
    CounterRng gauss(derive_seed(seed_, "haar-basis"));
    reflectors_ = Matrix::Zero(m, n);
    tau_.resize(n);
    signs_.resize(n);
    Vector g;
    for (Eigen::Index k = 0; k < n; ++k) {
      const Eigen::Index len = m - k;
      g.resize(len);
      for (Eigen::Index i = 0; i < len; ++i) g[i] = gauss.normal();
      Vector essential(len - 1);
      double tau = 0.0;
      double beta = 0.0;
      g.makeHouseholder(essential, tau, beta);
      reflectors_.col(k).tail(len - 1) = essential;
      reflectors_(k, k) = beta;
      tau_[k] = tau;
      signs_[k] = beta >= 0.0 ? 1.0 : -1.0;
    }
  }

  EnsembleKind kind_ = EnsembleKind::hadamard;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  double kappa_ = 0.0;
  std::uint64_t seed_ = 0;
  SensorLimits limits_{};
  std::vector<std::size_t> selection_;
  std::vector<unsigned char> selected_;
  Matrix reflectors_;
  Vector tau_;
  Vector signs_;
};

/// n = round(κ m), validated to satisfy 0 < n < m.
inline std::size_t subsample_size(std::size_t m, double kappa) {
  require(kappa > 0.0 && kappa < 1.0, ErrorKind::invalid_input, "kappa must lie in (0, 1)");
  const auto n = static_cast<std::size_t>(std::llround(kappa * static_cast<double>(m)));
  require(n > 0 && n < m, ErrorKind::invalid_input,
          "kappa=" + std::to_string(kappa) + " gives n=" + std::to_string(n) + " outside (0, m) for m=" + std::to_string(m));
  return n;
}

inline SubsampledSensor sample_sensor(EnsembleKind kind, std::size_t m, std::size_t n, std::uint64_t seed,
                                      const SensorLimits& limits = {}) {
  return SubsampledSensor::sample(kind, m, n, seed, limits);
}

/// Ψ = U B̄ Uᵀ = A Aᵀ − κ I, with B̄ = diag(1−κ on the selection, −κ elsewhere).
///
/// Eigenvalues are 1−κ (multiplicity n) and −κ (multiplicity m−n). Holds a
/// non-owning pointer; the sensor must outlive it.
class PsiOperator {
 public:
  explicit PsiOperator(const SubsampledSensor& sensor) : sensor_(&sensor) {}

  const SubsampledSensor& sensor() const noexcept { return *sensor_; }
  std::size_t m() const noexcept { return sensor_->m(); }
  double kappa() const noexcept { return sensor_->kappa(); }

  Vector apply(const Vector& v) const {
    const std::size_t m = sensor_->m();
    require(static_cast<std::size_t>(v.size()) == m, ErrorKind::invalid_dimension,
            "apply_Psi: expected length " + std::to_string(m) + ", got " + std::to_string(v.size()));
    const double kappa = sensor_->kappa();
    if (sensor_->kind() == EnsembleKind::hadamard) {
      Vector u = v;
      fwht_inplace(std::span<double>(u.data(), m));
      for (std::size_t i = 0; i < m; ++i) u[static_cast<Eigen::Index>(i)] *= sensor_->is_selected(i) ? 1.0 - kappa : -kappa;
      fwht_inplace(std::span<double>(u.data(), m));
      return u;
    }
    Vector out = sensor_->apply_A(sensor_->apply_At(v));
    out -= kappa * v;
    return out;
  }

  /// Ψ_ab = Σ_i u_ai u_bi B̄_ii (1-based). Exact for the Hadamard kind: the
  /// sum is carried in integers and scaled by 1/m once, so Ψ_aa == 0.
  double entry(std::size_t a, std::size_t b) const {
    const std::size_t m = sensor_->m();
    require(m <= sensor_->limits().dense_max_m, ErrorKind::size_limit,
            "psi_entry capped at m <= " + std::to_string(sensor_->limits().dense_max_m));
    require_index(a, m, "psi_entry");
    require_index(b, m, "psi_entry");
    if (sensor_->kind() == EnsembleKind::hadamard) return hadamard_entry_exact(a, b);
    const double g = sensor_->row(a).dot(sensor_->row(b));
    return a == b ? g - sensor_->kappa() : g;
  }

  /// Principal submatrix of Ψ on distinct labels (1-based), entries as in entry().
  Matrix block(const std::vector<std::size_t>& labels) const {
    const auto r = static_cast<Eigen::Index>(labels.size());
    Matrix out(r, r);
    if (sensor_->kind() == EnsembleKind::hadamard) {
      for (Eigen::Index s = 0; s < r; ++s)
        for (Eigen::Index t = s; t < r; ++t)
          out(s, t) = out(t, s) = hadamard_entry_exact(labels[static_cast<std::size_t>(s)], labels[static_cast<std::size_t>(t)]);
      return out;
    }
    Matrix rows(static_cast<Eigen::Index>(sensor_->n()), r);
    for (Eigen::Index s = 0; s < r; ++s) rows.col(s) = sensor_->row(labels[static_cast<std::size_t>(s)]);
    out = rows.transpose() * rows;
    out.diagonal().array() -= sensor_->kappa();
    return out;
  }

  /// Dense m×m Ψ. Hadamard: Ψ_ab = c[(a−1) XOR (b−1)]/m − κ δ_ab with c the
  /// integer Walsh transform of the selection indicator.
  Matrix dense() const {
    const std::size_t m = sensor_->m();
    require(m <= sensor_->limits().dense_max_m, ErrorKind::size_limit,
            "dense Psi capped at m <= " + std::to_string(sensor_->limits().dense_max_m));
    const auto mi = static_cast<Eigen::Index>(m);
    const double kappa = sensor_->kappa();
    if (sensor_->kind() == EnsembleKind::hadamard) {
      std::vector<std::int64_t> counts(m, 0);
      for (std::size_t i = 0; i < m; ++i) counts[i] = sensor_->is_selected(i) ? 1 : 0;
      walsh_counts_inplace(counts);
      const double inv_m = 1.0 / static_cast<double>(m);
      Matrix psi(mi, mi);
      for (std::size_t b = 0; b < m; ++b) {
        double* col = psi.col(static_cast<Eigen::Index>(b)).data();
        for (std::size_t a = 0; a < m; ++a) col[a] = static_cast<double>(counts[a ^ b]) * inv_m;
      }
      // counts[0] == n and m is a power of two, so n/m − κ is exactly 0.
      psi.diagonal().array() -= kappa;
      return psi;
    }
    const Matrix a = sensor_->dense();
    Matrix psi = Matrix::Zero(mi, mi);
    psi.selfadjointView<Eigen::Lower>().rankUpdate(a);
    psi.triangularView<Eigen::StrictlyUpper>() = psi.transpose();
    psi.diagonal().array() -= kappa;
    return psi;
  }

 private:
  double hadamard_entry_exact(std::size_t a, std::size_t b) const {
    const std::size_t m = sensor_->m();
    std::int64_t on_selection = 0;
    std::int64_t everywhere = 0;
    for (std::size_t i = 1; i <= m; ++i) {
      const int s = walsh_sign(a, i) * walsh_sign(b, i);
      everywhere += s;
      if (sensor_->is_selected(i - 1)) on_selection += s;
    }
    // Σ_i u_ai u_bi (B_ii − κ) = (Σ_{i∈S} s_i − κ Σ_i s_i) / m
    return (static_cast<double>(on_selection) - sensor_->kappa() * static_cast<double>(everywhere)) /
           static_cast<double>(m);
  }

  const SubsampledSensor* sensor_;
};

/// (AAᵀ) v as an explicit operator, used by the message-passing update.
inline Vector apply_AAt(const SubsampledSensor& s, const Vector& v) { return s.apply_A(s.apply_At(v)); }

}  // namespace unilamp
