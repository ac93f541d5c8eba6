#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/experiments/signal.hpp"
#include "unilamp/oracles/mehler.hpp"
#include "unilamp/oracles/polynomial.hpp"
#include "unilamp/quadrature.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"
#include "unilamp/stats.hpp"

namespace unilamp {

/// A polynomial slot p(Ψ).
struct PolySlot {
  Polynomial p;
};

/// A function slot q(Z), Z = diag(z): q applied entrywise to the measurements.
struct FnSlot {
  ScalarFn q;
  std::string label;
};

using ProductToken = std::variant<PolySlot, FnSlot>;

/// q(z) = min(z², L) − E min(Z², L): even, bounded, Lipschitz, Gaussian-centred.
inline FnSlot clipped_quadratic(const QuadratureRule& quad, double clip = 25.0) {
  require(clip > 0.0, ErrorKind::invalid_input, "clipped_quadratic: clip level must be positive");
  const double mean = quad.expect_even([clip](double z) { return std::min(z * z, clip); });
  return FnSlot{[clip, mean](double z) { return std::min(z * z, clip) - mean; },
                "clip(z^2," + std::to_string(static_cast<int>(clip)) + ")-mean"};
}

inline PolySlot identity_poly() { return PolySlot{Polynomial{{Rational(0), Rational(1)}}}; }

/// A word alternating centred polynomials of Ψ and centred even functions of Z.
///
/// Type 1 starts and ends with a polynomial, type 2 starts with a polynomial
/// and ends with a function, type 3 starts and ends with a function, type 4
/// starts with a function and ends with a polynomial.
class AlternatingProductSpec {
 public:
  AlternatingProductSpec(int type, std::vector<ProductToken> tokens, const QuadratureRule& quad)
      : type_(type), tokens_(std::move(tokens)) {
    require(type >= 1 && type <= 4, ErrorKind::invalid_input, "alternating product: type must be 1..4");
    require(!tokens_.empty(), ErrorKind::invalid_input, "alternating product: empty word");
    for (std::size_t i = 1; i < tokens_.size(); ++i)
      require(is_poly(i) != is_poly(i - 1), ErrorKind::invalid_input,
              "alternating product: slots " + std::to_string(i) + " and " + std::to_string(i + 1) + " do not alternate");
    const bool starts_p = is_poly(0);
    const bool ends_p = is_poly(tokens_.size() - 1);
    const int actual = starts_p ? (ends_p ? 1 : 2) : (ends_p ? 4 : 3);
    require(actual == type, ErrorKind::invalid_input,
            "alternating product: word has type " + std::to_string(actual) + ", declared " + std::to_string(type));
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (is_poly(i)) {
        require(!std::get<PolySlot>(tokens_[i]).p.coeffs.empty(), ErrorKind::invalid_input, "alternating product: empty polynomial");
        continue;
      }
      const auto& q = std::get<FnSlot>(tokens_[i]).q;
      require(static_cast<bool>(q), ErrorKind::invalid_input, "alternating product: empty function slot");
      const double odd = quad.expect_even([&](double z) {
        const double d = q(z) - q(-z);
        return d * d;
      });
      require(odd <= 1e-10, ErrorKind::invalid_input, "alternating product: q slot " + std::to_string(i + 1) + " is not even");
      const double mean = quad.expect_even(q);
      require(std::abs(mean) <= 1e-10, ErrorKind::invalid_input,
              "alternating product: q slot " + std::to_string(i + 1) + " has E q(Z) = " + std::to_string(mean));
      q_hat2_.push_back(hermite_coeff(q, 2, quad));
    }
  }

  int type() const noexcept { return type_; }
  const std::vector<ProductToken>& tokens() const noexcept { return tokens_; }
  bool is_poly(std::size_t i) const { return std::holds_alternative<PolySlot>(tokens_[i]); }
  std::size_t poly_count() const {
    return static_cast<std::size_t>(std::count_if(tokens_.begin(), tokens_.end(),
                                                  [](const auto& t) { return std::holds_alternative<PolySlot>(t); }));
  }
  /// q̂_i(2) = E q_i(Z) He_2(Z) for the function slots, in word order.
  const std::vector<double>& q_hat2() const noexcept { return q_hat2_; }

  /// Checks E p_i(B − κ) = 0 exactly for every polynomial slot; returns the collapse constants c_i.
  std::vector<Rational> collapse_constants(const Rational& kappa) const {
    std::vector<Rational> out;
    for (const auto& t : tokens_)
      if (const auto* p = std::get_if<PolySlot>(&t)) out.push_back(collapse_polynomial(p->p, kappa));
    return out;
  }

  /// 𝒜 v, applying slots right to left without using the spectrum.
  Vector apply(const PsiOperator& psi, const Vector& qz_source, const Vector& v) const {
    Vector acc = v;
    for (std::size_t i = tokens_.size(); i-- > 0;) {
      if (const auto* p = std::get_if<PolySlot>(&tokens_[i])) {
        acc = polynomial_apply(p->p, psi, acc);
      } else {
        const auto& q = std::get<FnSlot>(tokens_[i]).q;
        for (Eigen::Index a = 0; a < acc.size(); ++a) acc[a] *= q(qz_source[a]);
      }
    }
    return acc;
  }

 private:
  int type_;
  std::vector<ProductToken> tokens_;
  std::vector<double> q_hat2_;
};

enum class TraceMethod { dense, probe };

namespace detail {

// Product of the tokens at `order` as a dense matrix, built left to right.
// A leading run of function slots is kept as a diagonal until the first
// polynomial arrives, so no step costs more than one m×m product.
inline Matrix dense_word(const AlternatingProductSpec& spec, const std::vector<std::size_t>& order, const Matrix& psi,
                         const Vector& z) {
  const auto m = psi.rows();
  Vector diag = Vector::Ones(m);
  Matrix acc;
  bool dense = false;
  for (std::size_t i : order) {
    const auto& tok = spec.tokens()[i];
    if (const auto* p = std::get_if<PolySlot>(&tok)) {
      Matrix pm = polynomial_dense(p->p, psi);
      if (dense) {
        acc = acc * pm;
      } else {
        acc = std::move(pm);
        acc.array().colwise() *= diag.array();
        dense = true;
      }
    } else {
      const auto& q = std::get<FnSlot>(tok).q;
      Vector qz(m);
      for (Eigen::Index a = 0; a < m; ++a) qz[a] = q(z[a]);
      if (dense) acc.array().rowwise() *= qz.transpose().array();
      else diag.array() *= qz.array();
    }
  }
  if (!dense) acc = Matrix(diag.asDiagonal());
  return acc;
}

}  // namespace detail

/// Tr 𝒜(Ψ, Z) / m, Z = diag(z).
///
/// dense: the word is split into halves L, R and Tr(L R) = Σ L ∘ Rᵀ, where
/// Rᵀ is the reversed word (every slot is symmetric).
/// probe: Σ_a (𝒜 e_a)_a with matrix-free applications, one per basis vector.
inline double alternating_trace(const AlternatingProductSpec& spec, const SubsampledSensor& sensor, const Vector& z,
                                TraceMethod method) {
  const std::size_t m = sensor.m();
  require(static_cast<std::size_t>(z.size()) == m, ErrorKind::invalid_dimension, "alternating_trace: z must have length m");
  spec.collapse_constants(sensor_kappa(sensor));
  const PsiOperator psi(sensor);
  if (method == TraceMethod::dense) {
    require(m <= sensor.limits().dense_max_m, ErrorKind::size_limit, "alternating_trace: dense method capped at m <= 2^12");
    const Matrix dense = psi.dense();
    const std::size_t len = spec.tokens().size();
    const std::size_t half = len / 2;
    std::vector<std::size_t> left(half);
    std::vector<std::size_t> right_t(len - half);
    for (std::size_t i = 0; i < half; ++i) left[i] = i;
    for (std::size_t i = 0; i < len - half; ++i) right_t[i] = len - 1 - i;
    const Matrix l = detail::dense_word(spec, left, dense, z);
    const Matrix rt = detail::dense_word(spec, right_t, dense, z);
    return l.cwiseProduct(rt).sum() / static_cast<double>(m);
  }
  double acc = 0.0;
  Vector e = Vector::Zero(static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    e[ia] = 1.0;
    acc += spec.apply(psi, z, e)[ia];
    e[ia] = 0.0;
  }
  return acc / static_cast<double>(m);
}

/// x ~ N(0, I_n / κ) from the given stream, so that ‖x‖²/m ≈ 1.
inline Vector gaussian_signal(std::size_t n, double kappa, std::uint64_t seed) { return load_signal_gaussian(n, kappa, seed); }

/// (1−κ)^k ∏ q̂_i(2) ∏ c_i for a type-1 word with k polynomial slots.
inline double quadratic_form_limit(const AlternatingProductSpec& spec, const Rational& kappa) {
  require(spec.type() == 1, ErrorKind::invalid_input, "quadratic_form_limit: spec must be of type 1");
  double out = std::pow(1.0 - kappa.to_double(), static_cast<double>(spec.poly_count()));
  for (double q : spec.q_hat2()) out *= q;
  for (const auto& c : spec.collapse_constants(kappa)) out *= c.to_double();
  return out;
}

struct QuadraticFormCheck {
  double mean = 0.0;
  double stderr_ = 0.0;
  double variance = 0.0;  // across trials
  double predicted = 0.0;
  double kappa = 0.0;     // n/m actually used
  std::size_t trials = 0;
  std::vector<double> values;
};

/// Monte-Carlo zᵀ𝒜z/m with z = A x, x ~ N(0, I/κ), against the predicted limit.
inline QuadraticFormCheck quadratic_form_limit_check(const AlternatingProductSpec& spec, EnsembleKind kind, std::size_t m,
                                                     double kappa, std::size_t trials, std::uint64_t seed,
                                                     unsigned threads = 1) {
  require(spec.type() == 1, ErrorKind::invalid_input, "quadratic_form_limit_check: spec must be of type 1");
  require(trials >= 2, ErrorKind::invalid_input, "quadratic_form_limit_check: need at least two trials");
  const std::size_t n = subsample_size(m, kappa);
  const Rational exact_kappa(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m));
  QuadraticFormCheck out;
  out.predicted = quadratic_form_limit(spec, exact_kappa);
  out.kappa = exact_kappa.to_double();
  out.trials = trials;
  const std::string tag(to_string(kind));
  out.values = parallel_map(trials, threads, [&](std::size_t trial) {
    const auto sensor = sample_sensor(kind, m, n, derive_seed(seed, "qf-sensor:" + tag, trial));
    const Vector x = gaussian_signal(n, sensor.kappa(), derive_seed(seed, "qf-signal:" + tag, trial));
    const Vector z = sensor.apply_A(x);
    return z.dot(spec.apply(PsiOperator(sensor), z, z)) / static_cast<double>(m);
  });
  const auto s = summarize(out.values);
  out.mean = s.mean;
  out.stderr_ = s.stderr_;
  out.variance = s.variance;
  return out;
}

}  // namespace unilamp
