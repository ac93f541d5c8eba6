#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/sensor.hpp"

namespace unilamp {

/// Exact rational p/q with q > 0 in lowest terms; overflow is an error.
class Rational {
 public:
  Rational(std::int64_t num = 0, std::int64_t den = 1) {
    require(den != 0, ErrorKind::invalid_input, "Rational: zero denominator");
    assign(num, den);
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const noexcept { return num_ == 0; }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num_ == b.num_ && a.den_ == b.den_; }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  static Rational make(__int128 num, __int128 den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      const __int128 r = a % b;
      a = b;
      b = r;
    }
    if (a > 1) {
      num /= a;
      den /= a;
    }
    constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
    require(num <= lim && -num <= lim && den <= lim, ErrorKind::numeric_failure, "Rational: overflow");
    Rational out;
    out.num_ = static_cast<std::int64_t>(num);
    out.den_ = static_cast<std::int64_t>(den);
    return out;
  }

  void assign(std::int64_t num, std::int64_t den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g > 1 ? num / g : num;
    den_ = g > 1 ? den / g : den;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// p(ψ) = Σ_k c_k ψ^k with exact rational coefficients (ascending powers).
struct Polynomial {
  std::vector<Rational> coeffs;

  int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }

  Rational operator()(const Rational& x) const {
    Rational acc;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + it->to_double();
    return acc;
  }

  std::string str() const {
    std::string out;
    for (std::size_t k = coeffs.size(); k-- > 0;) {
      if (coeffs[k].is_zero()) continue;
      if (!out.empty()) out += " + ";
      out += "(" + coeffs[k].str() + ")";
      if (k >= 1) out += "x";
      if (k >= 2) out += "^" + std::to_string(k);
    }
    return out.empty() ? "0" : out;
  }
};

/// κ = n/m as an exact rational.
inline Rational sensor_kappa(const SubsampledSensor& s) {
  return Rational(static_cast<std::int64_t>(s.n()), static_cast<std::int64_t>(s.m()));
}

/// E p(B − κ) for B ~ Bernoulli(κ): κ p(1−κ) + (1−κ) p(−κ).
inline Rational bernoulli_mean(const Polynomial& p, const Rational& kappa) {
  const Rational one(1);
  return kappa * p(one - kappa) + (one - kappa) * p(Rational(0) - kappa);
}

/// p − E p(B − κ): shifts the constant term so the centering condition holds.
inline Polynomial center_polynomial(Polynomial p, const Rational& kappa) {
  require(!p.coeffs.empty(), ErrorKind::invalid_input, "center_polynomial: empty polynomial");
  p.coeffs[0] = p.coeffs[0] - bernoulli_mean(p, kappa);
  return p;
}

/// c = p(1−κ) − p(−κ), so that p(Ψ) = c Ψ when E p(B − κ) = 0 (checked exactly).
inline Rational collapse_polynomial(const Polynomial& p, const Rational& kappa) {
  require(kappa.num() > 0 && kappa.num() < kappa.den(), ErrorKind::invalid_input, "collapse_polynomial: kappa must lie in (0, 1)");
  const Rational mean = bernoulli_mean(p, kappa);
  require(mean.is_zero(), ErrorKind::invalid_input,
          "collapse_polynomial: E p(B - kappa) = " + mean.str() + " != 0 for p = " + p.str());
  const Rational one(1);
  return p(one - kappa) - p(Rational(0) - kappa);
}

/// p(Ψ) as a dense matrix by Horner's rule; no use of the spectrum.
inline Matrix polynomial_dense(const Polynomial& p, const Matrix& psi) {
  const auto m = psi.rows();
  require(!p.coeffs.empty(), ErrorKind::invalid_input, "polynomial_dense: empty polynomial");
  const int d = p.degree();
  if (d == 0) return p.coeffs[0].to_double() * Matrix::Identity(m, m);
  Matrix acc = p.coeffs[static_cast<std::size_t>(d)].to_double() * psi;
  acc.diagonal().array() += p.coeffs[static_cast<std::size_t>(d - 1)].to_double();
  for (int k = d - 2; k >= 0; --k) {
    acc = psi * acc;
    acc.diagonal().array() += p.coeffs[static_cast<std::size_t>(k)].to_double();
  }
  return acc;
}

/// p(Ψ) v matrix-free: Horner with repeated Ψ applications.
inline Vector polynomial_apply(const Polynomial& p, const PsiOperator& psi, const Vector& v) {
  require(!p.coeffs.empty(), ErrorKind::invalid_input, "polynomial_apply: empty polynomial");
  Vector acc = p.coeffs.back().to_double() * v;
  for (int k = p.degree() - 1; k >= 0; --k) acc = psi.apply(acc) + p.coeffs[static_cast<std::size_t>(k)].to_double() * v;
  return acc;
}

}  // namespace unilamp
