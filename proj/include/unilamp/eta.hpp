#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/quadrature.hpp"

namespace unilamp {

/// Trimming function T applied to measurement magnitudes inside the spectral denoiser.
class TrimFunction {
 public:
  enum class Kind { optimal, tabulated };

  /// T(y) = 1 − 1/y².
  static TrimFunction optimal() { return TrimFunction(Kind::optimal, {}, {}); }

  /// Monotone piecewise-linear table, held constant outside [ys.front(), ys.back()].
  static TrimFunction tabulated(std::vector<double> ys, std::vector<double> ts) {
    require(ys.size() >= 2 && ys.size() == ts.size(), ErrorKind::invalid_input,
            "tabulated trim: need at least two (y, T) pairs of equal length");
    for (std::size_t i = 1; i < ys.size(); ++i) {
      require(ys[i] > ys[i - 1], ErrorKind::invalid_input, "tabulated trim: y grid must be strictly increasing");
    }
    const bool up = std::is_sorted(ts.begin(), ts.end());
    const bool down = std::is_sorted(ts.rbegin(), ts.rend());
    require(up || down, ErrorKind::invalid_input, "tabulated trim: T values must be monotone");
    require(*std::max_element(ts.begin(), ts.end()) < 1.0, ErrorKind::invalid_input,
            "tabulated trim: T must stay below 1");
    return TrimFunction(Kind::tabulated, std::move(ys), std::move(ts));
  }

  Kind kind() const noexcept { return kind_; }

  double operator()(double y) const {
    if (kind_ == Kind::optimal) return 1.0 - 1.0 / (y * y);
    if (y <= ys_.front()) return ts_.front();
    if (y >= ys_.back()) return ts_.back();
    const auto it = std::upper_bound(ys_.begin(), ys_.end(), y);
    const auto i = static_cast<std::size_t>(it - ys_.begin());
    const double f = (y - ys_[i - 1]) / (ys_[i] - ys_[i - 1]);
    return ts_[i - 1] + f * (ts_[i] - ts_[i - 1]);
  }

  /// sup_y T(y); μ must satisfy μ < 1/sup T when sup T > 0.
  double supremum() const {
    if (kind_ == Kind::optimal) return 1.0;
    return *std::max_element(ts_.begin(), ts_.end());
  }

  /// (1/μ − T(y))⁻¹, written so that y → 0 under T★ gives 0 rather than 1/∞.
  double spectral(double mu, double y) const {
    if (kind_ == Kind::optimal) {
      const double y2 = y * y;
      return y2 / ((1.0 / mu - 1.0) * y2 + 1.0);
    }
    return 1.0 / (1.0 / mu - (*this)(y));
  }

 private:
  TrimFunction(Kind kind, std::vector<double> ys, std::vector<double> ts)
      : kind_(kind), ys_(std::move(ys)), ts_(std::move(ts)) {}

  Kind kind_;
  std::vector<double> ys_;
  std::vector<double> ts_;
};

struct TrimConfig {
  TrimFunction trim = TrimFunction::optimal();
  std::optional<double> mu;
};

inline void require_admissible_mu(double mu, const TrimFunction& trim) {
  const double sup = trim.supremum();
  const double upper = sup > 0.0 ? std::min(1.0, 1.0 / sup) : 1.0;
  require(std::isfinite(mu) && mu > 0.0 && mu < upper, ErrorKind::invalid_input,
          "spectral denoiser: mu=" + std::to_string(mu) + " outside (0, " + std::to_string(upper) + ")");
}

/// ψ₁(μ) = E[Z² G] / E[G], G = (1/μ − T(|Z|))⁻¹.
inline double psi1(double mu, const TrimFunction& trim, const QuadratureRule& quad) {
  require_admissible_mu(mu, trim);
  require(quad.order() >= 40, ErrorKind::invalid_input, "psi1: quadrature order must be >= 40");
  const double num = quad.expect_even([&](double z) { return z * z * trim.spectral(mu, z); });
  const double den = quad.expect_even([&](double z) { return trim.spectral(mu, z); });
  require(std::isfinite(num) && std::isfinite(den) && den > 0.0, ErrorKind::numeric_failure,
          "psi1: non-finite integrand at mu=" + std::to_string(mu));
  return num / den;
}

struct MuBracket {
  double lo = 1e-4;
  double hi = 1.0 - 1e-4;
  int max_steps = 200;
};

/// Solves ψ₁(μ) = 1/(1−κ) by bisection; ψ₁ is increasing in μ.
inline double solve_mu(double kappa, const TrimFunction& trim, const QuadratureRule& quad,
                       const MuBracket& bracket = {}) {
  require(kappa > 0.0 && kappa < 1.0, ErrorKind::invalid_input, "solve_mu: kappa must lie in (0, 1)");
  const double target = 1.0 / (1.0 - kappa);
  double lo = bracket.lo;
  double hi = bracket.hi;
  const double f_lo = psi1(lo, trim, quad) - target;
  const double f_hi = psi1(hi, trim, quad) - target;
  if (!(f_lo < 0.0 && f_hi > 0.0)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "solve_mu: no sign change of psi1(mu) - 1/(1-kappa) on [" << lo << ", " << hi
        << "]: residuals " << f_lo << ", " << f_hi << " (kappa=" << kappa << ")";
    fail(ErrorKind::calibration_failure, msg.str());
  }
  double best = lo;
  double best_res = std::abs(f_lo);
  for (int step = 0; step < bracket.max_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = psi1(mid, trim, quad) - target;
    if (std::abs(f) < best_res) {
      best = mid;
      best_res = std::abs(f);
    }
    if (f == 0.0) break;
    (f < 0.0 ? lo : hi) = mid;
  }
  require(best_res < 1e-10, ErrorKind::calibration_failure,
          "solve_mu: bisection stalled with residual " + std::to_string(best_res));
  return best;
}

inline double calibrate(TrimConfig& config, double kappa, const QuadratureRule& quad, const MuBracket& bracket = {}) {
  config.mu = solve_mu(kappa, config.trim, quad, bracket);
  return *config.mu;
}

enum class Centering { gaussian_expectation, empirical_mean };

/// The denoiser η applied entrywise to the measurement magnitudes.
class EtaFunction {
 public:
  using Fn = std::function<double(double)>;

  static EtaFunction spectral(const TrimConfig& config, Centering centering = Centering::gaussian_expectation) {
    require(config.mu.has_value(), ErrorKind::invalid_input, "spectral denoiser: mu not calibrated");
    const double mu = *config.mu;
    require_admissible_mu(mu, config.trim);
    TrimFunction trim = config.trim;
    EtaFunction eta;
    eta.fn_ = [trim, mu](double y) { return trim.spectral(mu, y); };
    eta.centering_ = centering;
    eta.label_ = "spectral";
    eta.mu_ = mu;
    return eta;
  }

  /// User-supplied η with declared sup-norm and Lipschitz bounds, checked on
  /// a grid over [0, grid_max] rather than trusted.
  static EtaFunction custom(Fn fn, double sup_bound, double lipschitz, Centering centering = Centering::gaussian_expectation,
                            std::string label = "custom", double grid_max = 20.0) {
    require(static_cast<bool>(fn), ErrorKind::invalid_input, "custom denoiser: empty function");
    const int steps = 20000;
    const double h = grid_max / steps;
    double prev = fn(0.0);
    for (int i = 0; i <= steps; ++i) {
      const double y = i * h;
      const double v = fn(y);
      require(std::isfinite(v) && std::abs(v) <= sup_bound * (1.0 + 1e-12) + 1e-300, ErrorKind::invalid_input,
              "custom denoiser '" + label + "': |eta(" + std::to_string(y) + ")| exceeds declared bound");
      if (i > 0) {
        require(std::abs(v - prev) <= lipschitz * h * (1.0 + 1e-9) + 1e-15, ErrorKind::invalid_input,
                "custom denoiser '" + label + "': slope near y=" + std::to_string(y) + " exceeds declared Lipschitz bound");
      }
      prev = v;
    }
    EtaFunction eta;
    eta.fn_ = std::move(fn);
    eta.centering_ = centering;
    eta.label_ = std::move(label);
    return eta;
  }

  /// Piecewise-linear η through (y_i, η_i), constant beyond the ends.
  static EtaFunction from_table(std::vector<double> ys, std::vector<double> vals,
                                Centering centering = Centering::gaussian_expectation, std::string label = "table") {
    require(ys.size() >= 2 && ys.size() == vals.size(), ErrorKind::invalid_input,
            "eta table: need at least two (y, eta) rows");
    double sup = 0.0;
    double lip = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      sup = std::max(sup, std::abs(vals[i]));
      if (i > 0) {
        require(ys[i] > ys[i - 1], ErrorKind::invalid_input, "eta table: y column must be strictly increasing");
        lip = std::max(lip, std::abs(vals[i] - vals[i - 1]) / (ys[i] - ys[i - 1]));
      }
    }
    auto fn = [ys = std::move(ys), vals = std::move(vals)](double y) {
      if (y <= ys.front()) return vals.front();
      if (y >= ys.back()) return vals.back();
      const auto i = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), y) - ys.begin());
      const double f = (y - ys[i - 1]) / (ys[i] - ys[i - 1]);
      return vals[i - 1] + f * (vals[i] - vals[i - 1]);
    };
    return custom(std::move(fn), sup, lip, centering, std::move(label));
  }

  double operator()(double y) const { return fn_(y); }

  Centering centering() const noexcept { return centering_; }
  EtaFunction with_centering(Centering c) const {
    EtaFunction copy = *this;
    copy.centering_ = c;
    return copy;
  }
  const std::string& label() const noexcept { return label_; }
  std::optional<double> mu() const noexcept { return mu_; }

  /// E η(|Z|), Z ~ N(0, 1).
  double gaussian_mean(const QuadratureRule& quad) const {
    return quad.expect_even([&](double z) { return fn_(z); });
  }

  /// q(z) = η(|z|) − E η(|Z|): even, Gaussian-centred.
  Fn centered(const QuadratureRule& quad) const {
    const double c = gaussian_mean(quad);
    return [fn = fn_, c](double z) { return fn(std::abs(z)) - c; };
  }

 private:
  EtaFunction() = default;

  Fn fn_;
  Centering centering_ = Centering::gaussian_expectation;
  std::string label_;
  std::optional<double> mu_;
};

/// Reads a two-column "y,eta" text table (comma or whitespace separated, '#' comments).
inline std::pair<std::vector<double>, std::vector<double>> read_eta_table(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::io_error, "cannot open eta table '" + path + "'");
  std::vector<double> ys;
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double y = 0.0;
    double v = 0.0;
    if (!(fields >> y >> v)) {
      // Tolerate a single header row.
      if (ys.empty()) continue;
      fail(ErrorKind::invalid_input, "eta table '" + path + "': malformed row '" + line + "'");
    }
    ys.push_back(y);
    vals.push_back(v);
  }
  return {std::move(ys), std::move(vals)};
}

}  // namespace unilamp
