#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/eta.hpp"
#include "unilamp/quadrature.hpp"

namespace unilamp {

struct SEState {
  double alpha = 0.0;
  double sigma2 = 0.0;
  int t = 0;
};

/// Gaussian moments of the centred denoiser η̄(z) = η(|z|) − E η(|Z|).
struct EtaMoments {
  double m1 = 0.0;  // E Z² η̄(|Z|)
  double m2 = 0.0;  // E Z² η̄²(|Z|)
  double m3 = 0.0;  // E η̄²(|Z|)
};

inline EtaMoments eta_moments(const EtaFunction& eta, const QuadratureRule& quad) {
  const double c = eta.gaussian_mean(quad);
  EtaMoments mom;
  mom.m1 = quad.expect_even([&](double z) { return z * z * (eta(z) - c); });
  mom.m2 = quad.expect_even([&](double z) {
    const double e = eta(z) - c;
    return z * z * e * e;
  });
  mom.m3 = quad.expect_even([&](double z) {
    const double e = eta(z) - c;
    return e * e;
  });
  return mom;
}

/// α′ = (δ−1) α m1,  σ²′ = (1/κ − 1)(α² (m2 − m1²) + σ² m3),  δ = 1/κ.
inline SEState se_step(const SEState& s, double kappa, const EtaMoments& mom) {
  require(kappa > 0.0 && kappa < 1.0, ErrorKind::invalid_input, "se_step: kappa must lie in (0, 1)");
  const double ratio = 1.0 / kappa - 1.0;
  SEState next;
  next.t = s.t + 1;
  next.alpha = ratio * s.alpha * mom.m1;
  next.sigma2 = ratio * (s.alpha * s.alpha * (mom.m2 - mom.m1 * mom.m1) + s.sigma2 * mom.m3);
  require(next.sigma2 >= -1e-12, ErrorKind::numeric_failure,
          "se_step: negative sigma2 " + std::to_string(next.sigma2));
  if (next.sigma2 < 0.0) next.sigma2 = 0.0;
  return next;
}

struct ObservablesPrediction {
  double zz = 0.0;
  double znorm = 0.0;
  double xx = 0.0;
  double xnorm = 0.0;
  double cos2 = 0.0;
};

/// Large-system limits of the observables for signals with ‖x‖²/m → 1.
///
/// For t ≥ 1 the noise in ẑ is built by Ψ and a fraction 1−κ of its energy
/// survives Aᵀ. The t = 0 noise is isotropic Gaussian and only a fraction κ
/// survives, so ‖x̂⁰‖²/m → α₀² + κσ₀².
inline ObservablesPrediction se_predict_observables(const SEState& s, double kappa) {
  ObservablesPrediction p;
  const double a2 = s.alpha * s.alpha;
  const double kept = s.t == 0 ? kappa : 1.0 - kappa;
  p.zz = s.alpha;
  p.znorm = a2 + s.sigma2;
  p.xx = s.alpha;
  p.xnorm = a2 + kept * s.sigma2;
  p.cos2 = p.xnorm > 0.0 ? a2 / p.xnorm : 0.0;
  return p;
}

/// Iterates se_step T times. `etas` holds one denoiser per step; a single
/// entry is reused, in which case its moments are computed once.
inline std::vector<SEState> se_run(double alpha0, double sigma0, double kappa, const std::vector<EtaFunction>& etas,
                                   int iterations, const QuadratureRule& quad) {
  require(iterations >= 0, ErrorKind::invalid_input, "se_run: iterations must be >= 0");
  require(sigma0 >= 0.0, ErrorKind::invalid_input, "se_run: sigma0 must be >= 0");
  std::vector<SEState> out;
  out.push_back(SEState{alpha0, sigma0 * sigma0, 0});
  if (iterations == 0) return out;
  require(!etas.empty(), ErrorKind::invalid_input, "se_run: no denoiser configured");
  std::vector<EtaMoments> moments;
  moments.reserve(etas.size());
  for (const auto& eta : etas) moments.push_back(eta_moments(eta, quad));
  for (int t = 0; t < iterations; ++t) {
    const auto& mom = moments[std::min(static_cast<std::size_t>(t), moments.size() - 1)];
    out.push_back(se_step(out.back(), kappa, mom));
  }
  return out;
}

inline std::vector<SEState> se_run(double alpha0, double sigma0, double kappa, const EtaFunction& eta, int iterations,
                                   const QuadratureRule& quad) {
  return se_run(alpha0, sigma0, kappa, std::vector<EtaFunction>{eta}, iterations, quad);
}

}  // namespace unilamp
