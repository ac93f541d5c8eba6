#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/eta.hpp"
#include "unilamp/quadrature.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"

namespace unilamp {

struct LampState {
  int t = 0;
  Vector zhat;  // length m
  Vector xhat;  // length n
};

/// Empirical overlaps of one iterate with the truth, normalised by m.
struct Observables {
  double zz = 0.0;     // <ẑ, z>/m
  double znorm = 0.0;  // ‖ẑ‖²/m
  double xx = 0.0;     // <x̂, x>/m
  double xnorm = 0.0;  // ‖x̂‖²/m
  double cos2 = 0.0;   // <x̂, x>² / (‖x̂‖² ‖x‖²)
};

inline Observables observe(const LampState& s, const Vector& z, const Vector& x) {
  const double m = static_cast<double>(z.size());
  Observables o;
  o.zz = s.zhat.dot(z) / m;
  o.znorm = s.zhat.squaredNorm() / m;
  const double xdot = s.xhat.dot(x);
  const double xhat2 = s.xhat.squaredNorm();
  const double x2 = x.squaredNorm();
  o.xx = xdot / m;
  o.xnorm = xhat2 / m;
  o.cos2 = (xhat2 > 0.0 && x2 > 0.0) ? std::min(1.0, (xdot * xdot) / (xhat2 * x2)) : 0.0;
  return o;
}

inline void require_finite(const Vector& v, const char* what) {
  require(v.allFinite(), ErrorKind::numeric_failure, std::string(what) + ": non-finite iterate");
}

/// ẑ⁰ = α₀ z + σ₀ w, w ~ N(0, I_m) from the stream keyed by `seed`; x̂⁰ = Aᵀ ẑ⁰.
inline LampState lamp_init(double alpha0, double sigma0, const Vector& z, std::uint64_t seed,
                           const SubsampledSensor& sensor) {
  require(static_cast<std::size_t>(z.size()) == sensor.m(), ErrorKind::invalid_dimension,
          "lamp_init: z has length " + std::to_string(z.size()) + ", sensor has m=" + std::to_string(sensor.m()));
  require(sigma0 >= 0.0, ErrorKind::invalid_input, "lamp_init: sigma0 must be >= 0");
  LampState s;
  s.zhat = alpha0 * z;
  if (sigma0 != 0.0) {
    CounterRng rng(derive_seed(seed, "lamp-init-noise"));
    for (Eigen::Index i = 0; i < s.zhat.size(); ++i) s.zhat[i] += sigma0 * rng.normal();
  }
  s.xhat = sensor.apply_At(s.zhat);
  return s;
}

/// Centring constant c subtracted from η(y).
inline double centering_constant(const EtaFunction& eta, const Vector& y, const QuadratureRule& quad) {
  if (eta.centering() == Centering::gaussian_expectation) return eta.gaussian_mean(quad);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) acc += eta(y[i]);
  return acc / static_cast<double>(y.size());
}

/// d_i = η(y_i) − c.
inline Vector denoiser_weights(const EtaFunction& eta, const Vector& y, const QuadratureRule& quad) {
  const double c = centering_constant(eta, y, quad);
  Vector d(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) d[i] = eta(y[i]) - c;
  return d;
}

/// One update with precomputed weights: ẑ′ = ((1/κ) A Aᵀ − I)(d ⊙ ẑ), x̂′ = Aᵀ ẑ′.
inline LampState lamp_step(const LampState& s, const SubsampledSensor& sensor, const Vector& d) {
  require(static_cast<std::size_t>(s.zhat.size()) == sensor.m() && d.size() == s.zhat.size(),
          ErrorKind::invalid_dimension, "lamp_step: dimension mismatch");
  const Vector u = d.cwiseProduct(s.zhat);
  LampState next;
  next.t = s.t + 1;
  next.zhat = apply_AAt(sensor, u) / sensor.kappa() - u;
  require_finite(next.zhat, "lamp_step");
  next.xhat = sensor.apply_At(next.zhat);
  return next;
}

inline LampState lamp_step(const LampState& s, const SubsampledSensor& sensor, const EtaFunction& eta, const Vector& y,
                           const QuadratureRule& quad) {
  require(static_cast<std::size_t>(y.size()) == sensor.m(), ErrorKind::invalid_dimension,
          "lamp_step: y has wrong length");
  return lamp_step(s, sensor, denoiser_weights(eta, y, quad));
}

struct LampConfig {
  double alpha0 = 0.5;
  double sigma0 = 1.0;
  std::uint64_t init_seed = 0;
  int iterations = 10;
  /// One denoiser per step; a single entry is reused for every step.
  std::vector<EtaFunction> etas;
};

struct LampTrajectory {
  std::vector<Observables> observables;  // t = 0..T
  LampState final_state;
};

inline const EtaFunction& eta_at(const std::vector<EtaFunction>& etas, int t) {
  require(!etas.empty(), ErrorKind::invalid_input, "no denoiser configured");
  return etas[std::min(static_cast<std::size_t>(t), etas.size() - 1)];
}

/// z = A x, y = |z|, then T updates, recording observables at every t.
inline LampTrajectory run_lamp(const LampConfig& config, const SubsampledSensor& sensor, const Vector& x,
                               const QuadratureRule& quad) {
  require(config.iterations >= 0, ErrorKind::invalid_input, "run_lamp: iterations must be >= 0");
  const Vector z = sensor.apply_A(x);
  const Vector y = z.cwiseAbs();
  LampTrajectory traj;
  LampState s = lamp_init(config.alpha0, config.sigma0, z, config.init_seed, sensor);
  traj.observables.push_back(observe(s, z, x));
  Vector d;
  const EtaFunction* last = nullptr;
  for (int t = 0; t < config.iterations; ++t) {
    const EtaFunction& eta = eta_at(config.etas, t);
    if (&eta != last) {
      d = denoiser_weights(eta, y, quad);
      last = &eta;
    }
    s = lamp_step(s, sensor, d);
    traj.observables.push_back(observe(s, z, x));
  }
  traj.final_state = std::move(s);
  return traj;
}

}  // namespace unilamp
