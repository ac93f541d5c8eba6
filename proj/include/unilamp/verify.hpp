#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "unilamp/error.hpp"
#include "unilamp/hadamard.hpp"
#include "unilamp/oracles/mehler.hpp"
#include "unilamp/oracles/moments.hpp"
#include "unilamp/oracles/partition.hpp"
#include "unilamp/oracles/polynomial.hpp"
#include "unilamp/oracles/products.hpp"
#include "unilamp/quadrature.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"
#include "unilamp/stats.hpp"

namespace unilamp {

/// One check: passes iff |observed − expected| ≤ tolerance. One-sided bounds
/// x ≤ b are recorded as observed = x, expected = 0, tolerance = b.
struct CheckRecord {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
};

struct VerifyOptions {
  std::vector<std::string> only;      // group or check names; empty = all
  std::optional<double> tolerance;    // replaces every check's tolerance
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

namespace detail {

class CheckSink {
 public:
  explicit CheckSink(const VerifyOptions& opt) : opt_(opt) {}

  void add(std::string name, double observed, double expected, double tolerance) {
    if (opt_.tolerance) tolerance = *opt_.tolerance;
    const double err = std::abs(observed - expected);
    const bool ok = std::isfinite(observed) && (err <= tolerance || observed == expected);
    records_.push_back(CheckRecord{std::move(name), ok, observed, expected, tolerance});
  }

  std::uint64_t seed(const std::string& role) const { return derive_seed(opt_.seed, "verify:" + role); }
  unsigned threads() const { return opt_.threads; }
  std::vector<CheckRecord> take() { return std::move(records_); }

 private:
  const VerifyOptions& opt_;
  std::vector<CheckRecord> records_;
};

inline const std::array<EnsembleKind, 2> both_ensembles{EnsembleKind::hadamard, EnsembleKind::haar};

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

inline const QuadratureRule& default_quadrature() {
  static const QuadratureRule rule;
  return rule;
}

// Fast transform against the entry formula on every basis vector, and H·H = I.
inline void check_fwht(CheckSink& sink) {
  double dense_err = 0.0;
  double invol_err = 0.0;
  for (std::size_t m = 2; m <= 1024; m <<= 1) {
    std::vector<double> e(m);
    for (std::size_t j = 1; j <= m; ++j) {
      std::fill(e.begin(), e.end(), 0.0);
      e[j - 1] = 1.0;
      fwht_inplace(e);
      for (std::size_t i = 1; i <= m; ++i) dense_err = std::max(dense_err, std::abs(e[i - 1] - hadamard_entry(i, j, m)));
      fwht_inplace(e);
      for (std::size_t i = 1; i <= m; ++i) invol_err = std::max(invol_err, std::abs(e[i - 1] - (i == j ? 1.0 : 0.0)));
    }
  }
  sink.add("fwht.dense_basis", dense_err, 0.0, 1e-12);
  sink.add("fwht.involution", invol_err, 0.0, 1e-12);
}

// √m (h_i ⊙ h_j) = h_{i⊕j} and (i⊕j)⊕j = i, exhaustively at m = 64.
inline void check_xor(CheckSink& sink) {
  const std::size_t m = 64;
  const double root = std::sqrt(static_cast<double>(m));
  double err = 0.0;
  double group_violations = 0.0;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t k = xor_index(i, j, m);
      group_violations += xor_index(k, j, m) != i;
      for (std::size_t a = 1; a <= m; ++a)
        err = std::max(err, std::abs(root * hadamard_entry(a, i, m) * hadamard_entry(a, j, m) - hadamard_entry(a, k, m)));
    }
  sink.add("xor.column_products", err, 0.0, 1e-13);
  sink.add("xor.group_inverse", group_violations, 0.0, 0.0);
}

// AᵀA = I on the kept columns; exact zero diagonal of the Hadamard Ψ.
inline void check_sensing(CheckSink& sink) {
  for (auto kind : both_ensembles) {
    const std::string tag(to_string(kind));
    const auto sensor = sample_sensor(kind, 256, 100, sink.seed("sensing:" + tag));
    const Matrix a = sensor.dense();
    const Matrix gram = a.transpose() * a;
    sink.add("sensing." + tag + ".orthonormal", (gram - Matrix::Identity(100, 100)).cwiseAbs().maxCoeff(), 0.0, 1e-10);
    const PsiOperator psi(sensor);
    Vector v(256);
    CounterRng rng(sink.seed("sensing-vec:" + tag));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    sink.add("sensing." + tag + ".psi_apply_vs_dense", (psi.apply(v) - psi.dense() * v).cwiseAbs().maxCoeff(), 0.0, 1e-10);
  }
  const auto had = sample_sensor(EnsembleKind::hadamard, 1024, 400, sink.seed("sensing:diag"));
  const Matrix psi = PsiOperator(had).dense();
  sink.add("sensing.hadamard.diagonal_zero", psi.diagonal().cwiseAbs().maxCoeff(), 0.0, 0.0);
}

// Sorted spectrum of dense Ψ against {−κ (m−n times), 1−κ (n times)}.
inline void check_eigen(CheckSink& sink) {
  const std::size_t m = 256;
  const std::size_t n = 100;
  for (auto kind : both_ensembles) {
    const std::string tag(to_string(kind));
    const auto sensor = sample_sensor(kind, m, n, sink.seed("eigen:" + tag));
    const Matrix psi = PsiOperator(sensor).dense();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(psi, Eigen::EigenvaluesOnly);
    const Vector ev = eig.eigenvalues();
    const double kappa = sensor.kappa();
    double err = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double target = i < m - n ? -kappa : 1.0 - kappa;
      err = std::max(err, std::abs(ev[static_cast<Eigen::Index>(i)] - target));
    }
    sink.add("eigen." + tag + ".spectrum", err, 0.0, 1e-8);
  }
}

// p(Ψ) = cΨ for three admissible polynomials.
inline void check_collapse(CheckSink& sink) {
  const std::size_t m = 256;
  const std::size_t n = 100;
  const Rational kappa(static_cast<std::int64_t>(n), static_cast<std::int64_t>(m));
  const std::vector<std::pair<std::string, Polynomial>> ps{
      {"linear", Polynomial{{Rational(0), Rational(1)}}},
      {"quadratic", center_polynomial(Polynomial{{Rational(0), Rational(0), Rational(1)}}, kappa)},
      {"cubic", center_polynomial(Polynomial{{Rational(1), Rational(3), Rational(-1), Rational(2)}}, kappa)},
  };
  for (auto kind : both_ensembles) {
    const std::string tag(to_string(kind));
    const auto sensor = sample_sensor(kind, m, n, sink.seed("collapse:" + tag));
    const Matrix psi = PsiOperator(sensor).dense();
    for (const auto& [label, p] : ps) {
      const double c = collapse_polynomial(p, kappa).to_double();
      sink.add("collapse." + tag + "." + label, (polynomial_dense(p, psi) - c * psi).cwiseAbs().maxCoeff(), 0.0, 1e-11);
    }
  }
  const Polynomial sq{{Rational(-6, 25), Rational(0), Rational(1)}};
  sink.add("collapse.constant_1_minus_2kappa", collapse_polynomial(sq, Rational(2, 5)).to_double(), 0.2, 0.0);
}

// Exhaustive conflict-free counts for the line graph ℓ₄ with singleton blocks.
inline void check_cf_count(CheckSink& sink) {
  const auto w = WeightedGraph::line(4);
  const auto pi = Partition::singletons(4);
  double prev = 0.0;
  double non_monotone = 0.0;
  for (std::size_t m : {8u, 16u, 32u}) {
    const auto c = count_conflict_free(w, pi, m);
    const std::string tag = "cf-count.m" + std::to_string(m);
    const double deficiency = static_cast<double>(c.cset - c.conflict_free);
    sink.add(tag + ".deficiency_bound", deficiency, 0.0, static_cast<double>(c.bound));
    // A labelling conflicts iff a1 ⊕ a2 ⊕ a3 ⊕ a4 = 0: m(m−1)(m−2) of them.
    const double md = static_cast<double>(m);
    sink.add(tag + ".deficiency_exact", deficiency, md * (md - 1) * (md - 2), 0.0);
    const double ratio = static_cast<double>(c.conflict_free) / std::pow(md, 4);
    non_monotone += ratio <= prev;
    prev = ratio;
  }
  sink.add("cf-count.fraction_increasing", non_monotone, 0.0, 0.0);
}

// Hermite truncation against 2-D quadrature for clipped H₂ ⊗ H₂ at ρ = 0.1.
inline void check_mehler(CheckSink& sink) {
  const auto& quad = default_quadrature();
  const double rho = 0.1;
  const Matrix s = equicorrelation(2, rho);
  const ScalarFn h2 = [](double z) { return std::min(z * z, 25.0) - 1.0; };
  const std::vector<ScalarFn> fs{h2, h2};
  const double oracle = gaussian_product_quadrature(fs, s, QuadratureRule(20));
  const double e4 = std::abs(hermite_truncated_product(fs, s, 4, quad) - oracle);
  const double e1 = std::abs(hermite_truncated_product(fs, s, 1, quad) - oracle);
  sink.add("mehler.clipped_h2.t4_error", e4, 0.0, 1e-3);
  sink.add("mehler.clipped_h2.t4_vs_t1", e4, 0.0, e1);
  const ScalarFn h1 = [](double z) { return z; };
  sink.add("mehler.h1.linear", hermite_truncated_product({h1, h1}, equicorrelation(2, 0.3), 3, quad), 0.3, 1e-12);
  const ScalarFn pure_h2 = [](double z) { return z * z - 1.0; };
  sink.add("mehler.h2.quadratic", hermite_truncated_product({pure_h2, pure_h2}, s, 4, quad), 2 * rho * rho, 1e-12);
}

// Monte-Carlo matrix moments of √mΨ against the Gaussian limit.
inline void check_clt(CheckSink& sink) {
  const double kappa = 0.5;
  WeightedGraph w(2);
  w.set(1, 2, 2);
  const auto single = Partition::singletons(2);
  const auto merged = Partition::from_rgs({1, 1});
  {
    const std::size_t m = 4096;
    const Labelling a(single, {3, 1000}, m);
    const auto est = mc_matrix_moment(EnsembleKind::hadamard, w, single, a, m, kappa, 5000, sink.seed("clt:hadamard"), sink.threads());
    sink.add("clt.hadamard.single_edge", est.mean, gaussian_moment_limit(w, single, kappa, EnsembleKind::hadamard),
             3.0 * est.stderr_);
    const Labelling b(merged, {17, 17}, m);
    const auto zero = mc_matrix_moment(EnsembleKind::hadamard, w, merged, b, m, kappa, 1000, sink.seed("clt:intra"), sink.threads());
    sink.add("clt.hadamard.intra_block_nonzero_trials", static_cast<double>(zero.trials - zero.exact_zero), 0.0, 0.0);
  }
  {
    const std::size_t m = 1024;
    const Labelling a(single, {3, 1000}, m);
    const auto est = mc_matrix_moment(EnsembleKind::haar, w, single, a, m, kappa, 2000, sink.seed("clt:haar"), sink.threads());
    sink.add("clt.haar.single_edge", est.mean, gaussian_moment_limit(w, single, kappa, EnsembleKind::haar), 3.0 * est.stderr_);
  }
}

// Normalised trace of the type-2 word Ψ q(Z) Ψ q(Z): median over seeds shrinks with m.
inline void check_trace(CheckSink& sink) {
  const auto& quad = default_quadrature();
  const auto q = clipped_quadratic(quad);
  const AlternatingProductSpec spec(2, {identity_poly(), q, identity_poly(), q}, quad);
  const AlternatingProductSpec psi_only(1, {identity_poly()}, quad);
  const std::size_t seeds = 50;
  const double kappa = 0.4;
  for (auto kind : both_ensembles) {
    const std::string tag(to_string(kind));
    auto median_trace = [&](std::size_t m) {
      const std::size_t n = subsample_size(m, kappa);
      const auto vals = parallel_map(seeds, sink.threads(), [&](std::size_t s) {
        const auto sensor = sample_sensor(kind, m, n, derive_seed(sink.seed("trace-sensor:" + tag + ":" + std::to_string(m)), "seed", s));
        const Vector z = sensor.apply_A(gaussian_signal(n, sensor.kappa(), derive_seed(sink.seed("trace-signal:" + tag + ":" + std::to_string(m)), "seed", s)));
        return std::abs(alternating_trace(spec, sensor, z, TraceMethod::dense));
      });
      return median(vals);
    };
    const double small = median_trace(256);
    const double large = median_trace(4096);
    sink.add("trace." + tag + ".decay_ratio", small > 0.0 ? large / small : INFINITY, 0.0, 0.5);
    sink.add("trace." + tag + ".median_m4096", large, 0.0, 0.05);

    const auto sensor = sample_sensor(kind, 256, 102, sink.seed("trace-small:" + tag));
    const Vector z = sensor.apply_A(gaussian_signal(102, sensor.kappa(), sink.seed("trace-small-x:" + tag)));
    sink.add("trace." + tag + ".trace_psi", alternating_trace(psi_only, sensor, z, TraceMethod::dense), 0.0, 1e-12);
    sink.add("trace." + tag + ".dense_vs_probe", alternating_trace(spec, sensor, z, TraceMethod::dense),
             alternating_trace(spec, sensor, z, TraceMethod::probe), 1e-9);
  }
}

// zᵀ Ψ q(Z) Ψ z / m against (1−κ)² q̂(2), with shrinking variance and agreement across ensembles.
inline void check_qf(CheckSink& sink) {
  const auto& quad = default_quadrature();
  const auto q = clipped_quadratic(quad);
  const AlternatingProductSpec spec(1, {identity_poly(), q, identity_poly()}, quad);
  const double kappa = 0.4;
  const std::size_t trials = 200;
  std::vector<QuadraticFormCheck> large;
  for (auto kind : both_ensembles) {
    const std::string tag(to_string(kind));
    const auto big = quadratic_form_limit_check(spec, kind, 4096, kappa, trials, sink.seed("qf:" + tag + ":4096"), sink.threads());
    const auto small = quadratic_form_limit_check(spec, kind, 512, kappa, trials, sink.seed("qf:" + tag + ":512"), sink.threads());
    sink.add("qf." + tag + ".mean", big.mean, big.predicted, std::max(3.0 * big.stderr_, 0.05 * std::abs(big.predicted)));
    sink.add("qf." + tag + ".variance_ratio", small.variance > 0.0 ? big.variance / small.variance : INFINITY, 0.0, 0.5);
    large.push_back(big);
  }
  sink.add("qf.universality", large[0].mean, large[1].mean, 2.0 * std::hypot(large[0].stderr_, large[1].stderr_));
  const AlternatingProductSpec h4(1, {identity_poly(), FnSlot{[](double z) { return hermite(4, z); }, "H4"}, identity_poly()}, quad);
  sink.add("qf.vanishing_coefficient_limit", quadratic_form_limit(h4, Rational(2, 5)), 0.0, 1e-10);
}

}  // namespace detail

struct CheckGroup {
  const char* name;
  void (*run)(detail::CheckSink&);
};

inline const std::vector<CheckGroup>& check_groups() {
  static const std::vector<CheckGroup> groups{
      {"fwht", detail::check_fwht},     {"xor", detail::check_xor},         {"sensing", detail::check_sensing},
      {"eigen", detail::check_eigen},   {"collapse", detail::check_collapse}, {"cf-count", detail::check_cf_count},
      {"mehler", detail::check_mehler}, {"clt", detail::check_clt},         {"trace", detail::check_trace},
      {"qf", detail::check_qf},
  };
  return groups;
}

/// Runs one named group.
inline std::vector<CheckRecord> run_check_group(const std::string& group, const VerifyOptions& opt) {
  for (const auto& g : check_groups()) {
    if (group != g.name) continue;
    detail::CheckSink sink(opt);
    g.run(sink);
    return sink.take();
  }
  fail(ErrorKind::invalid_input, "unknown check group '" + group + "'");
}

/// Runs every group selected by `opt.only` (group names or full check names).
inline std::vector<CheckRecord> run_verify(const VerifyOptions& opt) {
  std::vector<std::string> wanted;
  for (const auto& sel : opt.only) {
    bool known = false;
    for (const auto& g : check_groups()) {
      const std::string name = g.name;
      if (sel == name || sel.rfind(name + ".", 0) == 0) {
        known = true;
        if (std::find(wanted.begin(), wanted.end(), name) == wanted.end()) wanted.push_back(name);
      }
    }
    require(known, ErrorKind::invalid_input, "unknown check '" + sel + "'");
  }
  std::vector<CheckRecord> out;
  for (const auto& g : check_groups()) {
    if (!opt.only.empty() && std::find(wanted.begin(), wanted.end(), g.name) == wanted.end()) continue;
    for (auto& r : run_check_group(g.name, opt)) {
      const bool selected = opt.only.empty() || std::any_of(opt.only.begin(), opt.only.end(), [&](const std::string& s) {
                              return s == g.name || s == r.name;
                            });
      if (selected) out.push_back(std::move(r));
    }
  }
  require(!out.empty(), ErrorKind::invalid_input, "no check matched the selection");
  return out;
}

inline bool all_passed(const std::vector<CheckRecord>& records) {
  return std::all_of(records.begin(), records.end(), [](const auto& r) { return r.passed; });
}

/// Deterministic report: no timings, keys in fixed order.
inline nlohmann::json verify_report(const std::vector<CheckRecord>& records, const VerifyOptions& opt) {
  nlohmann::json checks = nlohmann::json::array();
  std::size_t failed = 0;
  for (const auto& r : records) {
    failed += !r.passed;
    checks.push_back({{"name", r.name},
                      {"status", r.passed ? "pass" : "fail"},
                      {"observed", r.observed},
                      {"expected", r.expected},
                      {"tolerance", r.tolerance}});
  }
  nlohmann::json out{{"seed", opt.seed}, {"checks", checks}, {"passed", records.size() - failed}, {"failed", failed}};
  if (opt.tolerance) out["tolerance_override"] = *opt.tolerance;
  return out;
}

}  // namespace unilamp
