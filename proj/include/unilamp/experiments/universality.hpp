#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "unilamp/error.hpp"
#include "unilamp/eta.hpp"
#include "unilamp/experiments/signal.hpp"
#include "unilamp/lamp.hpp"
#include "unilamp/quadrature.hpp"
#include "unilamp/rng.hpp"
#include "unilamp/sensor.hpp"
#include "unilamp/state_evolution.hpp"
#include "unilamp/stats.hpp"

namespace unilamp {

struct ExperimentConfig {
  std::size_t m = 4096;
  std::size_t n = 0;    // 0: derived from kappa
  double kappa = 0.4;   // ignored when n > 0
  std::vector<EnsembleKind> ensembles{EnsembleKind::hadamard, EnsembleKind::haar};
  std::size_t trials = 20;
  int iterations = 10;
  double alpha0 = 0.5;
  double sigma0 = 1.0;
  std::string eta = "spectral";      // or "custom:<table path>"
  Centering centering = Centering::gaussian_expectation;
  std::string signal = "gaussian";   // or "image:<pgm path>"
  Normalization normalization = Normalization::se;
  std::uint64_t master_seed = 0;
  int quad_order = QuadratureRule::default_order;
  unsigned threads = 1;
};

inline std::size_t resolved_n(const ExperimentConfig& c) { return c.n > 0 ? c.n : subsample_size(c.m, c.kappa); }

inline std::string_view to_string(Centering c) {
  return c == Centering::gaussian_expectation ? "gaussian" : "empirical";
}

inline Centering parse_centering(std::string_view s) {
  if (s == "gaussian") return Centering::gaussian_expectation;
  if (s == "empirical") return Centering::empirical_mean;
  fail(ErrorKind::invalid_input, "unknown centering '" + std::string(s) + "' (expected gaussian or empirical)");
}

/// Returns the path of an "image:<path>" signal spec, or nullopt for "gaussian".
inline std::optional<std::string> image_path(const std::string& signal) {
  if (signal == "gaussian") return std::nullopt;
  require(signal.rfind("image:", 0) == 0 && signal.size() > 6, ErrorKind::invalid_input,
          "unknown signal '" + signal + "' (expected gaussian or image:<path>)");
  return signal.substr(6);
}

inline void validate(const ExperimentConfig& c) {
  require(c.m >= 2, ErrorKind::invalid_input, "config: m must be >= 2");
  const std::size_t n = resolved_n(c);
  require(n > 0 && n < c.m, ErrorKind::invalid_input, "config: need 0 < n < m");
  require(!c.ensembles.empty(), ErrorKind::invalid_input, "config: at least one ensemble required");
  for (std::size_t i = 0; i < c.ensembles.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      require(c.ensembles[i] != c.ensembles[j], ErrorKind::invalid_input, "config: duplicate ensemble");
  for (auto e : c.ensembles)
    require(e != EnsembleKind::hadamard || is_power_of_two(c.m), ErrorKind::invalid_input,
            "config: the Hadamard ensemble needs m to be a power of two");
  require(c.trials >= 1, ErrorKind::invalid_input, "config: trials must be >= 1");
  require(c.iterations >= 0, ErrorKind::invalid_input, "config: iterations must be >= 0");
  require(std::isfinite(c.alpha0), ErrorKind::invalid_input, "config: alpha0 must be finite");
  require(std::isfinite(c.sigma0) && c.sigma0 >= 0.0, ErrorKind::invalid_input, "config: sigma0 must be >= 0");
  require(c.quad_order >= 40, ErrorKind::invalid_input, "config: quadrature order must be >= 40");
  require(c.eta == "spectral" || (c.eta.rfind("custom:", 0) == 0 && c.eta.size() > 7), ErrorKind::invalid_input,
          "config: eta must be spectral or custom:<table>");
  image_path(c.signal);
}

/// The denoiser a config asks for; for the spectral η, μ is solved at κ = n/m.
struct ResolvedEta {
  EtaFunction eta;
  std::optional<double> mu;
  double residual = 0.0;  // ψ₁(μ) − 1/(1−κ)
};

inline ResolvedEta resolve_eta(const ExperimentConfig& c, double kappa, const QuadratureRule& quad) {
  if (c.eta == "spectral") {
    TrimConfig trim;
    const double mu = calibrate(trim, kappa, quad);
    return ResolvedEta{EtaFunction::spectral(trim, c.centering), mu, psi1(mu, trim.trim, quad) - 1.0 / (1.0 - kappa)};
  }
  const std::string path = c.eta.substr(7);
  auto [ys, vals] = read_eta_table(path);
  return ResolvedEta{EtaFunction::from_table(std::move(ys), std::move(vals), c.centering, "custom:" + path), std::nullopt, 0.0};
}

/// One CSV row.
struct RunRecord {
  EnsembleKind ensemble = EnsembleKind::hadamard;
  std::size_t trial = 0;
  int t = 0;
  Observables obs;
  double se_alpha = 0.0;
  double se_sigma2 = 0.0;
};

inline constexpr std::array<const char*, 5> observable_names{"zz", "znorm", "xx", "xnorm", "cos2"};

inline double observable(const Observables& o, std::size_t i) {
  const std::array<double, 5> v{o.zz, o.znorm, o.xx, o.xnorm, o.cos2};
  return v.at(i);
}

inline double observable(const ObservablesPrediction& p, std::size_t i) {
  const std::array<double, 5> v{p.zz, p.znorm, p.xx, p.xnorm, p.cos2};
  return v.at(i);
}

/// |a − b| / scale, with 0/0 = 0 and x/0 = ∞.
inline double gap_ratio(double diff, double scale) {
  diff = std::abs(diff);
  if (diff == 0.0) return 0.0;
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

struct ObservableStat {
  double mean = 0.0;
  double stderr_ = 0.0;
  double predicted = 0.0;
  double gap = 0.0;  // |mean − predicted| / stderr
};

/// Per-(ensemble, t) statistics across trials.
struct EnsembleStep {
  EnsembleKind ensemble = EnsembleKind::hadamard;
  int t = 0;
  std::array<ObservableStat, 5> stats;
};

/// Two-ensemble comparison of one observable at one t.
struct UniversalityCell {
  int t = 0;
  std::size_t observable = 0;
  double diff = 0.0;    // mean(first) − mean(second)
  double pooled = 0.0;  // pooled standard error
  double gap = 0.0;     // |diff| / pooled
};

struct ExperimentResult {
  ExperimentConfig config;
  std::size_t n = 0;
  double kappa = 0.0;  // n/m
  std::string eta_label;
  std::optional<double> mu;
  double mu_residual = 0.0;
  std::vector<SEState> se;
  std::vector<ObservablesPrediction> predictions;
  std::vector<RunRecord> records;  // ordered by (ensemble, trial, t)
  std::vector<EnsembleStep> steps;
  std::vector<UniversalityCell> universality;  // empty unless two ensembles

  double max_universality_gap() const {
    double g = 0.0;
    for (const auto& c : universality) g = std::max(g, c.gap);
    return g;
  }
};

/// Raised when a trial fails; carries the records of every trial that completed.
class ExperimentFailure : public Error {
 public:
  ExperimentFailure(const Error& cause, std::vector<RunRecord> partial)
      : Error(cause.kind(), cause.what()), partial_(std::move(partial)) {}
  const std::vector<RunRecord>& partial() const noexcept { return partial_; }

 private:
  std::vector<RunRecord> partial_;
};

namespace detail {

inline std::vector<EnsembleStep> summarize_steps(const std::vector<RunRecord>& records, const ExperimentConfig& c,
                                                 const std::vector<ObservablesPrediction>& pred) {
  std::vector<EnsembleStep> out;
  const auto steps = static_cast<std::size_t>(c.iterations) + 1;
  for (std::size_t e = 0; e < c.ensembles.size(); ++e) {
    for (std::size_t t = 0; t < steps; ++t) {
      EnsembleStep step;
      step.ensemble = c.ensembles[e];
      step.t = static_cast<int>(t);
      for (std::size_t o = 0; o < observable_names.size(); ++o) {
        std::vector<double> v(c.trials);
        for (std::size_t k = 0; k < c.trials; ++k) v[k] = observable(records[(e * c.trials + k) * steps + t].obs, o);
        const auto s = summarize(v);
        auto& st = step.stats[o];
        st.mean = s.mean;
        st.stderr_ = s.stderr_;
        st.predicted = observable(pred[t], o);
        st.gap = gap_ratio(s.mean - st.predicted, s.stderr_);
      }
      out.push_back(step);
    }
  }
  return out;
}

}  // namespace detail

/// Runs LAMP over every ensemble × trial and compares against state evolution.
///
/// Seeds: sensor derive_seed(master, "sensor:<ensemble>", trial), signal
/// "signal:<ensemble>" (Gaussian mode; image mode shares one signal across all
/// trials), init noise "init:<ensemble>". Results do not depend on `threads`.
inline ExperimentResult run_universality(const ExperimentConfig& config) {
  validate(config);
  ExperimentResult res;
  res.config = config;
  res.n = resolved_n(config);
  const std::size_t m = config.m;
  res.kappa = static_cast<double>(res.n) / static_cast<double>(m);
  const QuadratureRule quad(config.quad_order);
  const ResolvedEta eta = resolve_eta(config, res.kappa, quad);
  res.eta_label = eta.eta.label();
  res.mu = eta.mu;
  res.mu_residual = eta.residual;
  res.se = se_run(config.alpha0, config.sigma0, res.kappa, eta.eta, config.iterations, quad);
  for (const auto& s : res.se) res.predictions.push_back(se_predict_observables(s, res.kappa));

  std::optional<Vector> shared;
  if (const auto path = image_path(config.signal))
    shared = load_signal_image(*path, res.n, res.kappa, config.normalization);

  const std::size_t steps = static_cast<std::size_t>(config.iterations) + 1;
  const std::size_t jobs = config.ensembles.size() * config.trials;
  std::vector<std::vector<Observables>> traj(jobs);
  std::vector<char> done(jobs, 0);
  LampConfig lamp;
  lamp.alpha0 = config.alpha0;
  lamp.sigma0 = config.sigma0;
  lamp.iterations = config.iterations;
  lamp.etas = {eta.eta};

  auto assemble = [&](bool only_done) {
    std::vector<RunRecord> out;
    for (std::size_t j = 0; j < jobs; ++j) {
      if (only_done && !done[j]) continue;
      for (std::size_t t = 0; t < steps; ++t)
        out.push_back(RunRecord{config.ensembles[j / config.trials], j % config.trials, static_cast<int>(t), traj[j][t],
                                res.se[t].alpha, res.se[t].sigma2});
    }
    return out;
  };

  try {
    parallel_for(jobs, config.threads, [&](std::size_t j) {
      const EnsembleKind kind = config.ensembles[j / config.trials];
      const std::size_t trial = j % config.trials;
      const std::string tag(to_string(kind));
      const auto sensor = sample_sensor(kind, m, res.n, derive_seed(config.master_seed, "sensor:" + tag, trial));
      const Vector x = shared ? *shared : load_signal_gaussian(res.n, res.kappa, derive_seed(config.master_seed, "signal:" + tag, trial));
      LampConfig lc = lamp;
      lc.init_seed = derive_seed(config.master_seed, "init:" + tag, trial);
      traj[j] = run_lamp(lc, sensor, x, quad).observables;
      done[j] = 1;
    });
  } catch (const Error& e) {
    throw ExperimentFailure(e, assemble(true));
  }

  res.records = assemble(false);
  res.steps = detail::summarize_steps(res.records, config, res.predictions);
  if (config.ensembles.size() == 2) {
    for (std::size_t t = 0; t < steps; ++t) {
      const auto& a = res.steps[t];
      const auto& b = res.steps[steps + t];
      for (std::size_t o = 0; o < observable_names.size(); ++o) {
        UniversalityCell cell;
        cell.t = static_cast<int>(t);
        cell.observable = o;
        cell.diff = a.stats[o].mean - b.stats[o].mean;
        cell.pooled = std::hypot(a.stats[o].stderr_, b.stats[o].stderr_);
        cell.gap = gap_ratio(cell.diff, cell.pooled);
        res.universality.push_back(cell);
      }
    }
  }
  return res;
}

}  // namespace unilamp
