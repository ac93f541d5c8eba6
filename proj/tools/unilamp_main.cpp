// Command-line front end: run-lamp, se, universality, verify.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "unilamp/experiments/emit.hpp"
#include "unilamp/verify.hpp"

using namespace unilamp;

namespace {

enum Exit : int { ok = 0, check_failed = 1, config_error = 2, numeric_error = 3, universality_gap = 4 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::numeric_failure:
    case ErrorKind::calibration_failure:
      return numeric_error;
    default:
      return config_error;
  }
}

/// Flags shared by run-lamp and universality, layered over an optional JSON config.
struct ExperimentFlags {
  std::string config_path;
  std::optional<std::size_t> m, n;
  std::optional<double> kappa, alpha0, sigma0;
  std::vector<std::string> ensembles;
  std::optional<std::size_t> trials;
  std::optional<int> iters, quad_order;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> eta, centering, signal, normalization;

  void attach(CLI::App* app, bool many_ensembles) {
    app->add_option("--config", config_path, "JSON config file; flags override its keys")->check(CLI::ExistingFile);
    app->add_option("--m", m, "number of measurements");
    auto* on = app->add_option("--n", n, "signal dimension");
    auto* ok = app->add_option("--kappa", kappa, "sampling ratio n/m");
    on->excludes(ok);
    if (many_ensembles)
      app->add_option("--ensemble", ensembles, "hadamard and/or haar (repeatable)");
    else
      app->add_option("--ensemble", ensembles, "hadamard or haar")->expected(1);
    app->add_option("--iters", iters, "LAMP iterations T");
    app->add_option("--alpha0", alpha0, "initial overlap alpha_0");
    app->add_option("--sigma0", sigma0, "initial noise level sigma_0");
    app->add_option("--seed", seed, "master seed");
    app->add_option("--eta", eta, "spectral | custom:<table>");
    app->add_option("--centering", centering, "gaussian | empirical");
    app->add_option("--signal", signal, "gaussian | image:<pgm>");
    app->add_option("--normalization", normalization, "se | figure1 (image signals)");
    app->add_option("--quad-order", quad_order, "Gauss-Legendre points per quadrature panel");
    if (many_ensembles) app->add_option("--trials", trials, "trials per ensemble");
  }

  ExperimentConfig resolve(unsigned threads) const {
    ExperimentConfig c;
    bool m_given = false;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      Json j;
      try {
        j = Json::parse(in);
      } catch (const Json::exception& e) {
        fail(ErrorKind::invalid_input, "config '" + config_path + "': " + e.what());
      }
      apply_config_json(j, c);
      m_given = j.contains("m");
      if (j.contains("kappa") && !j.contains("n")) c.n = 0;
    }
    if (m) c.m = *m;
    require(m_given || m.has_value(), ErrorKind::invalid_input, "missing required flag --m");
    if (n) c.n = *n;
    if (kappa) {
      c.kappa = *kappa;
      c.n = 0;
    }
    if (!ensembles.empty()) {
      c.ensembles.clear();
      for (const auto& e : ensembles) c.ensembles.push_back(parse_ensemble(e));
    }
    if (trials) c.trials = *trials;
    if (iters) c.iterations = *iters;
    if (alpha0) c.alpha0 = *alpha0;
    if (sigma0) c.sigma0 = *sigma0;
    if (seed) c.master_seed = *seed;
    if (eta) c.eta = *eta;
    if (centering) c.centering = parse_centering(*centering);
    if (signal) c.signal = *signal;
    if (normalization) c.normalization = parse_normalization(*normalization);
    if (quad_order) c.quad_order = *quad_order;
    c.threads = threads;
    if (c.n == 0) require(c.kappa > 0.0 && c.kappa < 1.0, ErrorKind::invalid_input, "--kappa must lie in (0, 1)");
    validate(c);
    return c;
  }
};

std::string out_file(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

int cmd_run_lamp(const ExperimentFlags& flags, const std::string& out, bool json, unsigned threads) {
  ExperimentConfig c = flags.resolve(threads);
  require(c.ensembles.size() == 1, ErrorKind::invalid_input, "run-lamp takes exactly one --ensemble");
  c.trials = 1;
  const auto r = run_universality(c);
  const auto csv = out_file(out, "lamp.csv");
  emit_csv(r.records, csv);
  write_text(out_file(out, "lamp.config.json"), config_to_json(c).dump(2) + "\n");
  if (json) std::cout << summary_to_json(r).dump(2) << '\n';
  std::cerr << "run-lamp: wrote " << r.records.size() << " rows to " << csv << '\n';
  return ok;
}

struct SeFlags {
  std::optional<double> kappa;
  std::optional<std::size_t> m, n;
  int iters = 10;
  double alpha0 = 0.5;
  double sigma0 = 1.0;
  std::string eta = "spectral";
  int quad_order = QuadratureRule::default_order;
  std::string csv;
};

int cmd_se(const SeFlags& f, bool json) {
  double kappa = 0.0;
  if (f.kappa) {
    kappa = *f.kappa;
  } else {
    require(f.m && f.n, ErrorKind::invalid_input, "se needs --kappa or both --m and --n");
    require(*f.m > 0, ErrorKind::invalid_input, "--m must be positive");
    kappa = static_cast<double>(*f.n) / static_cast<double>(*f.m);
  }
  require(kappa > 0.0 && kappa < 1.0, ErrorKind::invalid_input, "kappa must lie in (0, 1)");
  ExperimentConfig c;
  c.eta = f.eta;
  c.quad_order = f.quad_order;
  const QuadratureRule quad(f.quad_order);
  const auto eta = resolve_eta(c, kappa, quad);
  const auto se = se_run(f.alpha0, f.sigma0, kappa, eta.eta, f.iters, quad);

  std::ostringstream table;
  table << "t,alpha,sigma2,cos2\n";
  for (const auto& s : se)
    table << s.t << ',' << format_g17(s.alpha) << ',' << format_g17(s.sigma2) << ','
          << format_g17(se_predict_observables(s, kappa).cos2) << '\n';
  if (!f.csv.empty()) write_text(f.csv, table.str());
  if (json) {
    Json rows = Json::array();
    for (const auto& s : se)
      rows.push_back({{"t", s.t}, {"alpha", s.alpha}, {"sigma2", s.sigma2}, {"cos2", se_predict_observables(s, kappa).cos2}});
    Json out{{"kappa", kappa}, {"alpha0", f.alpha0}, {"sigma0", f.sigma0}, {"eta", f.eta}, {"iters", f.iters}, {"trajectory", rows}};
    if (eta.mu) out["mu"] = *eta.mu;
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << table.str();
  }
  return ok;
}

int cmd_universality(const ExperimentFlags& flags, const std::string& out, bool json, bool strict, double threshold,
                     unsigned threads) {
  const ExperimentConfig c = flags.resolve(threads);
  ExperimentResult r;
  try {
    r = run_universality(c);
  } catch (const ExperimentFailure& e) {
    emit_csv(e.partial(), out_file(out, "universality.partial.csv"));
    throw;
  }
  emit_csv(r.records, out_file(out, "universality.csv"));
  emit_svg(r, out_file(out, "universality.svg"));
  Json summary = summary_to_json(r);
  summary["threshold"] = threshold;
  write_text(out_file(out, "universality.json"), summary.dump(2) + "\n");
  if (json) std::cout << summary.dump(2) << '\n';
  const double gap = r.max_universality_gap();
  std::cerr << "universality: max |gap|/pooled stderr = " << gap << " (threshold " << threshold << ")\n";
  if (strict && r.config.ensembles.size() == 2 && gap > threshold) {
    std::cerr << "universality: gap exceeds threshold in --strict mode\n";
    return universality_gap;
  }
  return ok;
}

int cmd_verify(const VerifyOptions& opt, const std::string& out, bool json) {
  const auto records = run_verify(opt);
  const std::string report = verify_report(records, opt).dump(2) + "\n";
  if (!out.empty()) write_text(out_file(out, "verify.json"), report);
  if (json) std::cout << report;
  std::size_t failed = 0;
  for (const auto& r : records) {
    failed += !r.passed;
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << "  observed=" << format_g17(r.observed)
              << " expected=" << format_g17(r.expected) << " tolerance=" << format_g17(r.tolerance) << '\n';
  }
  std::cerr << "verify: " << records.size() - failed << "/" << records.size() << " checks passed\n";
  return failed ? check_failed : ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"unilamp: linearized AMP universality laboratory"};
  app.require_subcommand(1);
  unsigned threads = default_threads();
  bool json = false;
  std::string out = ".";
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::Range(1u, 1024u));
  app.add_flag("--json", json, "machine-readable output on stdout");

  auto* run = app.add_subcommand("run-lamp", "run one LAMP trajectory and write lamp.csv");
  ExperimentFlags run_flags;
  run_flags.attach(run, false);
  run->add_option("--out", out, "output directory");
  run->add_option("--threads", threads, "worker threads");
  run->add_flag("--json", json, "print the summary JSON on stdout");

  auto* se = app.add_subcommand("se", "solve the state-evolution recursion");
  SeFlags se_flags;
  auto* sk = se->add_option("--kappa", se_flags.kappa, "sampling ratio n/m");
  se->add_option("--m", se_flags.m, "measurements (with --n)")->excludes(sk);
  se->add_option("--n", se_flags.n, "signal dimension (with --m)")->excludes(sk);
  se->add_option("--iters", se_flags.iters, "iterations T")->check(CLI::NonNegativeNumber);
  se->add_option("--alpha0", se_flags.alpha0, "initial overlap");
  se->add_option("--sigma0", se_flags.sigma0, "initial noise level")->check(CLI::NonNegativeNumber);
  se->add_option("--eta", se_flags.eta, "spectral | custom:<table>");
  se->add_option("--quad-order", se_flags.quad_order, "points per quadrature panel");
  se->add_option("--csv", se_flags.csv, "also write the table to this CSV file");
  se->add_flag("--json", json, "JSON output");

  auto* uni = app.add_subcommand("universality", "Hadamard vs Haar LAMP trials against state evolution");
  ExperimentFlags uni_flags;
  uni_flags.attach(uni, true);
  bool strict = false;
  double threshold = 3.0;
  uni->add_option("--out", out, "output directory");
  uni->add_flag("--strict", strict, "exit 4 when a universality gap exceeds --threshold");
  uni->add_option("--threshold", threshold, "max |Hadamard - Haar| / pooled stderr")->check(CLI::NonNegativeNumber);
  uni->add_option("--threads", threads, "worker threads");
  uni->add_flag("--json", json, "print the summary JSON on stdout");

  auto* ver = app.add_subcommand("verify", "run the oracle verification suite");
  VerifyOptions vopt;
  std::string verify_out;
  std::optional<double> tolerance;
  ver->add_option("--only", vopt.only, "check group or check name (repeatable)")->delimiter(',');
  ver->add_option("--tolerance", tolerance, "replace every check's tolerance");
  ver->add_option("--seed", vopt.seed, "master seed");
  ver->add_option("--out", verify_out, "also write verify.json into this directory");
  ver->add_option("--threads", threads, "worker threads");
  ver->add_flag("--json", json, "print the JSON report on stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  try {
    if (*run) return cmd_run_lamp(run_flags, out, json, threads);
    if (*se) return cmd_se(se_flags, json);
    if (*uni) return cmd_universality(uni_flags, out, json, strict, threshold, threads);
    vopt.threads = threads;
    vopt.tolerance = tolerance;
    return cmd_verify(vopt, verify_out, json);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return config_error;
  }
}
