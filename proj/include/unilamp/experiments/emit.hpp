#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "unilamp/error.hpp"
#include "unilamp/experiments/universality.hpp"

namespace unilamp {

using Json = nlohmann::json;

inline constexpr const char* csv_header = "ensemble,trial,t,zz,znorm,xx,xnorm,cos2,se_alpha,se_sigma2";

/// %.17g: enough digits for a bit-exact round trip.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const std::vector<RunRecord>& records, std::ostream& out) {
  out << csv_header << '\n';
  for (const auto& r : records) {
    out << to_string(r.ensemble) << ',' << r.trial << ',' << r.t;
    for (double v : {r.obs.zz, r.obs.znorm, r.obs.xx, r.obs.xnorm, r.obs.cos2, r.se_alpha, r.se_sigma2})
      out << ',' << format_g17(v);
    out << '\n';
  }
}

inline void emit_csv(const std::vector<RunRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::io_error, "cannot write '" + path + "'");
  write_csv(records, out);
  out.flush();
  require(out.good(), ErrorKind::io_error, "write to '" + path + "' failed");
}

inline std::vector<RunRecord> read_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == csv_header, ErrorKind::invalid_input, "csv: unexpected header");
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    require(f.size() == 10, ErrorKind::invalid_input, "csv: expected 10 fields in '" + line + "'");
    RunRecord r;
    r.ensemble = parse_ensemble(f[0]);
    r.trial = std::stoull(f[1]);
    r.t = std::stoi(f[2]);
    double* dst[] = {&r.obs.zz, &r.obs.znorm, &r.obs.xx, &r.obs.xnorm, &r.obs.cos2, &r.se_alpha, &r.se_sigma2};
    for (std::size_t i = 0; i < 7; ++i) *dst[i] = std::strtod(f[3 + i].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

// ---- config JSON ----

/// The effective config; `threads` is omitted since it never affects results.
inline Json config_to_json(const ExperimentConfig& c) {
  Json ens = Json::array();
  for (auto e : c.ensembles) ens.push_back(std::string(to_string(e)));
  return Json{{"m", c.m},
              {"n", resolved_n(c)},
              {"ensembles", ens},
              {"trials", c.trials},
              {"iters", c.iterations},
              {"alpha0", c.alpha0},
              {"sigma0", c.sigma0},
              {"eta", c.eta},
              {"centering", std::string(to_string(c.centering))},
              {"signal", c.signal},
              {"normalization", std::string(to_string(c.normalization))},
              {"seed", c.master_seed},
              {"quad_order", c.quad_order}};
}

/// Overlays the keys of `j` onto `c`; unknown keys and wrong types are rejected.
inline void apply_config_json(const Json& j, ExperimentConfig& c) {
  require(j.is_object(), ErrorKind::invalid_input, "config: top level must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "m") c.m = v.get<std::size_t>();
      else if (key == "n") c.n = v.get<std::size_t>();
      else if (key == "kappa") c.kappa = v.get<double>();
      else if (key == "ensembles" || key == "ensemble") {
        c.ensembles.clear();
        if (v.is_string()) c.ensembles.push_back(parse_ensemble(v.get<std::string>()));
        else
          for (const auto& e : v) c.ensembles.push_back(parse_ensemble(e.get<std::string>()));
      } else if (key == "trials") c.trials = v.get<std::size_t>();
      else if (key == "iters") c.iterations = v.get<int>();
      else if (key == "alpha0") c.alpha0 = v.get<double>();
      else if (key == "sigma0") c.sigma0 = v.get<double>();
      else if (key == "eta") c.eta = v.get<std::string>();
      else if (key == "centering") c.centering = parse_centering(v.get<std::string>());
      else if (key == "signal") c.signal = v.get<std::string>();
      else if (key == "normalization") c.normalization = parse_normalization(v.get<std::string>());
      else if (key == "seed") c.master_seed = v.get<std::uint64_t>();
      else if (key == "quad_order") c.quad_order = v.get<int>();
      else if (key == "threads") c.threads = v.get<unsigned>();
      else fail(ErrorKind::invalid_input, "config: unknown key '" + key + "'");
    } catch (const Json::exception& e) {
      fail(ErrorKind::invalid_input, "config: bad value for '" + key + "': " + e.what());
    }
  }
}

// ---- summary JSON ----

inline Json summary_to_json(const ExperimentResult& r) {
  Json steps = Json::array();
  for (const auto& s : r.steps) {
    Json obs = Json::object();
    for (std::size_t o = 0; o < observable_names.size(); ++o) {
      const auto& st = s.stats[o];
      obs[observable_names[o]] = {{"mean", st.mean}, {"stderr", st.stderr_}, {"se", st.predicted}, {"gap", st.gap}};
    }
    steps.push_back({{"ensemble", std::string(to_string(s.ensemble))}, {"t", s.t}, {"observables", obs}});
  }
  Json uni = Json::array();
  for (const auto& c : r.universality)
    uni.push_back({{"t", c.t}, {"observable", observable_names[c.observable]}, {"diff", c.diff}, {"pooled_stderr", c.pooled},
                   {"gap", c.gap}});
  Json se = Json::array();
  for (std::size_t t = 0; t < r.se.size(); ++t)
    se.push_back({{"t", t}, {"alpha", r.se[t].alpha}, {"sigma2", r.se[t].sigma2}, {"cos2", r.predictions[t].cos2}});
  Json out{{"config", config_to_json(r.config)},
           {"kappa", r.kappa},
           {"eta", r.eta_label},
           {"state_evolution", se},
           {"steps", steps},
           {"universality", uni},
           {"max_universality_gap", r.max_universality_gap()}};
  if (r.mu) {
    out["mu"] = *r.mu;
    out["mu_residual"] = r.mu_residual;
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::io_error, "cannot write '" + path + "'");
  out << text;
  out.flush();
  require(out.good(), ErrorKind::io_error, "write to '" + path + "' failed");
}

inline void emit_summary_json(const ExperimentResult& r, const std::string& path) {
  write_text(path, summary_to_json(r).dump(2) + "\n");
}

// ---- SVG ----

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// cos² against t: one line per ensemble with ±1 stderr bars, SE dashed.
inline std::string render_svg(const ExperimentResult& r) {
  const double width = 720, height = 460, left = 70, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  const int tmax = std::max(1, r.config.iterations);
  auto px = [&](double t) { return left + pw * t / tmax; };
  auto py = [&](double v) { return top + ph * (1.0 - std::clamp(v, 0.0, 1.0)); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\" viewBox=\"0 0 "
    << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
    << "<text x=\"" << left << "\" y=\"24\" font-size=\"14\">"
    << xml_escape("squared cosine similarity, m=" + std::to_string(r.config.m) + ", n=" + std::to_string(r.n) + ", " +
                  std::to_string(r.config.trials) + " trials")
    << "</text>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = k / 5.0;
    s << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(left + pw) << "\" y2=\"" << num(py(v))
      << "\" stroke=\"#dddddd\"/>\n"
      << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
  }
  const int tick = std::max(1, tmax / 10);
  for (int t = 0; t <= tmax; t += tick)
    s << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">" << t << "</text>\n";
  s << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(height - 18) << "\" text-anchor=\"middle\">iteration t</text>\n"
    << "<text x=\"18\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << num(top + ph / 2)
    << ")\">cos2</text>\n";

  const std::size_t steps = static_cast<std::size_t>(r.config.iterations) + 1;
  const std::size_t cos2 = 4;
  for (std::size_t e = 0; e < r.config.ensembles.size(); ++e) {
    const char* col = colors[e % 4];
    s << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"2\" points=\"";
    for (std::size_t t = 0; t < steps; ++t)
      s << (t ? " " : "") << num(px(static_cast<double>(t))) << ',' << num(py(r.steps[e * steps + t].stats[cos2].mean));
    s << "\"/>\n";
    for (std::size_t t = 0; t < steps; ++t) {
      const auto& st = r.steps[e * steps + t].stats[cos2];
      const double x = px(static_cast<double>(t));
      s << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(st.mean - st.stderr_)) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(py(st.mean + st.stderr_)) << "\" stroke=\"" << col << "\"/>\n";
    }
    s << "<line x1=\"" << num(left + pw + 15) << "\" y1=\"" << num(top + 20 + 20 * e) << "\" x2=\"" << num(left + pw + 40)
      << "\" y2=\"" << num(top + 20 + 20 * e) << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << num(left + pw + 46) << "\" y=\"" << num(top + 24 + 20 * e) << "\">"
      << xml_escape(std::string(to_string(r.config.ensembles[e]))) << "</text>\n";
  }
  s << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\" points=\"";
  for (std::size_t t = 0; t < steps; ++t)
    s << (t ? " " : "") << num(px(static_cast<double>(t))) << ',' << num(py(r.predictions[t].cos2));
  s << "\"/>\n";
  const double ly = top + 20 + 20 * static_cast<double>(r.config.ensembles.size());
  s << "<line x1=\"" << num(left + pw + 15) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + pw + 40) << "\" y2=\""
    << num(ly) << "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n"
    << "<text x=\"" << num(left + pw + 46) << "\" y=\"" << num(ly + 4) << "\">state evolution</text>\n"
    << "</svg>\n";
  return s.str();
}

inline void emit_svg(const ExperimentResult& r, const std::string& path) { write_text(path, render_svg(r)); }

}  // namespace unilamp
