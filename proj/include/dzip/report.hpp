#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dzip/backtest.hpp"
#include "dzip/count_model.hpp"
#include "dzip/diagnostics.hpp"
#include "dzip/engine.hpp"
#include "dzip/error.hpp"

namespace dzip {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr const char* version_string = "0.1.0";

/// Creates `dir` if needed and checks it accepts a file.
inline void ensure_output_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw UsageError("cannot create output directory " + dir.string());
  const fs::path probe = dir / ".write_probe";
  {
    std::ofstream f(probe);
    if (!f) throw UsageError("output directory " + dir.string() + " is not writable");
  }
  fs::remove(probe, ec);
}

inline std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out.precision(10);
  return out;
}

// ---------------------------------------------------------------------------
// Backtest tables

inline const char* report_header = "dataset,model,LPS,RMSE,Corr,q01,q05,q10,q90,q95,q99,n";

inline void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << report_header << '\n';
  char buf[64];
  const auto fmt = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.dataset << ',' << variant_name(r.variant) << ',' << fmt(r.lps) << ',' << fmt(r.rmse) << ','
        << (r.correlation ? fmt(*r.correlation) : std::string("NA"));
    for (double c : r.coverage) out << ',' << fmt(c);
    out << ',' << r.n << '\n';
  }
}

inline json to_json(const ReportRow& r) {
  json j{{"dataset", r.dataset},   {"model", variant_name(r.variant)}, {"LPS", r.lps},
         {"RMSE", r.rmse},         {"n", r.n},                         {"complete", r.complete},
         {"coverage", r.coverage}};
  j["Corr"] = r.correlation ? json(*r.correlation) : json(nullptr);
  return j;
}

inline json to_json(const WindowForecast& f) {
  return {{"log_score", std::isfinite(f.log_score) ? json(f.log_score) : json(nullptr)},
          {"mean", f.mean},
          {"quantiles", f.quantiles}};
}

inline json to_json(const BacktestReport& rep) {
  json j;
  j["budget"] = {{"burn", rep.n_burn}, {"draws", rep.n_draws}, {"windows", rep.n_windows},
                 {"train_length", rep.train_length}, {"seed", rep.master_seed}};
  j["quantile_levels"] = coverage_levels;
  j["conditional"] = json::array();
  for (const auto& r : rep.conditional) j["conditional"].push_back(to_json(r));
  j["full_sample"] = json::array();
  for (const auto& r : rep.full_sample) j["full_sample"].push_back(to_json(r));
  j["windows"] = json::array();
  for (const auto& d : rep.details) {
    for (const auto& w : d.windows) {
      json jw{{"dataset", d.dataset},   {"model", variant_name(d.variant)},
              {"window", w.window},     {"holdout_index", w.holdout_index},
              {"week", w.label},        {"observed", w.observed},
              {"ok", w.ok},             {"latent_acceptance", w.latent_acceptance}};
      if (w.ok) {
        jw["conditional"] = to_json(w.conditional);
        jw["unconditional"] = to_json(w.unconditional);
      } else {
        jw["error"] = w.error;
      }
      j["windows"].push_back(std::move(jw));
    }
  }
  return j;
}

/// Rebuilds a report from its JSON form (per-window detail is re-aggregated).
inline BacktestReport backtest_from_json(const json& j) {
  BacktestReport rep;
  const auto& b = j.at("budget");
  rep.n_burn = b.at("burn").get<std::uint64_t>();
  rep.n_draws = b.at("draws").get<std::uint64_t>();
  rep.n_windows = b.at("windows").get<std::size_t>();
  rep.train_length = b.at("train_length").get<std::size_t>();
  rep.master_seed = b.at("seed").get<std::uint64_t>();
  for (const auto& jw : j.at("windows")) {
    const std::string dataset = jw.at("dataset").get<std::string>();
    const auto variant = parse_variant(jw.at("model").get<std::string>());
    if (!variant) throw DataError("unknown model in report");
    auto it = std::find_if(rep.details.begin(), rep.details.end(), [&](const VariantResult& r) {
      return r.dataset == dataset && r.variant == *variant;
    });
    if (it == rep.details.end()) {
      rep.details.push_back({dataset, *variant, {}});
      it = std::prev(rep.details.end());
    }
    WindowRecord w;
    w.window = jw.at("window").get<std::size_t>();
    w.holdout_index = jw.at("holdout_index").get<std::size_t>();
    w.label = jw.at("week").get<std::string>();
    w.observed = jw.at("observed").get<Count>();
    w.ok = jw.at("ok").get<bool>();
    w.latent_acceptance = jw.value("latent_acceptance", 0.0);
    const auto read = [](const json& jf) {
      WindowForecast f;
      f.log_score = jf.at("log_score").is_null() ? neg_inf : jf.at("log_score").get<double>();
      f.mean = jf.at("mean").get<double>();
      f.quantiles = jf.at("quantiles").get<std::array<Count, 6>>();
      return f;
    };
    if (w.ok) {
      w.conditional = read(jw.at("conditional"));
      w.unconditional = read(jw.at("unconditional"));
    } else {
      w.error = jw.value("error", std::string{});
    }
    it->windows.push_back(std::move(w));
  }
  for (const auto& d : rep.details) {
    rep.conditional.push_back(aggregate(d, true));
    rep.full_sample.push_back(aggregate(d, false));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Fitted paths

struct PathPoint {
  std::string label;
  std::optional<Count> observed;
  double z_mean, z_q05, z_q95;
  double rate_mean, rate_q05, rate_q95;
  std::optional<double> h_mean, h_q05, h_q95;
  std::optional<double> pr_sampling;
};

/// Posterior summaries per time point from the thinned paths: rows for
/// t = 1..T and the one-step-ahead week T+1.
inline std::vector<PathPoint> fitted_paths(const CountSeries& data, const DrawStore& store) {
  std::vector<PathPoint> out;
  if (store.z_paths.empty()) return out;
  const std::size_t T = data.size();
  const std::size_t n = store.z_paths.size();
  std::vector<double> col(n), rate(n);
  const auto week_after = [&] {
    auto last = parse_week_label(data.labels()[T - 1]);
    return format_week_label(last->monday + std::chrono::days{7}, last->style);
  };
  for (std::size_t t = 1; t <= T + 1; ++t) {
    PathPoint p;
    p.label = t <= T ? data.labels()[t - 1] : week_after();
    if (t <= T) {
      p.observed = data[t - 1];
      p.pr_sampling = store.s_mean[t - 1];
    }
    double zsum = 0.0, rsum = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      col[d] = store.z_paths[d][t];
      rate[d] = std::exp(col[d]);
      zsum += col[d];
      rsum += rate[d];
    }
    p.z_mean = zsum / static_cast<double>(n);
    p.rate_mean = rsum / static_cast<double>(n);
    p.z_q05 = sample_quantile(col, 0.05);
    p.z_q95 = sample_quantile(col, 0.95);
    p.rate_q05 = std::exp(p.z_q05);
    p.rate_q95 = std::exp(p.z_q95);
    if (!store.h_paths.empty()) {
      double hsum = 0.0;
      for (std::size_t d = 0; d < n; ++d) {
        col[d] = store.h_paths[d][t - 1];
        hsum += col[d];
      }
      p.h_mean = hsum / static_cast<double>(n);
      p.h_q05 = sample_quantile(col, 0.05);
      p.h_q95 = sample_quantile(col, 0.95);
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline void write_fitted_csv(std::ostream& out, const std::vector<PathPoint>& path) {
  out << "week,count,z_mean,z_q05,z_q95,rate_mean,rate_q05,rate_q95,h_mean,h_q05,h_q95,pr_sampling\n";
  const auto opt = [](const std::optional<double>& v) {
    std::ostringstream s;
    s.precision(10);
    if (v) s << *v;
    return s.str();
  };
  for (const auto& p : path) {
    out << p.label << ',';
    if (p.observed) out << *p.observed;
    out << ',' << p.z_mean << ',' << p.z_q05 << ',' << p.z_q95 << ',' << p.rate_mean << ','
        << p.rate_q05 << ',' << p.rate_q95 << ',' << opt(p.h_mean) << ',' << opt(p.h_q05) << ','
        << opt(p.h_q95) << ',' << opt(p.pr_sampling) << '\n';
  }
}

// ---------------------------------------------------------------------------
// SVG

struct SvgSeries {
  std::vector<double> values;
  std::string color;
  double width = 1.5;
};

/// Minimal self-contained SVG line chart: an optional shaded band plus lines.
inline std::string svg_line_plot(const std::string& title, const std::vector<SvgSeries>& lines,
                                 const std::vector<double>& band_lo = {},
                                 const std::vector<double>& band_hi = {}) {
  constexpr double W = 900, H = 320, pad = 40;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n = 0;
  const auto scan = [&](const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) continue;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    n = std::max(n, v.size());
  };
  for (const auto& l : lines) scan(l.values);
  scan(band_lo);
  scan(band_hi);
  if (n < 2 || !(hi > lo)) {
    hi = lo + 1.0;
    n = std::max<std::size_t>(n, 2);
  }
  const auto X = [&](std::size_t i) { return pad + (W - 2 * pad) * static_cast<double>(i) / static_cast<double>(n - 1); };
  const auto Y = [&](double v) { return H - pad - (H - 2 * pad) * (v - lo) / (hi - lo); };
  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n"
    << "<text x=\"4\" y=\"" << pad << "\" font-family=\"sans-serif\" font-size=\"10\">" << hi << "</text>\n"
    << "<text x=\"4\" y=\"" << H - pad << "\" font-family=\"sans-serif\" font-size=\"10\">" << lo << "</text>\n"
    << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\"" << H - pad
    << "\" stroke=\"black\"/>\n";
  if (!band_lo.empty() && band_lo.size() == band_hi.size()) {
    s << "<polygon fill=\"#cccccc\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < band_hi.size(); ++i) s << X(i) << ',' << Y(band_hi[i]) << ' ';
    for (std::size_t i = band_lo.size(); i-- > 0;) s << X(i) << ',' << Y(band_lo[i]) << ' ';
    s << "\"/>\n";
  }
  for (const auto& l : lines) {
    s << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"" << l.width << "\" points=\"";
    for (std::size_t i = 0; i < l.values.size(); ++i) {
      if (std::isfinite(l.values[i])) s << X(i) << ',' << Y(l.values[i]) << ' ';
    }
    s << "\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Emission

inline json diagnostics_json(const Diagnostics& d) {
  json j;
  for (const auto& [name, t] : d.traces) {
    j["traces"][name] = {{"mean", t.mean}, {"sd", t.sd},   {"q05", t.q05},
                         {"q50", t.q50},   {"q95", t.q95}, {"ess", t.ess}};
  }
  const auto& a = d.acceptance;
  j["acceptance"] = {{"latent_mean", a.latent_mean}, {"latent_min", a.latent_min},
                     {"latent_max", a.latent_max}};
  if (a.nu) j["acceptance"]["nu"] = *a.nu;
  if (a.phi) j["acceptance"]["phi"] = *a.phi;
  if (a.sigma_xi2) j["acceptance"]["sigma_xi2"] = *a.sigma_xi2;
  return j;
}

inline void write_json(const fs::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << '\n';
}

/// Writes the backtest tables (when the report is non-empty) and always the
/// run metadata. Returns the files written.
inline std::vector<fs::path> emit_report(const BacktestReport& report, const fs::path& dir,
                                         const json& metadata) {
  ensure_output_dir(dir);
  std::vector<fs::path> files;
  if (!report.empty()) {
    {
      auto out = open_output(dir / "backtest_conditional.csv");
      write_report_csv(out, report.conditional);
    }
    {
      auto out = open_output(dir / "backtest_full.csv");
      write_report_csv(out, report.full_sample);
    }
    write_json(dir / "backtest.json", to_json(report));
    files.insert(files.end(), {dir / "backtest_conditional.csv", dir / "backtest_full.csv",
                               dir / "backtest.json"});
  }
  write_json(dir / "metadata.json", metadata);
  files.push_back(dir / "metadata.json");
  return files;
}

/// Writes fitted paths, diagnostics, optional SVG plots and the metadata.
inline std::vector<fs::path> emit_fit(const CountSeries& data, const DrawStore& store,
                                      const fs::path& dir, const json& metadata, bool svg) {
  ensure_output_dir(dir);
  std::vector<fs::path> files;
  const auto path = fitted_paths(data, store);
  {
    auto out = open_output(dir / "fitted_paths.csv");
    write_fitted_csv(out, path);
  }
  files.push_back(dir / "fitted_paths.csv");
  write_json(dir / "diagnostics.json", diagnostics_json(diagnostics(store)));
  files.push_back(dir / "diagnostics.json");
  if (svg && !path.empty()) {
    std::vector<double> obs, zm, zl, zh, hm, hl, hh;
    for (const auto& p : path) {
      obs.push_back(p.observed ? std::log1p(static_cast<double>(*p.observed)) : std::nan(""));
      zm.push_back(p.z_mean);
      zl.push_back(p.z_q05);
      zh.push_back(p.z_q95);
      if (p.h_mean) {
        hm.push_back(*p.h_mean);
        hl.push_back(*p.h_q05);
        hh.push_back(*p.h_q95);
      }
    }
    {
      auto out = open_output(dir / "log_intensity.svg");
      out << svg_line_plot("log intensity z_t (mean, 90% band) and log(1+y_t)",
                           {{obs, "#999999", 1.0}, {zm, "black", 1.5}}, zl, zh);
    }
    files.push_back(dir / "log_intensity.svg");
    if (!hm.empty()) {
      auto out = open_output(dir / "log_volatility.svg");
      out << svg_line_plot("log volatility h_t (mean, 90% band)", {{hm, "black", 1.5}}, hl, hh);
      files.push_back(dir / "log_volatility.svg");
    }
  }
  write_json(dir / "metadata.json", metadata);
  files.push_back(dir / "metadata.json");
  return files;
}

}  // namespace dzip
