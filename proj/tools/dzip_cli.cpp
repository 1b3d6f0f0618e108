// Command-line front end: fit, forecast, backtest, simulate, report.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "dzip/dzip.hpp"

namespace {

using dzip::json;
namespace fs = std::filesystem;

const char* const value_keys[] = {"input", "model",   "burn",   "draws", "thin", "windows",
                                  "seed",  "out",     "workers", "dataset", "z0-prior",
                                  "length", "pi",     "z0",     "sigma2", "nu", "mu",
                                  "phi",   "sigma-xi2"};

struct Flags {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  CLI::Option* conditional = nullptr;
  CLI::Option* unconditional = nullptr;
  CLI::Option* svg = nullptr;
  std::string config_file;
  std::string replay;
};

void add_common(CLI::App* cmd, Flags& f) {
  for (const char* key : value_keys) {
    f.options[key] = cmd->add_option(std::string("--") + key, f.values[key]);
  }
  f.options["input"]->description("input file (weekly CSV; backtest JSON for `report`)");
  f.options["model"]->description("gaussian|student_t|mixture|sv, comma separated, or all");
  f.options["burn"]->description("burn-in sweeps (default 5000)");
  f.options["draws"]->description("retained sweeps (default 50000)");
  f.options["windows"]->description("rolling-origin windows (default 250)");
  f.options["out"]->description("output directory");
  f.options["thin"]->description("keep every n-th latent path draw (default 10)");
  f.options["seed"]->description("master seed (default 42)");
  f.options["workers"]->description("backtest threads (default: hardware concurrency)");
  f.options["dataset"]->description("dataset name in reports (default: input file stem)");
  f.options["z0-prior"]->description("weak|flat prior on the initial log intensity (default weak)");
  f.options["length"]->description("simulate: series length");
  f.options["pi"]->description("simulate: sampling-path probability");
  f.options["z0"]->description("simulate: initial log intensity");
  f.options["sigma2"]->description("simulate: innovation variance");
  f.options["nu"]->description("simulate: Student-t degrees of freedom");
  f.options["mu"]->description("simulate: mean log volatility");
  f.options["phi"]->description("simulate: log-volatility persistence");
  f.options["sigma-xi2"]->description("simulate: log-volatility innovation variance");
  f.conditional = cmd->add_flag("--conditional", "score predictive densities conditional on s_{T+1}=1");
  f.unconditional = cmd->add_flag("--unconditional", "score the zero-inflated predictive mixture");
  f.svg = cmd->add_flag("--svg", "also write SVG plots of the fitted paths");
  cmd->add_option("--config", f.config_file, "key = value file; command-line flags override it");
  cmd->add_option("--replay", f.replay, "metadata.json of an earlier run to re-execute");
}

dzip::RunConfig resolve(const std::string& command, const Flags& f) {
  dzip::RunConfig cfg;
  if (!f.replay.empty()) {
    std::ifstream in(f.replay);
    if (!in) throw dzip::UsageError("cannot read " + f.replay);
    const json meta = json::parse(in);
    for (const auto& [k, v] : meta.at("config").items()) {
      if (k != "command") cfg.set(k, v.get<std::string>());
    }
  }
  if (!f.config_file.empty()) dzip::apply_config_file(f.config_file, cfg);
  for (const auto& [key, opt] : f.options) {
    if (opt->count() > 0) cfg.set(key, f.values.at(key));
  }
  if (f.conditional->count() > 0) cfg.conditional = true;
  if (f.unconditional->count() > 0) cfg.conditional = false;
  if (f.svg->count() > 0) cfg.svg = true;
  cfg.command = command;
  if (cfg.dataset.empty()) {
    cfg.dataset = cfg.input.empty() ? "synthetic" : fs::path(cfg.input).stem().string();
  }
  return cfg;
}

json metadata(const dzip::RunConfig& cfg, double seconds, const json& extra = json::object()) {
  json m;
  m["version"] = dzip::version_string;
  m["command"] = cfg.command;
  m["seed"] = cfg.seed;
  m["config"] = cfg.to_map();
  m["wall_time_seconds"] = seconds;
  m["compiler"] = __VERSION__;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  return m;
}

dzip::CountSeries load_input(const dzip::RunConfig& cfg) {
  if (cfg.input.empty()) throw dzip::UsageError("--input is required");
  if (!fs::exists(cfg.input)) throw dzip::UsageError("input file " + cfg.input + " does not exist");
  return dzip::parse_csv(fs::path(cfg.input));
}

fs::path model_dir(const dzip::RunConfig& cfg, dzip::Variant v) {
  const fs::path base(cfg.out);
  return cfg.models.size() == 1 ? base : base / std::string(dzip::variant_name(v));
}

int run_fit(const dzip::RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load_input(cfg);
  for (auto v : cfg.models) dzip::ensure_output_dir(model_dir(cfg, v));
  for (auto v : cfg.models) {
    const auto store = dzip::run_chain(data, cfg.mcmc(v));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto d = dzip::diagnostics(store);
    dzip::emit_fit(data, store, model_dir(cfg, v), metadata(cfg, secs), cfg.svg);
    std::printf("%-10s T=%zu  pi mean %.4f  latent acceptance %.3f\n",
                std::string(dzip::variant_name(v)).c_str(), data.size(), d.traces.at("pi").mean,
                d.acceptance.latent_mean);
  }
  return 0;
}

int run_forecast(const dzip::RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load_input(cfg);
  for (auto v : cfg.models) dzip::ensure_output_dir(model_dir(cfg, v));
  const auto last = dzip::parse_week_label(data.labels().back());
  const std::string next_week = dzip::format_week_label(last->monday + std::chrono::days{7}, last->style);
  for (auto v : cfg.models) {
    auto mc = cfg.mcmc(v);
    mc.store_paths = false;
    const auto store = dzip::run_chain(data, mc);
    const auto& draws = cfg.conditional ? store.predictive_conditional : store.predictive_unconditional;
    const auto q = dzip::empirical_quantiles(std::span<const dzip::Count>(draws), dzip::coverage_levels);
    double mean = 0.0, zeros = 0.0;
    for (auto c : draws) {
      mean += static_cast<double>(c);
      zeros += c == 0 ? 1.0 : 0.0;
    }
    mean /= static_cast<double>(draws.size());
    zeros /= static_cast<double>(draws.size());
    const fs::path dir = model_dir(cfg, v);
    json f{{"week", next_week},
           {"model", dzip::variant_name(v)},
           {"conditional", cfg.conditional},
           {"mean", mean},
           {"prob_zero", zeros},
           {"quantile_levels", dzip::coverage_levels},
           {"quantiles", q},
           {"n_draws", draws.size()}};
    dzip::write_json(dir / "forecast.json", f);
    {
      auto out = dzip::open_output(dir / "predictive_draws.csv");
      out << "draw,y\n";
      for (std::size_t i = 0; i < draws.size(); ++i) out << i << ',' << draws[i] << '\n';
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    dzip::write_json(dir / "metadata.json", metadata(cfg, secs));
    std::printf("%-10s %s  mean %.1f  q05 %lld  q95 %lld  P(y=0) %.3f\n",
                std::string(dzip::variant_name(v)).c_str(), next_week.c_str(), mean,
                static_cast<long long>(q[1]), static_cast<long long>(q[4]), zeros);
  }
  return 0;
}

void print_table(const dzip::BacktestReport& rep) {
  const auto print = [](const char* title, const std::vector<dzip::ReportRow>& rows) {
    std::printf("%s\n", title);
    dzip::write_report_csv(std::cout, rows);
  };
  print("# conditional on s_{T+1}=1, positive hold-outs", rep.conditional);
  print("# full sample, zero-inflated mixture", rep.full_sample);
}

int run_backtest(const dzip::RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const auto data = load_input(cfg);
  dzip::ensure_output_dir(cfg.out);
  dzip::BacktestPlan plan;
  plan.n_windows = cfg.windows;
  plan.mcmc = cfg.mcmc(cfg.models.front());
  plan.variants = cfg.models;
  plan.workers = cfg.workers;
  const auto rep = dzip::run_backtest(data, plan, cfg.dataset);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  dzip::emit_report(rep, cfg.out, metadata(cfg, secs, {{"budget", {{"burn", cfg.burn}, {"draws", cfg.draws}}}}));
  print_table(rep);
  return 0;
}

int run_simulate(const dzip::RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  dzip::ensure_output_dir(cfg.out);
  auto g = cfg.generator;
  g.variant = cfg.models.front();
  const auto sim = dzip::simulate(g, cfg.seed);
  const fs::path dir(cfg.out);
  dzip::write_csv(dir / "simulated.csv", sim.series);
  {
    auto out = dzip::open_output(dir / "truth.csv");
    out << "week,count,z,s,h,omega,rho\n";
    for (std::size_t t = 0; t < sim.series.size(); ++t) {
      out << sim.series.labels()[t] << ',' << sim.series[t] << ',' << sim.z[t + 1] << ','
          << int(sim.s[t]) << ',';
      if (!sim.h.empty()) out << sim.h[t];
      out << ',';
      if (!sim.omega.empty()) out << sim.omega[t];
      out << ',';
      if (!sim.rho.empty()) out << sim.rho[t];
      out << '\n';
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  dzip::write_json(dir / "metadata.json", metadata(cfg, secs, {{"z0_true", sim.z[0]}}));
  std::printf("simulated %zu weeks (%s) -> %s\n", sim.series.size(),
              std::string(dzip::variant_name(g.variant)).c_str(), (dir / "simulated.csv").c_str());
  return 0;
}

int run_report(const dzip::RunConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  if (cfg.input.empty()) throw dzip::UsageError("--input backtest.json is required");
  dzip::ensure_output_dir(cfg.out);
  std::ifstream in(cfg.input);
  if (!in) throw dzip::DataError("cannot read " + cfg.input);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw dzip::DataError(cfg.input + ": " + e.what());
  }
  const auto rep = dzip::backtest_from_json(j);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  dzip::emit_report(rep, cfg.out, metadata(cfg, secs));
  print_table(rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic zero-inflated Poisson state-space models for weekly counts"};
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;
  const std::pair<const char*, const char*> commands[] = {
      {"fit", "fit a model and write posterior path summaries"},
      {"forecast", "one-step-ahead predictive distribution for the week after the data"},
      {"backtest", "rolling-origin predictive evaluation"},
      {"simulate", "simulate a synthetic series with its latent truth"},
      {"report", "re-aggregate a backtest.json into tables"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags[name]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    for (auto* sub : app.get_subcommands()) {
      const std::string name = sub->get_name();
      const auto cfg = resolve(name, flags.at(name));
      if (name == "fit") return run_fit(cfg);
      if (name == "forecast") return run_forecast(cfg);
      if (name == "backtest") return run_backtest(cfg);
      if (name == "simulate") return run_simulate(cfg);
      if (name == "report") return run_report(cfg);
    }
  } catch (const dzip::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const json::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
