#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dzip/count_model.hpp"
#include "dzip/engine.hpp"
#include "dzip/error.hpp"
#include "dzip/forecast.hpp"
#include "dzip/innovations.hpp"

namespace dzip {

struct BacktestPlan {
  std::size_t n_windows = 250;
  McmcConfig mcmc;
  std::vector<Variant> variants{all_variants.begin(), all_variants.end()};
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  std::size_t workers = 0;
};

struct Window {
  std::size_t index;
  std::size_t train_begin;
  std::size_t train_length;
  std::size_t holdout;
};

/// Window i trains on [i, i + T - n_windows) and evaluates the next point.
inline std::vector<Window> rolling_windows(std::size_t series_length, std::size_t n_windows) {
  if (n_windows < 1) throw UsageError("need at least one backtest window");
  if (series_length < n_windows + 10) {
    throw DataError("series of length " + std::to_string(series_length) +
                    " too short for " + std::to_string(n_windows) +
                    " windows (training length must be at least 10)");
  }
  const std::size_t train = series_length - n_windows;
  std::vector<Window> out;
  out.reserve(n_windows);
  for (std::size_t i = 0; i < n_windows; ++i) out.push_back({i, i, train, i + train});
  return out;
}

/// One-step predictive summary for one flavor (conditional or mixture).
struct WindowForecast {
  double log_score = 0.0;
  double mean = 0.0;
  std::array<Count, 6> quantiles{};
};

struct WindowRecord {
  std::size_t window = 0;
  std::size_t holdout_index = 0;
  std::string label;
  Count observed = 0;
  bool ok = false;
  std::string error;
  WindowForecast conditional;
  WindowForecast unconditional;
  double latent_acceptance = 0.0;
};

struct ReportRow {
  std::string dataset;
  Variant variant = Variant::gaussian;
  double lps = 0.0;
  double rmse = 0.0;
  std::optional<double> correlation;
  std::array<double, 6> coverage{};
  std::size_t n = 0;
  bool complete = true;
};

struct VariantResult {
  std::string dataset;
  Variant variant;
  std::vector<WindowRecord> windows;
};

struct BacktestReport {
  std::uint64_t master_seed = 0;
  std::uint64_t n_burn = 0;
  std::uint64_t n_draws = 0;
  std::size_t n_windows = 0;
  std::size_t train_length = 0;
  /// Positive hold-outs only, densities conditional on s_{T+1} = 1.
  std::vector<ReportRow> conditional;
  /// All hold-outs, zero-inflated mixture densities.
  std::vector<ReportRow> full_sample;
  std::vector<VariantResult> details;

  bool empty() const noexcept { return details.empty(); }
};

inline std::uint64_t dataset_hash(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t cell_seed(std::uint64_t master, std::string_view dataset, Variant v,
                               std::size_t window) {
  std::uint64_t s = combine_seed(master, dataset_hash(dataset));
  s = combine_seed(s, static_cast<std::uint64_t>(v));
  return combine_seed(s, window);
}

inline WindowForecast summarize_forecast(std::span<const Count> draws,
                                         std::span<const double> log_densities) {
  WindowForecast f;
  f.log_score = log_predictive_score(log_densities).value;
  double sum = 0.0;
  for (Count c : draws) sum += static_cast<double>(c);
  f.mean = sum / static_cast<double>(draws.size());
  f.quantiles = empirical_quantiles(draws, coverage_levels);
  return f;
}

/// Fits one (window, variant) cell and scores its hold-out.
inline WindowRecord run_window(const CountSeries& series, const Window& w, Variant v,
                               const McmcConfig& base, std::uint64_t seed) {
  WindowRecord rec;
  rec.window = w.index;
  rec.holdout_index = w.holdout;
  rec.label = series.labels()[w.holdout];
  rec.observed = series[w.holdout];
  McmcConfig cfg = base;
  cfg.variant = v;
  cfg.seed = seed;
  cfg.store_paths = false;
  cfg.holdout = rec.observed;
  try {
    const auto train = series.counts().subspan(w.train_begin, w.train_length);
    const DrawStore store = run_chain(train, cfg);
    rec.conditional = summarize_forecast(store.predictive_conditional, store.log_density_conditional);
    rec.unconditional =
        summarize_forecast(store.predictive_unconditional, store.log_density_unconditional);
    rec.latent_acceptance = store.acceptance.latent_mean;
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

inline ReportRow aggregate(const VariantResult& r, bool conditional) {
  ReportRow row;
  row.dataset = r.dataset;
  row.variant = r.variant;
  std::vector<double> means;
  std::vector<Count> observed;
  std::vector<std::array<Count, 6>> quantiles;
  for (const auto& w : r.windows) {
    if (!w.ok) {
      row.complete = false;
      continue;
    }
    if (conditional && w.observed <= 0) continue;
    const WindowForecast& f = conditional ? w.conditional : w.unconditional;
    row.lps += f.log_score;
    means.push_back(f.mean);
    observed.push_back(w.observed);
    quantiles.push_back(f.quantiles);
  }
  row.n = observed.size();
  const auto pm = point_metrics(means, observed, conditional ? LogScale::positive_only : LogScale::log1p);
  row.rmse = pm.rmse;
  row.correlation = pm.correlation;
  row.coverage = coverage_report(quantiles, observed);
  return row;
}

/// Rolling-origin backtest of every planned variant on one series. Cells run
/// on a worker pool; each cell's seed depends only on (master seed, dataset,
/// variant, window).
inline BacktestReport run_backtest(const CountSeries& series, const BacktestPlan& plan,
                                   std::string_view dataset = "series") {
  plan.mcmc.validate();
  const auto windows = rolling_windows(series.size(), plan.n_windows);
  BacktestReport report;
  report.master_seed = plan.mcmc.seed;
  report.n_burn = plan.mcmc.n_burn;
  report.n_draws = plan.mcmc.n_draws;
  report.n_windows = plan.n_windows;
  report.train_length = windows.front().train_length;

  const std::size_t n_cells = windows.size() * plan.variants.size();
  std::vector<WindowRecord> cells(n_cells);
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t c = next++; c < n_cells; c = next++) {
      const Variant v = plan.variants[c / windows.size()];
      const Window& w = windows[c % windows.size()];
      cells[c] = run_window(series, w, v, plan.mcmc, cell_seed(plan.mcmc.seed, dataset, v, w.index));
    }
  };
  std::size_t workers = plan.workers ? plan.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n_cells);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::function<void()> task = work;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(task);
  }

  for (std::size_t vi = 0; vi < plan.variants.size(); ++vi) {
    VariantResult r{std::string(dataset), plan.variants[vi], {}};
    r.windows.assign(cells.begin() + static_cast<std::ptrdiff_t>(vi * windows.size()),
                     cells.begin() + static_cast<std::ptrdiff_t>((vi + 1) * windows.size()));
    report.conditional.push_back(aggregate(r, true));
    report.full_sample.push_back(aggregate(r, false));
    report.details.push_back(std::move(r));
  }
  return report;
}

}  // namespace dzip
