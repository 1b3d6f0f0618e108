#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dzip/engine.hpp"

namespace dzip {

/// Autocovariances of x at lags 0..max_lag (biased, divisor n).
inline std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  max_lag = std::min(max_lag, n - 1);
  std::vector<double> acov(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    acov[lag] = s / static_cast<double>(n);
  }
  return acov;
}

/// Effective sample size with Geyer's initial monotone sequence estimator.
/// Autocovariances are computed lazily, up to the first non-positive pair.
/// A constant trace has ESS 1.
inline double effective_sample_size(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 4) return static_cast<double>(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  const auto acov_at = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - mean) * (x[t + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double var = acov_at(0);
  if (!(var > 1e-300)) return 1.0;
  // Gamma_k = rho_{2k} + rho_{2k+1}, truncated at the first non-positive
  // value and forced non-increasing.
  double sum = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double a = k == 0 ? var : acov_at(2 * k);
    double pair = (a + acov_at(2 * k + 1)) / var;
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    sum += pair;
    prev_pair = pair;
  }
  const double tau = std::max(-1.0 + 2.0 * sum, 1.0 / std::log10(static_cast<double>(n)));
  return static_cast<double>(n) / tau;
}

/// Type-7 (linear interpolation) quantile of an unsorted sample.
inline double sample_quantile(std::vector<double> x, double q) {
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

struct TraceSummary {
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0;
  double q50 = 0.0;
  double q95 = 0.0;
  double ess = 0.0;
};

inline TraceSummary summarize_trace(std::span<const double> x) {
  TraceSummary s;
  if (x.empty()) return s;
  const double n = static_cast<double>(x.size());
  for (double v : x) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.sd = x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::vector<double> copy(x.begin(), x.end());
  s.q05 = sample_quantile(copy, 0.05);
  s.q50 = sample_quantile(copy, 0.50);
  s.q95 = sample_quantile(copy, 0.95);
  s.ess = effective_sample_size(x);
  return s;
}

struct Diagnostics {
  std::map<std::string, TraceSummary> traces;
  AcceptanceSummary acceptance;
};

inline Diagnostics diagnostics(const DrawStore& store) {
  Diagnostics d;
  d.acceptance = store.acceptance;
  const auto add = [&](const char* name, const std::vector<double>& tr) {
    if (!tr.empty()) d.traces.emplace(name, summarize_trace(tr));
  };
  add("pi", store.traces.pi);
  add("sigma2", store.traces.sigma2);
  add("nu", store.traces.nu);
  add("mu", store.traces.mu);
  add("phi", store.traces.phi);
  add("sigma_xi2", store.traces.sigma_xi2);
  add("z_next", store.traces.z_next);
  return d;
}

}  // namespace dzip
