#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "dzip/count_model.hpp"
#include "dzip/math.hpp"
#include "dzip/random.hpp"

namespace dzip {

/// Predictive draws for one hold-out point plus the per-draw log densities
/// at the realized value.
struct PredictiveSet {
  std::vector<Count> draws;
  std::vector<double> log_densities;
  bool conditional = false;
};

/// One draw of y_{T+1}. Unconditional: s ~ Bernoulli(pi) gates the Poisson
/// draw. Conditional on s_{T+1} = 1: plain Poisson(exp(z)).
inline Count predictive_draw(double z_next, double pi, bool conditional, Rng& rng) {
  if (!conditional && !rng.bernoulli(pi)) return 0;
  return rng.poisson(std::exp(z_next));
}

struct ScoreResult {
  double value;
  bool all_zero;  // every per-draw density underflowed to zero
};

/// log( (1/M) sum_m exp(log_densities[m]) ).
inline ScoreResult log_predictive_score(std::span<const double> log_densities) {
  if (log_densities.empty()) return {neg_inf, true};
  const double lse = log_sum_exp(log_densities);
  if (lse == neg_inf) return {neg_inf, true};
  return {lse - std::log(static_cast<double>(log_densities.size())), false};
}

inline constexpr std::array<double, 6> coverage_levels = {0.01, 0.05, 0.10, 0.90, 0.95, 0.99};

/// Lower (type-1) empirical quantile: the smallest draw whose empirical CDF
/// reaches q. `sorted` must be ascending.
inline Count empirical_quantile(std::span<const Count> sorted, double q) {
  const auto n = sorted.size();
  auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  idx = std::clamp<std::size_t>(idx, 1, n);
  return sorted[idx - 1];
}

template <std::size_t L>
std::array<Count, L> empirical_quantiles(std::span<const Count> draws,
                                         const std::array<double, L>& levels) {
  std::vector<Count> sorted(draws.begin(), draws.end());
  std::sort(sorted.begin(), sorted.end());
  std::array<Count, L> out{};
  for (std::size_t i = 0; i < L; ++i) out[i] = empirical_quantile(sorted, levels[i]);
  return out;
}

/// Fraction of windows whose observation is at or below the predictive
/// q-quantile, for each coverage level.
inline std::array<double, 6> coverage_report(std::span<const std::array<Count, 6>> quantiles,
                                             std::span<const Count> observed) {
  std::array<double, 6> cov{};
  if (observed.empty()) return cov;
  for (std::size_t w = 0; w < observed.size(); ++w) {
    for (std::size_t q = 0; q < 6; ++q) {
      if (observed[w] <= quantiles[w][q]) cov[q] += 1.0;
    }
  }
  for (double& c : cov) c /= static_cast<double>(observed.size());
  return cov;
}

inline std::array<double, 6> coverage_report(std::span<const PredictiveSet> sets,
                                             std::span<const Count> observed) {
  std::vector<std::array<Count, 6>> q;
  q.reserve(sets.size());
  for (const auto& s : sets) q.push_back(empirical_quantiles(std::span<const Count>(s.draws), coverage_levels));
  return coverage_report(q, observed);
}

struct PointMetrics {
  double rmse = 0.0;
  std::optional<double> correlation;
  std::size_t n = 0;
};

/// RMSE and Pearson correlation of already-transformed forecasts and observations.
inline PointMetrics point_metrics_raw(std::span<const double> forecast, std::span<const double> actual) {
  PointMetrics m;
  m.n = forecast.size();
  if (m.n == 0) return m;
  const double n = static_cast<double>(m.n);
  double se = 0.0, mf = 0.0, ma = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    const double d = forecast[i] - actual[i];
    se += d * d;
    mf += forecast[i];
    ma += actual[i];
  }
  m.rmse = std::sqrt(se / n);
  if (m.n < 2) return m;
  mf /= n;
  ma /= n;
  double sff = 0.0, saa = 0.0, sfa = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    sff += (forecast[i] - mf) * (forecast[i] - mf);
    saa += (actual[i] - ma) * (actual[i] - ma);
    sfa += (forecast[i] - mf) * (actual[i] - ma);
  }
  if (sff > 0.0 && saa > 0.0) m.correlation = sfa / std::sqrt(sff * saa);
  return m;
}

enum class LogScale {
  positive_only,  // log(x), restricted to observations > 0
  log1p           // log(1 + x), all observations
};

/// Point-forecast metrics on the log scale. `forecasts` are predictive means
/// of y_{T+1} on the count scale.
inline PointMetrics point_metrics(std::span<const double> forecasts, std::span<const Count> observed,
                                  LogScale scale) {
  std::vector<double> f, a;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (scale == LogScale::positive_only) {
      if (observed[i] <= 0 || !(forecasts[i] > 0.0)) continue;
      f.push_back(std::log(forecasts[i]));
      a.push_back(std::log(static_cast<double>(observed[i])));
    } else {
      f.push_back(std::log1p(std::max(forecasts[i], 0.0)));
      a.push_back(std::log1p(static_cast<double>(observed[i])));
    }
  }
  return point_metrics_raw(f, a);
}

}  // namespace dzip
