#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "dzip/count_model.hpp"
#include "dzip/error.hpp"
#include "dzip/innovations.hpp"
#include "dzip/random.hpp"

namespace dzip {

/// True parameters of the generating process.
struct GeneratorConfig {
  Variant variant = Variant::sv;
  std::size_t length = 400;
  double pi = 0.95;
  double z0 = std::log(100.0);
  double sigma2 = 0.1;
  double nu = 5.0;
  std::vector<double> eta{0.8, 0.2};
  std::vector<double> sigma2_h{0.5, 4.0};
  double mu = -1.0;
  double phi = 0.95;
  double sigma_xi2 = 0.05;

  void validate() const {
    if (length < 2) throw UsageError("simulated series needs length >= 2");
    if (!(pi >= 0.0 && pi <= 1.0)) throw UsageError("pi must lie in [0, 1]");
    if (!std::isfinite(z0)) throw UsageError("z0 must be finite");
    if (!(sigma2 >= 0.0)) throw UsageError("sigma2 must be non-negative");
    if (variant == Variant::student_t && !(nu > 0.0)) throw UsageError("nu must be positive");
    if (variant == Variant::mixture) {
      if (eta.size() != sigma2_h.size() || eta.size() < 2) {
        throw UsageError("mixture weights and scales must have equal length >= 2");
      }
      double total = 0.0;
      for (double e : eta) {
        if (!(e >= 0.0)) throw UsageError("mixture weights must be non-negative");
        total += e;
      }
      if (std::abs(total - 1.0) > 1e-9) throw UsageError("mixture weights must sum to 1");
      for (double v : sigma2_h) {
        if (!(v > 0.0)) throw UsageError("mixture scales must be positive");
      }
    }
    if (variant == Variant::sv) {
      if (!(std::abs(phi) < 1.0)) throw UsageError("|phi| must be below 1");
      if (!(sigma_xi2 > 0.0)) throw UsageError("sigma_xi2 must be positive");
      if (!std::isfinite(mu)) throw UsageError("mu must be finite");
    }
  }
};

/// Simulated series with the latent truth. z holds z_0..z_T; increment-level
/// vectors (h, omega, rho) hold entries for increments 1..T.
struct SimulatedSeries {
  CountSeries series;
  std::vector<double> z;
  std::vector<std::uint8_t> s;
  std::vector<double> h;
  std::vector<double> omega;
  std::vector<std::uint32_t> rho;
};

inline SimulatedSeries simulate(const GeneratorConfig& g, std::uint64_t seed) {
  g.validate();
  Rng rng(seed);
  const std::size_t T = g.length;
  std::vector<double> z(T + 1), h, omega;
  std::vector<std::uint32_t> rho;
  std::vector<double> sd(T);
  switch (g.variant) {
    case Variant::gaussian:
      std::fill(sd.begin(), sd.end(), std::sqrt(g.sigma2));
      break;
    case Variant::student_t:
      omega.resize(T);
      for (std::size_t i = 0; i < T; ++i) {
        omega[i] = rng.gamma(0.5 * g.nu, 0.5 * g.nu);
        sd[i] = std::sqrt(g.sigma2 / omega[i]);
      }
      break;
    case Variant::mixture: {
      rho.resize(T);
      std::vector<double> logw(g.eta.size());
      for (std::size_t c = 0; c < g.eta.size(); ++c) logw[c] = std::log(g.eta[c]);
      for (std::size_t i = 0; i < T; ++i) {
        rho[i] = static_cast<std::uint32_t>(rng.categorical_log(logw));
        sd[i] = std::sqrt(g.sigma2 * g.sigma2_h[rho[i]]);
      }
      break;
    }
    case Variant::sv:
      h.resize(T);
      h[0] = rng.normal(g.mu, std::sqrt(g.sigma_xi2 / (1.0 - g.phi * g.phi)));
      for (std::size_t i = 1; i < T; ++i) {
        h[i] = g.mu + g.phi * (h[i - 1] - g.mu) + std::sqrt(g.sigma_xi2) * rng.normal();
      }
      for (std::size_t i = 0; i < T; ++i) sd[i] = std::exp(0.5 * h[i]);
      break;
  }
  z[0] = g.z0;
  for (std::size_t t = 1; t <= T; ++t) z[t] = z[t - 1] + sd[t - 1] * rng.normal();

  std::vector<std::uint8_t> s(T);
  std::vector<Count> y(T);
  for (std::size_t t = 0; t < T; ++t) {
    s[t] = rng.bernoulli(g.pi) ? 1 : 0;
    y[t] = s[t] ? rng.poisson(std::exp(z[t + 1])) : 0;
  }
  return {CountSeries::weekly(std::move(y)), std::move(z), std::move(s), std::move(h),
          std::move(omega), std::move(rho)};
}

}  // namespace dzip
