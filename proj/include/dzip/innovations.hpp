#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dzip/error.hpp"
#include "dzip/latent_sampler.hpp"
#include "dzip/math.hpp"
#include "dzip/priors.hpp"
#include "dzip/random.hpp"
#include "dzip/tridiagonal.hpp"

namespace dzip {

/// Innovation density of the random-walk increments.
enum class Variant { gaussian, student_t, mixture, sv };

inline constexpr std::array<Variant, 4> all_variants = {Variant::gaussian, Variant::student_t,
                                                        Variant::mixture, Variant::sv};

inline std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::gaussian: return "gaussian";
    case Variant::student_t: return "student_t";
    case Variant::mixture: return "mixture";
    case Variant::sv: return "sv";
  }
  return "?";
}

/// Row label used in the report tables.
inline std::string_view variant_title(Variant v) {
  switch (v) {
    case Variant::gaussian: return "Gaussian";
    case Variant::student_t: return "Student's t";
    case Variant::mixture: return "Mixture";
    case Variant::sv: return "Stoch. Vol.";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : all_variants) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

/// Hyperparameters of the active innovation model. Vectors are indexed by
/// increment, position i holding increment i + 1 (z_{i+1} - z_i), so they
/// have length T + 1. Fields of inactive variants stay at their initial
/// values and are ignored.
struct InnovationState {
  Variant variant = Variant::gaussian;
  double sigma2 = 1.0;
  // Student-t
  double nu = 10.0;
  std::vector<double> omega;
  double nu_proposal_scale = 0.1;
  // scale mixture
  std::vector<double> eta;
  std::vector<double> sigma2_h;
  std::vector<std::uint32_t> rho;
  // stochastic volatility
  std::vector<double> h;
  double mu = 0.0;
  double phi = 0.9;
  double sigma_xi2 = 0.1;
  std::vector<std::uint8_t> sv_component;

  std::uint64_t nu_accepts = 0;
  std::uint64_t phi_accepts = 0;
  std::uint64_t sigma_xi2_accepts = 0;

  std::size_t n_increments() const noexcept { return omega.size(); }

  /// Starting point for a chain with `n_increments` increments.
  static InnovationState initial(Variant variant, std::size_t n_increments, Rng& rng,
                                 std::size_t components = 2) {
    if (components < 2) throw UsageError("scale mixture needs at least 2 components");
    InnovationState s;
    s.variant = variant;
    s.omega.assign(n_increments, 1.0);
    s.eta.assign(components, 1.0 / static_cast<double>(components));
    s.sigma2_h.resize(components);
    for (std::size_t c = 0; c < components; ++c) {
      // 0.5 and 2 for two components, geometric in between otherwise
      s.sigma2_h[c] = 0.5 * std::pow(4.0, static_cast<double>(c) / static_cast<double>(components - 1));
    }
    s.rho.resize(n_increments);
    for (auto& r : s.rho) r = static_cast<std::uint32_t>(rng.next_u64() % components);
    s.h.assign(n_increments, 0.0);
    s.sv_component.assign(n_increments, 0);
    return s;
  }
};

/// Increments dz_i = z_{i+1} - z_i of the augmented path.
inline void increments(std::span<const double> z, std::span<double> out) {
  for (std::size_t i = 0; i + 1 < z.size(); ++i) out[i] = z[i + 1] - z[i];
}

/// Increment precisions k_i implied by the innovation state.
inline void precisions_into(const InnovationState& s, std::span<double> k) {
  const std::size_t n = k.size();
  switch (s.variant) {
    case Variant::gaussian:
      std::fill(k.begin(), k.end(), 1.0 / s.sigma2);
      break;
    case Variant::student_t:
      for (std::size_t i = 0; i < n; ++i) k[i] = s.omega[i] / s.sigma2;
      break;
    case Variant::mixture:
      for (std::size_t i = 0; i < n; ++i) k[i] = 1.0 / (s.sigma2 * s.sigma2_h[s.rho[i]]);
      break;
    case Variant::sv:
      for (std::size_t i = 0; i < n; ++i) k[i] = std::exp(-s.h[i]);
      break;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) {
      throw NumericalError("degenerate precision at increment " + std::to_string(i + 1));
    }
  }
}

inline std::vector<double> precisions(const InnovationState& s) {
  std::vector<double> k(s.n_increments());
  precisions_into(s, k);
  return k;
}

// ---------------------------------------------------------------------------
// Option 1: Gaussian

inline double gaussian_update(std::span<const double> dz, Rng& rng, const Priors& pr = {}) {
  double ss = 0.0;
  for (double d : dz) ss += d * d;
  return rng.inv_gamma(pr.sigma2_shape + 0.5 * static_cast<double>(dz.size()),
                       pr.sigma2_scale + 0.5 * ss);
}

// ---------------------------------------------------------------------------
// Option 2: Student-t as a Gamma scale mixture of normals

/// Draws omega | nu, sigma2, dz and then sigma2 | omega, dz.
inline void student_t_update(std::span<const double> dz, InnovationState& s, Rng& rng,
                             const Priors& pr = {}) {
  const double shape = 0.5 * (1.0 + s.nu);
  double ss = 0.0;
  for (std::size_t i = 0; i < dz.size(); ++i) {
    s.omega[i] = rng.gamma(shape, 0.5 * s.nu + dz[i] * dz[i] / (2.0 * s.sigma2));
    ss += s.omega[i] * dz[i] * dz[i];
  }
  s.sigma2 = rng.inv_gamma(pr.sigma2_shape + 0.5 * static_cast<double>(dz.size()),
                           pr.sigma2_scale + 0.5 * ss);
}

/// log p(omega | nu) + log p(nu), up to a constant; -inf outside the prior support.
inline double nu_log_conditional(double nu, std::span<const double> omega, const Priors& pr = {}) {
  if (!(nu > pr.nu_min)) return neg_inf;
  const double half = 0.5 * nu;
  const double n = static_cast<double>(omega.size());
  double sum_log = 0.0, sum = 0.0;
  for (double w : omega) {
    sum_log += std::log(w);
    sum += w;
  }
  return n * (half * std::log(half) - log_gamma(half)) + (half - 1.0) * sum_log - half * sum -
         pr.nu_rate * (nu - pr.nu_min);
}

/// MH log acceptance ratio for nu -> nu_star under a log-scale random walk.
inline double nu_log_accept(double nu, double nu_star, std::span<const double> omega,
                            const Priors& pr = {}) {
  const double target_star = nu_log_conditional(nu_star, omega, pr);
  if (target_star == neg_inf) return neg_inf;
  return std::log(nu_star / nu) + target_star - nu_log_conditional(nu, omega, pr);
}

inline double nu_mh_step(InnovationState& s, Rng& rng, std::uint64_t iteration,
                         const Priors& pr = {}, const Adaptation& schedule = {}) {
  const double nu_star = s.nu * std::exp(s.nu_proposal_scale * rng.normal());
  const double log_alpha = nu_log_accept(s.nu, nu_star, s.omega, pr);
  const bool accepted = log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha;
  if (accepted) {
    s.nu = nu_star;
    ++s.nu_accepts;
  }
  s.nu_proposal_scale = schedule.adapt(s.nu_proposal_scale, accepted, iteration);
  return s.nu;
}

// ---------------------------------------------------------------------------
// Option 3: finite Gaussian scale mixture

/// Allocation probabilities Pr(rho = h | dz) proportional to
/// eta_h N(dz; 0, sigma2 * sigma2_h).
inline void mixture_allocation_log_weights(double dz, const InnovationState& s,
                                           std::span<double> out) {
  for (std::size_t c = 0; c < s.eta.size(); ++c) {
    out[c] = std::log(s.eta[c]) + normal_log_pdf(dz, 0.0, s.sigma2 * s.sigma2_h[c]);
  }
}

inline void mixture_update(std::span<const double> dz, InnovationState& s, Rng& rng,
                           const Priors& pr = {}) {
  const std::size_t H = s.eta.size();
  std::vector<double> logw(H), alpha(H, pr.dirichlet_alpha), ss(H, 0.0);
  std::vector<double> counts(H, 0.0);
  for (std::size_t i = 0; i < dz.size(); ++i) {
    mixture_allocation_log_weights(dz[i], s, logw);
    s.rho[i] = static_cast<std::uint32_t>(rng.categorical_log(logw));
    counts[s.rho[i]] += 1.0;
    ss[s.rho[i]] += dz[i] * dz[i];
  }
  for (std::size_t c = 0; c < H; ++c) alpha[c] += counts[c];
  s.eta = rng.dirichlet(alpha);
  for (double& e : s.eta) e = std::max(e, 1e-300);
  for (std::size_t c = 0; c < H; ++c) {
    s.sigma2_h[c] = rng.inv_gamma(pr.sigma2_h_shape + 0.5 * counts[c],
                                  pr.sigma2_h_scale + ss[c] / (2.0 * s.sigma2));
  }
  double weighted = 0.0;
  for (std::size_t i = 0; i < dz.size(); ++i) weighted += dz[i] * dz[i] / s.sigma2_h[s.rho[i]];
  s.sigma2 = rng.inv_gamma(pr.sigma2_shape + 0.5 * static_cast<double>(dz.size()),
                           pr.sigma2_scale + 0.5 * weighted);
}

// ---------------------------------------------------------------------------
// Option 4: stochastic volatility, h_i = mu + phi (h_{i-1} - mu) + xi_i

/// Seven-component normal mixture approximation of log chi^2_1
/// (Kim, Shephard and Chib, 1998). Component j has mean
/// means[j] - log_chi2_offset and variance variances[j].
struct LogChi2Mixture {
  static constexpr std::array<double, 7> weights = {0.00730, 0.10556, 0.00002, 0.04395,
                                                    0.34001, 0.24566, 0.25750};
  static constexpr std::array<double, 7> means = {-10.12999, -3.97281, -8.56686, 2.77786,
                                                  0.61942,   1.79518,  -1.08819};
  static constexpr std::array<double, 7> variances = {5.79596, 2.61369, 5.17950, 0.16735,
                                                      0.64009, 0.34023, 1.26261};
  static constexpr double log_chi2_offset = 1.2704;

  static constexpr double mean(std::size_t j) { return means[j] - log_chi2_offset; }
};

inline constexpr double sv_log_offset = 1e-6;

/// Posterior probabilities of the mixture component for one residual
/// e = log(dz^2 + c) - h.
inline std::array<double, 7> sv_component_probabilities(double residual) {
  std::array<double, 7> lw{};
  for (std::size_t j = 0; j < 7; ++j) {
    lw[j] = std::log(LogChi2Mixture::weights[j]) +
            normal_log_pdf(residual, LogChi2Mixture::mean(j), LogChi2Mixture::variances[j]);
  }
  const double norm = log_sum_exp(lw);
  for (double& v : lw) v = std::exp(v - norm);
  return lw;
}

/// Draws the whole log-variance path from its Gaussian conditional given the
/// mixture components: AR(1) prior precision plus diagonal observation
/// precision, both tridiagonal.
inline void sample_sv_path(std::span<const double> u, InnovationState& s, Rng& rng) {
  const std::size_t n = u.size();
  std::vector<double> diag(n), off(n > 0 ? n - 1 : 0), lin(n);
  const double inv = 1.0 / s.sigma_xi2;
  const double phi = s.phi;
  if (n == 1) {
    diag[0] = (1.0 - phi * phi) * inv;
    lin[0] = diag[0] * s.mu;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const bool edge = i == 0 || i + 1 == n;
      diag[i] = (edge ? 1.0 : 1.0 + phi * phi) * inv;
      lin[i] = (edge ? 1.0 - phi : (1.0 - phi) * (1.0 - phi)) * s.mu * inv;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) off[i] = -phi * inv;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = s.sv_component[i];
    diag[i] += 1.0 / LogChi2Mixture::variances[j];
    lin[i] += (u[i] - LogChi2Mixture::mean(j)) / LogChi2Mixture::variances[j];
  }
  sample_tridiagonal_gaussian(diag, off, lin, rng, s.h);
}

/// mu | h, phi, sigma_xi2 (conjugate normal).
inline double sv_update_mu(const InnovationState& s, Rng& rng, const Priors& pr = {}) {
  const auto& h = s.h;
  const double inv = 1.0 / s.sigma_xi2;
  const double phi = s.phi;
  double prec = 1.0 / pr.mu_var + (1.0 - phi * phi) * inv;
  double lin = pr.mu_mean / pr.mu_var + (1.0 - phi * phi) * inv * h[0];
  for (std::size_t i = 1; i < h.size(); ++i) {
    prec += (1.0 - phi) * (1.0 - phi) * inv;
    lin += (1.0 - phi) * inv * (h[i] - phi * h[i - 1]);
  }
  return rng.normal(lin / prec, std::sqrt(1.0 / prec));
}

/// log prior of phi under (phi + 1) / 2 ~ Beta(a, b), up to a constant.
inline double sv_phi_log_prior(double phi, const Priors& pr) {
  return (pr.phi_a - 1.0) * std::log1p(phi) + (pr.phi_b - 1.0) * std::log1p(-phi);
}

/// phi | h, mu, sigma_xi2: independence MH proposing from the Gaussian
/// regression kernel of the transitions; the ratio keeps only the prior and
/// the stationary initial-state density.
inline bool sv_update_phi(InnovationState& s, Rng& rng, const Priors& pr = {}) {
  const auto& h = s.h;
  if (h.size() < 2) return false;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double prev = h[i - 1] - s.mu;
    sxx += prev * prev;
    sxy += prev * (h[i] - s.mu);
  }
  if (!(sxx > 0.0)) return false;
  const double phi_star = rng.normal(sxy / sxx, std::sqrt(s.sigma_xi2 / sxx));
  if (!(std::abs(phi_star) < 1.0)) return false;
  auto log_rest = [&](double phi) {
    return sv_phi_log_prior(phi, pr) +
           normal_log_pdf(h[0], s.mu, s.sigma_xi2 / (1.0 - phi * phi));
  };
  const double log_alpha = log_rest(phi_star) - log_rest(s.phi);
  if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) {
    s.phi = phi_star;
    ++s.phi_accepts;
    return true;
  }
  return false;
}

/// sigma_xi2 | h, mu, phi under a Gamma(shape, rate) prior: independence MH
/// with an inverse-gamma proposal that absorbs the likelihood and the power
/// part of the prior, so the ratio is exp(-rate (proposal - current)).
inline bool sv_update_sigma_xi2(InnovationState& s, Rng& rng, const Priors& pr = {}) {
  const auto& h = s.h;
  const double phi = s.phi;
  const double first = h[0] - s.mu;
  double ss = (1.0 - phi * phi) * first * first;
  for (std::size_t i = 1; i < h.size(); ++i) {
    const double e = h[i] - s.mu - phi * (h[i - 1] - s.mu);
    ss += e * e;
  }
  const double shape = 0.5 * static_cast<double>(h.size()) - pr.sigma_xi2_shape;
  bool accepted = false;
  if (shape > 0.0 && ss > 0.0) {
    const double proposal = rng.inv_gamma(shape, 0.5 * ss);
    const double log_alpha = -pr.sigma_xi2_rate * (proposal - s.sigma_xi2);
    accepted = log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha;
    if (accepted) s.sigma_xi2 = proposal;
  } else {
    // Log-scale random walk for priors too concentrated for the proposal above.
    auto log_target = [&](double v) {
      return gamma_log_pdf(v, pr.sigma_xi2_shape, pr.sigma_xi2_rate) -
             0.5 * static_cast<double>(h.size()) * std::log(v) - 0.5 * ss / v + std::log(v);
    };
    const double proposal = s.sigma_xi2 * std::exp(0.3 * rng.normal());
    const double log_alpha = log_target(proposal) - log_target(s.sigma_xi2);
    accepted = log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha;
    if (accepted) s.sigma_xi2 = proposal;
  }
  if (accepted) ++s.sigma_xi2_accepts;
  return accepted;
}

inline void sv_update(std::span<const double> dz, InnovationState& s, Rng& rng,
                      const Priors& pr = {}) {
  const std::size_t n = dz.size();
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = std::log(dz[i] * dz[i] + sv_log_offset);
    const auto probs = sv_component_probabilities(u[i] - s.h[i]);
    double r = rng.uniform();
    std::size_t j = 0;
    for (; j + 1 < probs.size(); ++j) {
      r -= probs[j];
      if (r <= 0.0) break;
    }
    s.sv_component[i] = static_cast<std::uint8_t>(j);
  }
  sample_sv_path(u, s, rng);
  s.mu = sv_update_mu(s, rng, pr);
  sv_update_phi(s, rng, pr);
  sv_update_sigma_xi2(s, rng, pr);
}

/// Block iv for whichever variant is active.
inline void update_innovations(std::span<const double> dz, InnovationState& s, Rng& rng,
                               std::uint64_t iteration, const Priors& pr = {},
                               const Adaptation& schedule = {}) {
  switch (s.variant) {
    case Variant::gaussian:
      s.sigma2 = gaussian_update(dz, rng, pr);
      break;
    case Variant::student_t:
      student_t_update(dz, s, rng, pr);
      nu_mh_step(s, rng, iteration, pr, schedule);
      break;
    case Variant::mixture:
      mixture_update(dz, s, rng, pr);
      break;
    case Variant::sv:
      sv_update(dz, s, rng, pr);
      break;
  }
}

// ---------------------------------------------------------------------------
// Prior simulation

/// Stationary AR(1) path h given (mu, phi, sigma_xi2).
inline void draw_sv_path_prior(InnovationState& s, Rng& rng) {
  if (s.h.empty()) return;
  s.h[0] = rng.normal(s.mu, std::sqrt(s.sigma_xi2 / (1.0 - s.phi * s.phi)));
  for (std::size_t i = 1; i < s.h.size(); ++i) {
    s.h[i] = s.mu + s.phi * (s.h[i - 1] - s.mu) + std::sqrt(s.sigma_xi2) * rng.normal();
  }
}

/// Draws every hyperparameter and per-increment latent scale from the prior.
inline InnovationState draw_innovation_prior(Variant variant, std::size_t n_increments, Rng& rng,
                                             const Priors& pr = {}, std::size_t components = 2) {
  InnovationState s = InnovationState::initial(variant, n_increments, rng, components);
  switch (variant) {
    case Variant::gaussian:
      s.sigma2 = rng.inv_gamma(pr.sigma2_shape, pr.sigma2_scale);
      break;
    case Variant::student_t:
      s.sigma2 = rng.inv_gamma(pr.sigma2_shape, pr.sigma2_scale);
      s.nu = pr.nu_min + rng.gamma(1.0, pr.nu_rate);
      for (double& w : s.omega) w = rng.gamma(0.5 * s.nu, 0.5 * s.nu);
      break;
    case Variant::mixture: {
      s.sigma2 = rng.inv_gamma(pr.sigma2_shape, pr.sigma2_scale);
      std::vector<double> alpha(components, pr.dirichlet_alpha);
      s.eta = rng.dirichlet(alpha);
      for (double& e : s.eta) e = std::max(e, 1e-300);
      for (double& v : s.sigma2_h) v = rng.inv_gamma(pr.sigma2_h_shape, pr.sigma2_h_scale);
      std::vector<double> logw(components);
      for (std::size_t c = 0; c < components; ++c) logw[c] = std::log(s.eta[c]);
      for (auto& r : s.rho) r = static_cast<std::uint32_t>(rng.categorical_log(logw));
      break;
    }
    case Variant::sv: {
      s.mu = rng.normal(pr.mu_mean, std::sqrt(pr.mu_var));
      s.phi = 2.0 * rng.beta(pr.phi_a, pr.phi_b) - 1.0;
      s.phi = std::clamp(s.phi, -1.0 + 1e-12, 1.0 - 1e-12);
      s.sigma_xi2 = rng.gamma(pr.sigma_xi2_shape, pr.sigma_xi2_rate);
      draw_sv_path_prior(s, rng);
      break;
    }
  }
  return s;
}

}  // namespace dzip
