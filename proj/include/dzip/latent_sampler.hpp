#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "dzip/count_model.hpp"
#include "dzip/priors.hpp"
#include "dzip/random.hpp"
#include "dzip/tridiagonal.hpp"

namespace dzip {

/// Robbins-Monro adaptation of a random-walk proposal scale on the log
/// scale: log s += gamma_n (accepted - target), gamma_n = min(max_step, n^-1/2).
struct Adaptation {
  double target = 0.234;
  double max_step = 0.05;

  double step(std::uint64_t n) const {
    return std::min(max_step, 1.0 / std::sqrt(static_cast<double>(std::max<std::uint64_t>(n, 1))));
  }

  /// Same target with a zero step: scales stay where they are.
  Adaptation frozen() const { return {target, 0.0}; }

  double adapt(double scale, bool accepted, std::uint64_t n) const {
    return scale * std::exp(step(n) * ((accepted ? 1.0 : 0.0) - target));
  }
};

inline double adapt_proposal(double scale, bool accepted, std::uint64_t n,
                             const Adaptation& schedule = {}) {
  return schedule.adapt(scale, accepted, n);
}

inline constexpr double initial_proposal_scale = 0.1;
inline constexpr double pi_floor = 1e-12;

/// Augmented latent state of one chain. z has T + 2 entries (z_0 .. z_{T+1});
/// s has T entries, s[t - 1] belonging to observation t.
struct LatentState {
  std::vector<double> z;
  std::vector<std::uint8_t> s;
  double pi = 0.9;
  std::vector<double> proposal_scales;
  std::vector<std::uint64_t> accept_counts;

  LatentState() = default;
  explicit LatentState(std::size_t n_obs)
      : z(n_obs + 2, 0.0),
        s(n_obs, 1),
        proposal_scales(n_obs + 2, initial_proposal_scale),
        accept_counts(n_obs + 2, 0) {}

  std::size_t n_obs() const noexcept { return s.size(); }
};

/// Unnormalized log conditional of an observed site with an active sampling path.
inline double latent_log_target(double z, double mean, double var, Count y) {
  const double d = z - mean;
  return -0.5 * d * d / var + static_cast<double>(y) * z - std::exp(z);
}

/// log acceptance ratio for moving an active site from `current` to `proposal`.
inline double latent_log_accept(double current, double proposal, double mean, double var, Count y) {
  return latent_log_target(proposal, mean, var, y) - latent_log_target(current, mean, var, y);
}

/// Updates site t (0..T+1). Sites without an active Poisson term (s = 0, and
/// the two augmentation endpoints) are drawn exactly from N(m_t, v_t);
/// active sites take one adaptive random-walk MH step. Returns whether the
/// site moved (always true for exact draws).
inline bool update_latent_site(std::size_t t, LatentState& state, std::span<const Count> y,
                               const TridiagonalPrecision& p, Rng& rng, std::uint64_t iteration,
                               const Adaptation& schedule = {}) {
  const auto [mean, var] = conditional_moments(t, state.z, p);
  const std::size_t n = state.n_obs();
  const bool active = t >= 1 && t <= n && state.s[t - 1] != 0;
  if (!active) {
    state.z[t] = rng.normal(mean, std::sqrt(var));
    return true;
  }
  const Count yt = y[t - 1];
  const double current = state.z[t];
  const double proposal = current + state.proposal_scales[t] * rng.normal();
  const double log_alpha = latent_log_accept(current, proposal, mean, var, yt);
  const bool accepted = log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha;
  if (accepted) {
    state.z[t] = proposal;
    ++state.accept_counts[t];
  }
  state.proposal_scales[t] = schedule.adapt(state.proposal_scales[t], accepted, iteration);
  return accepted;
}

/// Block i: sites 0, 1, ..., T+1 in ascending order.
inline void update_latent_path(LatentState& state, std::span<const Count> y,
                               const TridiagonalPrecision& p, Rng& rng, std::uint64_t iteration,
                               const Adaptation& schedule = {}) {
  for (std::size_t t = 0; t < state.z.size(); ++t) {
    update_latent_site(t, state, y, p, rng, iteration, schedule);
  }
}

/// Pr(s_t = 1 | y_t = 0, z_t, pi).
inline double sampling_path_probability(double z, double pi) {
  const double keep = pi * std::exp(-std::exp(z));
  const double denom = (1.0 - pi) + keep;
  return denom > 0.0 ? keep / denom : 0.0;
}

/// Block ii: s_t = 1 where y_t > 0, otherwise a Bernoulli draw.
inline void update_indicators(std::span<const Count> y, std::span<const double> z, double pi,
                              Rng& rng, std::span<std::uint8_t> s) {
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] > 0) {
      s[t] = 1;
    } else {
      s[t] = rng.bernoulli(sampling_path_probability(z[t + 1], pi)) ? 1 : 0;
    }
  }
}

/// Block iii: pi ~ Beta(a + sum s, b + T - sum s), clamped away from {0, 1}.
inline double update_pi(std::span<const std::uint8_t> s, Rng& rng, const Priors& priors = {}) {
  double active = 0.0;
  for (auto v : s) active += v;
  const double draw = rng.beta(priors.pi_a + active, priors.pi_b + static_cast<double>(s.size()) - active);
  return std::clamp(draw, pi_floor, 1.0 - pi_floor);
}

}  // namespace dzip
