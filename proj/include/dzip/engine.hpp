#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dzip/count_model.hpp"
#include "dzip/error.hpp"
#include "dzip/innovations.hpp"
#include "dzip/latent_sampler.hpp"
#include "dzip/priors.hpp"
#include "dzip/random.hpp"
#include "dzip/tridiagonal.hpp"

namespace dzip {

struct McmcConfig {
  std::uint64_t n_burn = 5000;
  std::uint64_t n_draws = 50000;
  /// Thinning for stored latent paths only; traces and predictive
  /// accumulators keep every draw.
  std::uint64_t thin = 10;
  std::uint64_t seed = 42;
  Variant variant = Variant::sv;
  Priors priors;
  Adaptation adaptation;
  std::size_t mixture_components = 2;
  bool store_paths = true;
  /// Realized value of y_{T+1}; when set, per-draw predictive log densities
  /// at it are streamed into the store.
  std::optional<Count> holdout;

  void validate() const {
    if (n_draws < 1) throw UsageError("n_draws must be at least 1");
    if (thin < 1) throw UsageError("thin must be at least 1");
    if (mixture_components < 2) throw UsageError("mixture needs at least 2 components");
  }
};

/// Full-resolution scalar traces. Entries irrelevant to the variant stay empty.
struct Traces {
  std::vector<double> pi;
  std::vector<double> sigma2;
  std::vector<double> nu;
  std::vector<double> mu;
  std::vector<double> phi;
  std::vector<double> sigma_xi2;
  /// z_{T+1}, the one-step-ahead log intensity.
  std::vector<double> z_next;
};

struct AcceptanceSummary {
  /// Per augmented site: accepted / attempted MH moves during sampling
  /// (NaN for sites that were never updated by MH).
  std::vector<double> latent_sites;
  double latent_mean = 0.0;
  double latent_min = 0.0;
  double latent_max = 0.0;
  std::optional<double> nu;
  std::optional<double> phi;
  std::optional<double> sigma_xi2;
};

/// Output of one chain.
struct DrawStore {
  Variant variant = Variant::gaussian;
  std::uint64_t n_burn = 0;
  std::uint64_t n_draws = 0;
  std::uint64_t thin = 1;
  std::uint64_t seed = 0;

  Traces traces;
  /// Thinned latent paths z_0..z_{T+1} and (SV) h_1..h_{T+1}.
  std::vector<std::vector<double>> z_paths;
  std::vector<std::vector<double>> h_paths;
  /// Posterior mean of s_t over all retained draws.
  std::vector<double> s_mean;

  /// Predictive draws of y_{T+1}: with the zero-inflation gate and conditional on s_{T+1} = 1.
  std::vector<Count> predictive_unconditional;
  std::vector<Count> predictive_conditional;
  /// Per-draw log p(holdout | draw), filled only when a holdout was supplied.
  std::vector<double> log_density_unconditional;
  std::vector<double> log_density_conditional;

  AcceptanceSummary acceptance;
};

/// One Gibbs-Metropolis chain over (z_0, z, z_{T+1}, s, pi, theta). Holds all
/// mutable state; a sweep runs blocks i-iv in that order.
class Chain {
 public:
  Chain(std::span<const Count> y, Variant variant, const Priors& priors, std::uint64_t seed,
        const Adaptation& adaptation = {}, std::size_t components = 2)
      : y_(y.begin(), y.end()),
        priors_(priors),
        adaptation_(adaptation),
        rng_(seed),
        latent_(y.size()) {
    if (y.empty()) throw DataError("empty count series");
    innov_ = InnovationState::initial(variant, y.size() + 1, rng_, components);
    initialize_latent();
    k_.resize(y.size() + 1);
    dz_.resize(y.size() + 1);
    mh_tries_.assign(y.size() + 2, 0);
  }

  /// One full sweep; throws NumericalError naming the block on a non-finite state.
  void sweep() {
    ++iteration_;
    precisions_into(innov_, k_);
    build_precision_into(k_, precision_);
    precision_.anchor_precision = anchor_precision_;
    precision_.anchor_mean = anchor_mean_;

    for (std::size_t t = 0; t < latent_.z.size(); ++t) {
      const bool active = t >= 1 && t <= y_.size() && latent_.s[t - 1] != 0;
      if (active) ++mh_tries_[t];
      update_latent_site(t, latent_, y_, precision_, rng_, iteration_, adaptation_);
    }
    for (double v : latent_.z) {
      if (!std::isfinite(v)) fail("i (latent path)");
    }

    update_indicators(y_, latent_.z, latent_.pi, rng_, latent_.s);
    latent_.pi = update_pi(latent_.s, rng_, priors_);
    if (!std::isfinite(latent_.pi)) fail("iii (pi)");

    increments(latent_.z, dz_);
    update_innovations(dz_, innov_, rng_, iteration_, priors_, adaptation_);
    if (!std::isfinite(innov_.sigma2) || !std::isfinite(innov_.nu) || !std::isfinite(innov_.mu) ||
        !std::isfinite(innov_.phi) || !std::isfinite(innov_.sigma_xi2)) {
      fail("iv (innovation hyperparameters)");
    }
  }

  /// Zeroes the acceptance counters (called at the end of burn-in).
  void reset_acceptance() {
    std::fill(latent_.accept_counts.begin(), latent_.accept_counts.end(), 0);
    std::fill(mh_tries_.begin(), mh_tries_.end(), 0);
    innov_.nu_accepts = innov_.phi_accepts = innov_.sigma_xi2_accepts = 0;
    counted_sweeps_ = 0;
  }

  void count_sweep() { ++counted_sweeps_; }

  /// Replaces the proposal adaptation schedule, e.g. to freeze the scales.
  void set_adaptation(const Adaptation& a) { adaptation_ = a; }

  /// Overwrites the random-walk scales of sites 0..T+1.
  void set_proposal_scales(std::span<const double> scales) {
    if (scales.size() != latent_.proposal_scales.size()) {
      throw UsageError("expected one proposal scale per latent site");
    }
    for (double v : scales) {
      if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("proposal scales must be positive");
    }
    std::copy(scales.begin(), scales.end(), latent_.proposal_scales.begin());
  }

  AcceptanceSummary acceptance() const {
    AcceptanceSummary a;
    a.latent_sites.assign(latent_.z.size(), std::nan(""));
    double sum = 0.0, lo = 1.0, hi = 0.0;
    std::size_t used = 0;
    for (std::size_t t = 0; t < latent_.z.size(); ++t) {
      if (mh_tries_[t] == 0) continue;
      const double r = static_cast<double>(latent_.accept_counts[t]) / static_cast<double>(mh_tries_[t]);
      a.latent_sites[t] = r;
      sum += r;
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      ++used;
    }
    if (used > 0) {
      a.latent_mean = sum / static_cast<double>(used);
      a.latent_min = lo;
      a.latent_max = hi;
    }
    if (counted_sweeps_ > 0) {
      const double n = static_cast<double>(counted_sweeps_);
      if (innov_.variant == Variant::student_t) a.nu = static_cast<double>(innov_.nu_accepts) / n;
      if (innov_.variant == Variant::sv) {
        a.phi = static_cast<double>(innov_.phi_accepts) / n;
        a.sigma_xi2 = static_cast<double>(innov_.sigma_xi2_accepts) / n;
      }
    }
    return a;
  }

  /// Replaces the observations (successive-conditional simulation).
  /// Positive counts force their indicators on.
  void set_data(std::span<const Count> y) {
    if (y.size() != y_.size()) throw UsageError("replacement data must keep the series length");
    std::copy(y.begin(), y.end(), y_.begin());
    for (std::size_t t = 0; t < y_.size(); ++t) {
      if (y_[t] > 0) latent_.s[t] = 1;
    }
  }

  /// Overwrites the chain state, e.g. to start from a prior draw.
  void set_state(const LatentState& latent, const InnovationState& innov) {
    const auto scales = latent_.proposal_scales;
    latent_ = latent;
    if (latent_.proposal_scales.size() != latent_.z.size()) latent_.proposal_scales = scales;
    latent_.accept_counts.assign(latent_.z.size(), 0);
    innov_ = innov;
  }

  std::span<const Count> data() const noexcept { return y_; }
  const LatentState& latent() const noexcept { return latent_; }
  const InnovationState& innovation() const noexcept { return innov_; }
  const Priors& priors() const noexcept { return priors_; }
  Rng& rng() noexcept { return rng_; }
  std::uint64_t iteration() const noexcept { return iteration_; }
  double anchor_mean() const noexcept { return anchor_mean_; }

 private:
  void initialize_latent() {
    const std::size_t n = y_.size();
    double pos_sum = 0.0;
    std::size_t pos = 0;
    for (std::size_t t = 0; t < n; ++t) {
      latent_.z[t + 1] = std::log(static_cast<double>(y_[t]) + 0.5);
      latent_.s[t] = y_[t] > 0 ? 1 : 0;
      if (y_[t] > 0) {
        pos_sum += static_cast<double>(y_[t]);
        ++pos;
      }
    }
    latent_.z[0] = latent_.z[1];
    latent_.z[n + 1] = latent_.z[n];
    latent_.pi = std::clamp(static_cast<double>(pos) / static_cast<double>(n), 0.05, 0.95);
    if (priors_.z0 == Z0Prior::weak_proper) {
      anchor_mean_ = priors_.z0_mean.value_or(
          pos > 0 ? std::log1p(pos_sum / static_cast<double>(pos)) : 0.0);
      anchor_precision_ = 1.0 / priors_.z0_var;
    }
  }

  [[noreturn]] void fail(const std::string& block) const {
    throw NumericalError("non-finite state in block " + block + " at iteration " +
                         std::to_string(iteration_));
  }

  std::vector<Count> y_;
  Priors priors_;
  Adaptation adaptation_;
  Rng rng_;
  LatentState latent_;
  InnovationState innov_;
  TridiagonalPrecision precision_;
  std::vector<double> k_;
  std::vector<double> dz_;
  std::vector<std::uint64_t> mh_tries_;
  double anchor_mean_ = 0.0;
  double anchor_precision_ = 0.0;
  std::uint64_t iteration_ = 0;
  std::uint64_t counted_sweeps_ = 0;
};

/// Runs burn-in plus n_draws sweeps, streaming traces, thinned paths and the
/// one-step-ahead predictive into a DrawStore. Deterministic in (data, config).
inline DrawStore run_chain(std::span<const Count> y, const McmcConfig& config) {
  config.validate();
  Chain chain(y, config.variant, config.priors, config.seed, config.adaptation,
              config.mixture_components);
  DrawStore store;
  store.variant = config.variant;
  store.n_burn = config.n_burn;
  store.n_draws = config.n_draws;
  store.thin = config.thin;
  store.seed = config.seed;

  for (std::uint64_t i = 0; i < config.n_burn; ++i) chain.sweep();
  chain.reset_acceptance();
  chain.set_adaptation(config.adaptation.frozen());

  const auto M = static_cast<std::size_t>(config.n_draws);
  auto& tr = store.traces;
  const Variant v = config.variant;
  tr.pi.reserve(M);
  tr.z_next.reserve(M);
  if (v != Variant::sv) tr.sigma2.reserve(M);
  store.predictive_unconditional.reserve(M);
  store.predictive_conditional.reserve(M);
  if (config.holdout) {
    store.log_density_unconditional.reserve(M);
    store.log_density_conditional.reserve(M);
  }
  store.s_mean.assign(y.size(), 0.0);

  Rng pred_rng(combine_seed(config.seed, 0x70726564ULL));
  for (std::uint64_t i = 0; i < config.n_draws; ++i) {
    chain.sweep();
    chain.count_sweep();
    const auto& lat = chain.latent();
    const auto& inn = chain.innovation();
    tr.pi.push_back(lat.pi);
    const double z_next = lat.z.back();
    tr.z_next.push_back(z_next);
    switch (v) {
      case Variant::gaussian:
      case Variant::mixture:
        tr.sigma2.push_back(inn.sigma2);
        break;
      case Variant::student_t:
        tr.sigma2.push_back(inn.sigma2);
        tr.nu.push_back(inn.nu);
        break;
      case Variant::sv:
        tr.mu.push_back(inn.mu);
        tr.phi.push_back(inn.phi);
        tr.sigma_xi2.push_back(inn.sigma_xi2);
        break;
    }
    for (std::size_t t = 0; t < lat.s.size(); ++t) store.s_mean[t] += lat.s[t];

    const double lambda = std::exp(z_next);
    const Count cond = pred_rng.poisson(lambda);
    const Count uncond = pred_rng.bernoulli(lat.pi) ? pred_rng.poisson(lambda) : 0;
    store.predictive_conditional.push_back(cond);
    store.predictive_unconditional.push_back(uncond);
    if (config.holdout) {
      store.log_density_conditional.push_back(poisson_log_pmf(*config.holdout, z_next));
      store.log_density_unconditional.push_back(zip_log_pmf(*config.holdout, z_next, lat.pi));
    }

    if (config.store_paths && i % config.thin == 0) {
      store.z_paths.push_back(lat.z);
      if (v == Variant::sv) store.h_paths.push_back(inn.h);
    }
  }
  for (double& s : store.s_mean) s /= static_cast<double>(config.n_draws);
  store.acceptance = chain.acceptance();
  return store;
}

inline DrawStore run_chain(const CountSeries& data, const McmcConfig& config) {
  return run_chain(data.counts(), config);
}

}  // namespace dzip
