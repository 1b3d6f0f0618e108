#pragma once

#include <optional>

namespace dzip {

enum class Z0Prior { flat, weak_proper };

/// Prior hyperparameters. Defaults are the published model's choices; every
/// field may be overridden for experiments and correctness tests.
struct Priors {
  // pi ~ Beta(a, b)
  double pi_a = 0.5;
  double pi_b = 0.5;
  // sigma^2 ~ IG(shape, scale); also used for the mixture component scales
  double sigma2_shape = 2.5;
  double sigma2_scale = 1.5;
  double sigma2_h_shape = 2.5;
  double sigma2_h_scale = 1.5;
  // nu - nu_min ~ Exp(nu_rate)
  double nu_min = 3.0;
  double nu_rate = 1.0 / 6.0;
  // eta ~ Dirichlet(alpha, ..., alpha)
  double dirichlet_alpha = 1.0;
  // SV: mu ~ N(mu_mean, mu_var); (phi + 1) / 2 ~ Beta(phi_a, phi_b);
  // sigma_xi^2 ~ Gamma(shape, rate)
  double mu_mean = 0.0;
  double mu_var = 100.0;
  double phi_a = 5.0;
  double phi_b = 1.5;
  double sigma_xi2_shape = 0.5;
  double sigma_xi2_rate = 0.5;
  // z_0 prior. weak_proper: N(z0_mean, z0_var), z0_mean defaulting to
  // log(1 + mean of the positive counts) when unset.
  Z0Prior z0 = Z0Prior::weak_proper;
  std::optional<double> z0_mean;
  double z0_var = 1.0e4;
};

}  // namespace dzip
