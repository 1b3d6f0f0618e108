#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dzip/error.hpp"
#include "dzip/random.hpp"

namespace dzip {

/// Random-walk prior precision P = D' K D over the augmented state
/// (z_0, ..., z_{T+1}), stored by its two bands. `k[i]` is the precision of
/// the increment z_{i+1} - z_i.
///
/// P is singular (P 1 = 0). An optional proper anchor N(anchor_mean,
/// 1 / anchor_precision) on z_0 is carried separately from the D' K D bands.
struct TridiagonalPrecision {
  std::vector<double> k;
  std::vector<double> diag;
  std::vector<double> offdiag;
  double anchor_precision = 0.0;
  double anchor_mean = 0.0;

  std::size_t size() const noexcept { return diag.size(); }
};

inline void build_precision_into(std::span<const double> k, TridiagonalPrecision& out) {
  if (k.empty()) throw NumericalError("invalid precision: empty increment vector");
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0) || !std::isfinite(k[i])) {
      throw NumericalError("invalid precision at increment " + std::to_string(i + 1));
    }
  }
  const std::size_t n = k.size() + 1;
  out.k.assign(k.begin(), k.end());
  out.diag.resize(n);
  out.offdiag.resize(n - 1);
  out.diag[0] = k[0];
  for (std::size_t t = 1; t + 1 < n; ++t) out.diag[t] = k[t - 1] + k[t];
  out.diag[n - 1] = k[n - 2];
  for (std::size_t t = 0; t + 1 < n; ++t) out.offdiag[t] = -k[t];
}

inline TridiagonalPrecision build_precision(std::span<const double> k) {
  TridiagonalPrecision p;
  build_precision_into(k, p);
  return p;
}

struct ConditionalMoments {
  double mean;
  double var;
};

/// Moments of z_t given all other sites under the Gaussian prior alone.
inline ConditionalMoments conditional_moments(std::size_t t, std::span<const double> z,
                                              const TridiagonalPrecision& p) {
  double prec = p.diag[t];
  double lin = 0.0;
  if (t > 0) lin -= p.offdiag[t - 1] * z[t - 1];
  if (t + 1 < p.size()) lin -= p.offdiag[t] * z[t + 1];
  if (t == 0 && p.anchor_precision > 0.0) {
    prec += p.anchor_precision;
    lin += p.anchor_precision * p.anchor_mean;
  }
  return {lin / prec, 1.0 / prec};
}

/// Draws x ~ N(Q^{-1} b, Q^{-1}) for a symmetric positive-definite
/// tridiagonal Q given by `diag` and `offdiag`, using the banded Cholesky
/// factor: forward solve for the mean, backward solve for the noise.
inline void sample_tridiagonal_gaussian(std::span<const double> diag,
                                        std::span<const double> offdiag,
                                        std::span<const double> b, Rng& rng,
                                        std::span<double> out) {
  const std::size_t n = diag.size();
  std::vector<double> l(n), sub(n, 0.0), w(n);
  l[0] = std::sqrt(diag[0]);
  if (!(l[0] > 0.0)) throw NumericalError("tridiagonal precision not positive definite");
  w[0] = b[0] / l[0];
  for (std::size_t i = 1; i < n; ++i) {
    sub[i] = offdiag[i - 1] / l[i - 1];
    const double d = diag[i] - sub[i] * sub[i];
    if (!(d > 0.0)) throw NumericalError("tridiagonal precision not positive definite");
    l[i] = std::sqrt(d);
    w[i] = (b[i] - sub[i] * w[i - 1]) / l[i];
  }
  for (std::size_t i = 0; i < n; ++i) w[i] += rng.normal();
  out[n - 1] = w[n - 1] / l[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    out[i] = (w[i] - sub[i + 1] * out[i + 1]) / l[i];
  }
}

}  // namespace dzip
