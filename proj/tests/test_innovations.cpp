#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "dzip/diagnostics.hpp"
#include "dzip/innovations.hpp"
#include "dzip/simulate.hpp"
#include "test_support.hpp"

using namespace dzip;

namespace {

InnovationState make_state(Variant v, std::size_t n) {
  Rng rng(0);
  return InnovationState::initial(v, n, rng);
}

}  // namespace

TEST(Precisions, VariantFormulas) {
  auto g = make_state(Variant::gaussian, 5);
  g.sigma2 = 0.25;
  for (double k : precisions(g)) EXPECT_DOUBLE_EQ(k, 4.0);

  auto t = make_state(Variant::student_t, 5);
  t.sigma2 = 0.5;
  std::fill(t.omega.begin(), t.omega.end(), 2.0);
  for (double k : precisions(t)) EXPECT_DOUBLE_EQ(k, 4.0);

  auto sv = make_state(Variant::sv, 5);
  for (double k : precisions(sv)) EXPECT_DOUBLE_EQ(k, 1.0);
  sv.h = {0.0, 1.0, -1.0, 2.0, 0.5};
  const auto ksv = precisions(sv);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(ksv[i], std::exp(-sv.h[i]));

  auto m = make_state(Variant::mixture, 4);
  m.sigma2 = 2.0;
  m.sigma2_h = {0.5, 3.0};
  m.rho = {0, 1, 1, 0};
  const auto km = precisions(m);
  EXPECT_DOUBLE_EQ(km[0], 1.0);
  EXPECT_DOUBLE_EQ(km[1], 1.0 / 6.0);
}

TEST(Precisions, DegenerateStateThrows) {
  auto g = make_state(Variant::gaussian, 3);
  g.sigma2 = 0.0;
  EXPECT_THROW(precisions(g), NumericalError);
  auto sv = make_state(Variant::sv, 3);
  sv.h[1] = -1000.0;
  EXPECT_THROW(precisions(sv), NumericalError);
}

TEST(GaussianUpdate, InverseGammaPosteriorMean) {
  // T = 3, dz = (1, -1, 2, 0): IG(2.5 + 2, 1.5 + 3) = IG(4.5, 4.5), mean 4.5 / 3.5
  const std::vector<double> dz{1.0, -1.0, 2.0, 0.0};
  Rng rng(1);
  double sum = 0.0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) sum += gaussian_update(dz, rng);
  EXPECT_NEAR(sum / n, 4.5 / 3.5, 0.005 * 4.5 / 3.5);
}

TEST(GaussianUpdate, ZeroIncrementsLeaveOnlyPriorRate) {
  const std::vector<double> dz(4, 0.0);
  Rng rng(2);
  double sum = 0.0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) sum += gaussian_update(dz, rng);
  EXPECT_NEAR(sum / n, 1.5 / (4.5 - 1.0), 0.005 * 1.5 / 3.5);
}

TEST(StudentT, OmegaConditionalMeans) {
  Rng rng(3);
  auto s = make_state(Variant::student_t, 2);
  s.nu = 5.0;
  constexpr int n = 100000;
  double w0 = 0.0, w1 = 0.0;
  const std::vector<double> dz{2.0, 0.0};
  for (int i = 0; i < n; ++i) {
    s.sigma2 = 1.0;
    student_t_update(dz, s, rng);
    w0 += s.omega[0];
    w1 += s.omega[1];
  }
  EXPECT_NEAR(w0 / n, 3.0 / 4.5, 0.005);  // Gamma(3, 4.5)
  EXPECT_NEAR(w1 / n, 6.0 / 5.0, 0.01);   // Gamma(3, 2.5)
}

TEST(StudentT, ScaleMixtureIntegratesToStudentDensity) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  for (double nu : {4.0, 8.0}) {
    for (double sigma2 : {1.0, 0.3}) {
      boost::math::students_t_distribution<double> t(nu);
      double worst = 0.0;
      for (double x = -6.0; x <= 6.0; x += 0.25) {
        const auto f = [&](double w) {
          return std::exp(normal_log_pdf(x, 0.0, sigma2 / w) + gamma_log_pdf(w, 0.5 * nu, 0.5 * nu));
        };
        const double mixed = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
        const double closed = boost::math::pdf(t, x / std::sqrt(sigma2)) / std::sqrt(sigma2);
        worst = std::max(worst, std::abs(mixed - closed));
      }
      EXPECT_LT(worst, 1e-6) << "nu " << nu;
    }
  }
}

TEST(NuStep, AcceptanceRatioEdgeCases) {
  const std::vector<double> omega{0.8, 1.3, 0.9};
  EXPECT_EQ(nu_log_accept(6.0, 6.0, omega), 0.0);
  EXPECT_EQ(nu_log_accept(6.0, 3.0, omega), -INFINITY);
  EXPECT_EQ(nu_log_accept(6.0, 2.5, omega), -INFINITY);
}

TEST(NuStep, ChainMatchesQuadratureConditional) {
  // omega fixed at 1 for 10 increments; target p(nu | omega) by quadrature
  const std::vector<double> omega(10, 1.0);
  const auto log_target = [&](double nu) { return nu_log_conditional(nu, omega); };
  const double upper = 400.0;
  boost::math::quadrature::gauss_kronrod<double, 61> gk;
  const double c = log_target(10.0);
  const auto dens = [&](double nu) { return std::exp(log_target(nu) - c); };
  const double z = gk.integrate(dens, 3.0, upper, 15);
  const auto cdf = [&](double nu) { return gk.integrate(dens, 3.0, nu, 15) / z; };

  auto s = make_state(Variant::student_t, omega.size());
  s.omega = omega;
  Rng rng(4);
  std::vector<double> draws;
  for (std::uint64_t i = 1; i <= 110000; ++i) {
    nu_mh_step(s, rng, i);
    ASSERT_GT(s.nu, 3.0);
    if (i > 10000) draws.push_back(s.nu);
  }
  std::sort(draws.begin(), draws.end());
  double ks = 0.0;
  const std::size_t n = draws.size();
  for (std::size_t i = 0; i < n; i += 50) {
    const double F = cdf(draws[i]);
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 0.02);
}

TEST(Mixture, DirichletWeightsFromCounts) {
  // dz chosen so that allocations are (essentially) fixed: component 0
  // variance tiny and component 1 huge, R = (10, 5)
  auto s = make_state(Variant::mixture, 15);
  std::vector<double> dz(15, 0.0);
  for (std::size_t i = 10; i < 15; ++i) dz[i] = 30.0;
  Rng rng(5);
  double e0 = 0.0;
  constexpr int n = 50000;
  for (int i = 0; i < n; ++i) {
    s.sigma2 = 1.0;
    s.sigma2_h = {1e-4, 1e4};
    s.eta = {0.5, 0.5};
    mixture_update(dz, s, rng);
    e0 += s.eta[0];
  }
  EXPECT_NEAR(e0 / n, 11.0 / 17.0, 0.005);
}

TEST(Mixture, AllocationProbabilities) {
  auto s = make_state(Variant::mixture, 1);
  std::vector<double> lw(2);
  s.eta = {0.3, 0.7};
  s.sigma2_h = {2.0, 2.0};
  mixture_allocation_log_weights(1.3, s, lw);
  const double p0 = std::exp(lw[0]) / (std::exp(lw[0]) + std::exp(lw[1]));
  EXPECT_NEAR(p0, 0.3, 1e-12);

  s.eta = {0.5, 0.5};
  s.sigma2 = 1.0;
  s.sigma2_h = {1.0, 4.0};
  mixture_allocation_log_weights(0.0, s, lw);
  const double q0 = std::exp(lw[0]) / (std::exp(lw[0]) + std::exp(lw[1]));
  EXPECT_NEAR(q0, 2.0 / 3.0, 1e-12);
}

TEST(Mixture, EmptyComponentDrawsFromPrior) {
  auto s = make_state(Variant::mixture, 20);
  const std::vector<double> dz(20, 0.1);
  Rng rng(6);
  double sum = 0.0;
  int empties = 0;
  constexpr int n = 50000;
  for (int i = 0; i < n; ++i) {
    s.eta = {1.0, 1e-300};
    s.sigma2 = 1.0;
    s.sigma2_h = {1.0, 1.0};
    mixture_update(dz, s, rng);
    if (std::count(s.rho.begin(), s.rho.end(), 1u) == 0) {
      sum += s.sigma2_h[1];
      ++empties;
    }
  }
  ASSERT_EQ(empties, n);
  EXPECT_NEAR(sum / n, 1.5 / 1.5, 0.03);  // IG(2.5, 1.5) mean
}

TEST(StochasticVolatility, MixtureConstants) {
  const auto& w = LogChi2Mixture::weights;
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
  // mean of the approximation is close to E log chi^2_1 = -1.2704
  double m = 0.0;
  for (std::size_t j = 0; j < 7; ++j) m += w[j] * LogChi2Mixture::mean(j);
  EXPECT_NEAR(m, -1.2704, 1e-3);
}

TEST(StochasticVolatility, ComponentPosteriorMatchesBayesRule) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> rd(-15.0, 5.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double e = rd(gen);
    const auto p = sv_component_probabilities(e);
    double total = 0.0, norm = 0.0;
    std::array<double, 7> direct{};
    for (std::size_t j = 0; j < 7; ++j) {
      const double v = LogChi2Mixture::variances[j];
      const double d = e - LogChi2Mixture::mean(j);
      direct[j] = LogChi2Mixture::weights[j] * std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * M_PI * v);
      norm += direct[j];
      total += p[j];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t j = 0; j < 7; ++j) EXPECT_NEAR(p[j], direct[j] / norm, 1e-12);
  }
}

TEST(StochasticVolatility, StationaryVarianceOfPrior) {
  Rng rng(10);
  auto s = make_state(Variant::sv, 1000000);
  s.mu = 0.0;
  s.phi = 0.9;
  s.sigma_xi2 = 0.19;
  draw_sv_path_prior(s, rng);
  EXPECT_NEAR(test::variance(s.h), 1.0, 0.05);

  s.phi = 0.0;
  s.sigma_xi2 = 0.37;
  draw_sv_path_prior(s, rng);
  EXPECT_NEAR(test::variance(s.h), 0.37, 0.01);
}

TEST(StochasticVolatility, RecoversParametersWithObservedIncrements) {
  GeneratorConfig g;
  g.variant = Variant::sv;
  g.length = 500;
  g.mu = -1.0;
  g.phi = 0.95;
  g.sigma_xi2 = 0.05;
  g.z0 = 0.0;
  const auto sim = simulate(g, 11);
  std::vector<double> dz(g.length);
  for (std::size_t i = 0; i < g.length; ++i) dz[i] = sim.z[i + 1] - sim.z[i];

  Rng rng(12);
  auto s = make_state(Variant::sv, dz.size());
  std::vector<double> mu, phi, sx;
  for (int i = 0; i < 12000; ++i) {
    sv_update(dz, s, rng);
    if (i >= 2000) {
      mu.push_back(s.mu);
      phi.push_back(s.phi);
      sx.push_back(s.sigma_xi2);
    }
  }
  const auto check = [](const std::vector<double>& x, double truth, const char* name) {
    const double m = test::mean(x);
    const double lo = sample_quantile(x, 0.025), hi = sample_quantile(x, 0.975);
    EXPECT_GE(m, lo) << name;
    EXPECT_LE(m, hi) << name;
    EXPECT_GE(truth, lo) << name << " truth outside 95% interval [" << lo << ", " << hi << "]";
    EXPECT_LE(truth, hi) << name << " truth outside 95% interval [" << lo << ", " << hi << "]";
  };
  check(mu, g.mu, "mu");
  check(phi, g.phi, "phi");
  check(sx, g.sigma_xi2, "sigma_xi2");
}

TEST(StochasticVolatility, HPathMatchesDenseConditional) {
  // fixed components: h | u is Gaussian with precision Q_prior + diag(1/v_j)
  auto s = make_state(Variant::sv, 3);
  s.mu = -0.5;
  s.phi = 0.7;
  s.sigma_xi2 = 0.4;
  s.sv_component = {4, 5, 1};
  const std::vector<double> u{-1.0, 0.3, -2.5};
  std::vector<std::vector<long double>> Q(3, std::vector<long double>(3, 0.0L));
  const double inv = 1.0 / s.sigma_xi2;
  // AR(1) stationary prior precision built from the transition densities
  Q[0][0] = (1 - s.phi * s.phi) * inv + s.phi * s.phi * inv;
  Q[1][1] = inv + s.phi * s.phi * inv;
  Q[2][2] = inv;
  Q[0][1] = Q[1][0] = -s.phi * inv;
  Q[1][2] = Q[2][1] = -s.phi * inv;
  std::vector<long double> lin(3);
  // prior mean mu for every coordinate: lin = Q mu 1
  for (std::size_t i = 0; i < 3; ++i) {
    lin[i] = 0.0L;
    for (std::size_t j = 0; j < 3; ++j) lin[i] += Q[i][j] * s.mu;
  }
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = s.sv_component[i];
    Q[i][i] += 1.0L / LogChi2Mixture::variances[j];
    lin[i] += (u[i] - LogChi2Mixture::mean(j)) / LogChi2Mixture::variances[j];
  }
  const auto S = test::dense_inverse(Q);
  Rng rng(13);
  constexpr int n = 200000;
  std::vector<double> sum(3, 0.0), sq(3, 0.0);
  for (int it = 0; it < n; ++it) {
    sample_sv_path(u, s, rng);
    for (std::size_t i = 0; i < 3; ++i) {
      sum[i] += s.h[i];
      sq[i] += s.h[i] * s.h[i];
    }
  }
  for (std::size_t i = 0; i < 3; ++i) {
    long double m = 0.0L;
    for (std::size_t j = 0; j < 3; ++j) m += S[i][j] * lin[j];
    const double var = static_cast<double>(S[i][i]);
    EXPECT_NEAR(sum[i] / n, static_cast<double>(m), 5.0 * std::sqrt(var / n));
    EXPECT_NEAR(sq[i] / n - (sum[i] / n) * (sum[i] / n), var, 0.02 * var);
  }
}

TEST(PriorDraws, SupportConstraints) {
  Rng rng(14);
  for (int i = 0; i < 2000; ++i) {
    const auto t = draw_innovation_prior(Variant::student_t, 5, rng);
    EXPECT_GT(t.nu, 3.0);
    const auto sv = draw_innovation_prior(Variant::sv, 5, rng);
    EXPECT_LT(std::abs(sv.phi), 1.0);
    EXPECT_GT(sv.sigma_xi2, 0.0);
    const auto m = draw_innovation_prior(Variant::mixture, 5, rng);
    EXPECT_NEAR(m.eta[0] + m.eta[1], 1.0, 1e-12);
  }
}

TEST(VariantNames, RoundTrip) {
  for (Variant v : all_variants) EXPECT_EQ(parse_variant(variant_name(v)), v);
  EXPECT_FALSE(parse_variant("negbin"));
}
