#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dzip/diagnostics.hpp"
#include "dzip/engine.hpp"
#include "dzip/simulate.hpp"
#include "test_support.hpp"

using namespace dzip;

namespace {

McmcConfig quick(Variant v, std::uint64_t seed = 1) {
  McmcConfig c;
  c.variant = v;
  c.n_burn = 500;
  c.n_draws = 2000;
  c.thin = 10;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(RunChain, DeterministicInSeed) {
  GeneratorConfig g;
  g.length = 80;
  const auto sim = simulate(g, 3);
  for (Variant v : all_variants) {
    const auto a = run_chain(sim.series, quick(v, 7));
    const auto b = run_chain(sim.series, quick(v, 7));
    const auto c = run_chain(sim.series, quick(v, 8));
    EXPECT_EQ(a.traces.pi, b.traces.pi) << variant_name(v);
    EXPECT_EQ(a.traces.z_next, b.traces.z_next);
    EXPECT_EQ(a.predictive_unconditional, b.predictive_unconditional);
    EXPECT_NE(a.traces.z_next, c.traces.z_next);
  }
}

TEST(RunChain, StoreShapes) {
  GeneratorConfig g;
  g.length = 40;
  const auto sim = simulate(g, 4);
  auto cfg = quick(Variant::sv);
  cfg.n_draws = 1001;
  cfg.thin = 10;
  cfg.holdout = 12;
  const auto s = run_chain(sim.series, cfg);
  EXPECT_EQ(s.traces.pi.size(), 1001u);
  EXPECT_EQ(s.traces.mu.size(), 1001u);
  EXPECT_TRUE(s.traces.sigma2.empty());
  EXPECT_EQ(s.z_paths.size(), 101u);
  EXPECT_EQ(s.z_paths.front().size(), 42u);
  EXPECT_EQ(s.h_paths.front().size(), 41u);
  EXPECT_EQ(s.s_mean.size(), 40u);
  EXPECT_EQ(s.log_density_conditional.size(), 1001u);
  EXPECT_EQ(s.predictive_conditional.size(), 1001u);
  for (double p : s.traces.pi) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(RunChain, PositiveCountsAlwaysOnSamplingPath) {
  const auto y = CountSeries::weekly({5, 0, 7, 0, 0, 9, 4, 0, 6, 8, 3, 0});
  const auto s = run_chain(y, quick(Variant::gaussian));
  for (std::size_t t = 0; t < y.size(); ++t) {
    if (y[t] > 0) EXPECT_EQ(s.s_mean[t], 1.0);
  }
}

TEST(RunChain, LatentAcceptanceNearTarget) {
  GeneratorConfig g;
  g.length = 150;
  const auto sim = simulate(g, 5);
  auto cfg = quick(Variant::sv);
  cfg.n_burn = 2000;
  cfg.n_draws = 5000;
  const auto s = run_chain(sim.series, cfg);
  EXPECT_NEAR(s.acceptance.latent_mean, 0.234, 0.05);
  ASSERT_TRUE(s.acceptance.phi.has_value());
  EXPECT_GT(*s.acceptance.phi, 0.0);
}

TEST(RunChain, RecoversGaussianParameters) {
  GeneratorConfig g;
  g.variant = Variant::gaussian;
  g.length = 400;
  g.sigma2 = 0.05;
  g.pi = 0.9;
  g.z0 = std::log(50.0);
  const auto sim = simulate(g, 6);
  auto cfg = quick(Variant::gaussian);
  cfg.n_burn = 2000;
  cfg.n_draws = 10000;
  const auto s = run_chain(sim.series, cfg);
  const double s_lo = sample_quantile(s.traces.sigma2, 0.005);
  const double s_hi = sample_quantile(s.traces.sigma2, 0.995);
  EXPECT_GE(g.sigma2, s_lo);
  EXPECT_LE(g.sigma2, s_hi);
  const double p_lo = sample_quantile(s.traces.pi, 0.005);
  const double p_hi = sample_quantile(s.traces.pi, 0.995);
  EXPECT_GE(g.pi, p_lo);
  EXPECT_LE(g.pi, p_hi);
  // posterior mean path tracks the truth
  double err = 0.0;
  for (std::size_t t = 1; t <= g.length; ++t) {
    double m = 0.0;
    for (const auto& z : s.z_paths) m += z[t];
    m /= static_cast<double>(s.z_paths.size());
    err += (m - sim.z[t]) * (m - sim.z[t]);
  }
  EXPECT_LT(std::sqrt(err / static_cast<double>(g.length)), 0.15);
}

TEST(RunChain, AllZeroSeriesStaysFinite) {
  const auto y = CountSeries::weekly(std::vector<Count>(30, 0));
  for (Variant v : all_variants) {
    const auto s = run_chain(y, quick(v));
    for (double z : s.traces.z_next) ASSERT_TRUE(std::isfinite(z)) << variant_name(v);
    EXPECT_EQ(s.acceptance.latent_sites.size(), 32u);
  }
}

TEST(RunChain, FlatPriorAlsoRuns) {
  GeneratorConfig g;
  g.length = 60;
  const auto sim = simulate(g, 8);
  auto cfg = quick(Variant::student_t);
  cfg.priors.z0 = Z0Prior::flat;
  const auto s = run_chain(sim.series, cfg);
  EXPECT_EQ(s.traces.nu.size(), cfg.n_draws);
}

TEST(RunChain, RejectsBadConfig) {
  const auto y = CountSeries::weekly({1, 2, 3});
  auto cfg = quick(Variant::gaussian);
  cfg.thin = 0;
  EXPECT_THROW(run_chain(y, cfg), UsageError);
  cfg.thin = 1;
  cfg.n_draws = 0;
  EXPECT_THROW(run_chain(y, cfg), UsageError);
}

TEST(Chain, SetDataForcesIndicators) {
  const std::vector<Count> y{0, 0, 0, 0};
  Chain chain(y, Variant::gaussian, Priors{}, 1);
  chain.set_data(std::vector<Count>{0, 3, 0, 1});
  EXPECT_EQ(chain.latent().s[1], 1);
  EXPECT_EQ(chain.latent().s[3], 1);
  EXPECT_THROW(chain.set_data(std::vector<Count>{1, 2}), UsageError);
}

TEST(Chain, FrozenScalesStayPut) {
  const std::vector<Count> y{4, 0, 7, 2, 9, 1};
  Chain chain(y, Variant::gaussian, Priors{}, 3);
  const std::vector<double> scales{1.0, 0.5, 0.4, 0.3, 0.2, 0.6, 0.7, 1.0};
  chain.set_proposal_scales(scales);
  chain.set_adaptation(Adaptation{}.frozen());
  for (int i = 0; i < 50; ++i) chain.sweep();
  EXPECT_EQ(chain.latent().proposal_scales, scales);
  EXPECT_THROW(chain.set_proposal_scales(std::vector<double>{1.0}), UsageError);
  EXPECT_THROW(chain.set_proposal_scales(std::vector<double>(8, -1.0)), UsageError);

  chain.set_adaptation(Adaptation{});
  chain.sweep();
  EXPECT_NE(chain.latent().proposal_scales, scales);
}

TEST(EffectiveSampleSize, IidAndAr1Oracles) {
  Rng rng(9);
  std::vector<double> iid(20000);
  for (auto& v : iid) v = rng.normal();
  EXPECT_NEAR(effective_sample_size(iid) / 20000.0, 1.0, 0.1);

  for (double phi : {0.5, 0.9}) {
    std::vector<double> ar(100000);
    ar[0] = rng.normal() / std::sqrt(1.0 - phi * phi);
    for (std::size_t i = 1; i < ar.size(); ++i) ar[i] = phi * ar[i - 1] + rng.normal();
    const double expected = 100000.0 * (1.0 - phi) / (1.0 + phi);
    EXPECT_NEAR(effective_sample_size(ar) / expected, 1.0, 0.15) << phi;
  }
  EXPECT_EQ(effective_sample_size(std::vector<double>(100, 2.0)), 1.0);
}

TEST(EffectiveSampleSize, Autocovariance) {
  const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  const auto a = autocovariance(x, 2);
  EXPECT_DOUBLE_EQ(a[0], 1.25);
  EXPECT_DOUBLE_EQ(a[1], (-1.5 * -0.5 + -0.5 * 0.5 + 0.5 * 1.5) / 4.0);
}

TEST(Diagnostics, SummaryMatchesTraces) {
  GeneratorConfig g;
  g.length = 40;
  const auto sim = simulate(g, 10);
  const auto s = run_chain(sim.series, quick(Variant::mixture));
  const auto d = diagnostics(s);
  ASSERT_TRUE(d.traces.contains("sigma2"));
  EXPECT_FALSE(d.traces.contains("phi"));
  EXPECT_NEAR(d.traces.at("pi").mean, test::mean(s.traces.pi), 1e-12);
  EXPECT_LE(d.traces.at("pi").q05, d.traces.at("pi").q95);
}
