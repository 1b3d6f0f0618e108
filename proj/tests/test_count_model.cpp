#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dzip/count_model.hpp"

using namespace dzip;

TEST(PoissonLogPmf, ReferenceValues) {
  EXPECT_DOUBLE_EQ(poisson_log_pmf(0, 0.0), -1.0);
  EXPECT_NEAR(poisson_log_pmf(2, 0.0), -1.0 - std::log(2.0), 1e-12);
  // Poisson(5) at 5: 5 log 5 - 5 - log 120
  EXPECT_NEAR(poisson_log_pmf(5, std::log(5.0)), -1.740302, 1e-6);
}

TEST(PoissonLogPmf, RejectsNonFiniteIntensity) {
  EXPECT_THROW(poisson_log_pmf(1, std::nan("")), NumericalError);
  EXPECT_THROW(poisson_log_pmf(1, INFINITY), NumericalError);
}

TEST(PoissonLogPmf, LargeCountsStayFinite) {
  // counts of the order of the largest weekly arrivals
  const double lp = poisson_log_pmf(15694, std::log(15000.0));
  EXPECT_TRUE(std::isfinite(lp));
  EXPECT_LT(lp, 0.0);
}

TEST(LogGamma, MatchesStdLgammaToTwelveDigits) {
  for (double x : {0.1, 0.5, 1.0, 1.5, 2.0, 3.7, 10.0, 101.0, 1234.5, 15695.0, 1e5, 1e6 + 1.0}) {
    const double ref = std::lgamma(x);
    EXPECT_NEAR(log_gamma(x), ref, 1e-12 * std::max(1.0, std::abs(ref))) << x;
  }
}

TEST(ZipLogPmf, ReferenceValues) {
  EXPECT_NEAR(zip_log_pmf(0, 0.0, 0.5), std::log(0.5 + 0.5 * std::exp(-1.0)), 1e-12);
  EXPECT_NEAR(zip_log_pmf(0, 0.0, 0.5), -0.379885, 1e-6);
  EXPECT_DOUBLE_EQ(zip_log_pmf(3, 1.0, 1.0), poisson_log_pmf(3, 1.0));
  EXPECT_EQ(zip_log_pmf(2, 0.7, 0.0), -INFINITY);
  EXPECT_EQ(zip_log_pmf(0, 0.7, 0.0), 0.0);
}

TEST(ZipLogPmf, RejectsProbabilityOutsideUnitInterval) {
  EXPECT_THROW(zip_log_pmf(0, 0.0, -0.1), DataError);
  EXPECT_THROW(zip_log_pmf(0, 0.0, 1.5), DataError);
}

TEST(ZipLogPmf, ZeroAtHugeIntensityDoesNotUnderflow) {
  // both exp(-lambda) and pi exp(-lambda) underflow; the structural term remains
  EXPECT_NEAR(zip_log_pmf(0, 50.0, 0.3), std::log(0.7), 1e-14);
  // with pi = 1 only the sampling term exists: log pmf = -lambda
  EXPECT_NEAR(zip_log_pmf(0, std::log(800.0), 1.0), -800.0, 1e-9);
}

TEST(ZipLogPmf, NormalizesForRandomParameters) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> zdist(-3.0, 7.0), pdist(0.01, 0.99);
  for (int rep = 0; rep < 50; ++rep) {
    const double z = zdist(gen), pi = pdist(gen);
    const double lambda = std::exp(z);
    const auto Y = static_cast<Count>(lambda + 20.0 * std::sqrt(lambda) + 50.0);
    double total = 0.0;
    for (Count y = 0; y <= Y; ++y) total += std::exp(zip_log_pmf(y, z, pi));
    EXPECT_GE(total, 1.0 - 1e-10) << "z=" << z << " pi=" << pi;
    EXPECT_LE(total, 1.0 + 1e-10);
  }
}

TEST(ZipLogPmf, MixtureConsistency) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> zdist(-2.0, 5.0), pdist(0.0, 1.0);
  std::uniform_int_distribution<int> ydist(0, 60);
  for (int rep = 0; rep < 500; ++rep) {
    const double z = zdist(gen), pi = pdist(gen);
    const Count y = ydist(gen);
    const double lambda = std::exp(z);
    // direct pmf, computed by repeated multiplication
    double pois = std::exp(-lambda);
    for (Count i = 1; i <= y; ++i) pois *= lambda / static_cast<double>(i);
    const double expected = (y == 0 ? 1.0 - pi : 0.0) + pi * pois;
    const double got = std::exp(zip_log_pmf(y, z, pi));
    EXPECT_NEAR(got, expected, 1e-12 * std::max(expected, 1e-300) + 1e-300);
  }
}

TEST(ZipLogPmf, IncreasingInPiForPositiveCounts) {
  for (Count y : {1, 4, 30}) {
    double prev = -INFINITY;
    for (double pi = 0.05; pi <= 1.0; pi += 0.05) {
      const double v = zip_log_pmf(y, 2.0, pi);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(CountSeries, Invariants) {
  EXPECT_THROW(CountSeries::weekly({5}), DataError);
  EXPECT_THROW(CountSeries::weekly({5, -1, 2}), DataError);
  EXPECT_THROW(CountSeries({"2015-W40", "2015-W42"}, {1, 2}), DataError);
  EXPECT_THROW(CountSeries({"2015-W41", "2015-W40"}, {1, 2}), DataError);
  const auto s = CountSeries::weekly({1, 2, 3});
  EXPECT_EQ(s.labels()[0], "2015-W40");
  EXPECT_EQ(s.labels()[2], "2015-W42");
  const auto sub = s.slice(1, 2);
  EXPECT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub[0], 2);
}
