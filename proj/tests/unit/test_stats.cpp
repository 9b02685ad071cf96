#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankwatch/error.hpp"
#include "rankwatch/stats.hpp"

using namespace rankwatch;

TEST(Summarize, Basic) {
  const std::vector<double> v{1, 2, 3, 4};
  const Summary s = summarize(v);
  EXPECT_EQ(s.n, 4u);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.std_err, s.sd / 2.0, 1e-15);
}

TEST(Summarize, Degenerate) {
  const std::vector<double> one{7.0};
  EXPECT_EQ(summarize(one).sd, 0.0);
  EXPECT_EQ(summarize(std::vector<double>{}).n, 0u);
}

TEST(Quantile, Type7) {
  const std::vector<double> v{4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(quantile(v, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(v, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile(v, 0.1), 1.4);
  EXPECT_THROW(quantile({}, 0.5), Error);
  EXPECT_THROW(quantile(v, 1.5), Error);
}

TEST(BetaCdf, KnownValues) {
  EXPECT_NEAR(beta_cdf(0.5, 25, 25), 0.5, 1e-14);
  EXPECT_NEAR(beta_cdf(0.3, 1, 1), 0.3, 1e-14);
  EXPECT_NEAR(beta_cdf(0.3, 2, 1), 0.09, 1e-14);
  EXPECT_EQ(beta_cdf(0.0, 3, 4), 0.0);
  EXPECT_EQ(beta_cdf(1.0, 3, 4), 1.0);
}

TEST(Ks, UniformSample) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u;
  std::vector<double> v(5000);
  for (double& x : v) x = u(gen);
  const double d = ks_statistic(v, [](double x) { return std::clamp(x, 0.0, 1.0); });
  EXPECT_LT(d, ks_critical_value(v.size(), 0.01));
  std::vector<double> shifted = v;
  for (double& x : shifted) x = x * 0.8;
  EXPECT_GT(ks_statistic(shifted, [](double x) { return std::clamp(x, 0.0, 1.0); }),
            ks_critical_value(v.size(), 0.01));
}

TEST(Ks, ExactSmallCase) {
  // F_n jumps at 0.2 and 0.6; sup |F_n - x| is 0.4 just below 0.6
  EXPECT_NEAR(ks_statistic({0.2, 0.6}, [](double x) { return x; }), 0.4, 1e-15);
  EXPECT_NEAR(ks_critical_value(100, 0.05), 0.1358102, 1e-6);
}

TEST(Bootstrap, AgreesWithAnalyticStderr) {
  std::mt19937_64 gen(2);
  std::exponential_distribution<double> e(0.01);
  std::vector<double> v(500);
  for (double& x : v) x = e(gen);
  const double boot = bootstrap_stderr(v, 2000, 3);
  const double analytic = summarize(v).std_err;
  EXPECT_NEAR(boot / analytic, 1.0, 0.1);
  EXPECT_EQ(bootstrap_stderr(v, 2000, 3), boot);
}
