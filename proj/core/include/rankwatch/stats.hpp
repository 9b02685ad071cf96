#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace rankwatch {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;      // sample standard deviation (n - 1)
  double std_err = 0.0;  // sd / sqrt(n)
};

Summary summarize(std::span<const double> values);

/// Linearly interpolated quantile (Hyndman-Fan type 7), q in [0, 1].
double quantile(std::vector<double> values, double q);

/// sup_x |F_n(x) - F(x)|.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Large-sample critical value sqrt(-ln(alpha / 2) / 2) / sqrt(n) of the
/// one-sample Kolmogorov-Smirnov statistic.
double ks_critical_value(std::size_t n, double alpha);

/// Regularised incomplete beta I_x(a, b).
double beta_cdf(double x, double a, double b);

/// Standard deviation of the mean over `resamples` bootstrap resamples.
double bootstrap_stderr(std::span<const double> values, int resamples, std::uint64_t seed);

}  // namespace rankwatch
