// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace mdim {

class RngStream;

double mean(std::span<const double> x);
/// Unbiased sample variance.
double variance(std::span<const double> x);
/// Linear-interpolation quantile (type 7); q in [0, 1].
double quantile(std::vector<double> x, double q);
double median(std::vector<double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
};
LinearFit ols(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
/// One-sample KS against a continuous CDF.
KsResult ks_one_sample(std::vector<double> a, double (*cdf)(double));
/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} e^{-2k^2 lambda^2}.
double kolmogorov_q(double lambda);

/// Binomial proportion standard error sqrt(p(1-p)/n).
double proportion_se(double p, std::uint64_t n);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};
/// Percentile bootstrap CI of the median.
Interval bootstrap_median_ci(std::span<const double> x, int reps, double level,
                             RngStream& rng);

}  // namespace mdim
