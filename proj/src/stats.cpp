// SPDX-License-Identifier: Apache-2.0
#include "mdim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "mdim/error.hpp"
#include "mdim/rng.hpp"

namespace mdim {

double mean(std::span<const double> x) {
  require(!x.empty(), "mean of empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double quantile(std::vector<double> x, double q) {
  require(!x.empty(), "quantile of empty sample");
  require(q >= 0.0 && q <= 1.0, "quantile level outside [0,1]");
  std::sort(x.begin(), x.end());
  const double h = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

LinearFit ols(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size() && x.size() >= 2, "ols: need >= 2 points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  require(sxx > 0.0, "ols: degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double sse = std::max(0.0, syy - fit.slope * sxy);
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  fit.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
  return fit;
}

double kolmogorov_q(double lambda) {
  if (lambda < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  require(!a.empty() && !b.empty(), "ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

KsResult ks_one_sample(std::vector<double> a, double (*cdf)(double)) {
  require(!a.empty(), "ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double ne = std::sqrt(n);
  return {d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d)};
}

double proportion_se(double p, std::uint64_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

Interval bootstrap_median_ci(std::span<const double> x, int reps, double level,
                             RngStream& rng) {
  require(!x.empty(), "bootstrap of empty sample");
  if (x.size() == 1) return {x[0], x[0]};
  std::vector<double> meds(reps), buf(x.size());
  for (int r = 0; r < reps; ++r) {
    for (auto& v : buf) {
      v = x[static_cast<std::size_t>(rng.uniform() * x.size()) % x.size()];
    }
    meds[r] = median(buf);
  }
  const double a = 0.5 * (1.0 - level);
  return {quantile(meds, a), quantile(meds, 1.0 - a)};
}

}  // namespace mdim
