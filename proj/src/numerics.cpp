// SPDX-License-Identifier: Apache-2.0
#include "mdim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "mdim/error.hpp"

namespace mdim {
namespace {

// Kronrod 15-point nodes and weights; Gauss 7-point weights on the odd nodes.
constexpr double kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

std::pair<double, double> gk15(const std::function<double(double)>& f,
                               double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double rk = fc * kWgk[7];
  double rg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double x = h * kXgk[j];
    const double s = f(c - x) + f(c + x);
    rk += kWgk[j] * s;
    if (j % 2 == 1) rg += kWg[j / 2] * s;
  }
  return {rk * h, std::abs((rk - rg) * h)};
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  require(n >= 1 && n <= 512, "gauss_legendre: n out of range");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return cache.emplace(n, std::move(rule)).first->second;
}

IntegralResult integrate_gk(const std::function<double(double)>& f, double a,
                            double b, double abs_tol, double rel_tol,
                            int max_depth) {
  struct Seg {
    double a, b, val, err;
    int depth;
  };
  IntegralResult out;
  if (a == b) return out;
  std::vector<Seg> heap;
  auto cmp = [](const Seg& x, const Seg& y) { return x.err < y.err; };
  auto [v0, e0] = gk15(f, a, b);
  out.evaluations = 15;
  heap.push_back({a, b, v0, e0, 0});
  double total = v0, err = e0;
  while (err > std::max(abs_tol, rel_tol * std::abs(total))) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    Seg s = heap.back();
    heap.pop_back();
    if (s.depth >= max_depth || out.evaluations > 2'000'000) {
      throw QuadratureError("adaptive quadrature did not converge", total - err,
                            total + err);
    }
    const double m = 0.5 * (s.a + s.b);
    auto [vl, el] = gk15(f, s.a, m);
    auto [vr, er] = gk15(f, m, s.b);
    out.evaluations += 30;
    total += vl + vr - s.val;
    err += el + er - s.err;
    heap.push_back({s.a, m, vl, el, s.depth + 1});
    std::push_heap(heap.begin(), heap.end(), cmp);
    heap.push_back({m, s.b, vr, er, s.depth + 1});
    std::push_heap(heap.begin(), heap.end(), cmp);
  }
  // recompute totals to shed accumulated rounding from the running sums
  total = 0.0;
  err = 0.0;
  for (const auto& s : heap) {
    total += s.val;
    err += s.err;
  }
  out.value = total;
  out.error = err;
  return out;
}

double sphere_area(int d) {
  require(d >= 1, "sphere_area: d must be >= 1");
  return 2.0 * std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d);
}

double sphere_moment(int d, double p) {
  require(d >= 1 && p > -1.0, "sphere_moment: bad arguments");
  if (d == 1) return 1.0;
  return std::exp(std::lgamma(0.5 * (p + 1.0)) + std::lgamma(0.5 * d) -
                  0.5 * std::log(kPi) - std::lgamma(0.5 * (p + d)));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> cholesky_psd(std::span<const double> a, int d) {
  require(static_cast<int>(a.size()) == d * d, "cholesky_psd: size mismatch");
  double scale = 0.0;
  for (int i = 0; i < d; ++i) scale = std::max(scale, std::abs(a[i * d + i]));
  std::vector<double> l(d * d, 0.0);
  for (int j = 0; j < d; ++j) {
    double s = a[j * d + j];
    for (int k = 0; k < j; ++k) s -= l[j * d + k] * l[j * d + k];
    if (s < -1e-12 * std::max(scale, 1.0)) {
      throw Error(ErrorCode::numeric, "matrix is not positive semidefinite");
    }
    const double ljj = s > 0.0 ? std::sqrt(s) : 0.0;
    l[j * d + j] = ljj;
    for (int i = j + 1; i < d; ++i) {
      double t = a[i * d + j];
      for (int k = 0; k < j; ++k) t -= l[i * d + k] * l[j * d + k];
      l[i * d + j] = ljj > 0.0 ? t / ljj : 0.0;
    }
  }
  return l;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mdim
