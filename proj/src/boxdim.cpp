// SPDX-License-Identifier: Apache-2.0
#include "mdim/boxdim.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mdim/error.hpp"
#include "mdim/rng.hpp"
#include "mdim/stats.hpp"

namespace mdim {
namespace {

// Exponent e with eps == 2^{-e}, or nullopt.
std::optional<int> dyadic_exponent(double eps) {
  int e = 0;
  const double m = std::frexp(eps, &e);
  if (m != 0.5) return std::nullopt;
  return 1 - e;
}

std::uint64_t spread_bits(std::uint64_t v, int d, int bits) {
  std::uint64_t out = 0;
  for (int b = 0; b < bits; ++b) out |= ((v >> b) & 1u) << (b * d);
  return out;
}

bool count_dyadic(const PointCloud& pts, const std::vector<int>& exps,
                  std::vector<std::uint64_t>& counts) {
  const int d = pts.dim;
  const int e_max = *std::max_element(exps.begin(), exps.end());
  const int e_min = *std::min_element(exps.begin(), exps.end());
  const int max_shift = e_max - e_min;
  const std::size_t n = pts.size();
  std::vector<std::int64_t> cells(n * d);
  std::vector<std::int64_t> lo(d, std::numeric_limits<std::int64_t>::max());
  std::vector<std::int64_t> hi(d, std::numeric_limits<std::int64_t>::min());
  const double scale = std::ldexp(1.0, e_max);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) {
      const double c = std::floor(pts.coords[i * d + k] * scale);
      if (std::abs(c) > 4e18) return false;
      const auto ci = static_cast<std::int64_t>(c);
      cells[i * d + k] = ci;
      lo[k] = std::min(lo[k], ci);
      hi[k] = std::max(hi[k], ci);
    }
  }
  int bits = 0;
  std::vector<std::int64_t> off(d);
  for (int k = 0; k < d; ++k) {
    // align the offset so shifted cells stay origin-anchored
    off[k] = (lo[k] >> max_shift) << max_shift;
    const auto span = static_cast<std::uint64_t>(hi[k] - off[k]);
    bits = std::max(bits, span == 0 ? 1 : 64 - std::countl_zero(span));
  }
  if (bits * d > 63) return false;
  std::vector<std::uint64_t> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t key = 0;
    for (int k = 0; k < d; ++k) {
      key |= spread_bits(static_cast<std::uint64_t>(cells[i * d + k] - off[k]), d, bits) << k;
    }
    keys[i] = key;
  }
  std::sort(keys.begin(), keys.end());
  counts.resize(exps.size());
  for (std::size_t j = 0; j < exps.size(); ++j) {
    const int shift = (e_max - exps[j]) * d;
    std::uint64_t c = 0, prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t k = keys[i] >> shift;
      if (i == 0 || k != prev) ++c;
      prev = k;
    }
    counts[j] = c;
  }
  return true;
}

std::uint64_t count_generic(const PointCloud& pts, double eps) {
  const int d = pts.dim;
  const std::size_t n = pts.size();
  std::vector<std::int64_t> cells(n * d);
  for (std::size_t i = 0; i < n * d; ++i) {
    const double c = std::floor(pts.coords[i] / eps);
    require(std::abs(c) < 9e18, "box_count: point too far from the origin for this scale");
    cells[i] = static_cast<std::int64_t>(c);
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(cells.begin() + a * d, cells.begin() + (a + 1) * d,
                                        cells.begin() + b * d, cells.begin() + (b + 1) * d);
  };
  std::sort(idx.begin(), idx.end(), less);
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || less(idx[i - 1], idx[i])) ++c;
  }
  return c;
}

double slope_of(const std::vector<double>& x, const std::vector<double>& y,
                const std::vector<std::size_t>& pick) {
  std::vector<double> xs, ys;
  for (std::size_t i : pick) {
    xs.push_back(x[i]);
    ys.push_back(y[i]);
  }
  if (std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs.front(); })) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return ols(xs, ys).slope;
}

}  // namespace

std::string BoxCountCurve::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "epsilon,count\n";
  for (std::size_t i = 0; i < epsilon.size(); ++i) os << epsilon[i] << ',' << count[i] << '\n';
  return os.str();
}

BoxCountCurve box_count(const PointCloud& points, const std::vector<double>& ladder) {
  require(!points.empty(), "box_count: empty point cloud");
  require(points.dim >= 1, "box_count: bad dimension");
  require(!ladder.empty(), "box_count: empty ladder");
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    require(ladder[i] > 0 && std::isfinite(ladder[i]), "box_count: scales must be positive");
    if (i > 0) require(ladder[i] < ladder[i - 1], "box_count: ladder must be strictly decreasing");
  }
  for (double v : points.coords) require(std::isfinite(v), "box_count: non-finite point");
  BoxCountCurve curve;
  curve.epsilon = ladder;
  curve.ambient_dim = points.dim;
  std::vector<int> exps;
  bool dyadic = true;
  for (double e : ladder) {
    const auto x = dyadic_exponent(e);
    if (!x) {
      dyadic = false;
      break;
    }
    exps.push_back(*x);
  }
  if (!(dyadic && count_dyadic(points, exps, curve.count))) {
    curve.count.resize(ladder.size());
    for (std::size_t i = 0; i < ladder.size(); ++i) curve.count[i] = count_generic(points, ladder[i]);
  }
  return curve;
}

const char* to_string(EstimateMode m) {
  switch (m) {
    case EstimateMode::ls_fit: return "ls-fit";
    case EstimateMode::min_slope: return "min-slope";
    case EstimateMode::max_slope: return "max-slope";
  }
  return "ls-fit";
}

nlohmann::json DimensionEstimate::to_json() const {
  return {{"slope", slope},
          {"lo", lower_ci},
          {"hi", upper_ci},
          {"window", {i_min, i_max}},
          {"mode", to_string(mode)}};
}

BoxDimensions estimate_box_dimensions(const BoxCountCurve& curve, const WindowPolicy& w,
                                      int bootstrap_reps, std::uint64_t bootstrap_seed) {
  const int n = static_cast<int>(curve.epsilon.size());
  require(curve.count.size() == curve.epsilon.size(), "curve columns differ in length");
  int lo, hi;
  if (w.i_min >= 0 && w.i_max >= 0) {
    lo = w.i_min;
    hi = w.i_max;
  } else {
    lo = w.drop_coarse;
    hi = n - 1 - w.drop_fine;
  }
  require(lo >= 0 && hi < n, "estimation window outside the ladder");
  if (hi - lo + 1 < 4) fail("estimation window needs at least 4 ladder points");
  std::vector<double> x(n), y(n);
  for (int i = 0; i < n; ++i) {
    require(curve.count[i] >= 1, "box counts must be positive");
    x[i] = -std::log(curve.epsilon[i]);
    y[i] = std::log(static_cast<double>(curve.count[i]));
  }
  BoxDimensions out;
  for (auto* e : {&out.central, &out.lower, &out.upper}) {
    e->i_min = lo;
    e->i_max = hi;
  }
  out.central.mode = EstimateMode::ls_fit;
  out.lower.mode = EstimateMode::min_slope;
  out.upper.mode = EstimateMode::max_slope;
  bool flat = true;
  for (int i = lo; i <= hi; ++i) flat = flat && curve.count[i] == curve.count[lo];
  if (flat) {
    out.saturated = true;
    return out;  // all slopes and CIs are 0
  }
  std::vector<std::size_t> all;
  for (int i = lo; i <= hi; ++i) all.push_back(static_cast<std::size_t>(i));
  std::vector<double> pair;
  for (int i = lo; i < hi; ++i) pair.push_back((y[i + 1] - y[i]) / (x[i + 1] - x[i]));
  out.central.slope = slope_of(x, y, all);
  out.lower.slope = *std::min_element(pair.begin(), pair.end());
  out.upper.slope = *std::max_element(pair.begin(), pair.end());

  RngStream rng(bootstrap_seed, 0);
  std::vector<double> b_ls, b_min, b_max;
  const std::size_t m = all.size();
  std::vector<std::size_t> pick(m);
  std::vector<double> ps(pair.size());
  for (int r = 0; r < bootstrap_reps; ++r) {
    for (auto& p : pick) p = all[static_cast<std::size_t>(rng.uniform() * m) % m];
    const double s = slope_of(x, y, pick);
    if (std::isfinite(s)) b_ls.push_back(s);
    for (auto& p : ps) p = pair[static_cast<std::size_t>(rng.uniform() * pair.size()) % pair.size()];
    b_min.push_back(*std::min_element(ps.begin(), ps.end()));
    b_max.push_back(*std::max_element(ps.begin(), ps.end()));
  }
  auto ci = [](DimensionEstimate& e, const std::vector<double>& b) {
    if (b.empty()) {
      e.lower_ci = e.upper_ci = e.slope;
      return;
    }
    e.lower_ci = std::min(e.slope, quantile(b, 0.025));
    e.upper_ci = std::max(e.slope, quantile(b, 0.975));
  };
  ci(out.central, b_ls);
  ci(out.lower, b_min);
  ci(out.upper, b_max);
  return out;
}

std::vector<double> dyadic_ladder(int from_exp, int to_exp) {
  require(from_exp < to_exp, "dyadic ladder needs from < to");
  std::vector<double> out;
  for (int e = from_exp; e <= to_exp; ++e) out.push_back(std::ldexp(1.0, -e));
  return out;
}

std::vector<double> default_ladder(double T, std::uint64_t n_steps, double H) {
  require(T > 0 && n_steps >= 1 && H > 0, "default_ladder: bad arguments");
  const double floor_eps = std::max(std::ldexp(1.0, -12),
                                    4.0 * std::pow(T / static_cast<double>(n_steps), H));
  std::vector<double> out;
  for (int e = 3; e <= 12; ++e) {
    const double eps = std::ldexp(1.0, -e);
    if (eps < floor_eps) break;
    out.push_back(eps);
  }
  return out;
}

double hawkes_inverse_image_dimension(double rho, double dimE) {
  require(rho > 0 && rho < 1, "rho must lie in (0, 1)");
  require(dimE >= 0 && dimE <= 1, "dimE must lie in [0, 1]");
  return std::max(0.0, (rho + dimE - 1.0) / rho);
}

}  // namespace mdim
