// SPDX-License-Identifier: Apache-2.0
#include "mdim/conditions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <string>

#include "mdim/error.hpp"
#include "mdim/numerics.hpp"
#include "mdim/parallel.hpp"
#include "mdim/paths.hpp"
#include "mdim/stats.hpp"

namespace mdim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

Vec shifted(std::span<const double> x, int axis, double by) {
  Vec y(x.begin(), x.end());
  y[static_cast<std::size_t>(axis)] += by;
  return y;
}

void require_x(const ProcessSpec& spec, std::span<const double> x) {
  require(static_cast<int>(x.size()) == spec.dim(), "start point has wrong dimension");
}

/// Wilson score bounds at z standard deviations.
double wilson(double p, std::uint64_t n, double z, bool upper) {
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = z / (1 + z2 / nn) * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn));
  return upper ? std::min(1.0, centre + half) : std::max(0.0, centre - half);
}

nlohmann::json base_spec_json(const ProcessSpec& spec) {
  nlohmann::json j;
  j["process"] = to_json(spec);
  return j;
}

std::string x_tag(const std::vector<Vec>& xs, std::size_t k) {
  return xs.size() > 1 ? "[x" + std::to_string(k) + "]" : "";
}

}  // namespace

std::vector<Vec> effective_x_grid(const ProcessSpec& spec, const CheckOptions& opts) {
  const int d = spec.dim();
  std::vector<Vec> xs = opts.x_grid;
  if (xs.empty()) {
    xs.push_back(Vec(static_cast<std::size_t>(d), 0.0));
    xs.push_back(shifted(xs[0], 0, 1.0));
    xs.push_back(shifted(xs[0], 0, 2.5));
  }
  for (const auto& x : xs) require(static_cast<int>(x.size()) == d, "x-grid point has wrong dimension");
  if (spec.spatially_homogeneous()) xs.resize(1);
  return xs;
}

std::vector<double> sample_sup_displacements(const ProcessSpec& spec,
                                             std::span<const double> x, double t,
                                             std::uint64_t n_mc, RngStream& rng,
                                             const CheckOptions& opts) {
  require_x(spec, x);
  require(t > 0, "t must be positive");
  require(opts.sup_steps >= 1, "sup_steps must be positive");
  std::vector<double> sups(n_mc);
  parallel_for(
      n_mc,
      [&](std::size_t i) {
        RngStream r = rng.split(i);
        const SamplePath p = simulate(spec, x, t, opts.sup_steps, r);
        double m = 0.0;
        for (std::size_t k = 1; k < p.size(); ++k) m = std::max(m, distance(p.at(k), x));
        sups[i] = m;
      },
      opts.threads);
  return sups;
}

TailEstimate tail_from_samples(std::span<const double> sups, double t, double threshold) {
  TailEstimate e;
  e.t = t;
  e.threshold = threshold;
  e.n_mc = sups.size();
  require(e.n_mc > 0, "no samples");
  std::uint64_t hits = 0;
  for (double s : sups) hits += s >= threshold ? 1 : 0;
  e.prob_hat = static_cast<double>(hits) / static_cast<double>(e.n_mc);
  e.std_err = proportion_se(e.prob_hat, e.n_mc);
  return e;
}

TailEstimate estimate_max_tail(const ProcessSpec& spec, std::span<const double> x,
                               double t, double threshold, std::uint64_t n_mc,
                               RngStream& rng, const CheckOptions& opts) {
  require(n_mc >= 100, "n_mc must be at least 100");
  const auto sups = sample_sup_displacements(spec, x, t, n_mc, rng, opts);
  return tail_from_samples(sups, t, threshold);
}

BoundCheckReport check_a1(const ProcessSpec& spec, double H,
                          const std::vector<double>& gammas,
                          const std::vector<double>& t_ladder, std::uint64_t n_mc,
                          RngStream& rng, const CheckOptions& opts) {
  require(H > 0, "H must be positive");
  require(!gammas.empty() && !t_ladder.empty(), "empty gamma list or t ladder");
  for (double g : gammas) require(g > 0 && g < H, "each gamma must lie in (0, H)");
  for (double t : t_ladder) require(t > 0, "t ladder must be positive");
  const auto xs = effective_x_grid(spec, opts);

  BoundCheckReport rep;
  rep.check = "a1";
  rep.spec = base_spec_json(spec);
  rep.spec["H"] = H;
  rep.spec["gamma"] = gammas;
  rep.spec["n_mc"] = n_mc;
  rep.spec["sup_steps"] = opts.sup_steps;
  rep.flags.push_back("grid_sup_biased_low");

  bool all_saturated = true;
  bool all_zero = true;
  for (std::size_t xk = 0; xk < xs.size(); ++xk) {
    std::vector<std::vector<double>> sups(t_ladder.size());
    for (std::size_t ti = 0; ti < t_ladder.size(); ++ti) {
      RngStream r = rng.split(xk).split(ti);
      sups[ti] = sample_sup_displacements(spec, xs[xk], t_ladder[ti], n_mc, r, opts);
    }
    for (double g : gammas) {
      std::vector<TailEstimate> est;
      std::vector<double> lx, ly;
      for (std::size_t ti = 0; ti < t_ladder.size(); ++ti) {
        const double t = t_ladder[ti];
        est.push_back(tail_from_samples(sups[ti], t, std::pow(t, g)));
        const auto& e = est.back();
        if (e.prob_hat < 0.99) all_saturated = false;
        if (e.prob_hat > 0) {
          all_zero = false;
          lx.push_back(std::log(t));
          ly.push_back(std::log(e.prob_hat));
        }
      }
      const std::string key = "@gamma=" + fmt_g(g) + x_tag(xs, xk);
      double eta = kInf;
      double C = 0.0;
      bool decay_violation = false;
      if (lx.size() >= 2) {
        const LinearFit fit = ols(lx, ly);
        eta = fit.slope;
        rep.fitted_constants["eta_hat" + key] = eta;
        rep.fitted_constants["eta_se" + key] = fit.slope_se;
        if (eta < 0.05) rep.flags.push_back("weak_decay" + key);
        decay_violation = eta < -opts.n_sigma * fit.slope_se;
      } else if (lx.size() == 1) {
        rep.flags.push_back("insufficient_positive_cells" + key);
      }
      const double eta_use = std::isfinite(eta) ? eta : 0.0;
      for (const auto& e : est)
        C = std::max(C, std::max(0.0, e.prob_hat - opts.n_sigma * e.std_err) /
                            std::pow(e.t, eta_use));
      rep.fitted_constants["C" + key] = C;
      for (const auto& e : est) {
        BoundCell c;
        c.params = {{"gamma", g}, {"t", e.t}, {"x_index", static_cast<double>(xk)}};
        c.lhs = e.prob_hat;
        c.std_err = e.std_err;
        c.rhs = C * std::pow(e.t, eta_use);
        if (decay_violation && e.prob_hat > 0) {
          c.violation = true;
          c.note = "tail does not decay in t";
        }
        rep.cells.push_back(std::move(c));
      }
    }
  }
  if (all_saturated)
    throw Error(ErrorCode::numeric,
                "all tail probabilities are saturated near 1; use smaller gamma "
                "(a wider gap to H) or smaller t");
  if (all_zero) rep.flags.push_back("identically_zero");
  return rep;
}

AlphaEstimate estimate_alpha_function(const ProcessSpec& spec, double h, double a,
                                      std::uint64_t n_mc, RngStream& rng,
                                      const CheckOptions& opts) {
  require(h >= 0 && a > 0, "alpha function needs h >= 0 and a > 0");
  const auto xs = effective_x_grid(spec, opts);
  AlphaEstimate best;
  best.x_arg = xs[0];
  if (h == 0 || n_mc == 0) return best;
  constexpr std::size_t K = 8;
  for (std::size_t xk = 0; xk < xs.size(); ++xk) {
    std::vector<std::array<unsigned char, K>> out(n_mc);
    RngStream base = rng.split(xk);
    parallel_for(
        n_mc,
        [&](std::size_t i) {
          RngStream r = base.split(i);
          const SamplePath p = simulate(spec, xs[xk], h, K, r);
          for (std::size_t k = 0; k < K; ++k)
            out[i][k] = distance(p.at(k + 1), xs[xk]) > a ? 1 : 0;
        },
        opts.threads);
    for (std::size_t k = 0; k < K; ++k) {
      std::uint64_t hits = 0;
      for (const auto& o : out) hits += o[k];
      const double p = static_cast<double>(hits) / static_cast<double>(n_mc);
      if (p > best.value) {
        best.value = p;
        best.std_err = proportion_se(p, n_mc);
        best.s_arg = h * static_cast<double>(k + 1) / K;
        best.x_arg = xs[xk];
      }
    }
  }
  return best;
}

void MClassSpec::validate() const {
  require(H > 0 && beta > 0 && C > 0 && h0 > 0 && a0 > 0,
          "M-class parameters must be positive");
}

BoundCheckReport check_M_class(const ProcessSpec& spec, const MClassSpec& mspec,
                               const std::vector<HaPoint>& grid, std::uint64_t n_mc,
                               RngStream& rng, const CheckOptions& opts) {
  mspec.validate();
  for (const auto& g : grid) {
    require(g.h > 0 && g.a > 0, "M-class grid needs h, a > 0");
    require(g.h * std::pow(g.a, -1.0 / mspec.H) < 1,
            "M-class grid point violates h a^{-1/H} < 1: h=" + fmt_g(g.h) +
                " a=" + fmt_g(g.a));
    require(g.h < mspec.h0 && g.a < mspec.a0, "M-class grid point exceeds the h0/a0 cutoffs");
  }
  BoundCheckReport rep;
  rep.check = "mclass";
  rep.spec = base_spec_json(spec);
  rep.spec["H"] = mspec.H;
  rep.spec["beta"] = mspec.beta;
  rep.spec["C"] = mspec.C;
  rep.spec["h0"] = mspec.h0;
  rep.spec["a0"] = mspec.a0;
  double cmin = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    RngStream r = rng.split(k);
    const AlphaEstimate e = estimate_alpha_function(spec, grid[k].h, grid[k].a, n_mc, r, opts);
    const double u = std::pow(grid[k].h * std::pow(grid[k].a, -1.0 / mspec.H), mspec.beta);
    BoundCell c;
    c.params = {{"h", grid[k].h}, {"a", grid[k].a}};
    c.lhs = e.value;
    c.std_err = e.std_err;
    c.rhs = mspec.C * u;
    cmin = std::max(cmin, std::max(0.0, e.value - opts.n_sigma * e.std_err) / u);
    rep.cells.push_back(std::move(c));
  }
  rep.fitted_constants["C_min"] = cmin;
  mark_violations(rep, opts.n_sigma);
  return rep;
}

BoundCheckReport verify_ottaviani(const ProcessSpec& spec, std::span<const double> x,
                                  const std::vector<HaPoint>& grid, std::uint64_t n_mc,
                                  RngStream& rng, const CheckOptions& opts) {
  require_x(spec, x);
  BoundCheckReport rep;
  rep.check = "ottaviani";
  rep.spec = base_spec_json(spec);
  rep.spec["x"] = Vec(x.begin(), x.end());
  rep.flags.push_back("grid_sup_biased_low");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double h = grid[k].h, a = grid[k].a;
    require(h > 0 && a > 0, "Ottaviani grid needs h, a > 0");
    RngStream base = rng.split(k);
    RngStream r_sup = base.split(0), r_end = base.split(1), r_alpha = base.split(2);
    const auto sups = sample_sup_displacements(spec, x, h, n_mc, r_sup, opts);
    std::uint64_t hits = 0;
    for (double s : sups) hits += s > a ? 1 : 0;
    const double lhs = static_cast<double>(hits) / static_cast<double>(n_mc);
    const auto ends = sample_endpoints(spec, x, h, n_mc, r_end, opts);
    const std::size_t d = x.size();
    std::uint64_t far = 0;
    for (std::size_t i = 0; i < n_mc; ++i)
      far += distance(std::span<const double>(ends.data() + i * d, d), x) > a / 2 ? 1 : 0;
    const double pnum = static_cast<double>(far) / static_cast<double>(n_mc);
    const AlphaEstimate al = estimate_alpha_function(spec, h, a / 2, n_mc, r_alpha, opts);
    if (al.value >= 1.0)
      throw Error(ErrorCode::numeric, "Ottaviani denominator vanishes: alpha(h, a/2) = 1 at h=" +
                                          fmt_g(h) + " a=" + fmt_g(a));
    const double q = 1.0 - al.value;
    const double rhs = pnum / q;
    const double se_l = proportion_se(lhs, n_mc);
    const double se_n = proportion_se(pnum, n_mc);
    const double se_r = std::hypot(se_n / q, pnum * al.std_err / (q * q));
    BoundCell c;
    c.params = {{"h", h}, {"a", a}};
    c.lhs = lhs;
    c.rhs = rhs;
    c.std_err = std::hypot(se_l, se_r);
    c.note = "alpha=" + fmt_g(al.value);
    rep.cells.push_back(std::move(c));
  }
  mark_violations(rep, opts.n_sigma);
  return rep;
}

namespace {

std::vector<Vec> sphere_directions(int d, int n) {
  std::vector<Vec> out;
  if (d == 1) {
    out.push_back({1.0});
    out.push_back({-1.0});
  } else if (d == 2) {
    for (int j = 0; j < n; ++j) {
      const double th = 2 * kPi * j / n;
      out.push_back({std::cos(th), std::sin(th)});
    }
  } else {
    // Fibonacci points on S^2 with +-e_i added; higher d uses the axes only.
    for (int i = 0; i < d; ++i) {
      Vec e(static_cast<std::size_t>(d), 0.0);
      e[static_cast<std::size_t>(i)] = 1.0;
      out.push_back(e);
      e[static_cast<std::size_t>(i)] = -1.0;
      out.push_back(e);
    }
    if (d == 3) {
      const int m = 2 * n * n;
      const double golden = kPi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < m; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / m;
        const double rho = std::sqrt(1.0 - z * z);
        out.push_back({rho * std::cos(golden * i), rho * std::sin(golden * i), z});
      }
    }
  }
  return out;
}

double pruitt_level(const SymbolFn& symbol, std::span<const double> x, double r, int dim,
                    const XiSearch& s, int level, bool x_dependent) {
  const int nd = s.directions << level;
  const int nr = s.radial << level;
  const auto dirs = sphere_directions(dim, nd);
  std::vector<Vec> ys{Vec(x.begin(), x.end())};
  if (x_dependent) {
    const int m = s.spatial << level;
    for (int k = 1; k <= m; ++k)
      for (const auto& u : dirs) {
        Vec y(x.begin(), x.end());
        for (int i = 0; i < dim; ++i)
          y[static_cast<std::size_t>(i)] += r * k / m * u[static_cast<std::size_t>(i)];
        ys.push_back(std::move(y));
      }
  }
  double best = 0.0;
  Vec xi(static_cast<std::size_t>(dim));
  for (const auto& y : ys)
    for (const auto& u : dirs)
      for (int k = 1; k <= nr; ++k) {
        const double rho = static_cast<double>(k) / nr / r;
        for (int i = 0; i < dim; ++i)
          xi[static_cast<std::size_t>(i)] = rho * u[static_cast<std::size_t>(i)];
        best = std::max(best, std::abs(symbol(y, xi)));
      }
  return best;
}

}  // namespace

double pruitt_upper_bound(const SymbolFn& symbol, std::span<const double> x, double t,
                          double r, int dim, const XiSearch& search, bool x_dependent) {
  require(r > 0 && t > 0, "Pruitt bound needs t, r > 0");
  require(static_cast<int>(x.size()) == dim && dim >= 1, "x has wrong dimension");
  require(search.directions >= 2 && search.radial >= 1 && search.spatial >= 1,
          "invalid xi search grid");
  double prev = pruitt_level(symbol, x, r, dim, search, 0, x_dependent);
  for (int level = 1; level <= search.max_refinements; ++level) {
    const double cur = pruitt_level(symbol, x, r, dim, search, level, x_dependent);
    if (std::abs(cur - prev) <= search.tol * std::max(cur, 1e-300)) return t * cur;
    prev = cur;
    if (level == search.max_refinements)
      throw SearchError("symbol supremum search did not settle", t * std::min(prev, cur),
                        t * std::max(prev, cur));
  }
  return t * prev;
}

BoundCheckReport check_pruitt(const ProcessSpec& spec, const SymbolFn& symbol,
                              const std::vector<TrPoint>& grid, std::uint64_t n_mc,
                              RngStream& rng, const CheckOptions& opts,
                              const XiSearch& search) {
  const auto xs = effective_x_grid(spec, opts);
  const bool xdep = !spec.spatially_homogeneous();
  BoundCheckReport rep;
  rep.check = "pruitt";
  rep.spec = base_spec_json(spec);
  rep.spec["n_mc"] = n_mc;
  rep.spec["sup_steps"] = opts.sup_steps;
  rep.flags.push_back("grid_sup_biased_low");

  std::map<double, std::vector<std::size_t>> by_t;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    require(grid[k].t > 0 && grid[k].r > 0, "Pruitt grid needs t, r > 0");
    by_t[grid[k].t].push_back(k);
  }
  struct Row {
    std::size_t xk;
    TailEstimate e;
    double bound;
  };
  std::vector<Row> rows;
  std::size_t group = 0;
  for (std::size_t xk = 0; xk < xs.size(); ++xk) {
    std::map<double, double> unit_bound;
    for (const auto& g : grid)
      if (!unit_bound.count(g.r))
        unit_bound[g.r] = pruitt_upper_bound(symbol, xs[xk], 1.0, g.r, spec.dim(), search, xdep);
    for (const auto& [t, idx] : by_t) {
      RngStream r = rng.split(group++);
      const auto sups = sample_sup_displacements(spec, xs[xk], t, n_mc, r, opts);
      for (std::size_t k : idx)
        rows.push_back({xk, tail_from_samples(sups, t, grid[k].r), t * unit_bound[grid[k].r]});
    }
  }
  double C = 0.0;
  for (const auto& row : rows)
    if (row.bound > 0)
      C = std::max(C, std::max(0.0, row.e.prob_hat - opts.n_sigma * row.e.std_err) / row.bound);
  rep.fitted_constants["C_fit"] = C;
  for (const auto& row : rows) {
    BoundCell c;
    c.params = {{"t", row.e.t}, {"r", row.e.threshold}, {"x_index", static_cast<double>(row.xk)}};
    c.lhs = row.e.prob_hat;
    c.std_err = row.e.std_err;
    c.rhs = C * row.bound;
    c.note = "bound=" + fmt_g(row.bound);
    rep.cells.push_back(std::move(c));
  }
  mark_violations(rep, opts.n_sigma);
  return rep;
}

std::vector<double> sample_endpoints(const ProcessSpec& spec, std::span<const double> y,
                                     double t, std::uint64_t n_mc, const RngStream& rng,
                                     const CheckOptions& opts) {
  require_x(spec, y);
  require(t >= 0, "t must be non-negative");
  const std::size_t d = y.size();
  std::vector<double> out(n_mc * d);
  const bool levy = has_exact_increments(spec);
  parallel_for(
      n_mc,
      [&](std::size_t i) {
        std::span<double> o(out.data() + i * d, d);
        if (t == 0) {
          std::copy(y.begin(), y.end(), o.begin());
          return;
        }
        RngStream r = rng.split(i);
        if (levy) {
          sample_levy_increment(spec, t, r, o);
          for (std::size_t k = 0; k < d; ++k) o[k] += y[k];
        } else {
          const SamplePath p = simulate(spec, y, t, opts.endpoint_steps, r);
          const auto last = p.at(p.size() - 1);
          std::copy(last.begin(), last.end(), o.begin());
        }
      },
      opts.threads);
  return out;
}

BallProbEstimate estimate_ball_probability(const ProcessSpec& spec, double t,
                                           std::span<const double> x,
                                           std::span<const double> y, double r,
                                           std::uint64_t n_mc, RngStream& rng,
                                           const CheckOptions& opts) {
  require_x(spec, x);
  require(t > 0 && r >= 0 && n_mc > 0, "ball probability needs t > 0, r >= 0, n_mc > 0");
  const auto ends = sample_endpoints(spec, y, t, n_mc, rng, opts);
  const std::size_t d = x.size();
  std::uint64_t in = 0;
  for (std::size_t i = 0; i < n_mc; ++i)
    in += distance(std::span<const double>(ends.data() + i * d, d), x) <= r ? 1 : 0;
  BallProbEstimate e;
  e.t = t;
  e.x.assign(x.begin(), x.end());
  e.y.assign(y.begin(), y.end());
  e.r = r;
  e.n_mc = n_mc;
  e.prob_hat = static_cast<double>(in) / static_cast<double>(n_mc);
  e.std_err = proportion_se(e.prob_hat, n_mc);
  return e;
}

BoundCheckReport check_ball_bounds(const ProcessSpec& spec, const BallBoundSpec& b,
                                   const std::vector<TrPoint>& grid, std::uint64_t n_mc,
                                   RngStream& rng, const CheckOptions& opts) {
  require(b.H > 0 && b.eps >= 0 && b.zeta >= 0 && b.zeta < b.H && b.max_spread >= 1,
          "invalid ball-bound parameters");
  for (const auto& g : grid) {
    require(g.t > 0 && g.r > 0, "ball-bound grid needs t, r > 0");
    require(g.r <= b.r0, "ball-bound grid radius exceeds r0");
  }
  const int d = spec.dim();
  const auto xs = effective_x_grid(spec, opts);
  const bool levy = spec.is_levy();
  BoundCheckReport rep;
  rep.check = b.variant == BallVariant::a2 ? "a2" : "a3";
  rep.spec = base_spec_json(spec);
  rep.spec["H"] = b.H;
  rep.spec["eps"] = b.eps;
  rep.spec["zeta"] = b.zeta;
  rep.spec["r0"] = b.r0;
  rep.spec["max_spread"] = b.max_spread;
  rep.spec["n_mc"] = n_mc;

  std::map<double, std::vector<std::size_t>> by_t;
  for (std::size_t k = 0; k < grid.size(); ++k) by_t[grid[k].t].push_back(k);

  struct Row {
    BoundCell cell;
    bool lower;
    double env;
    double p_lo, p_up;
  };
  std::vector<Row> rows;
  const double z = opts.n_sigma;
  auto add = [&](double t, double r, std::size_t xk, bool lower, bool boundary,
                 std::uint64_t in) {
    Row row;
    const double p = static_cast<double>(in) / static_cast<double>(n_mc);
    row.cell.params = {{"t", t},
                       {"r", r},
                       {"x_index", static_cast<double>(xk)},
                       {"y_boundary", boundary ? 1.0 : 0.0},
                       {"lower", lower ? 1.0 : 0.0}};
    row.cell.lhs = p;
    row.cell.std_err = proportion_se(p, n_mc);
    row.lower = lower;
    row.env = lower ? std::min(1.0, std::pow(r / std::pow(t, b.H - b.zeta), d + b.eps))
                    : std::min(1.0, std::pow(r / std::pow(t, b.H + b.zeta), d - b.eps));
    row.p_lo = wilson(p, n_mc, z, false);
    row.p_up = wilson(p, n_mc, z, true);
    rows.push_back(std::move(row));
  };

  std::size_t group = 0;
  for (std::size_t xk = 0; xk < xs.size(); ++xk) {
    const Vec& x = xs[xk];
    for (const auto& [t, idx] : by_t) {
      RngStream rg = rng.split(group++);
      const auto ends = sample_endpoints(spec, x, t, n_mc, rg.split(0), opts);
      for (std::size_t k : idx) {
        const double r = grid[k].r;
        std::uint64_t in_c = 0, in_b = 0;
        if (levy) {
          for (std::size_t i = 0; i < n_mc; ++i) {
            std::span<const double> e(ends.data() + i * d, static_cast<std::size_t>(d));
            const double dc = distance(e, x);
            in_c += dc <= r ? 1 : 0;
            double s = 0.0;
            for (int j = 0; j < d; ++j) {
              const double v = e[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)] +
                               (j == 0 ? r : 0.0);
              s += v * v;
            }
            in_b += std::sqrt(s) <= r ? 1 : 0;
          }
        } else {
          for (std::size_t i = 0; i < n_mc; ++i)
            in_c += distance(std::span<const double>(ends.data() + i * d,
                                                     static_cast<std::size_t>(d)),
                             x) <= r
                        ? 1
                        : 0;
          const Vec y = shifted(x, 0, r);
          const auto eb = sample_endpoints(spec, y, t, n_mc, rg.split(1 + k), opts);
          for (std::size_t i = 0; i < n_mc; ++i)
            in_b += distance(std::span<const double>(eb.data() + i * d,
                                                     static_cast<std::size_t>(d)),
                             x) <= r
                        ? 1
                        : 0;
        }
        add(t, r, xk, true, false, in_c);
        add(t, r, xk, true, true, in_b);
        add(t, r, xk, false, false, in_c);
      }
    }
  }

  double C1 = kInf, C2 = 0.0;
  for (const auto& row : rows) {
    if (row.lower)
      C1 = std::min(C1, row.p_up / row.env);
    else
      C2 = std::max(C2, row.p_lo / row.env);
  }
  if (rows.empty()) C1 = 0.0;
  const double spread = C1 > 0 ? C2 / C1 : kInf;
  rep.fitted_constants["C1"] = C1;
  rep.fitted_constants["C2"] = C2;
  rep.fitted_constants["spread"] = std::isfinite(spread) ? spread : 1e300;
  const double floor1 = std::max(C1, C2 / b.max_spread);
  for (auto& row : rows) {
    if (row.lower) {
      row.cell.rhs_lower = floor1 * row.env;
      if (row.p_up < row.cell.rhs_lower) {
        row.cell.violation = true;
        row.cell.note = "below the lower envelope allowed by max_spread";
      }
    } else {
      row.cell.rhs = C2 * row.env;
    }
    rep.cells.push_back(std::move(row.cell));
  }
  if (spread > b.max_spread) rep.flags.push_back("spread_exceeded");
  return rep;
}

namespace {

double real_exponent(const ExponentFn& psi, std::span<const double> xi) {
  const cplx v = psi(xi);
  if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v)))
    throw Error(ErrorCode::invalid_argument,
                "ball sandwich needs a real symmetric exponent");
  return v.real();
}

/// Integrates f over [a, b] split into panels of width at most `panel`.
double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        double panel, double abs_tol, double rel_tol) {
  if (b <= a) return 0.0;
  const double n = std::min(1e5, std::ceil((b - a) / panel));
  const int np = std::max(1, static_cast<int>(n));
  const double w = (b - a) / np;
  double total = 0.0;
  for (int k = 0; k < np; ++k) {
    const double lo = a + k * w;
    total += integrate_gk(f, lo, k + 1 == np ? b : lo + w, abs_tol / np, rel_tol).value;
  }
  return total;
}

/// sin^2(r u) / (pi r u^2), the one-dimensional Fejer density with
/// transform (1 - |xi|/(2r))^+.
double fejer(double r, double u) {
  if (std::abs(r * u) < 1e-4) {
    const double ru = r * u;
    return r * (1.0 - ru * ru / 3.0) / kPi;
  }
  const double s = std::sin(r * u);
  return s * s / (kPi * r * u * u);
}

}  // namespace

BallBracket ball_probability_via_exponent(const ExponentFn& psi, double t, double r, int d,
                                          const ExponentQuad& quad) {
  require(t > 0 && r > 0, "ball sandwich needs t, r > 0");
  require(d == 1 || d == 2, "ball sandwich supports d = 1 or 2");
  // Smallest power-of-two radius beyond which e^{-t psi} is negligible.
  const std::vector<Vec> probes =
      d == 1 ? std::vector<Vec>{{1.0}, {-1.0}}
             : std::vector<Vec>{{1, 0}, {0, 1}, {-1, 0}, {0, -1},
                                {0.7071067811865476, 0.7071067811865476},
                                {0.7071067811865476, -0.7071067811865476}};
  double Xi = 0.0;
  double tail_decay = 1.0;
  for (int k = -30; k <= 60; ++k) {
    const double R = std::ldexp(1.0, k);
    double m = kInf;
    for (const auto& u : probes) {
      Vec xi(u);
      for (auto& v : xi) v *= R;
      m = std::min(m, t * real_exponent(psi, xi));
    }
    if (m >= quad.cutoff) {
      Xi = R;
      tail_decay = std::exp(-m);
      break;
    }
  }
  if (Xi == 0.0)
    throw Error(ErrorCode::numeric, "exponent does not grow enough for the Fourier sandwich");

  auto weight = [&](double u, double rr) { return fejer(rr, u); };
  const double rl = r / (2.0 * std::sqrt(static_cast<double>(d)));
  BallBracket out;
  if (d == 1) {
    auto integral = [&](double rr, double from) {
      auto f = [&, rr](double u) {
        const double xi[1] = {u};
        return std::exp(-t * real_exponent(psi, xi)) * weight(u, rr);
      };
      return 2.0 * integrate_panels(f, from, Xi, kPi / rr, quad.abs_tol, quad.rel_tol);
    };
    const double tail = 2.0 / (kPi * r * Xi) * tail_decay;
    out.upper = 2.0 * (integral(r, 0.0) + tail);
    out.lower = integral(rl, std::min(quad.tau, Xi));
  } else {
    auto integral = [&](double rr, double tau) {
      auto outer = [&, rr, tau](double u1) {
        const double c = u1 < tau ? std::sqrt(tau * tau - u1 * u1) : 0.0;
        auto inner = [&, u1](double u2) {
          const double xi[2] = {u1, u2};
          return std::exp(-t * real_exponent(psi, xi)) * weight(u2, rr);
        };
        const double tol = quad.abs_tol;
        double v = 0.0;
        if (c < Xi) {
          v += integrate_panels(inner, -Xi, -c, kPi / rr, tol, quad.rel_tol);
          v += integrate_panels(inner, c, Xi, kPi / rr, tol, quad.rel_tol);
        }
        return v * weight(u1, rr);
      };
      return 2.0 * integrate_panels(outer, 0.0, Xi, kPi / rr, quad.abs_tol, quad.rel_tol);
    };
    // Fejer mass outside the box, at most 2/(pi r Xi) per coordinate.
    const double tail = 2.0 * 2.0 / (kPi * r * Xi) * tail_decay;
    out.upper = 4.0 * (integral(r, 0.0) + tail);
    out.lower = integral(rl, quad.tau);
  }
  out.upper = std::clamp(out.upper, 0.0, 1.0);
  out.lower = std::clamp(out.lower, 0.0, out.upper);
  return out;
}

namespace {

/// e^{-x} I_0(x) for x >= 0.
double bessel_i0e(double x) {
  if (x < 500.0) return std::exp(-x) * std::cyl_bessel_i(0.0, x);
  const double ix = 1.0 / x;
  return (1.0 + ix / 8.0 + 9.0 * ix * ix / 128.0 + 225.0 * ix * ix * ix / 3072.0) /
         std::sqrt(2.0 * kPi * x);
}

}  // namespace

double brownian_ball_probability(int dim, double sigma, double s, double dist, double r) {
  require(sigma > 0 && dist >= 0 && r >= 0, "invalid Brownian ball arguments");
  if (s <= 0) return dist <= r ? 1.0 : 0.0;
  const double sd = sigma * std::sqrt(s);
  const double R = r / sd;
  const double L = dist / sd;
  if (dim == 1) return normal_cdf(L + R) - normal_cdf(L - R);
  if (dim == 2) {
    if (L == 0.0) return -std::expm1(-0.5 * R * R);
    auto f = [L](double u) {
      return u * std::exp(-0.5 * (u - L) * (u - L)) * bessel_i0e(u * L);
    };
    // The integrand is concentrated near u = L.
    const double lo = std::max(0.0, L - 40.0);
    if (R <= lo) return 0.0;
    const double hi = std::min(R, L + 40.0);
    return std::clamp(integrate_gk(f, lo, hi, 1e-14, 1e-11).value, 0.0, 1.0);
  }
  if (dim == 3) {
    if (L == 0.0) {
      const double phi = std::exp(-0.5 * R * R) / std::sqrt(2 * kPi);
      return std::clamp(std::erf(R / std::sqrt(2.0)) - 2.0 * R * phi, 0.0, 1.0);
    }
    auto pdf = [](double v) { return std::exp(-0.5 * v * v) / std::sqrt(2 * kPi); };
    const double v = normal_cdf(R - L) - normal_cdf(-R - L) -
                     (pdf(R - L) - pdf(R + L)) / L;
    return std::clamp(v, 0.0, 1.0);
  }
  fail("closed-form Brownian ball probability supports d <= 3");
}

namespace {

/// Simpson's rule for int_a^b f(s) ds in log s.
double simpson_log(const std::function<double(double)>& f, double a, double b, int nodes) {
  if (nodes % 2 == 0) ++nodes;
  const double la = std::log(a), lb = std::log(b);
  const double h = (lb - la) / (nodes - 1);
  double total = 0.0;
  for (int k = 0; k < nodes; ++k) {
    const double u = la + k * h;
    const double w = (k == 0 || k == nodes - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const double s = std::exp(u);
    total += w * f(s) * s;
  }
  return total * h / 3.0;
}

}  // namespace

double hitting_probability_bound(const BallProbFn& prob, std::span<const double> x,
                                 double r, double t, double T, const HittingQuad& quad) {
  require(t > 0 && t <= T / 2, "hitting bound needs 0 < t <= T/2");
  require(r > 0, "hitting bound needs r > 0");
  require(quad.nodes >= 3 && quad.s_floor_frac > 0 && quad.s_floor_frac < 1,
          "invalid hitting quadrature");
  const int d = static_cast<int>(x.size());
  const Vec xc(x.begin(), x.end());
  const double num =
      simpson_log([&](double s) { return prob(s, xc); }, t, 2 * T, quad.nodes);

  std::vector<Vec> ys{xc};
  if (d == 1) {
    ys.push_back(shifted(xc, 0, r));
    ys.push_back(shifted(xc, 0, -r));
  } else if (d == 2) {
    for (int j = 0; j < quad.boundary_points; ++j) {
      const double th = 2 * kPi * j / quad.boundary_points;
      ys.push_back({xc[0] + r * std::cos(th), xc[1] + r * std::sin(th)});
    }
  } else {
    for (int i = 0; i < d; ++i) {
      ys.push_back(shifted(xc, i, r));
      ys.push_back(shifted(xc, i, -r));
    }
  }
  const double span = T - t;
  const double s0 = quad.s_floor_frac * span;
  double den = kInf;
  for (const auto& y : ys) {
    const double v =
        s0 * prob(s0, y) + simpson_log([&](double s) { return prob(s, y); }, s0, span, quad.nodes);
    den = std::min(den, v);
  }
  if (!(den >= 1e-12))
    throw Error(ErrorCode::numeric, "hitting bound denominator below 1e-12");
  return num / den;
}

BallProbFn ball_probability_fn(const ProcessSpec& spec, std::span<const double> x,
                               double r, std::uint64_t n_mc, RngStream rng,
                               const CheckOptions& opts) {
  require_x(spec, x);
  const Vec xc(x.begin(), x.end());
  if (const auto* bm = std::get_if<BrownianMotion>(&spec.family)) {
    const int d = bm->dim;
    const double sigma = bm->sigma;
    require(d <= 3, "closed-form Brownian ball probability supports d <= 3");
    return [xc, r, d, sigma](double s, std::span<const double> y) {
      return brownian_ball_probability(d, sigma, s, distance(y, xc), r);
    };
  }
  auto counter = std::make_shared<std::uint64_t>(0);
  return [spec, xc, r, n_mc, rng, opts, counter](double s, std::span<const double> y) {
    RngStream sub = rng.split((*counter)++);
    return estimate_ball_probability(spec, s, xc, y, r, n_mc, sub, opts).prob_hat;
  };
}

namespace {

/// Per path, the minimum distance to `center` over grid times >= each
/// start index.
std::vector<std::vector<double>> suffix_min_distances(
    const ProcessSpec& spec, std::span<const double> x, std::span<const double> center,
    const std::vector<std::size_t>& starts, double T, std::uint64_t n_mc, RngStream& rng,
    std::size_t n_steps) {
  std::vector<std::vector<double>> out(n_mc, std::vector<double>(starts.size()));
  parallel_for(n_mc, [&](std::size_t i) {
    RngStream r = rng.split(i);
    const SamplePath p = simulate(spec, x, T, n_steps, r);
    std::vector<double> suffix(p.size());
    double m = kInf;
    for (std::size_t k = p.size(); k-- > 0;) {
      m = std::min(m, distance(p.at(k), center));
      suffix[k] = m;
    }
    for (std::size_t j = 0; j < starts.size(); ++j)
      out[i][j] = suffix[std::min(starts[j], p.size() - 1)];
  });
  return out;
}

std::size_t start_index(double t, double T, std::size_t n_steps) {
  const double u = t / T * static_cast<double>(n_steps);
  return static_cast<std::size_t>(std::ceil(u - 1e-9));
}

}  // namespace

TailEstimate estimate_hitting_probability(const ProcessSpec& spec,
                                          std::span<const double> x,
                                          std::span<const double> center, double r,
                                          double t, double T, std::uint64_t n_mc,
                                          RngStream& rng, std::size_t n_steps) {
  require_x(spec, x);
  require_x(spec, center);
  require(0 <= t && t <= T && T > 0 && n_steps >= 1 && n_mc > 0, "invalid hitting arguments");
  const double step = typical_step_displacement(spec, T / static_cast<double>(n_steps));
  if (r < 4 * step)
    throw Error(ErrorCode::invalid_argument,
                "grid too coarse for hitting estimate: r=" + fmt_g(r) +
                    " < 4 * one-step displacement " + fmt_g(step));
  const auto mins =
      suffix_min_distances(spec, x, center, {start_index(t, T, n_steps)}, T, n_mc, rng, n_steps);
  std::uint64_t hits = 0;
  for (const auto& m : mins) hits += m[0] <= r ? 1 : 0;
  TailEstimate e;
  e.t = t;
  e.threshold = r;
  e.n_mc = n_mc;
  e.prob_hat = static_cast<double>(hits) / static_cast<double>(n_mc);
  e.std_err = proportion_se(e.prob_hat, n_mc);
  return e;
}

BoundCheckReport check_hitting(const ProcessSpec& spec, std::span<const double> x,
                               const std::vector<TrPoint>& grid, double T,
                               std::uint64_t n_mc, RngStream& rng, std::size_t n_steps,
                               const HittingQuad& quad, std::uint64_t bound_n_mc) {
  require_x(spec, x);
  require(!grid.empty() && n_mc > 0 && n_steps >= 1, "invalid hitting check arguments");
  const double step = typical_step_displacement(spec, T / static_cast<double>(n_steps));
  std::vector<std::size_t> starts;
  for (const auto& g : grid) {
    if (g.r < 4 * step)
      throw Error(ErrorCode::invalid_argument,
                  "grid too coarse for hitting estimate: r=" + fmt_g(g.r) +
                      " < 4 * one-step displacement " + fmt_g(step));
    starts.push_back(start_index(g.t, T, n_steps));
  }
  RngStream paths = rng.split(0);
  const auto mins = suffix_min_distances(spec, x, x, starts, T, n_mc, paths, n_steps);
  BoundCheckReport rep;
  rep.check = "hitting";
  rep.spec = base_spec_json(spec);
  rep.spec["T"] = T;
  rep.spec["n_steps"] = n_steps;
  rep.spec["n_mc"] = n_mc;
  rep.flags.push_back("grid_min_biased_low");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::uint64_t hits = 0;
    for (const auto& m : mins) hits += m[k] <= grid[k].r ? 1 : 0;
    const double p = static_cast<double>(hits) / static_cast<double>(n_mc);
    const auto prob = ball_probability_fn(spec, x, grid[k].r, bound_n_mc, rng.split(1 + k));
    BoundCell c;
    c.params = {{"t", grid[k].t}, {"r", grid[k].r}};
    c.lhs = p;
    c.std_err = proportion_se(p, n_mc);
    c.rhs = hitting_probability_bound(prob, x, grid[k].r, grid[k].t, T, quad);
    rep.cells.push_back(std::move(c));
  }
  mark_violations(rep, 3.0);
  return rep;
}

BoundCheckReport check_moment_bound(const StableLikeKernel& kernel, const MomentSpec& m,
                                    const std::vector<double>& T_ladder,
                                    std::uint64_t n_mc, RngStream& rng,
                                    const CheckOptions& opts) {
  kernel.validate();
  const double alpha = kernel.alpha;
  require(m.p > 0 && m.p < alpha, "moment bound needs 0 < p < alpha");
  require(m.p <= 1 || alpha < 2 * m.p, "moment bound needs p <= 1 or alpha < 2p");
  require(m.max_ratio >= 1, "max_ratio must be at least 1");
  require(!T_ladder.empty() && n_mc >= 2, "moment bound needs a T ladder and n_mc >= 2");
  const ProcessSpec spec = stable_like(kernel);
  const Vec x = effective_x_grid(spec, opts)[0];
  BoundCheckReport rep;
  rep.check = "moment";
  rep.spec = base_spec_json(spec);
  rep.spec["p"] = m.p;
  rep.spec["max_ratio"] = m.max_ratio;
  rep.spec["sup_steps"] = opts.sup_steps;
  double lo = kInf, hi = 0.0;
  for (std::size_t k = 0; k < T_ladder.size(); ++k) {
    const double T = T_ladder[k];
    require(T > 0, "T ladder must be positive");
    RngStream r = rng.split(k);
    auto sups = sample_sup_displacements(spec, x, T, n_mc, r, opts);
    for (auto& s : sups) s = std::pow(s, m.p);
    const double scale = std::pow(T, m.p / alpha);
    BoundCell c;
    c.params = {{"T", T}};
    c.lhs = mean(sups) / scale;
    c.std_err = std::sqrt(variance(sups) / static_cast<double>(n_mc)) / scale;
    lo = std::min(lo, c.lhs);
    hi = std::max(hi, c.lhs);
    rep.cells.push_back(std::move(c));
  }
  const double ratio = lo > 0 ? hi / lo : kInf;
  rep.fitted_constants["C_max"] = hi;
  rep.fitted_constants["C_min"] = lo;
  rep.fitted_constants["ratio"] = std::isfinite(ratio) ? ratio : 1e300;
  for (auto& c : rep.cells) c.rhs = lo * m.max_ratio;
  if (ratio > m.max_ratio) {
    rep.forced_failure = true;
    rep.flags.push_back("ratio_exceeded");
    for (auto& c : rep.cells)
      if (c.lhs > c.rhs) c.violation = true;
  }
  return rep;
}

BoundCheckReport check_self_similarity(const ProcessSpec& spec, double H, double r_scale,
                                       double t, std::uint64_t n_mc, RngStream& rng,
                                       const CheckOptions& opts, double level) {
  require(H > 0 && r_scale > 0 && t > 0 && n_mc >= 2, "invalid self-similarity arguments");
  const std::size_t d = static_cast<std::size_t>(spec.dim());
  const Vec zero(d, 0.0);
  const auto a = sample_endpoints(spec, zero, r_scale * t, n_mc, rng.split(0), opts);
  const auto b = sample_endpoints(spec, zero, t, n_mc, rng.split(1), opts);
  const double s = std::pow(r_scale, -H);
  std::vector<double> a1(n_mc), b1(n_mc), an(n_mc), bn(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    a1[i] = a[i * d] * s;
    b1[i] = b[i * d];
    an[i] = norm(std::span<const double>(a.data() + i * d, d)) * s;
    bn[i] = norm(std::span<const double>(b.data() + i * d, d));
  }
  const KsResult k1 = ks_two_sample(a1, b1);
  const KsResult kn = ks_two_sample(an, bn);
  BoundCheckReport rep;
  rep.check = "selfsim";
  rep.spec = base_spec_json(spec);
  rep.spec["H"] = H;
  rep.spec["r_scale"] = r_scale;
  rep.spec["t"] = t;
  rep.spec["level"] = level;
  rep.spec["n_mc"] = n_mc;
  for (int which = 0; which < 2; ++which) {
    const KsResult& k = which == 0 ? k1 : kn;
    BoundCell c;
    c.params = {{"statistic", which == 0 ? 0.0 : 1.0}};
    c.lhs = k.p_value;
    c.rhs_lower = level;
    c.note = which == 0 ? "first coordinate" : "norm";
    c.violation = k.p_value < level;
    rep.cells.push_back(std::move(c));
  }
  rep.fitted_constants["ks_p_coord"] = k1.p_value;
  rep.fitted_constants["ks_p_norm"] = kn.p_value;
  rep.fitted_constants["ks_D_coord"] = k1.statistic;
  rep.fitted_constants["ks_D_norm"] = kn.statistic;
  rep.forced_failure = k1.p_value < level || kn.p_value < level;
  return rep;
}

}  // namespace mdim
