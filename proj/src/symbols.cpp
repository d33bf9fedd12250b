// SPDX-License-Identifier: Apache-2.0
#include "mdim/symbols.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "mdim/error.hpp"
#include "mdim/numerics.hpp"

namespace mdim {
namespace {

constexpr cplx kI{0.0, 1.0};

double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

void check_unit(const Vec& v, int dim) {
  require(static_cast<int>(v.size()) == dim, "spectral atom has wrong dimension");
  require(std::abs(norm(v) - 1.0) <= 1e-12, "spectral atom is not a unit vector");
}

// Gauss-Legendre on [a, b] with nodes clustered at both ends; appends
// (theta, weight) pairs.
void clustered_rule(double a, double b, int n,
                    std::vector<std::pair<double, double>>& out) {
  const GaussRule& g = gauss_legendre(n);
  for (int i = 0; i < n; ++i) {
    const double s = 0.5 * (g.nodes[i] + 1.0);
    const double th = a + (b - a) * 0.5 * (1.0 - std::cos(kPi * s));
    const double jac = (b - a) * 0.5 * kPi * std::sin(kPi * s) * 0.5;
    out.emplace_back(th, g.weights[i] * jac);
  }
}

// Orthonormal frame whose last vector is along xi (or e_d when xi = 0).
std::array<Vec, 3> frame3(std::span<const double> xi) {
  Vec e3(3, 0.0);
  const double n = norm(xi);
  if (n > 0) {
    for (int i = 0; i < 3; ++i) e3[i] = xi[i] / n;
  } else {
    e3[2] = 1.0;
  }
  Vec a = std::abs(e3[0]) < 0.9 ? Vec{1, 0, 0} : Vec{0, 1, 0};
  const double p = dot(a, e3);
  Vec e1(3);
  for (int i = 0; i < 3; ++i) e1[i] = a[i] - p * e3[i];
  const double n1 = norm(e1);
  for (auto& v : e1) v /= n1;
  Vec e2 = {e3[1] * e1[2] - e3[2] * e1[1], e3[2] * e1[0] - e3[0] * e1[2],
            e3[0] * e1[1] - e3[1] * e1[0]};
  return {e1, e2, e3};
}

// Integral over the angular measure of g(s, <xi, s>).
template <class G>
cplx integrate_measure(const AngularMeasure& m, int dim,
                       std::span<const double> xi, G&& g) {
  cplx total = 0.0;
  if (m.uniform) {
    for (const auto& node : direction_nodes(dim, xi)) {
      total += node.weight * g(node.s, dot(node.s, xi));
    }
    return m.uniform_mass * total;
  }
  for (const auto& a : m.atoms) total += a.weight * g(a.direction, dot(a.direction, xi));
  return total;
}

// One-direction integral of the radial stable Levy measure with the
// x/(1+|x|^2) compensator: int_0^inf [1 - e^{iru} + iru/(1+r^2)] r^{-1-alpha} dr.
cplx radial_levy_integral(double alpha, double u) {
  if (u == 0.0) return 0.0;
  const double au = std::abs(u);
  if (alpha == 1.0) {
    return cplx(0.5 * kPi * au, u * std::log(au) + (kEulerGamma - 1.0) * u);
  }
  const double re = radial_stable_constant(alpha) * std::pow(au, alpha);
  const double im = u * kPi / (2.0 * std::cos(0.5 * kPi * alpha)) +
                    sgn(u) * std::pow(au, alpha) * std::tgamma(-alpha) *
                        std::sin(0.5 * kPi * alpha);
  return {re, im};
}

}  // namespace

// ---- angular measures ----------------------------------------------------

double AngularMeasure::total_mass() const {
  if (uniform) return uniform_mass;
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

std::vector<AngularMeasure::Axis> AngularMeasure::axes() const {
  std::vector<Axis> out;
  std::vector<bool> used(atoms.size(), false);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (used[i]) continue;
    used[i] = true;
    double wp = atoms[i].weight, wm = 0.0;
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      if (used[j]) continue;
      double diff = 0.0, anti = 0.0;
      for (std::size_t k = 0; k < atoms[i].direction.size(); ++k) {
        diff = std::max(diff, std::abs(atoms[j].direction[k] - atoms[i].direction[k]));
        anti = std::max(anti, std::abs(atoms[j].direction[k] + atoms[i].direction[k]));
      }
      if (diff <= 1e-12) {
        wp += atoms[j].weight;
        used[j] = true;
      } else if (anti <= 1e-12) {
        wm += atoms[j].weight;
        used[j] = true;
      }
    }
    const double w = wp + wm;
    if (w > 0) out.push_back({atoms[i].direction, w, (wp - wm) / w});
  }
  return out;
}

bool AngularMeasure::symmetric(double tol) const {
  if (uniform) return true;
  for (const auto& ax : axes()) {
    if (std::abs(ax.skew) > tol) return false;
  }
  return true;
}

void AngularMeasure::validate(int dim) const {
  require(dim >= 1, "dimension must be >= 1");
  if (uniform) {
    require(atoms.empty(), "uniform measure cannot also list atoms");
    require(uniform_mass > 0 && std::isfinite(uniform_mass),
            "uniform spectral mass must be positive");
    require(dim <= 3, "uniform spectral measure supported for d <= 3 only");
    return;
  }
  require(!atoms.empty(), "spectral measure needs at least one atom");
  double total = 0.0;
  for (const auto& a : atoms) {
    check_unit(a.direction, dim);
    require(a.weight >= 0 && std::isfinite(a.weight), "atom weights must be >= 0");
    total += a.weight;
  }
  require(total > 0, "spectral measure must have positive total mass");
}

void StableSpectralSpec::validate() const {
  require(alpha > 0 && alpha <= 2, "stable index alpha must lie in (0, 2]");
  measure.validate(dim);
  require(shift.empty() || static_cast<int>(shift.size()) == dim,
          "shift A0 has wrong dimension");
}

bool StableSpectralSpec::symmetric() const {
  for (double v : shift) {
    if (v != 0.0) return false;
  }
  return alpha == 2.0 || measure.symmetric();
}

void LevyTriplet::validate() const {
  require(dim >= 1, "dimension must be >= 1");
  require(drift.empty() || static_cast<int>(drift.size()) == dim,
          "drift has wrong dimension");
  if (!sigma.empty()) {
    require(static_cast<int>(sigma.size()) == dim * dim,
            "gaussian_sigma must be d x d");
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < i; ++j) {
        require(std::abs(sigma[i * dim + j] - sigma[j * dim + i]) <= 1e-12,
                "gaussian_sigma must be symmetric");
      }
    }
    cholesky_psd(sigma, dim);  // throws when indefinite
  }
  if (const auto* s = std::get_if<StableLevyMeasure>(&levy)) {
    require(s->alpha > 0 && s->alpha < 2, "Levy measure index must lie in (0, 2)");
    s->nu.validate(dim);
  } else if (const auto* c = std::get_if<IsotropicDensity>(&levy)) {
    require(c->alpha > 0 && c->alpha < 2, "Levy measure index must lie in (0, 2)");
    require(c->c > 0, "isotropic density constant must be positive");
  }
}

std::vector<DirectionNode> direction_nodes(int d, std::span<const double> xi,
                                           int refine) {
  require(static_cast<int>(xi.size()) == d, "frequency has wrong dimension");
  require(refine >= 0 && refine <= 6, "direction refinement out of range");
  std::vector<DirectionNode> out;
  if (d == 1) {
    out.push_back({{1.0}, 0.5});
    out.push_back({{-1.0}, 0.5});
    return out;
  }
  if (d == 2) {
    const double phi = std::atan2(xi[1], xi[0]);
    std::vector<std::pair<double, double>> th;
    const int n = 24 << refine;
    clustered_rule(phi - 0.5 * kPi, phi + 0.5 * kPi, n, th);
    clustered_rule(phi + 0.5 * kPi, phi + 1.5 * kPi, n, th);
    out.reserve(th.size());
    for (const auto& [t, w] : th) {
      out.push_back({{std::cos(t), std::sin(t)}, w / (2.0 * kPi)});
    }
    return out;
  }
  if (d == 3) {
    const auto e = frame3(xi);
    std::vector<std::pair<double, double>> cs;
    const int n = 16 << refine;
    clustered_rule(-1.0, 0.0, n, cs);
    clustered_rule(0.0, 1.0, n, cs);
    const int m = 12 << refine;
    out.reserve(cs.size() * m);
    for (const auto& [c, w] : cs) {
      const double sn = std::sqrt(std::max(0.0, 1.0 - c * c));
      for (int k = 0; k < m; ++k) {
        const double ph = 2.0 * kPi * (k + 0.5) / m;
        Vec s(3);
        for (int i = 0; i < 3; ++i) {
          s[i] = c * e[2][i] + sn * (std::cos(ph) * e[0][i] + std::sin(ph) * e[1][i]);
        }
        out.push_back({std::move(s), 0.5 * w / m});
      }
    }
    return out;
  }
  fail("uniform direction quadrature supported for d <= 3 only");
}

double radial_stable_constant(double alpha) {
  require(alpha > 0 && alpha < 2, "radial_stable_constant: alpha outside (0,2)");
  if (alpha == 1.0) return 0.5 * kPi;
  return std::tgamma(1.0 - alpha) * std::cos(0.5 * kPi * alpha) / alpha;
}

double isotropic_density_constant(int d, double alpha) {
  require(d >= 1, "dimension must be >= 1");
  require(alpha > 0 && alpha < 2, "isotropic_density_constant: alpha outside (0,2)");
  return std::pow(kPi, 0.5 * d) * std::abs(std::tgamma(-0.5 * alpha)) /
         (std::pow(2.0, alpha) * std::tgamma(0.5 * (d + alpha)));
}

cplx eval_levy_exponent(const LevyTriplet& t, std::span<const double> xi) {
  require(static_cast<int>(xi.size()) == t.dim, "frequency has wrong dimension");
  cplx psi = 0.0;
  if (!t.drift.empty()) psi += kI * dot(t.drift, xi);
  if (!t.sigma.empty()) {
    double q = 0.0;
    for (int i = 0; i < t.dim; ++i) {
      for (int j = 0; j < t.dim; ++j) q += xi[i] * t.sigma[i * t.dim + j] * xi[j];
    }
    psi += 0.5 * q;
  }
  if (const auto* s = std::get_if<StableLevyMeasure>(&t.levy)) {
    psi += integrate_measure(s->nu, t.dim, xi, [&](const Vec&, double u) {
      return radial_levy_integral(s->alpha, u);
    });
  } else if (const auto* c = std::get_if<IsotropicDensity>(&t.levy)) {
    psi += c->c * isotropic_density_constant(t.dim, c->alpha) *
           std::pow(norm(xi), c->alpha);
  }
  return psi;
}

cplx eval_stable_exponent(const StableSpectralSpec& spec,
                          std::span<const double> xi) {
  require(static_cast<int>(xi.size()) == spec.dim, "frequency has wrong dimension");
  const double a = spec.alpha;
  cplx psi = integrate_measure(spec.measure, spec.dim, xi, [&](const Vec&, double u) -> cplx {
    if (u == 0.0) return 0.0;
    const double au = std::abs(u);
    if (a == 1.0) return au * (1.0 + kI * (0.5 * kPi) * sgn(u) * std::log(au));
    return std::pow(au, a) * (1.0 - kI * sgn(u) * std::tan(0.5 * kPi * a));
  });
  if (!spec.shift.empty()) psi += kI * dot(spec.shift, xi);
  return psi;
}

// ---- jump diffusions -----------------------------------------------------

Vec DriftField::operator()(std::span<const double> x) const {
  switch (form) {
    case Form::zero:
      return Vec(x.size(), 0.0);
    case Form::constant:
      return v;
    case Form::cosine: {
      Vec out = v;
      const double c = std::cos(x[0]);
      for (auto& e : out) e *= c;
      return out;
    }
  }
  return {};
}

bool DriftField::is_zero() const {
  if (form == Form::zero) return true;
  return std::all_of(v.begin(), v.end(), [](double e) { return e == 0.0; });
}

double DriftField::sup_norm() const { return is_zero() ? 0.0 : norm(v); }

AngularMeasure StateSpectralMeasure::at(std::span<const double> x) const {
  const double s2 = std::pow(std::sin(x[0]), 2);
  AngularMeasure m;
  if (uniform) {
    m.uniform = true;
    m.uniform_mass = uniform_mass + uniform_amp * s2;
    return m;
  }
  m.atoms = atoms;
  for (std::size_t k = 0; k < atoms.size() && k < atom_amp.size(); ++k) {
    m.atoms[k].weight += atom_amp[k] * s2;
  }
  return m;
}

bool StateSpectralMeasure::state_free() const {
  if (uniform) return uniform_amp == 0.0;
  return std::all_of(atom_amp.begin(), atom_amp.end(),
                     [](double a) { return a == 0.0; });
}

void StateSpectralMeasure::validate(int dim) const {
  if (uniform) {
    require(atoms.empty(), "uniform measure cannot also list atoms");
    require(uniform_mass > 0 && uniform_amp >= 0, "uniform mass must be positive");
    require(dim <= 3, "uniform spectral measure supported for d <= 3 only");
    return;
  }
  require(!atoms.empty(), "spectral measure needs at least one atom");
  require(atom_amp.empty() || atom_amp.size() == atoms.size(),
          "atom amplitude list must match atoms");
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    check_unit(atoms[k].direction, dim);
    require(atoms[k].weight >= 0, "atom weights must be >= 0");
    if (!atom_amp.empty()) require(atom_amp[k] >= 0, "atom amplitudes must be >= 0");
    total += atoms[k].weight;
  }
  require(total > 0, "spectral measure must have positive mass at every x");
}

void JumpDiffusionSpec::validate() const {
  require(alpha > 0 && alpha < 2, "jump diffusion index must lie in (0, 2)");
  require(dim >= 1, "dimension must be >= 1");
  measure.validate(dim);
  if (drift.form != DriftField::Form::zero) {
    require(static_cast<int>(drift.v.size()) == dim, "drift vector has wrong dimension");
  }
  if (alpha <= 1.0) {
    require(drift.is_zero(), "drift A(x) must vanish identically when alpha <= 1");
  }
}

cplx eval_jump_diffusion_symbol(const JumpDiffusionSpec& spec,
                                std::span<const double> x,
                                std::span<const double> xi) {
  require(static_cast<int>(x.size()) == spec.dim &&
              static_cast<int>(xi.size()) == spec.dim,
          "state or frequency has wrong dimension");
  if (spec.alpha <= 1.0 && !spec.drift.is_zero()) {
    fail("drift A(x) must vanish identically when alpha <= 1");
  }
  const AngularMeasure m = spec.measure.at(x);
  cplx q = integrate_measure(m, spec.dim, xi, [&](const Vec&, double u) -> cplx {
    return std::pow(std::abs(u), spec.alpha);
  });
  if (!spec.drift.is_zero()) q -= kI * dot(spec.drift(x), xi);
  return q;
}

// ---- stable-like kernels -------------------------------------------------

double StableLikeKernel::operator()(std::span<const double> x,
                                    std::span<const double> z) const {
  if (form == Form::constant) return base;
  const double s2 = std::pow(std::sin(freq * x[0]), 2);
  switch (form) {
    case Form::sin2:
      return base + amp * s2;
    case Form::aniso: {
      const double nz = norm(z);
      const double c = nz > 0 ? z[0] / nz : 0.0;
      return base + amp * s2 * c * c;
    }
    case Form::radial:
      return base + amp * s2 * std::exp(-norm(z));
    default:
      return base;
  }
}

double StableLikeKernel::kappa2() const {
  if (!depends_on_x()) return 0.0;
  return amp * std::pow(freq, beta);
}

void StableLikeKernel::validate() const {
  require(alpha > 0 && alpha < 2, "stable-like index must lie in (0, 2)");
  require(dim >= 1, "dimension must be >= 1");
  require(base > 0 && std::isfinite(base), "kappa0 (base) must be positive");
  require(amp >= 0 && std::isfinite(amp), "kernel amplitude must be >= 0");
  require(freq > 0 && std::isfinite(freq), "kernel frequency must be positive");
  require(beta > 0 && beta < 1, "Holder exponent beta must lie in (0, 1)");
  if (depends_on_z()) require(dim <= 3, "z-dependent kernels supported for d <= 3");
}

namespace {

// int_0^inf (1 - cos rho) k(rho) rho^{-1-alpha} d rho at refinement level L.
template <class K>
double scaled_radial_integral(double alpha, const K& k, const QuadratureConfig& q,
                              int level) {
  const GaussRule& g8 = gauss_legendre(8);
  const double rin = q.inner_cut, rout = q.outer_cut;
  double total = k(0.5 * rin) * std::pow(rin, 2.0 - alpha) / (2.0 * (2.0 - alpha));
  auto f = [&](double r) { return (1.0 - std::cos(r)) * k(r) * std::pow(r, -1.0 - alpha); };
  auto panel = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) s += g8.weights[i] * f(c + h * g8.nodes[i]);
    return s * h;
  };
  if (rin < 1.0) {
    const int ng = 8 << level;
    const double lr = std::log(rin);
    for (int i = 0; i < ng; ++i) {
      total += panel(std::exp(lr * (1.0 - double(i) / ng)),
                     std::exp(lr * (1.0 - double(i + 1) / ng)));
    }
  }
  const double lo = std::max(1.0, rin);
  const int nu = std::max(1, static_cast<int>(std::ceil((rout - lo) / (0.5 * kPi)))) << level;
  const double w = (rout - lo) / nu;
  for (int i = 0; i < nu; ++i) total += panel(lo + i * w, lo + (i + 1) * w);
  // tail: non-oscillatory part via rho = R w^{-1/alpha}, oscillatory part by
  // two integrations by parts
  const GaussRule& gt = gauss_legendre(16 << std::min(level, 3));
  double mean_part = 0.0;
  for (std::size_t i = 0; i < gt.nodes.size(); ++i) {
    const double wv = 0.5 * (gt.nodes[i] + 1.0);
    mean_part += 0.5 * gt.weights[i] * k(rout * std::pow(wv, -1.0 / alpha));
  }
  mean_part *= std::pow(rout, -alpha) / alpha;
  const double hstep = 1e-4 * rout;
  const double kR = k(rout);
  const double dk = (k(rout + hstep) - k(rout - hstep)) / (2.0 * hstep);
  const double gR = kR * std::pow(rout, -1.0 - alpha);
  const double dgR = dk * std::pow(rout, -1.0 - alpha) -
                     (1.0 + alpha) * kR * std::pow(rout, -2.0 - alpha);
  const double osc = -std::sin(rout) * gR - std::cos(rout) * dgR;
  return total + mean_part - osc;
}

}  // namespace

SymbolValue eval_stable_like_symbol(const StableLikeKernel& kernel,
                                    std::span<const double> x,
                                    std::span<const double> xi,
                                    const QuadratureConfig& quad) {
  kernel.validate();
  const int d = kernel.dim;
  require(static_cast<int>(x.size()) == d && static_cast<int>(xi.size()) == d,
          "state or frequency has wrong dimension");
  require(quad.inner_cut > 0 && quad.inner_cut < quad.outer_cut,
          "quadrature cutoffs must satisfy 0 < inner < outer");
  require(quad.max_levels >= 2, "quadrature needs at least two levels");
  const double nxi = norm(xi);
  SymbolValue out;
  if (nxi == 0.0) return out;
  const double a = kernel.alpha;
  const double area = sphere_area(d);

  auto level_value = [&](int level) {
    const int dir_level = std::min(level, 4);
    const auto nodes = direction_nodes(d, xi, dir_level);
    double total = 0.0;
    if (!kernel.depends_on_z()) {
      const double r1 = scaled_radial_integral(a, [](double) { return 1.0; }, quad, level);
      const double kx = kernel(x, xi);
      for (const auto& n : nodes) total += n.weight * std::pow(std::abs(dot(n.s, xi)), a);
      return area * kx * r1 * total;
    }
    for (const auto& n : nodes) {
      const double u = std::abs(dot(n.s, xi));
      if (u == 0.0) continue;
      Vec z(d);
      auto k = [&](double rho) {
        for (int i = 0; i < d; ++i) z[i] = n.s[i] * rho / u;
        return kernel(x, z);
      };
      total += n.weight * std::pow(u, a) * scaled_radial_integral(a, k, quad, level);
    }
    return area * total;
  };

  double prev = level_value(0);
  for (int level = 1; level < quad.max_levels; ++level) {
    const double cur = level_value(level);
    if (std::abs(cur - prev) <= quad.rel_tol * std::abs(cur)) {
      out.value = cur;
      out.levels = level + 1;
      out.bound_constant = std::abs(cur) / std::pow(nxi, a);
      return out;
    }
    prev = cur;
    if (level >= 6) {
      throw QuadratureError("stable-like symbol quadrature did not converge", prev, cur);
    }
  }
  throw QuadratureError("stable-like symbol quadrature did not converge", prev, prev);
}

// ---- growth condition ----------------------------------------------------

void GrowthConditionSpec::validate() const {
  require(alpha > 0 && alpha <= 2, "growth spec alpha must lie in (0, 2]");
  require(zeta_prime > 0, "zeta' must be positive");
  if (alpha < 2) require(zeta_prime < 2 - alpha, "zeta' must be < 2 - alpha");
  require(K5 >= 1, "K5 must be >= 1");
  require(tau > 0, "tau must be positive");
}

BoundCheckReport check_growth_condition(const ExponentFn& exponent,
                                        const GrowthConditionSpec& spec,
                                        const std::vector<Vec>& xi_grid) {
  spec.validate();
  BoundCheckReport rep;
  rep.check = "growth";
  rep.spec = {{"alpha", spec.alpha},
              {"zeta_prime", spec.zeta_prime},
              {"K5", spec.K5},
              {"tau", spec.tau},
              {"global_lower", spec.global_lower}};
  const double up_exp = spec.alpha == 2.0 ? 2.0 : spec.alpha + spec.zeta_prime;
  const double lo_exp = spec.alpha - spec.zeta_prime;
  double k_fit = 1.0;
  for (const auto& xi : xi_grid) {
    const double n = norm(xi);
    if (!spec.global_lower && n < spec.tau) {
      fail("growth check: grid point with |xi| < tau (set global_lower for (B4))");
    }
    require(n > 0, "growth check: xi = 0 in grid");
    const cplx v = exponent(xi);
    if (std::abs(v.imag()) > 1e-8 * std::max(1.0, std::abs(v))) {
      throw Error(ErrorCode::numeric,
                  "growth condition applies to real (symmetric) exponents only");
    }
    BoundCell c;
    c.params = {{"norm_xi", n}};
    c.lhs = v.real();
    c.rhs = spec.K5 * std::pow(n, up_exp);
    c.rhs_lower = std::pow(n, lo_exp) / spec.K5;
    c.std_err = 0.0;
    k_fit = std::max({k_fit, c.lhs / std::pow(n, up_exp),
                      c.lhs > 0 ? std::pow(n, lo_exp) / c.lhs
                                : std::numeric_limits<double>::infinity()});
    rep.cells.push_back(std::move(c));
  }
  mark_violations(rep, 0.0);
  rep.fitted_constants["K5_min"] = k_fit;
  return rep;
}

// ---- JSON ----------------------------------------------------------------

nlohmann::json to_json(const AngularMeasure& m) {
  if (m.uniform) return {{"uniform_mass", m.uniform_mass}};
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms) {
    atoms.push_back({{"direction", a.direction}, {"weight", a.weight}});
  }
  return {{"atoms", atoms}};
}

AngularMeasure angular_measure_from_json(const nlohmann::json& j, int dim) {
  AngularMeasure m;
  if (j.contains("uniform_mass")) {
    m.uniform = true;
    m.uniform_mass = j.at("uniform_mass").get<double>();
  } else {
    for (const auto& a : j.at("atoms")) {
      SpectralAtom atom;
      atom.direction = a.at("direction").get<Vec>();
      const double n = norm(atom.direction);
      require(n > 0, "spectral atom direction must be nonzero");
      for (auto& v : atom.direction) v /= n;
      atom.weight = a.at("weight").get<double>();
      m.atoms.push_back(std::move(atom));
    }
  }
  m.validate(dim);
  return m;
}

}  // namespace mdim
