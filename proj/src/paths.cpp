// SPDX-License-Identifier: Apache-2.0
#include "mdim/paths.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "mdim/error.hpp"
#include "mdim/numerics.hpp"

namespace mdim {
namespace {

constexpr std::size_t kMaxGridPoints = std::size_t{1} << 27;

SamplePath make_path(double T, std::size_t n_steps, std::span<const double> x0,
                     int dim) {
  require(T > 0 && std::isfinite(T), "horizon T must be positive");
  require(n_steps >= 1, "n_steps must be >= 1");
  require(static_cast<int>(x0.size()) == dim, "x0 has wrong dimension");
  require((n_steps + 1) * dim <= kMaxGridPoints, "path too large for memory cap");
  SamplePath p;
  p.t0 = 0.0;
  p.dt = T / static_cast<double>(n_steps);
  p.dim = dim;
  p.values.resize((n_steps + 1) * dim);
  std::copy(x0.begin(), x0.end(), p.values.begin());
  return p;
}

void random_direction(int d, RngStream& rng, std::span<double> out) {
  if (d == 1) {
    out[0] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return;
  }
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      out[i] = rng.normal();
      n2 += out[i] * out[i];
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (int i = 0; i < d; ++i) out[i] *= inv;
}


void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw Error(ErrorCode::io, "truncated path dump");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

}  // namespace

bool has_exact_increments(const ProcessSpec& spec) {
  if (std::holds_alternative<BrownianMotion>(spec.family) ||
      std::holds_alternative<StableLevy>(spec.family) ||
      std::holds_alternative<Subordinator>(spec.family) ||
      std::holds_alternative<ZeroProcess>(spec.family)) {
    return true;
  }
  if (const auto* s = std::get_if<Subordinated>(&spec.family)) {
    return s->base && has_exact_increments(*s->base);
  }
  return false;
}

void SamplePath::check_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::numeric, "simulation produced a non-finite value");
    }
  }
}

double sample_stable(double alpha, double beta, RngStream& rng) {
  require(alpha > 0 && alpha <= 2, "stable index must lie in (0, 2]");
  require(beta >= -1 && beta <= 1, "skewness must lie in [-1, 1]");
  if (alpha == 2.0) return std::sqrt(2.0) * rng.normal();
  const double v = kPi * (rng.uniform_open() - 0.5);
  if (alpha == 1.0) {
    require(std::abs(beta) <= 1e-12, "asymmetric alpha = 1 stable laws are not supported");
    return std::tan(v);
  }
  const double w = rng.exponential();
  const double t = beta * std::tan(0.5 * kPi * alpha);
  const double b = std::atan(t) / alpha;
  const double s = std::pow(1.0 + t * t, 0.5 / alpha);
  const double av = alpha * (v + b);
  return s * std::sin(av) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - av) / w, (1.0 - alpha) / alpha);
}

double sample_positive_stable(double rho, RngStream& rng) {
  require(rho > 0 && rho < 1, "positive stable index must lie in (0, 1)");
  const double u = kPi * rng.uniform_open();
  const double w = rng.exponential();
  return std::sin(rho * u) / std::pow(std::sin(u), 1.0 / rho) *
         std::pow(std::sin((1.0 - rho) * u) / w, (1.0 - rho) / rho);
}

double sample_stable_increment(double alpha, double scale_t, RngStream& rng) {
  require(scale_t > 0, "time scale must be positive");
  return std::pow(scale_t, 1.0 / alpha) * sample_stable(alpha, 0.0, rng);
}

Vec sample_stable_increment(const StableSpectralSpec& spec, double t, RngStream& rng) {
  require(t >= 0, "time must be >= 0");
  const int d = spec.dim;
  Vec out(d, 0.0);
  if (t == 0.0) return out;
  const double a = spec.alpha;
  const auto& m = spec.measure;
  if (m.uniform) {
    double s;
    if (a == 2.0) {
      s = std::sqrt(2.0 * t * m.uniform_mass / d);
    } else {
      const double scale = std::pow(t * m.uniform_mass * sphere_moment(d, a), 1.0 / a);
      s = scale * std::sqrt(2.0 * sample_positive_stable(0.5 * a, rng));
    }
    for (int i = 0; i < d; ++i) out[i] = s * rng.normal();
  } else if (a == 2.0) {
    for (const auto& atom : m.atoms) {
      const double g = std::sqrt(2.0 * t * atom.weight) * rng.normal();
      for (int i = 0; i < d; ++i) out[i] += g * atom.direction[i];
    }
  } else {
    for (const auto& ax : m.axes()) {
      const double g = std::pow(t * ax.weight, 1.0 / a) * sample_stable(a, ax.skew, rng);
      for (int i = 0; i < d; ++i) out[i] += g * ax.direction[i];
    }
  }
  for (std::size_t i = 0; i < spec.shift.size(); ++i) out[i] -= spec.shift[i] * t;
  return out;
}

void sample_levy_increment(const ProcessSpec& spec, double t, RngStream& rng,
                           std::span<double> out) {
  require(static_cast<int>(out.size()) == spec.dim(), "output has wrong dimension");
  if (const auto* b = std::get_if<BrownianMotion>(&spec.family)) {
    const double s = b->sigma * std::sqrt(t);
    for (auto& v : out) v = s * rng.normal();
  } else if (const auto* s = std::get_if<StableLevy>(&spec.family)) {
    const Vec inc = sample_stable_increment(s->spectral, t, rng);
    std::copy(inc.begin(), inc.end(), out.begin());
  } else if (const auto* sub = std::get_if<Subordinator>(&spec.family)) {
    out[0] = t > 0 ? std::pow(t, 1.0 / sub->rho) * sample_positive_stable(sub->rho, rng) : 0.0;
  } else if (const auto* so = std::get_if<Subordinated>(&spec.family)) {
    require(has_exact_increments(*so->base), "subordinated base has no exact increments");
    const double tau = t > 0 ? std::pow(t, 1.0 / so->rho) * sample_positive_stable(so->rho, rng) : 0.0;
    sample_levy_increment(*so->base, tau, rng, out);
  } else if (std::holds_alternative<ZeroProcess>(spec.family)) {
    std::fill(out.begin(), out.end(), 0.0);
  } else {
    fail("process family '" + spec.kind() + "' has no exact increment sampler");
  }
}

SamplePath simulate_levy_path(const ProcessSpec& spec, std::span<const double> x0,
                              double T, std::size_t n_steps, RngStream& rng) {
  spec.validate();
  require(has_exact_increments(spec), "simulate_levy_path needs a Levy family with exact increments");
  const int d = spec.dim();
  SamplePath p = make_path(T, n_steps, x0, d);
  Vec inc(d);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    sample_levy_increment(spec, p.dt, rng, inc);
    auto prev = p.at(i - 1);
    auto cur = p.at(i);
    for (int k = 0; k < d; ++k) cur[k] = prev[k] + inc[k];
  }
  p.check_finite();
  return p;
}

SamplePath simulate_subordinator(double rho, double T, std::size_t n_steps,
                                 RngStream& rng) {
  const double zero = 0.0;
  return simulate_levy_path(subordinator(rho), std::span<const double>(&zero, 1), T,
                            n_steps, rng);
}

SamplePath subordinate_with_clock(const ProcessSpec& base, const SamplePath& clock,
                                  std::span<const double> x0, int base_refine,
                                  double horizon, RngStream& rng) {
  require(clock.dim == 1 && clock.size() >= 2, "clock must be a 1-d path");
  require(base_refine >= 1, "base_refine must be >= 1");
  const int d = base.dim();
  const std::size_t n = clock.steps();
  SamplePath y = make_path(clock.dt * n, n, x0, d);
  y.t0 = clock.t0;
  y.dt = clock.dt;
  const double tau_T = clock.values.back();
  require(clock.values.front() >= 0, "clock must start at a nonnegative time");
  // Exact Levy increments are valid at any clock value; grid-simulated bases
  // lose resolution as tau_T grows.
  if (!std::isfinite(tau_T) || (!has_exact_increments(base) && !(tau_T <= horizon))) {
    throw Error(ErrorCode::resource,
                "subordinator overflow: tau_T exceeds the configured horizon; "
                "increase horizon_multiplier");
  }
  if (tau_T == 0.0) {
    for (std::size_t i = 1; i <= n; ++i) std::copy(x0.begin(), x0.end(), y.at(i).begin());
    return y;
  }
  const std::size_t m = n * static_cast<std::size_t>(base_refine);
  const double h = tau_T / static_cast<double>(m);
  auto grid_index = [&](double c) {
    const double k = std::floor(c / h * (1.0 + 1e-12));
    return std::min<std::size_t>(m, static_cast<std::size_t>(std::max(0.0, k)));
  };
  if (has_exact_increments(base)) {
    Vec inc(d);
    std::size_t prev_k = grid_index(clock.values[0]);
    std::vector<double> x(x0.begin(), x0.end());
    if (prev_k > 0) {
      sample_levy_increment(base, static_cast<double>(prev_k) * h, rng, inc);
      for (int k = 0; k < d; ++k) x[k] += inc[k];
    }
    std::copy(x.begin(), x.end(), y.at(0).begin());
    for (std::size_t i = 1; i <= n; ++i) {
      const std::size_t k_i = grid_index(clock.values[i]);
      require(k_i >= prev_k, "clock must be nondecreasing");
      if (k_i > prev_k) {
        sample_levy_increment(base, static_cast<double>(k_i - prev_k) * h, rng, inc);
        for (int k = 0; k < d; ++k) x[k] += inc[k];
      }
      std::copy(x.begin(), x.end(), y.at(i).begin());
      prev_k = k_i;
    }
  } else {
    const SamplePath xb = simulate(base, x0, tau_T, m, rng);
    for (std::size_t i = 0; i <= n; ++i) {
      const auto v = xb.at(grid_index(clock.values[i]));
      std::copy(v.begin(), v.end(), y.at(i).begin());
    }
  }
  y.check_finite();
  return y;
}

SamplePath subordinate_path(const Subordinated& spec, std::span<const double> x0,
                            double T, std::size_t n_steps, RngStream& rng) {
  ProcessSpec{spec}.validate();
  RngStream clock_rng = rng.split(0);
  RngStream base_rng = rng.split(1);
  const SamplePath clock = simulate_subordinator(spec.rho, T, n_steps, clock_rng);
  return subordinate_with_clock(*spec.base, clock, x0, spec.base_refine,
                                spec.horizon_multiplier * T, base_rng);
}

double large_jump_rate(const StableLikeKernel& kernel, double dt) {
  kernel.validate();
  require(dt > 0, "dt must be positive");
  const double l = std::pow(dt, 1.0 / kernel.alpha);
  return kernel.kappa1() * sphere_area(kernel.dim) * std::pow(l, -kernel.alpha) /
         kernel.alpha;
}

SamplePath simulate_stable_like_sde(const StableLikeKernel& kernel,
                                    std::span<const double> x0, double T,
                                    std::size_t n_steps, RngStream& rng) {
  kernel.validate();
  const int d = kernel.dim;
  const double a = kernel.alpha;
  SamplePath p = make_path(T, n_steps, x0, d);
  const double dt = p.dt;
  const double k0 = kernel.kappa0(), k1 = kernel.kappa1();
  if (k0 / k1 < 1e-6) {
    throw Error(ErrorCode::numeric, "thinning acceptance rate below 1e-6 (kappa0/kappa1)");
  }
  const double l = std::pow(dt, 1.0 / a);
  const double mu = large_jump_rate(kernel, dt) * dt;
  const bool thin = kernel.depends_on_x() || kernel.depends_on_z();

  // small-jump variances: diag(c0 + sin^2(freq x_1) c1)
  Vec c0(d, 0.0), c1(d, 0.0);
  if (a > 1.0) {
    const double radial = dt * std::pow(l, 2.0 - a) / (2.0 - a);
    const double iso = sphere_area(d) / d;
    for (int i = 0; i < d; ++i) c0[i] = radial * kernel.base * iso;
    if (kernel.depends_on_x()) {
      using F = StableLikeKernel::Form;
      if (kernel.form == F::sin2) {
        for (int i = 0; i < d; ++i) c1[i] = radial * kernel.amp * iso;
      } else if (kernel.form == F::aniso) {
        const double w = sphere_area(d) / (d * (d + 2.0));
        for (int i = 0; i < d; ++i) c1[i] = radial * kernel.amp * (i == 0 ? 3.0 : 1.0) * w;
      } else if (kernel.form == F::radial) {
        const GaussRule& g = gauss_legendre(16);
        double avg = 0.0;
        for (int q = 0; q < 16; ++q) {
          const double v = 0.5 * (g.nodes[q] + 1.0);
          avg += 0.5 * g.weights[q] * std::exp(-l * std::pow(v, 1.0 / (2.0 - a)));
        }
        for (int i = 0; i < d; ++i) c1[i] = radial * kernel.amp * iso * avg;
      }
    }
  }

  Vec x(x0.begin(), x0.end()), z(d);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const Vec xs = x;
    const std::uint64_t jumps = rng.poisson(mu);
    for (std::uint64_t j = 0; j < jumps; ++j) {
      const double r = l * std::pow(rng.uniform_open(), -1.0 / a);
      random_direction(d, rng, z);
      for (auto& v : z) v *= r;
      if (thin && rng.uniform() * k1 >= kernel(xs, z)) continue;
      for (int k = 0; k < d; ++k) x[k] += z[k];
    }
    if (a > 1.0) {
      const double s2 = kernel.depends_on_x() ? std::pow(std::sin(kernel.freq * xs[0]), 2) : 0.0;
      for (int k = 0; k < d; ++k) x[k] += std::sqrt(c0[k] + s2 * c1[k]) * rng.normal();
    }
    std::copy(x.begin(), x.end(), p.at(i).begin());
  }
  p.check_finite();
  return p;
}

SamplePath simulate_jump_diffusion(const JumpDiffusionSpec& spec,
                                   std::span<const double> x0, double T,
                                   std::size_t n_steps, RngStream& rng) {
  spec.validate();
  const int d = spec.dim;
  const double a = spec.alpha;
  SamplePath p = make_path(T, n_steps, x0, d);
  const double dt = p.dt;
  const double l = std::pow(dt, 1.0 / a);
  const double ca = radial_stable_constant(a);
  const double radial = a > 1.0 ? dt * std::pow(l, 2.0 - a) / (2.0 - a) / ca : 0.0;
  const bool state_free = spec.measure.state_free();

  auto small_cov_factor = [&](const AngularMeasure& m) {
    Vec cov(d * d, 0.0);
    if (m.uniform) {
      for (int i = 0; i < d; ++i) cov[i * d + i] = radial * m.uniform_mass / d;
    } else {
      for (const auto& atom : m.atoms) {
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            cov[i * d + j] += radial * atom.weight * atom.direction[i] * atom.direction[j];
          }
        }
      }
    }
    return cholesky_psd(cov, d);
  };

  AngularMeasure m = spec.measure.at(x0);
  Vec chol = a > 1.0 ? small_cov_factor(m) : Vec{};
  Vec x(x0.begin(), x0.end()), z(d), g(d);
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const Vec xs = x;
    if (!state_free) {
      m = spec.measure.at(xs);
      if (a > 1.0) chol = small_cov_factor(m);
    }
    if (!spec.drift.is_zero()) {
      const Vec drift = spec.drift(xs);
      for (int k = 0; k < d; ++k) x[k] += drift[k] * dt;
    }
    const double mass = m.total_mass();
    const std::uint64_t jumps = rng.poisson(mass / ca / a);
    for (std::uint64_t j = 0; j < jumps; ++j) {
      const double r = l * std::pow(rng.uniform_open(), -1.0 / a);
      if (m.uniform) {
        random_direction(d, rng, z);
      } else {
        double pick = rng.uniform() * mass;
        std::size_t k = 0;
        while (k + 1 < m.atoms.size() && pick >= m.atoms[k].weight) {
          pick -= m.atoms[k].weight;
          ++k;
        }
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        for (int q = 0; q < d; ++q) z[q] = sign * m.atoms[k].direction[q];
      }
      for (int k = 0; k < d; ++k) x[k] += r * z[k];
    }
    if (a > 1.0) {
      for (int k = 0; k < d; ++k) g[k] = rng.normal();
      for (int r = 0; r < d; ++r) {
        double s = 0.0;
        for (int c = 0; c <= r; ++c) s += chol[r * d + c] * g[c];
        x[r] += s;
      }
    }
    std::copy(x.begin(), x.end(), p.at(i).begin());
  }
  p.check_finite();
  return p;
}

SamplePath simulate(const ProcessSpec& spec, std::span<const double> x0, double T,
                    std::size_t n_steps, RngStream& rng) {
  spec.validate();
  if (const auto* s = std::get_if<Subordinated>(&spec.family)) {
    return subordinate_path(*s, x0, T, n_steps, rng);
  }
  if (const auto* s = std::get_if<StableLike>(&spec.family)) {
    return simulate_stable_like_sde(s->kernel, x0, T, n_steps, rng);
  }
  if (const auto* j = std::get_if<JumpDiffusion>(&spec.family)) {
    return simulate_jump_diffusion(j->spec, x0, T, n_steps, rng);
  }
  return simulate_levy_path(spec, x0, T, n_steps, rng);
}

std::vector<double> simulate_levy_at(const ProcessSpec& spec,
                                     std::span<const double> x0, double dt,
                                     std::span<const std::size_t> indices,
                                     RngStream& rng) {
  spec.validate();
  require(has_exact_increments(spec), "simulate_levy_at needs a Levy family with exact increments");
  require(dt > 0, "dt must be positive");
  const int d = spec.dim();
  require(static_cast<int>(x0.size()) == d, "x0 has wrong dimension");
  std::vector<double> out(indices.size() * d);
  Vec x(x0.begin(), x0.end()), inc(d);
  std::size_t prev = 0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    require(indices[j] >= prev, "indices must be sorted");
    if (indices[j] > prev) {
      sample_levy_increment(spec, static_cast<double>(indices[j] - prev) * dt, rng, inc);
      for (int k = 0; k < d; ++k) x[k] += inc[k];
    }
    std::copy(x.begin(), x.end(), out.begin() + j * d);
    prev = indices[j];
  }
  for (double v : out) {
    if (!std::isfinite(v)) throw Error(ErrorCode::numeric, "simulation produced a non-finite value");
  }
  return out;
}

void write_path_binary(const SamplePath& path, std::ostream& os) {
  put_u64(os, static_cast<std::uint64_t>(path.dim));
  put_u64(os, static_cast<std::uint64_t>(path.steps()));
  put_f64(os, path.t0);
  put_f64(os, path.dt);
  for (double v : path.values) put_f64(os, v);
  if (!os) throw Error(ErrorCode::io, "failed writing path dump");
}

SamplePath read_path_binary(std::istream& is) {
  SamplePath p;
  const std::uint64_t d = get_u64(is);
  const std::uint64_t n = get_u64(is);
  require(d >= 1 && d <= 64 && (n + 1) * d <= kMaxGridPoints, "corrupt path dump header");
  p.dim = static_cast<int>(d);
  p.t0 = get_f64(is);
  p.dt = get_f64(is);
  p.values.resize((n + 1) * d);
  for (auto& v : p.values) v = get_f64(is);
  return p;
}

}  // namespace mdim
