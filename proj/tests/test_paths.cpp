// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "mdim/error.hpp"
#include "mdim/numerics.hpp"
#include "mdim/paths.hpp"
#include "mdim/process.hpp"
#include "mdim/stats.hpp"

using namespace mdim;

namespace {

std::vector<double> coord(const SamplePath& p, std::size_t i, int k) { return {p.at(i)[k]}; }

std::vector<double> endpoints(const ProcessSpec& spec, double T, std::size_t steps, std::size_t n,
                              std::uint64_t stream, int k = 0) {
  const RngStream root(99, stream);
  std::vector<double> out(n);
  const Vec x0(static_cast<std::size_t>(spec.dim()), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    RngStream r = root.split(i);
    out[i] = simulate(spec, x0, T, steps, r).at(steps)[k];
  }
  return out;
}

}  // namespace

TEST_SUITE("paths") {

TEST_CASE("stable increments: characteristic function within 4/sqrt(N)") {
  const std::size_t N = 200000;
  for (double a : {0.8, 1.0, 1.5, 2.0}) {
    CAPTURE(a);
    RngStream r(1, static_cast<std::uint64_t>(a * 100));
    const double t = 0.7;
    std::vector<double> x(N);
    for (auto& v : x) v = sample_stable_increment(a, t, r);
    double worst = 0;
    for (int k = 1; k <= 20; ++k) {
      const double xi = 0.15 * k;
      double c = 0, s = 0;
      for (double v : x) {
        c += std::cos(xi * v);
        s += std::sin(xi * v);
      }
      const double ref = std::exp(-t * std::pow(xi, a));
      worst = std::max(worst, std::hypot(c / N - ref, s / N));
    }
    CHECK(worst < 4.0 / std::sqrt(static_cast<double>(N)));
    // Symmetry: mean of the sign.
    double sg = 0;
    for (double v : x) sg += (v > 0) - (v < 0);
    CHECK(std::abs(sg / N) < 3.0 / std::sqrt(static_cast<double>(N)) * 1.5);
  }
}

TEST_CASE("alpha = 2 increments have variance 2t") {
  RngStream r(2, 2);
  const std::size_t N = 400000;
  std::vector<double> x(N);
  for (auto& v : x) v = sample_stable_increment(2.0, 0.3, r);
  const double se = 0.6 * std::sqrt(2.0 / N);
  CHECK(std::abs(variance(x) - 0.6) < 3 * se);
}

TEST_CASE("skewed stable increments match the exponent") {
  StableSpectralSpec s;
  s.alpha = 1.5;
  s.dim = 1;
  s.measure.atoms = {{{1.0}, 0.8}, {{-1.0}, 0.2}};
  s.shift = {0.25};
  RngStream r(4, 4);
  const std::size_t N = 200000;
  std::vector<double> x(N);
  for (auto& v : x) v = sample_stable_increment(s, 1.0, r)[0];
  for (double xi : {-1.0, 0.4, 1.3}) {
    double c = 0, sn = 0;
    for (double v : x) {
      c += std::cos(xi * v);
      sn += std::sin(xi * v);
    }
    const Vec xv = {xi};
    const cplx ref = std::exp(-eval_stable_exponent(s, xv));
    CHECK(std::abs(cplx(c / N, sn / N) - ref) < 4.0 / std::sqrt(static_cast<double>(N)));
  }
  StableSpectralSpec bad = s;
  bad.alpha = 1.0;
  bad.shift.clear();
  CHECK_THROWS_AS(sample_stable_increment(bad, 1.0, r), Error);
}

TEST_CASE("isotropic stable increments in the plane") {
  const auto p = isotropic_stable(2, 1.5, 1.0);
  const auto psi = levy_exponent(p);
  RngStream r(6, 6);
  const std::size_t N = 200000;
  std::vector<double> xs(2 * N);
  for (std::size_t i = 0; i < N; ++i) sample_levy_increment(p, 0.5, r, {xs.data() + 2 * i, 2});
  for (const Vec& xi : {Vec{1.0, 0.0}, Vec{0.5, -0.9}, Vec{-1.5, 1.5}}) {
    double c = 0;
    for (std::size_t i = 0; i < N; ++i) c += std::cos(xi[0] * xs[2 * i] + xi[1] * xs[2 * i + 1]);
    CHECK(std::abs(c / N - std::exp(-0.5 * psi(xi).real())) < 4.0 / std::sqrt(static_cast<double>(N)));
  }
}

TEST_CASE("single Brownian step is one Gaussian draw") {
  const auto bm = brownian(1);
  RngStream a(8, 1), b(8, 1);
  const Vec x0 = {0.0};
  const auto p = simulate_levy_path(bm, x0, 2.0, 1, a);
  REQUIRE(p.size() == 2);
  CHECK(p.at(0)[0] == 0.0);
  CHECK(p.at(1)[0] == doctest::Approx(std::sqrt(2.0) * b.normal()));
}

TEST_CASE("x0 offset shifts the path") {
  const auto st = isotropic_stable(2, 1.3);
  RngStream a(9, 1), b(9, 1);
  const Vec z = {0.0, 0.0}, v = {1.5, -2.0};
  const auto p = simulate(st, z, 1.0, 100, a), q = simulate(st, v, 1.0, 100, b);
  for (std::size_t i = 0; i <= 100; ++i)
    for (int k = 0; k < 2; ++k) REQUIRE(q.at(i)[k] == doctest::Approx(p.at(i)[k] + v[k]).epsilon(1e-12));
}

TEST_CASE("determinism and grid-shift consistency") {
  const auto st = isotropic_stable(1, 1.5);
  const Vec x0 = {0.0};
  RngStream a(10, 3), b(10, 3), c(10, 3);
  const auto p = simulate(st, x0, 1.0, 64, a), q = simulate(st, x0, 1.0, 64, b);
  CHECK(p.values == q.values);
  const auto half = simulate(st, x0, 0.5, 32, c);
  for (std::size_t i = 0; i <= 32; ++i) REQUIRE(half.at(i)[0] == p.at(i)[0]);
}

TEST_CASE("stable scaling: X(ct) has the law of c^{1/alpha} X(t)") {
  const double a = 1.5, c = 4.0;
  const auto st = isotropic_stable(1, a);
  auto x1 = endpoints(st, 1.0, 4, 20000, 1);
  auto xc = endpoints(st, c, 4, 20000, 2);
  for (auto& v : x1) v *= std::pow(c, 1 / a);
  CHECK(ks_two_sample(x1, xc).p_value > 1e-3);
}

TEST_CASE("subordinator: monotone paths and Laplace transform") {
  const double rho = 0.7;
  RngStream r(12, 1);
  const auto p = simulate_subordinator(rho, 1.0, 1000, r);
  for (std::size_t i = 1; i < p.size(); ++i) REQUIRE(p.at(i)[0] >= p.at(i - 1)[0]);
  const std::size_t N = 200000;
  std::vector<double> s(N);
  for (auto& v : s) v = sample_positive_stable(rho, r);
  for (double lam : {0.5, 1.0, 2.0, 4.0}) {
    double m = 0;
    for (double v : s) m += std::exp(-lam * v);
    CHECK(std::abs(m / N - std::exp(-std::pow(lam, rho))) < 4.0 / std::sqrt(static_cast<double>(N)));
  }
}

TEST_CASE("rho = 1/2 positive stable median") {
  // E e^{-lambda S} = e^{-sqrt(lambda)} is the Levy law with P(S <= s) = erfc(1/(2 sqrt s)).
  const double x = boost::math::erfc_inv(0.5);
  const double med = 1.0 / (4 * x * x);
  RngStream r(13, 1);
  const std::size_t N = 100000;
  std::vector<double> s(N);
  for (auto& v : s) v = sample_positive_stable(0.5, r);
  // Median standard error 1/(2 f(m) sqrt N).
  const double f = std::exp(-1 / (4 * med)) / (2 * std::sqrt(kPi) * std::pow(med, 1.5));
  CHECK(std::abs(median(s) - med) < 4.0 / (2 * f * std::sqrt(static_cast<double>(N))));
}

TEST_CASE("identity clock reproduces the base path") {
  const auto bm = brownian(2);
  SamplePath clock;
  clock.dim = 1;
  clock.dt = 1.0 / 50;
  for (int i = 0; i <= 50; ++i) clock.values.push_back(i / 50.0);
  RngStream a(14, 1), b(14, 1);
  const Vec x0 = {0.5, 0.5};
  const auto y = subordinate_with_clock(bm, clock, x0, 1, 10.0, a);
  const auto x = simulate_levy_path(bm, x0, 1.0, 50, b);
  for (std::size_t i = 0; i <= 50; ++i)
    for (int k = 0; k < 2; ++k) REQUIRE(y.at(i)[k] == doctest::Approx(x.at(i)[k]).epsilon(1e-12));
}

TEST_CASE("Brownian subordinated by a 1/2-stable clock is Cauchy") {
  // E e^{i xi B(tau_t)} = e^{-t |xi| / sqrt 2}.
  const auto y = subordinated(brownian(1), 0.5);
  const auto x = endpoints(y, 1.0, 8, 40000, 3);
  const double N = static_cast<double>(x.size());
  for (double xi : {0.3, 1.0, 2.5}) {
    double c = 0;
    for (double v : x) c += std::cos(xi * v);
    CHECK(std::abs(c / N - std::exp(-xi / std::sqrt(2.0))) < 4.0 / std::sqrt(N));
  }
}

TEST_CASE("subordinator overflow is reported") {
  StableLikeKernel k;
  k.alpha = 1.5;
  auto spec = subordinated(stable_like(k), 0.3);
  std::get<Subordinated>(spec.family).horizon_multiplier = 1e-12;
  RngStream r(15, 1);
  const Vec x0 = {0.0};
  CHECK_THROWS_AS(simulate(spec, x0, 1.0, 16, r), Error);
}

TEST_CASE("refining a subordinated non-Levy base converges") {
  // Stable-like base read on coarser and finer base grids: KS distance to the
  // finest reference shrinks.
  StableLikeKernel k;
  k.alpha = 1.5;
  k.dim = 1;
  k.form = StableLikeKernel::Form::sin2;
  k.amp = 0.5;
  auto run = [&](int refine, std::uint64_t stream) {
    ProcessSpec spec = subordinated(stable_like(k), 0.8);
    std::get<Subordinated>(spec.family).base_refine = refine;
    return endpoints(spec, 1.0, 4, 4000, stream);
  };
  const auto ref = run(256, 40);
  const double d1 = ks_two_sample(run(1, 41), ref).statistic;
  const double d64 = ks_two_sample(run(64, 42), ref).statistic;
  CHECK(d64 <= d1 + 0.01);
}

TEST_CASE("stable-like with constant kernel matches the isotropic stable law") {
  StableLikeKernel k;
  k.alpha = 1.5;
  k.dim = 2;
  k.base = 0.8;
  const auto a = endpoints(stable_like(k), 1.0, 64, 8000, 5);
  const auto b = endpoints(stable_from_spectral(isotropic_equivalent(k)), 1.0, 1, 8000, 6);
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  // Large-jump intensity with kappa0 = kappa1 is the isotropic intensity.
  const double dt = 1e-3, l = std::pow(dt, 1 / 1.5);
  CHECK(large_jump_rate(k, dt) == doctest::Approx(0.8 * sphere_area(2) * std::pow(l, -1.5) / 1.5));
}

TEST_CASE("jump diffusion reductions") {
  JumpDiffusionSpec jd;
  jd.alpha = 1.5;
  jd.dim = 1;
  jd.measure.atoms = {{{1.0}, 0.5}, {{-1.0}, 0.5}};
  SUBCASE("state-free measure, no drift: stable law") {
    const auto a = endpoints(jump_diffusion(jd), 1.0, 64, 8000, 7);
    StableSpectralSpec s;
    s.alpha = 1.5;
    s.dim = 1;
    s.measure.atoms = jd.measure.atoms;
    const auto b = endpoints(stable_from_spectral(s), 1.0, 1, 8000, 8);
    CHECK(ks_two_sample(a, b).p_value > 1e-3);
  }
  SUBCASE("constant drift shifts the mean") {
    jd.drift.form = DriftField::Form::constant;
    jd.drift.v = {2.0};
    const auto a = endpoints(jump_diffusion(jd), 1.0, 64, 20000, 9);
    // Mean of a symmetric 1.5-stable with heavy tails: use the median.
    CHECK(std::abs(median(a) - 2.0) < 0.05);
  }
  SUBCASE("single atom: jumps collinear with the atom") {
    JumpDiffusionSpec j2;
    j2.alpha = 1.2;
    j2.dim = 2;
    j2.measure.atoms = {{{0.6, 0.8}, 1.0}};
    RngStream r(16, 1);
    const Vec x0 = {0.0, 0.0};
    const auto p = simulate(jump_diffusion(j2), x0, 1.0, 500, r);
    for (std::size_t i = 0; i <= 500; ++i)
      REQUIRE(std::abs(0.8 * p.at(i)[0] - 0.6 * p.at(i)[1]) < 1e-9 * (1 + std::abs(p.at(i)[0])));
  }
  SUBCASE("drift is rejected for alpha <= 1") {
    jd.alpha = 0.9;
    jd.drift.form = DriftField::Form::constant;
    jd.drift.v = {1.0};
    RngStream r(17, 1);
    const Vec x0 = {0.0};
    CHECK_THROWS_AS(simulate(jump_diffusion(jd), x0, 1.0, 10, r), Error);
  }
}

TEST_CASE("index-only Levy sampling has the law of the full path") {
  const auto st = isotropic_stable(1, 1.5);
  const std::vector<std::size_t> idx = {3, 10, 400};
  const RngStream root(18, 1);
  std::vector<double> a, b;
  const Vec x0 = {0.0};
  for (std::size_t i = 0; i < 6000; ++i) {
    RngStream r = root.split(i), q = root.split(100000 + i);
    const auto v = simulate_levy_at(st, x0, 1.0 / 400, idx, r);
    REQUIRE(v.size() == 3);
    a.push_back(v[2] - v[1]);
    b.push_back(simulate(st, x0, 1.0, 400, q).at(400)[0] - simulate(st, x0, 1.0, 400, q).at(10)[0]);
  }
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
}

TEST_CASE("binary path round trip and finiteness") {
  RngStream r(19, 1);
  const Vec x0 = {0.0, 1.0};
  const auto p = simulate(brownian(2), x0, 1.0, 33, r);
  std::stringstream ss;
  write_path_binary(p, ss);
  const auto q = read_path_binary(ss);
  CHECK(q.dim == 2);
  CHECK(q.dt == p.dt);
  CHECK(q.values == p.values);
  SamplePath bad = p;
  bad.values[5] = std::nan("");
  CHECK_THROWS_AS(bad.check_finite(), Error);
  std::stringstream junk("xx");
  CHECK_THROWS_AS(read_path_binary(junk), Error);
}

TEST_CASE("process json round trip") {
  for (const auto& spec : {brownian(2, 0.5), isotropic_stable(2, 1.5), subordinator(0.7),
                           subordinated(isotropic_stable(1, 1.2), 0.6), zero_process(3)}) {
    const auto j = to_json(spec);
    const auto back = process_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.dim() == spec.dim());
  }
  CHECK(brownian(2).natural_H() == doctest::Approx(0.5));
  CHECK(isotropic_stable(2, 1.5).natural_H() == doctest::Approx(1 / 1.5));
  CHECK(subordinated(isotropic_stable(2, 1.5), 0.5).natural_H() == doctest::Approx(1 / 0.75));
}

TEST_CASE("zero process stays put") {
  RngStream r(20, 1);
  const Vec x0 = {1.0, 2.0};
  const auto p = simulate(zero_process(2), x0, 1.0, 10, r);
  for (std::size_t i = 0; i <= 10; ++i) CHECK(p.at(i)[1] == 2.0);
}

}
