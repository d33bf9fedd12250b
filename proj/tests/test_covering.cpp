// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mdim/covering.hpp"
#include "mdim/error.hpp"
#include "mdim/paths.hpp"
#include "mdim/process.hpp"

using namespace mdim;

namespace {

SamplePath constant_path(int dim, double value, std::size_t steps, double T = 1.0) {
  SamplePath p;
  p.dim = dim;
  p.dt = T / static_cast<double>(steps);
  p.values.assign((steps + 1) * static_cast<std::size_t>(dim), value);
  return p;
}

SamplePath bm_path(int dim, std::size_t steps, std::uint64_t stream) {
  RngStream r(404, stream);
  const Vec x0(static_cast<std::size_t>(dim), 0.0);
  return simulate(brownian(dim), x0, 1.0, steps, r);
}

struct SelfCheckOn {
  SelfCheckOn() { set_cover_self_check(true); }
  ~SelfCheckOn() { set_cover_self_check(false); }
};

}  // namespace

TEST_SUITE("covering") {
  TEST_CASE("preimage count: constant and absent paths") {
    SelfCheckOn guard;
    const SamplePath p = constant_path(1, 0.0, 1024);
    const Vec z = {0.0};
    for (double tn : {0.125, 0.3, 0.1, 0.7}) {
      CAPTURE(tn);
      CHECK(preimage_cover_count(p, z, 0.1, tn, 1.0) ==
            static_cast<std::size_t>(std::ceil(1.0 / tn)));
    }
    const Vec far = {5.0};
    CHECK(preimage_cover_count(p, far, 0.1, 0.1, 1.0) == 0);
    // Closed ball: distance exactly the radius still counts.
    const Vec edge = {0.25};
    CHECK(preimage_cover_count(p, edge, 0.25, 0.5, 1.0) == 2);
    std::vector<std::size_t> starts;
    preimage_cover_count(p, z, 0.1, 0.3, 1.0, &starts);
    CHECK(starts == std::vector<std::size_t>{0, 308, 616, 924});
    CHECK_THROWS_AS(preimage_cover_count(p, Vec{0.0, 0.0}, 0.1, 0.1, 1.0), Error);
    CHECK_THROWS_AS(preimage_cover_count(p, z, 0.1, 1.0, 1.0), Error);
  }

  TEST_CASE("image count: constant and linear paths") {
    SelfCheckOn guard;
    const SamplePath c = constant_path(2, 0.3, 256);
    CHECK(image_cover_count(c, 0.0, 1.0, 1e-6) == 1);
    SamplePath line = constant_path(1, 0.0, 1000);
    for (std::size_t i = 0; i < line.size(); ++i) line.values[i] = line.time(i);
    std::vector<std::size_t> centers;
    const std::size_t n = image_cover_count(line, 0.0, 1.0, 0.1, &centers);
    // Steps of 1e-3, so chain times are 101 grid steps apart.
    CHECK(n == 10);
    CHECK(centers.front() == 0);
    CHECK(centers[1] == 101);
    CHECK(image_cover_count(line, 0.5, 0.5, 0.1) == 1);
    CHECK_THROWS_AS(image_cover_count(line, 0.0, 2.0, 0.1), Error);
    CHECK_THROWS_AS(image_cover_count(line, 0.0, 1.0, 0.0), Error);
  }

  TEST_CASE("randomized cover calls pass the self check") {
    SelfCheckOn guard;
    RngStream rng(7, 7);
    for (int trial = 0; trial < 40; ++trial) {
      const int d = 1 + trial % 2;
      const SamplePath p = bm_path(d, 2048, static_cast<std::uint64_t>(trial));
      for (int k = 0; k < 10; ++k) {
        double a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        const double theta = std::exp(-4 * rng.uniform());
        std::vector<std::size_t> centers;
        const std::size_t n = image_cover_count(p, a, b, theta, &centers);
        CHECK(n == centers.size());
        CHECK(std::is_sorted(centers.begin(), centers.end()));
        if (n > 0) CHECK(p.time(centers.front()) >= a - 1e-9);
        Vec z(static_cast<std::size_t>(d));
        for (auto& v : z) v = rng.normal() * 0.5;
        const double tn = 0.01 + 0.5 * rng.uniform();
        std::vector<std::size_t> starts;
        const std::size_t m = preimage_cover_count(p, z, 0.05 + rng.uniform(), tn, 1.0, &starts);
        CHECK(m == starts.size());
        for (std::size_t j = 1; j < starts.size(); ++j)
          CHECK(p.time(starts[j]) >= p.time(starts[j - 1]) + tn - 1e-9);
      }
    }
  }

  TEST_CASE("family counts are bounded by ball-by-ball counts") {
    const SamplePath p = bm_path(1, 4096, 99);
    const auto c = PreimageCoverConfig::dyadic(4, 0.45, 1.0, 2);
    CHECK(c.family_size(1) == doctest::Approx(64.0));
    auto fam = preimage_family_counts(p, c);
    std::vector<std::size_t> direct;
    for (int q = 0; q < 64; ++q) {
      const Vec z = {-2.0 + (q + 0.5) * c.r_n};
      const std::size_t n = preimage_cover_count(p, z, c.r_n / 2, c.t_n, c.T);
      if (n > 0) direct.push_back(n);
    }
    // A point on a cube boundary lies in two closed balls; the family assigns
    // it to one, so the direct counts can only be larger.
    std::sort(fam.begin(), fam.end());
    std::sort(direct.begin(), direct.end());
    CHECK(fam.size() <= direct.size());
    std::size_t sf = 0, sd = 0;
    for (auto v : fam) sf += v;
    for (auto v : direct) sd += v;
    CHECK(sf <= sd);
    CHECK(fam.size() >= 1);

    const SamplePath still = constant_path(1, 0.3, 1024);
    const auto one = preimage_family_counts(still, PreimageCoverConfig::dyadic(3, 0.5));
    REQUIRE(one.size() == 1);
    CHECK(one[0] == static_cast<std::size_t>(std::ceil(1.0 / std::pow(2.0, -1.5))));
  }

  TEST_CASE("dyadic configs") {
    const auto ic = ImageCoverConfig::dyadic(3, 0.5);
    CHECK(ic.intervals.size() == 8);
    CHECK(ic.t_n == 0.125);
    CHECK(ic.theta_n == doctest::Approx(std::pow(2.0, -1.5)));
    CHECK(ic.intervals[7].second == doctest::Approx(1.0));
    const auto pc = PreimageCoverConfig::dyadic(4, 0.5);
    CHECK(pc.r_n == 0.0625);
    CHECK(pc.t_n == doctest::Approx(0.25));
    CHECK(pc.family_size(2) == doctest::Approx(1024.0));
    CHECK_THROWS_AS(ImageCoverConfig::dyadic(-1, 0.5), Error);
    CHECK_THROWS_AS(ImageCoverConfig::dyadic(3, 0.0), Error);
    PreimageCoverConfig bad = pc;
    bad.t_n = 2.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("tail slope") {
    const std::vector<std::size_t> flat(20, 3);
    CHECK(tail_slope(flat).first == doctest::Approx(0.0));
    CHECK(std::isnan(tail_slope(std::vector<std::size_t>{0, 0, 1, 1}).first));
    CHECK(std::isnan(tail_slope(std::vector<std::size_t>{}).first));
    // 64 counts with P(count > k) = 2^{-k} for k = 1..6.
    std::vector<std::size_t> geo(16, 0);
    geo.insert(geo.end(), 16, 1);
    for (std::size_t k = 2; k <= 6; ++k) geo.insert(geo.end(), std::size_t{64} >> k, k);
    geo.push_back(7);
    REQUIRE(geo.size() == 64);
    const auto [s, se] = tail_slope(geo);
    CHECK(s == doctest::Approx(-std::log(2.0)).epsilon(1e-9));
    CHECK(se == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("covering statistics") {
    SelfCheckOn guard;
    CoveringConfig cfg;
    cfg.levels = {3, 5};
    cfg.n_steps = 4096;
    RngStream r1(8, 0), r2(8, 0);
    const auto a = covering_statistics(brownian(1), cfg, 6, r1);
    const auto b = covering_statistics(brownian(1), cfg, 6, r2);
    REQUIRE(a.rows.size() == 2);
    for (std::size_t l = 0; l < 2; ++l) {
      const auto& row = a.rows[l];
      CHECK(row.n == cfg.levels[l]);
      CHECK(row.path_max.size() == 6);
      CHECK(row.max_count == *std::max_element(row.path_max.begin(), row.path_max.end()));
      CHECK(row.q50 <= row.q95);
      CHECK(row.q95 <= static_cast<double>(row.max_count));
      CHECK(row.path_max == b.rows[l].path_max);
    }
    CHECK(a.to_csv().rfind("n,family_size,max_count,q50,q95,tail_slope", 0) == 0);
    CHECK(a.to_json()["rows"].size() == 2);

    cfg.kind = CoverKind::preimage;
    cfg.T = 0.5;
    RngStream r3(8, 1);
    const auto pre = covering_statistics(brownian(2), cfg, 4, r3);
    CHECK(pre.rows[0].family_size == doctest::Approx(256.0));
    CHECK(pre.rows[0].max_count >= 1);

    cfg.kind = CoverKind::image;
    CHECK_THROWS_AS(covering_statistics(brownian(1), cfg, 2, r3), Error);
    cfg.T = 1.0;
    cfg.levels.clear();
    CHECK_THROWS_AS(covering_statistics(brownian(1), cfg, 2, r3), Error);
  }
}
