// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "mdim/parallel.hpp"
#include "mdim/rng.hpp"
#include "mdim/stats.hpp"

using namespace mdim;

TEST_SUITE("rng") {

// Known-answer vectors of the reference Philox4x32-10.
TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                      {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("same seed and stream reproduce the sequence") {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams and splits differ") {
  RngStream a(42, 7), b(42, 8);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a.next_u64() == b.next_u64();
  CHECK(equal == 0);
  const RngStream root(1, 2);
  CHECK(root.split(0).stream_id() != root.split(1).stream_id());
  CHECK(root.split(3).stream_id() == root.split(3).stream_id());
  CHECK(stream_hash(1, 2) != stream_hash(2, 1));
}

TEST_CASE("split consumption order does not matter") {
  const RngStream root(9, 0xD1);
  std::vector<std::uint64_t> forward(16), backward(16);
  for (std::size_t k = 0; k < 16; ++k) forward[k] = root.split(k).next_u64();
  for (std::size_t k = 16; k-- > 0;) backward[k] = root.split(k).next_u64();
  CHECK(forward == backward);
}

TEST_CASE("uniform ranges") {
  RngStream r(3, 3);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform(), v = r.uniform_open();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
  }
}

TEST_CASE("uniform chi-squared over 64 bins") {
  RngStream r(5, 1);
  const int bins = 64, n = 640000;
  std::vector<int> c(bins, 0);
  for (int i = 0; i < n; ++i) ++c[static_cast<int>(r.uniform() * bins)];
  double chi2 = 0;
  const double e = static_cast<double>(n) / bins;
  for (int v : c) chi2 += (v - e) * (v - e) / e;
  boost::math::chi_squared dist(bins - 1);
  CHECK(chi2 < boost::math::quantile(dist, 0.9999));
}

TEST_CASE("normal and exponential moments") {
  RngStream r(11, 2);
  const int n = 400000;
  std::vector<double> z(n), e(n);
  for (int i = 0; i < n; ++i) {
    z[i] = r.normal();
    e[i] = r.exponential();
  }
  CHECK(std::abs(mean(z)) < 5.0 / std::sqrt(n));
  CHECK(std::abs(variance(z) - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(mean(e) - 1.0) < 5.0 / std::sqrt(n));
  const auto ks = ks_one_sample(z, [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); });
  CHECK(ks.p_value > 1e-4);
}

TEST_CASE("poisson matches the reference pmf") {
  for (double lam : {0.3, 4.0, 55.0, 700.0}) {
    CAPTURE(lam);
    RngStream r(13, static_cast<std::uint64_t>(lam * 10));
    const int n = 100000;
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = static_cast<double>(r.poisson(lam));
    CHECK(std::abs(mean(x) - lam) < 5.0 * std::sqrt(lam / n));
    CHECK(std::abs(variance(x) - lam) < 6.0 * lam * std::sqrt(2.0 / n) + 6.0 * std::sqrt(lam / n));
    // P(X <= median) against the exact cdf.
    boost::math::poisson_distribution<> pd(lam);
    const double k = std::floor(lam);
    const double p = boost::math::cdf(pd, k);
    const double p_hat =
        static_cast<double>(std::count_if(x.begin(), x.end(), [&](double v) { return v <= k; })) / n;
    CHECK(std::abs(p_hat - p) < 5.0 * std::sqrt(p * (1 - p) / n));
  }
  RngStream r(1, 1);
  CHECK(r.poisson(0.0) == 0);
}

TEST_CASE("parallel_for results do not depend on thread count") {
  const RngStream root(77, 1);
  auto run = [&](int threads) {
    std::vector<double> out(257);
    parallel_for(out.size(), [&](std::size_t i) {
      RngStream s = root.split(i);
      out[i] = s.normal() + s.uniform();
    }, threads);
    return out;
  };
  CHECK(run(1) == run(4));
}

TEST_CASE("parallel_for rethrows") {
  CHECK_THROWS(parallel_for(10, [](std::size_t i) {
    if (i == 5) throw std::runtime_error("boom");
  }, 3));
}

}
