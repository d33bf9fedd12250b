// SPDX-License-Identifier: Apache-2.0
#include "mdim/rng.hpp"

#include <cmath>

namespace mdim {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo,
                    std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t stream_hash(std::uint64_t a, std::uint64_t b) noexcept {
  return splitmix(splitmix(a) ^ (b + 0x632BE59BD9B4E019ull + (a << 6) + (a >> 2)));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept
    : seed_(seed), stream_(stream_id) {}

void RngStream::refill() noexcept {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(counter_),
      static_cast<std::uint32_t>(counter_ >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  block_ = philox4x32_10(ctr, key);
  ++counter_;
  used_ = 0;
}

std::uint32_t RngStream::next_u32() noexcept {
  if (used_ >= 4) refill();
  return block_[used_++];
}

std::uint64_t RngStream::next_u64() noexcept {
  if (used_ >= 3) {
    if (used_ == 3) {
      // keep whole 64-bit words aligned within a block
      used_ = 4;
    }
    refill();
  }
  const std::uint64_t lo = block_[used_];
  const std::uint64_t hi = block_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RngStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double RngStream::exponential() noexcept { return -std::log(uniform_open()); }

std::uint64_t RngStream::poisson(double mean) noexcept {
  if (!(mean > 0.0)) return 0;
  std::uint64_t total = 0;
  constexpr double kChunk = 16.0;
  while (mean > 0.0) {
    const double m = mean > kChunk ? kChunk : mean;
    mean -= m;
    const double limit = std::exp(-m);
    double prod = uniform_open();
    while (prod > limit) {
      ++total;
      prod *= uniform_open();
    }
  }
  return total;
}

}  // namespace mdim
