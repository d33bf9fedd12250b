// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mdim {

/// Philox4x32-10 block: 128-bit counter, 64-bit key.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

/// Order-sensitive 64-bit mix used to derive stream ids, e.g.
/// stream_hash(experiment, replica).
std::uint64_t stream_hash(std::uint64_t a, std::uint64_t b) noexcept;

/// Counter-based random stream. The pair (seed, stream_id) fully determines
/// the output sequence; distinct stream ids give independent sequences, so
/// work can be split across threads in any order.
///
/// A single RngStream value must not be consumed concurrently.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  /// Child stream with id stream_hash(stream_id, k), starting fresh.
  RngStream split(std::uint64_t k) const noexcept {
    return RngStream(seed_, stream_hash(stream_, k));
  }

  std::uint64_t next_u64() noexcept;
  std::uint32_t next_u32() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }
  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Standard normal (Marsaglia polar method, pairs cached).
  double normal() noexcept;
  /// Exp(1).
  double exponential() noexcept;
  /// Poisson(mean); exact for any mean via splitting into chunks.
  std::uint64_t poisson(double mean) noexcept;

  // UniformRandomBitGenerator
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }
  result_type operator()() noexcept { return next_u64(); }

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace mdim
