// SPDX-License-Identifier: Apache-2.0
#pragma once
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mdim/paths.hpp"
#include "mdim/process.hpp"
#include "mdim/rng.hpp"

namespace mdim {

/// When enabled, every cover count re-checks that its cover is valid and
/// throws an internal Error otherwise. Off by default.
void set_cover_self_check(bool on);
bool cover_self_check();

struct ImageCoverConfig {
  double t_n = 0.0;
  double theta_n = 0.0;
  std::vector<std::pair<double, double>> intervals;
  void validate() const;
  /// 2^n intervals of length 2^{-n} in [0, 1] and theta = 2^{-n gamma}.
  static ImageCoverConfig dyadic(int n, double gamma);
};

struct PreimageCoverConfig {
  /// Ball diameter; balls have radius r_n / 2.
  double r_n = 0.0;
  double t_n = 0.0;
  double T = 1.0;
  /// Balls are inscribed in the dyadic cubes of side r_n in [-m, m]^d.
  int m = 1;
  void validate() const;
  /// r_n = 2^{-n}, t_n = 2^{-n gamma}.
  static PreimageCoverConfig dyadic(int n, double gamma, double T = 1.0, int m = 1);
  /// (m 2^{n+1})^d for r_n = 2^{-n}.
  double family_size(int dim) const;
};

/// Stopping-time chain tau_0 = first grid time >= a, tau_j = first grid time
/// after tau_{j-1} with |X - X(tau_{j-1})| > theta. Returns the number of
/// chain times in [a, b]; the closed theta-balls around those points cover
/// X at every grid time in [a, b]. `centers` receives the grid indices.
std::size_t image_cover_count(const SamplePath& path, double a, double b, double theta,
                              std::vector<std::size_t>* centers = nullptr);

std::size_t max_image_cover_count(const SamplePath& path, const ImageCoverConfig& config);

/// tau_0 = first grid time with X in the closed ball B(z, radius), tau_k =
/// first such grid time >= tau_{k-1} + t_n. Returns the number of tau_k < T;
/// the intervals [tau_k, tau_k + t_n) cover every grid time in [0, T) spent
/// in the ball.
std::size_t preimage_cover_count(const SamplePath& path, std::span<const double> z,
                                 double radius, double t_n, double T,
                                 std::vector<std::size_t>* starts = nullptr);

/// Preimage counts for every ball of the dyadic family that the path visits
/// (the rest have count 0).
std::vector<std::size_t> preimage_family_counts(const SamplePath& path,
                                                const PreimageCoverConfig& config);

enum class CoverKind { image, preimage };

struct CoveringConfig {
  CoverKind kind = CoverKind::image;
  std::vector<int> levels;
  double gamma = 0.45;
  double T = 1.0;
  std::size_t n_steps = std::size_t{1} << 20;
  int m = 1;
  Vec x0;
  void validate(int dim) const;
};

struct CoverRow {
  int n = 0;
  double family_size = 0.0;
  std::size_t max_count = 0;
  double q50 = 0.0;
  double q95 = 0.0;
  /// Slope of log P(count > k) against k; NaN when fewer than two points.
  double tail_slope = 0.0;
  double tail_slope_se = 0.0;
  /// Max count per path.
  std::vector<std::size_t> path_max;
};

struct CoverSummary {
  CoverKind kind = CoverKind::image;
  std::vector<CoverRow> rows;
  nlohmann::json to_json() const;
  /// n,family_size,max_count,q50,q95,tail_slope
  std::string to_csv() const;
};

/// Simulates n_paths paths (path p from rng.split(p)) and tabulates the
/// cover counts for each level.
CoverSummary covering_statistics(const ProcessSpec& spec, const CoveringConfig& config,
                                 std::size_t n_paths, RngStream& rng, int threads = 0);

/// Log-linear tail slope of the counts: fit of log P(count > k) on k over
/// the k with positive empirical tail.
std::pair<double, double> tail_slope(std::span<const std::size_t> counts);

}  // namespace mdim
