// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdim/point_cloud.hpp"

namespace mdim {

struct BoxCountCurve {
  std::vector<double> epsilon;       // strictly decreasing
  std::vector<std::uint64_t> count;  // occupied cells of eps Z^d
  int ambient_dim = 1;

  std::string to_csv() const;
};

/// Occupied half-open cells [j eps, (j+1) eps)^d anchored at the origin.
/// Dyadic ladders share one sorted Morton key array across all scales.
BoxCountCurve box_count(const PointCloud& points, const std::vector<double>& ladder);

enum class EstimateMode { ls_fit, min_slope, max_slope };
const char* to_string(EstimateMode m);

struct DimensionEstimate {
  double slope = 0.0;
  double lower_ci = 0.0;
  double upper_ci = 0.0;
  int i_min = 0;  // window, inclusive ladder indices
  int i_max = 0;
  EstimateMode mode = EstimateMode::ls_fit;

  nlohmann::json to_json() const;
};

/// Either drop a number of coarse/fine ladder points or give explicit indices.
struct WindowPolicy {
  int drop_coarse = 2;
  int drop_fine = 2;
  int i_min = -1;  // explicit window when both >= 0
  int i_max = -1;
};

struct BoxDimensions {
  DimensionEstimate central;  // least squares over the window
  DimensionEstimate lower;    // smallest consecutive slope
  DimensionEstimate upper;    // largest consecutive slope
  bool saturated = false;
};

/// Regression of log count on log(1/eps). Needs >= 4 points in the window.
/// CIs are percentile bootstraps over scale points (500 reps by default,
/// seeded deterministically).
BoxDimensions estimate_box_dimensions(const BoxCountCurve& curve,
                                      const WindowPolicy& window = {},
                                      int bootstrap_reps = 500,
                                      std::uint64_t bootstrap_seed = 0x5eedULL);

/// Dyadic ladder 2^{-3}, 2^{-4}, ... down to max(2^{-12}, 4 (T/n)^H).
std::vector<double> default_ladder(double T, std::uint64_t n_steps, double H);
std::vector<double> dyadic_ladder(int from_exp, int to_exp);

/// max(0, (rho + dimE - 1) / rho).
double hawkes_inverse_image_dimension(double rho, double dimE);

}  // namespace mdim
