// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "mdim/paths.hpp"
#include "mdim/point_cloud.hpp"

namespace mdim {

/// Finite union of closed b-adic cells [j b^{-k}, (j+1) b^{-k}] in [0, 1].
/// base = 2 is the dyadic case; other bases keep Cantor-type sets exact.
struct TimeSet {
  int base = 2;
  int level = 0;
  std::vector<std::uint64_t> cells;  // sorted, unique, < base^level
  std::optional<double> analytic_dim;

  std::uint64_t cell_count_cap() const;  // base^level
  double cell_width() const;
  void validate() const;
  /// The same set covered by dyadic cells at the coarsest level whose width
  /// does not exceed this set's cell width. Identity for base 2.
  TimeSet to_dyadic_cover() const;
  /// True if every cell of `other` lies inside a cell of this set.
  bool contains(const TimeSet& other) const;
};

struct CantorSpec {
  int base = 3;
  std::vector<int> kept_digits = {0, 2};
  int depth = 1;
};

inline constexpr std::uint64_t kDefaultCellCap = std::uint64_t{1} << 24;

/// Cells whose base-b digits all lie in kept_digits; analytic dim log m / log b.
TimeSet build_cantor_set(const CantorSpec& spec, std::uint64_t cap = kDefaultCellCap);
/// Whole interval [0, 1] (single level-0 cell), analytic dim 1.
TimeSet unit_interval();
/// Single cell j at the given base and level, analytic dim 0.
TimeSet single_cell(int base, int level, std::uint64_t j);

/// Grid indices i in [0, n] (n = T/dt) with i/n in the union of cells.
/// Throws if dt is coarser than the cell width or T/dt is not an integer.
std::vector<std::size_t> restrict_to_grid(const TimeSet& set, double dt, double T);

PointCloud image_points(const SamplePath& path, std::span<const std::size_t> indices);

nlohmann::json to_json(const TimeSet& set);
TimeSet timeset_from_json(const nlohmann::json& j);

}  // namespace mdim
