// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mdim {

/// Multiset of points in R^dim, row-major.
struct PointCloud {
  int dim = 1;
  std::vector<double> coords;

  std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
  bool empty() const { return coords.empty(); }
  std::span<const double> at(std::size_t i) const {
    return {coords.data() + i * dim, static_cast<std::size_t>(dim)};
  }
};

}  // namespace mdim
