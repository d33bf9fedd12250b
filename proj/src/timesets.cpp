// SPDX-License-Identifier: Apache-2.0
#include "mdim/timesets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mdim/error.hpp"

namespace mdim {
namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t ipow(int b, int k) {
  u128 v = 1;
  for (int i = 0; i < k; ++i) {
    v *= static_cast<unsigned>(b);
    if (v > (u128{1} << 62)) throw Error(ErrorCode::resource, "time-set level too deep");
  }
  return static_cast<std::uint64_t>(v);
}

}  // namespace

std::uint64_t TimeSet::cell_count_cap() const { return ipow(base, level); }

double TimeSet::cell_width() const { return std::pow(static_cast<double>(base), -level); }

void TimeSet::validate() const {
  require(base >= 2, "time-set base must be >= 2");
  require(level >= 0, "time-set level must be >= 0");
  const std::uint64_t cap = cell_count_cap();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    require(cells[i] < cap, "time-set cell index out of range");
    if (i > 0) require(cells[i] > cells[i - 1], "time-set cells must be strictly increasing");
  }
  if (analytic_dim) {
    require(*analytic_dim >= 0 && *analytic_dim <= 1, "analytic_dim must lie in [0, 1]");
  }
}

TimeSet TimeSet::to_dyadic_cover() const {
  validate();
  if (base == 2) return *this;
  const std::uint64_t bk = cell_count_cap();
  int L = 0;
  while ((std::uint64_t{1} << L) < bk) ++L;
  require(L <= 62, "dyadic cover level too deep");
  const u128 twoL = u128{1} << L;
  TimeSet out;
  out.base = 2;
  out.level = L;
  out.analytic_dim = analytic_dim;
  for (std::uint64_t j : cells) {
    const u128 lo = (u128{j} * twoL) / bk;
    const u128 hi_num = u128{j + 1} * twoL;
    const u128 hi = (hi_num + bk - 1) / bk;  // exclusive
    for (u128 c = lo; c < hi; ++c) {
      const auto v = static_cast<std::uint64_t>(c);
      if (out.cells.empty() || out.cells.back() < v) out.cells.push_back(v);
    }
  }
  return out;
}

bool TimeSet::contains(const TimeSet& other) const {
  validate();
  other.validate();
  if (other.base != base || other.level < level) return false;
  const std::uint64_t ratio = ipow(base, other.level - level);
  for (std::uint64_t c : other.cells) {
    if (!std::binary_search(cells.begin(), cells.end(), c / ratio)) return false;
  }
  return true;
}

TimeSet build_cantor_set(const CantorSpec& spec, std::uint64_t cap) {
  require(spec.base >= 2, "Cantor base must be >= 2");
  require(spec.depth >= 1, "Cantor depth must be >= 1");
  std::set<int> digits(spec.kept_digits.begin(), spec.kept_digits.end());
  require(!digits.empty(), "Cantor set needs at least one kept digit");
  for (int dgt : digits) {
    require(dgt >= 0 && dgt < spec.base, "kept digit outside {0, ..., base-1}");
  }
  const std::size_t m = digits.size();
  const double count = std::pow(static_cast<double>(m), spec.depth);
  if (count > static_cast<double>(cap)) {
    throw Error(ErrorCode::resource, "Cantor set cell count exceeds the configured cap");
  }
  TimeSet s;
  s.base = spec.base;
  s.level = spec.depth;
  s.cell_count_cap();  // overflow guard
  s.cells = {0};
  for (int k = 0; k < spec.depth; ++k) {
    std::vector<std::uint64_t> next;
    next.reserve(s.cells.size() * m);
    for (std::uint64_t c : s.cells) {
      for (int dgt : digits) next.push_back(c * spec.base + dgt);
    }
    s.cells = std::move(next);
  }
  s.analytic_dim = std::log(static_cast<double>(m)) / std::log(static_cast<double>(spec.base));
  return s;
}

TimeSet unit_interval() {
  TimeSet s;
  s.base = 2;
  s.level = 0;
  s.cells = {0};
  s.analytic_dim = 1.0;
  return s;
}

TimeSet single_cell(int base, int level, std::uint64_t j) {
  TimeSet s;
  s.base = base;
  s.level = level;
  s.cells = {j};
  s.analytic_dim = 0.0;
  s.validate();
  return s;
}

std::vector<std::size_t> restrict_to_grid(const TimeSet& set, double dt, double T) {
  set.validate();
  require(dt > 0 && T > 0, "dt and T must be positive");
  const double ratio = T / dt;
  const double n_f = std::round(ratio);
  require(n_f >= 1 && std::abs(ratio - n_f) <= 1e-9 * n_f, "T must be an integer multiple of dt");
  const auto n = static_cast<std::uint64_t>(n_f);
  const std::uint64_t bk = set.cell_count_cap();
  if (n < bk) {
    fail("grid step coarser than the time-set cell width (undersampling)");
  }
  std::vector<std::size_t> out;
  for (std::uint64_t j : set.cells) {
    const u128 lo_num = u128{j} * n;
    const u128 hi_num = u128{j + 1} * n;
    const auto lo = static_cast<std::uint64_t>((lo_num + bk - 1) / bk);
    const auto hi = static_cast<std::uint64_t>(hi_num / bk);
    for (std::uint64_t i = lo; i <= hi; ++i) {
      if (out.empty() || out.back() < i) out.push_back(static_cast<std::size_t>(i));
    }
  }
  return out;
}

PointCloud image_points(const SamplePath& path, std::span<const std::size_t> indices) {
  PointCloud c;
  c.dim = path.dim;
  c.coords.reserve(indices.size() * path.dim);
  for (std::size_t i : indices) {
    require(i < path.size(), "grid index outside the path");
    const auto v = path.at(i);
    c.coords.insert(c.coords.end(), v.begin(), v.end());
  }
  return c;
}

nlohmann::json to_json(const TimeSet& set) {
  nlohmann::json j = {{"base", set.base}, {"level", set.level}, {"cells", set.cells}};
  j["analytic_dim"] = set.analytic_dim ? nlohmann::json(*set.analytic_dim) : nlohmann::json(nullptr);
  return j;
}

TimeSet timeset_from_json(const nlohmann::json& j) {
  TimeSet s;
  s.base = j.value("base", 2);
  s.level = j.at("level").get<int>();
  s.cells = j.at("cells").get<std::vector<std::uint64_t>>();
  if (j.contains("analytic_dim") && !j.at("analytic_dim").is_null()) {
    s.analytic_dim = j.at("analytic_dim").get<double>();
  }
  s.validate();
  return s;
}

}  // namespace mdim
