// SPDX-License-Identifier: Apache-2.0
#include "mdim/bound_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdim/error.hpp"

namespace mdim {
namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

double BoundCell::param(const std::string& name) const {
  for (const auto& [k, v] : params) {
    if (k == name) return v;
  }
  fail("bound cell has no parameter '" + name + "'");
}

bool BoundCheckReport::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

std::size_t BoundCheckReport::violation_count() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const BoundCell& c) { return c.violation; }));
}

nlohmann::json BoundCheckReport::to_json() const {
  nlohmann::json grid = nlohmann::json::array();
  nlohmann::json lhs = nlohmann::json::array();
  nlohmann::json rhs = nlohmann::json::array();
  nlohmann::json lower = nlohmann::json::array();
  nlohmann::json se = nlohmann::json::array();
  nlohmann::json viol = nlohmann::json::array();
  bool any_lower = false;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    nlohmann::json p = nlohmann::json::object();
    for (const auto& [k, v] : c.params) p[k] = num(v);
    grid.push_back(p);
    lhs.push_back(num(c.lhs));
    rhs.push_back(num(c.rhs));
    lower.push_back(num(c.rhs_lower));
    se.push_back(num(c.std_err));
    if (std::isfinite(c.rhs_lower)) any_lower = true;
    if (c.violation) viol.push_back(i);
  }
  nlohmann::json fitted = nlohmann::json::object();
  for (const auto& [k, v] : fitted_constants) fitted[k] = num(v);
  nlohmann::json out = {{"check", check},       {"spec", spec},
                        {"grid", grid},         {"lhs", lhs},
                        {"rhs", rhs},           {"stderr", se},
                        {"violations", viol},   {"fitted_constants", fitted},
                        {"flags", flags},       {"passed", passed()}};
  if (any_lower) out["rhs_lower"] = lower;
  return out;
}

std::string BoundCheckReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  if (cells.empty()) {
    os << "lhs,rhs,rhs_lower,stderr,violation\n";
    return os.str();
  }
  for (const auto& [k, v] : cells.front().params) os << k << ',';
  os << "lhs,rhs,rhs_lower,stderr,violation\n";
  for (const auto& c : cells) {
    for (const auto& [k, v] : c.params) os << v << ',';
    os << c.lhs << ',' << c.rhs << ',' << c.rhs_lower << ',' << c.std_err << ','
       << (c.violation ? 1 : 0) << '\n';
  }
  return os.str();
}

void mark_violations(BoundCheckReport& report, double n_sigma) {
  for (auto& c : report.cells) {
    const double slack = n_sigma * c.std_err;
    c.violation = (c.lhs - slack > c.rhs) || (c.lhs + slack < c.rhs_lower);
  }
}

}  // namespace mdim
