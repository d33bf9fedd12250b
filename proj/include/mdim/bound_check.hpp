// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mdim {

/// One grid cell of a bound check: an estimate `lhs` with Monte Carlo error
/// `std_err` compared against an upper envelope and/or a lower envelope.
struct BoundCell {
  std::vector<std::pair<std::string, double>> params;
  double lhs = 0.0;
  double rhs = std::numeric_limits<double>::infinity();
  double rhs_lower = -std::numeric_limits<double>::infinity();
  double std_err = 0.0;
  bool violation = false;
  std::string note;

  double param(const std::string& name) const;
};

struct BoundCheckReport {
  std::string check;
  nlohmann::json spec = nlohmann::json::object();
  std::vector<BoundCell> cells;
  std::map<std::string, double> fitted_constants;
  std::vector<std::string> flags;
  /// Set by checks whose verdict is not a per-cell inequality (e.g. a KS test).
  bool forced_failure = false;

  bool has_flag(const std::string& f) const;
  std::size_t violation_count() const;
  bool passed() const { return !forced_failure && violation_count() == 0; }

  nlohmann::json to_json() const;
  /// One row per cell: parameter columns, then lhs,rhs,rhs_lower,stderr,violation.
  std::string to_csv() const;
};

/// Marks cells violating their envelopes with an n_sigma allowance:
/// lhs - n_sigma*se > rhs or lhs + n_sigma*se < rhs_lower.
void mark_violations(BoundCheckReport& report, double n_sigma = 3.0);

}  // namespace mdim
