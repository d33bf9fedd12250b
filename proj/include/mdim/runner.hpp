// SPDX-License-Identifier: Apache-2.0
#pragma once
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdim/bound_check.hpp"
#include "mdim/boxdim.hpp"
#include "mdim/config.hpp"
#include "mdim/covering.hpp"
#include "mdim/stats.hpp"

namespace mdim {

struct SetResult {
  std::string name;
  double analytic_dim = 0.0;
  double predicted = 0.0;
  double measured = 0.0;  // median over paths
  double q25 = 0.0;
  double q75 = 0.0;
  Interval ci;            // bootstrap CI of the median
  std::vector<double> per_path;
  std::size_t saturated_paths = 0;
  std::size_t grid_points = 0;
  bool pass = false;
  std::vector<BoxCountCurve> curves;
};

struct DimensionReport {
  std::string name;
  nlohmann::json process;
  double H = 0.0;
  int dim = 0;
  double tolerance = 0.15;
  std::vector<double> ladder;
  std::vector<SetResult> sets;
  bool passed() const;
  /// Whether 1 <= H d, the regime the dimension formula assumes.
  bool regime_holds() const { return H * dim >= 1.0; }
  nlohmann::json to_json() const;
};

/// Per path, per set: image cloud over E intersected with the grid, box
/// counts, slope over the window. Reports the median slope per set.
DimensionReport run_dimension_experiment(const ExperimentConfig& config, int threads = 0);

/// Results of one config check block (one report per (eps, zeta) pair for
/// ball bounds, one otherwise).
struct CheckRun {
  std::string name;
  std::string check;
  std::vector<BoundCheckReport> reports;
  bool passed() const;
  nlohmann::json to_json() const;
};

/// Runs the config's check blocks, optionally restricted to the named checks.
/// Unknown names in `only` raise a config Error listing the valid names.
std::vector<CheckRun> run_checks(const ExperimentConfig& config,
                                 const std::vector<std::string>& only = {},
                                 int threads = 0);

CoverSummary run_covering(const ExperimentConfig& config, int threads = 0);

/// A report document plus the artifact files that accompany it.
struct RunOutput {
  std::string command;
  nlohmann::json report = nlohmann::json::object();
  /// Relative path -> contents.
  std::map<std::string, std::string> files;
  bool passed = true;
};

struct RunRequest {
  bool dimensions = true;
  bool checks = true;
  std::vector<std::string> only_checks;
  int threads = 0;
};

RunOutput run_experiment(const ExperimentConfig& config, const RunRequest& request = {});
RunOutput run_simulate(const ExperimentConfig& config, bool dump_paths, int threads = 0);
RunOutput run_cover(const ExperimentConfig& config, int threads = 0);

/// Writes report.json (schema "v1", with a timestamp), the artifact files and
/// manifest.json (config hash, seed, file list) under dir.
void write_report(const RunOutput& output, const ExperimentConfig& config,
                  const std::string& dir);

}  // namespace mdim
