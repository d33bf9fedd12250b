// SPDX-License-Identifier: Apache-2.0
#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdim/boxdim.hpp"
#include "mdim/covering.hpp"
#include "mdim/process.hpp"
#include "mdim/timesets.hpp"

namespace mdim {

struct NamedSet {
  std::string name;
  TimeSet set;
};

/// One entry of the "checks" array. Parameters are validated when the check
/// runs; the raw block is kept for the report.
struct CheckBlock {
  std::string check;
  std::string name;
  std::optional<ProcessSpec> process;
  nlohmann::json params;
  std::string path;  // location in the config, e.g. "checks[2]"
};

struct CoveringBlock {
  CoveringConfig config;
  std::size_t n_paths = 20;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::optional<ProcessSpec> process;
  /// Expected index; 0 means the process's natural index.
  double H = 0.0;
  std::vector<NamedSet> sets;
  std::size_t n_paths = 100;
  std::size_t n_steps = 1000000;
  double T = 1.0;
  Vec x0;
  std::vector<double> ladder;  // empty: default ladder
  WindowPolicy window;
  double tolerance = 0.15;
  int bootstrap_reps = 500;
  std::optional<std::uint64_t> seed;
  std::vector<CheckBlock> checks;
  std::optional<CoveringBlock> covering;
  std::string output_dir = "out";
  /// The parsed document, kept for hashing and the report.
  nlohmann::json raw;

  double effective_H() const;
  /// Canonical form used for the manifest hash (includes CLI overrides).
  nlohmann::json canonical() const;
  std::string hash() const;
};

/// Parses a JSON config (comments allowed). Throws Error(config) with the
/// line/column of syntax errors or the field path of schema errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Numbers, or {"pow2": [from, to]} for 2^from, ..., 2^to.
std::vector<double> parse_number_list(const nlohmann::json& j, const std::string& where);

/// Names accepted in "check" fields.
const std::vector<std::string>& known_checks();

/// 64-bit FNV-1a of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

}  // namespace mdim
