// SPDX-License-Identifier: Apache-2.0
// Command-line front end. Talks to the library through the C API only.
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdim/mdim.h"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitViolations = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_for(mdim_status s) {
  if (s == MDIM_OK) return kExitPass;
  std::cerr << "mdim: " << mdim_last_error() << "\n";
  return (s == MDIM_E_CONFIG || s == MDIM_E_INVALID) ? kExitConfig : kExitRuntime;
}

void print_summary(const nlohmann::json& r) {
  if (r.contains("experiment") && r["experiment"].is_object()) {
    const auto& e = r["experiment"];
    if (!e["regime"]["holds"].get<bool>())
      std::cout << "warning: H*d = " << e["regime"]["Hd"].get<double>()
                << " < 1, outside the regime of the dimension formula\n";
    for (const auto& s : e["sets"]) {
      std::printf("set %-16s predicted %.4f measured %.4f  ci [%.4f, %.4f]  %s\n",
                  s["name"].get<std::string>().c_str(), s["predicted"].get<double>(),
                  s["measured"].get<double>(), s["ci"][0].get<double>(),
                  s["ci"][1].get<double>(), s["pass"].get<bool>() ? "PASS" : "FAIL");
    }
  }
  if (r.contains("checks")) {
    for (const auto& c : r["checks"]) {
      std::size_t violations = 0;
      for (const auto& rep : c["reports"]) violations += rep["violations"].size();
      std::printf("check %-14s %-10s violations %zu  %s\n", c["name"].get<std::string>().c_str(),
                  c["check"].get<std::string>().c_str(), violations,
                  c["passed"].get<bool>() ? "PASS" : "FAIL");
    }
  }
  if (r.contains("covering")) {
    for (const auto& row : r["covering"]["rows"])
      std::printf("level %2d  max_count %4llu  q95 %.1f\n", row["n"].get<int>(),
                  static_cast<unsigned long long>(row["max_count"].get<std::uint64_t>()),
                  row["q95"].get<double>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification lab for dimensions of Markov process images"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  bool dump_paths = false;
  auto* seed_opt = app.add_option("--seed", seed, "Random seed (overrides the config)");
  app.add_option("--config", config_path, "Experiment config (JSON)")->required();
  app.add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  app.add_flag("--dump-paths", dump_paths, "Write binary path dumps (simulate)");

  auto* sim = app.add_subcommand("simulate", "Simulate paths and write summaries");
  auto* dim = app.add_subcommand("dim", "Run the dimension experiment only");
  auto* check = app.add_subcommand("check", "Run condition checks");
  auto* cover = app.add_subcommand("cover", "Run covering statistics");
  auto* exp = app.add_subcommand("experiment", "Dimension experiment plus checks");
  for (auto* s : {sim, dim, check, cover, exp}) s->fallthrough();
  const std::vector<std::string> names = {"a1",     "a2",      "a3",     "mclass", "ottaviani",
                                          "pruitt", "hitting", "moment", "selfsim"};
  std::vector<CLI::Option*> flag_opts;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const std::string desc = "Run only the " + names[k] + " blocks (combinable)";
    flag_opts.push_back(check->add_flag("--" + names[k], desc));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  mdim_set_threads(threads);
  mdim_config* cfg = nullptr;
  if (int rc = exit_for(mdim_config_load(config_path.c_str(), &cfg)); rc != 0) return rc;
  if (seed_opt->count() > 0) mdim_config_set_seed(cfg, seed);
  if (!out_dir.empty()) mdim_config_set_output_dir(cfg, out_dir.c_str());

  std::string only;
  for (std::size_t k = 0; k < names.size(); ++k)
    if (flag_opts[k]->count() > 0) only += (only.empty() ? "" : ",") + names[k];

  mdim_result* res = nullptr;
  mdim_status st = MDIM_OK;
  if (sim->parsed()) {
    st = mdim_run_simulate(cfg, dump_paths ? 1 : 0, &res);
  } else if (dim->parsed()) {
    st = mdim_run_experiment(cfg, MDIM_RUN_DIMENSIONS, nullptr, &res);
  } else if (check->parsed()) {
    st = mdim_run_experiment(cfg, MDIM_RUN_CHECKS, only.empty() ? nullptr : only.c_str(), &res);
  } else if (cover->parsed()) {
    st = mdim_run_cover(cfg, &res);
  } else {
    st = mdim_run_experiment(cfg, MDIM_RUN_DIMENSIONS | MDIM_RUN_CHECKS, nullptr, &res);
  }
  int rc = exit_for(st);
  if (rc == 0) {
    const std::string dir = mdim_config_output_dir(cfg);
    rc = exit_for(mdim_result_write(res, cfg, dir.c_str()));
    if (rc == 0) {
      print_summary(nlohmann::json::parse(mdim_result_json(res)));
      std::cout << "report written to " << dir << "/report.json\n";
      rc = mdim_result_passed(res) ? kExitPass : kExitViolations;
    }
  }
  mdim_result_free(res);
  mdim_config_free(cfg);
  return rc;
}
