// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mdim/bound_check.hpp"
#include "mdim/config.hpp"
#include "mdim/error.hpp"
#include "mdim/runner.hpp"

using namespace mdim;
using nlohmann::json;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::config);
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& sub) {
  return s.find(sub) != std::string::npos;
}

const char* kSmall = R"({
  // planar Brownian motion on a coarse grid
  "name": "small",
  "process": {"type": "brownian", "dim": 2},
  "sets": [{"name": "unit", "type": "interval"}],
  "n_paths": 4,
  "n_steps": 4096,
  "ladder": {"pow2": [-1, -8]},
  "bootstrap_reps": 50,
  "seed": 17,
  "checks": [
    {"check": "a1", "name": "tails", "gamma": [0.4], "t": [0.0625, 0.015625, 0.00390625],
     "n_mc": 300, "sup_steps": 32}
  ]
})";

json small_json() { return json::parse(kSmall, nullptr, true, true); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("syntax errors report line and column") {
    const std::string msg = error_of("{\n  \"name\": \"x\",\n  \"n_paths\": ,\n}");
    CHECK(contains(msg, "line 3"));
    CHECK(contains(msg, "column"));
  }

  TEST_CASE("schema errors name the field") {
    CHECK(contains(error_of(R"({"n_pths": 3})"), "'n_pths'"));
    CHECK(contains(error_of(R"({"n_pths": 3})"), "unknown key"));
    CHECK(contains(error_of(R"({"n_paths": "many"})"), "'n_paths'"));
    CHECK(contains(error_of(R"({"sets": [{"name": "a", "type": "blob"}]})"), "'sets[0].type'"));
    CHECK(contains(error_of(R"({"ladder": [0.1, 0.2]})"), "strictly decreasing"));
    CHECK(contains(error_of(R"({"checks": [{"check": "nope"}]})"), "unknown check 'nope'"));
    CHECK(contains(error_of(R"({"checks": [{"check": "nope"}]})"), "valid:"));
    CHECK(contains(error_of(R"({"process": {"type": "brownian", "dim": 2}, "x0": [0]})"), "'x0'"));
    CHECK(contains(error_of(R"({"T": -1})"), "'T'"));
  }

  TEST_CASE("ladders, defaults and names") {
    const auto c = parse_config(kSmall);
    CHECK(c.name == "small");
    REQUIRE(c.ladder.size() == 8);
    CHECK(c.ladder.front() == 0.5);
    CHECK(c.ladder.back() == 0.00390625);
    CHECK(c.seed.value() == 17);
    CHECK(c.effective_H() == 0.5);
    CHECK(c.checks.size() == 1);
    CHECK(c.checks[0].path == "checks[0]");
    const auto d = parse_config("{}");
    CHECK(d.n_paths == 100);
    CHECK(d.tolerance == 0.15);
    CHECK_FALSE(d.seed.has_value());
    const auto& names = known_checks();
    CHECK(names.size() == 9);
    CHECK(parse_number_list(json::parse(R"({"pow2": [0, -3]})"), "x") ==
          std::vector<double>{1, 0.5, 0.25, 0.125});
  }

  TEST_CASE("hash changes exactly when the config changes") {
    const auto a = parse_config(kSmall);
    const auto b = parse_config(kSmall);
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    auto j = small_json();
    j["n_paths"] = 5;
    CHECK(parse_config(j.dump()).hash() != a.hash());
    auto c = parse_config(kSmall);
    c.seed = 18;
    CHECK(c.hash() != a.hash());
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  }

  TEST_CASE("missing files are IO errors") {
    try {
      load_config("/nonexistent/cfg.json");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::io);
    }
  }
}

TEST_SUITE("bound_check") {
  TEST_CASE("violations use the n_sigma allowance") {
    BoundCheckReport r;
    BoundCell c;
    c.params = {{"t", 0.5}};
    c.lhs = 1.0;
    c.rhs = 0.8;
    c.std_err = 0.1;
    r.cells.push_back(c);
    mark_violations(r, 3.0);
    CHECK(r.passed());
    mark_violations(r, 1.0);
    CHECK(r.violation_count() == 1);
    c.rhs = 10;
    c.rhs_lower = 2.0;
    r.cells = {c};
    mark_violations(r, 3.0);
    CHECK(r.violation_count() == 1);
    r.cells[0].violation = false;
    r.forced_failure = true;
    CHECK_FALSE(r.passed());
  }

  TEST_CASE("csv and json layout") {
    BoundCheckReport r;
    r.check = "demo";
    r.flags = {"f"};
    r.fitted_constants["C"] = 2.0;
    BoundCell c;
    c.params = {{"t", 0.5}, {"r", 0.25}};
    c.lhs = 0.1;
    c.rhs = 0.2;
    r.cells.push_back(c);
    CHECK(r.cells[0].param("r") == 0.25);
    CHECK(r.to_csv().rfind("t,r,lhs,rhs,rhs_lower,stderr,violation\n", 0) == 0);
    CHECK(BoundCheckReport{}.to_csv() == "lhs,rhs,rhs_lower,stderr,violation\n");
    const json j = r.to_json();
    CHECK(j["check"] == "demo");
    CHECK(j["violations"].empty());
    CHECK(j["fitted_constants"]["C"] == 2.0);
    CHECK(r.has_flag("f"));
  }
}

TEST_SUITE("runner") {
  TEST_CASE("empty check list passes") {
    auto j = small_json();
    j["checks"] = json::array();
    RunRequest req;
    req.dimensions = false;
    const auto out = run_experiment(parse_config(j.dump()), req);
    CHECK(out.passed);
    CHECK(out.report["checks"].empty());
    CHECK(out.report["schema"] == "v1");
  }

  TEST_CASE("unknown check filter and missing seed are config errors") {
    const auto c = parse_config(kSmall);
    try {
      run_checks(c, {"bogus"});
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      CHECK(contains(e.what(), "valid:"));
    }
    auto j = small_json();
    j.erase("seed");
    CHECK_THROWS_AS(run_checks(parse_config(j.dump())), Error);
    // Filtering to an absent check runs nothing.
    CHECK(run_checks(c, {"pruitt"}).empty());
  }

  TEST_CASE("bad check parameters name the block") {
    auto j = small_json();
    j["checks"] = json::parse(R"([{"check": "a1", "gamma": [0.7], "t": [0.1], "n_mc": 200}])");
    try {
      run_checks(parse_config(j.dump()));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config);
      CHECK(contains(e.what(), "checks[0]"));
    }
    j["checks"] = json::parse(R"([{"check": "a1", "gamma": [0.4], "t": [0.1], "typo": 1}])");
    CHECK_THROWS_AS(run_checks(parse_config(j.dump())), Error);
  }

  TEST_CASE("runs are deterministic and reports are complete") {
    const auto c = parse_config(kSmall);
    RunRequest req;
    req.threads = 1;
    const auto a = run_experiment(c, req);
    req.threads = 3;
    const auto b = run_experiment(c, req);
    CHECK(a.report.dump() == b.report.dump());
    CHECK(a.files == b.files);
    const auto& e = a.report["experiment"];
    CHECK(e["regime"]["holds"] == true);
    CHECK(e["sets"][0]["predicted"] == doctest::Approx(2.0));
    CHECK(e["sets"][0]["per_path"].size() == 4);
    CHECK(a.files.count("curves/unit.csv") == 1);
    CHECK(a.files.count("checks/tails.csv") == 1);
    CHECK(a.files.at("curves/unit.csv").rfind("path,epsilon,count\n", 0) == 0);

    const auto dir = std::filesystem::temp_directory_path() / "mdim_runner_test";
    std::filesystem::remove_all(dir);
    write_report(a, c, dir.string());
    const json rep = json::parse(slurp(dir / "report.json"));
    const json man = json::parse(slurp(dir / "manifest.json"));
    CHECK(rep.contains("timestamp"));
    json stripped = rep;
    stripped.erase("timestamp");
    CHECK(stripped == a.report);
    CHECK(man["config_hash"] == c.hash());
    CHECK(man["seed"] == 17);
    CHECK(man["files"].size() == 1 + a.files.size());
    CHECK(std::filesystem::exists(dir / "checks" / "tails.csv"));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("regime annotation below H d = 1") {
    auto j = small_json();
    j["process"] = json::parse(R"({"type": "stable", "alpha": 1.5, "dim": 1})");
    j["checks"] = json::array();
    RunRequest req;
    req.checks = false;
    const auto out = run_experiment(parse_config(j.dump()), req);
    const auto& r = out.report["experiment"]["regime"];
    CHECK(r["holds"] == false);
    CHECK(r["Hd"] == doctest::Approx(1 / 1.5));
    CHECK(r.contains("note"));
  }

  TEST_CASE("a single cell of width dt has dimension 0") {
    auto j = small_json();
    j["sets"] = json::parse(R"([{"name": "cell", "type": "cell", "level": 12, "index": 5}])");
    j["ladder"] = json::parse(R"({"pow2": [-4, -16]})");
    j["checks"] = json::array();
    RunRequest req;
    req.checks = false;
    const auto out = run_experiment(parse_config(j.dump()), req);
    const auto& s = out.report["experiment"]["sets"][0];
    CHECK(s["predicted"] == 0.0);
    CHECK(s["measured"].get<double>() <= 0.1);
    CHECK(out.passed);
  }

  TEST_CASE("stable-like processes fall back to full paths") {
    auto j = small_json();
    j["process"] = json::parse(
        R"({"type": "stable_like", "alpha": 1.5, "dim": 2, "kernel": {"form": "constant"}})");
    j["sets"] = json::parse(R"([{"name": "c", "type": "cantor", "depth": 3}])");
    j["checks"] = json::array();
    RunRequest req;
    req.checks = false;
    const auto out = run_experiment(parse_config(j.dump()), req);
    CHECK(std::isfinite(out.report["experiment"]["sets"][0]["measured"].get<double>()));
  }

  TEST_CASE("negative control block reports violations") {
    auto j = small_json();
    j["checks"] = json::parse(R"([
      {"check": "a3", "name": "wrong_H", "H": 1.0, "t": [0.0009765625, 0.015625, 0.25, 4],
       "r": [0.00390625, 0.03125, 0.25], "n_mc": 3000},
      {"check": "selfsim", "name": "bad_scale", "H": 1.0, "n_mc": 2000}
    ])");
    RunRequest req;
    req.dimensions = false;
    const auto out = run_experiment(parse_config(j.dump()), req);
    CHECK_FALSE(out.passed);
    CHECK(out.report["checks"][0]["passed"] == false);
    CHECK(out.report["checks"][1]["passed"] == false);
    CHECK(out.report["passed"] == false);
  }

  TEST_CASE("simulate and cover outputs") {
    auto j = small_json();
    j["covering"] = json::parse(R"({"kind": "image", "levels": [3, 4], "n_steps": 2048, "n_paths": 3})");
    const auto c = parse_config(j.dump());
    const auto s = run_simulate(c, true);
    CHECK(s.report["command"] == "simulate");
    CHECK(s.files.count("simulate.csv") == 1);
    CHECK(s.files.count("paths/path_3.bin") == 1);
    CHECK(s.files.at("simulate.csv").rfind("path,x0,x1,sup_displacement\n", 0) == 0);
    const auto cv = run_cover(c);
    CHECK(cv.report["covering"]["rows"].size() == 2);
    CHECK(cv.files.count("cover.csv") == 1);
    auto k = small_json();
    CHECK_THROWS_AS(run_cover(parse_config(k.dump())), Error);
  }
}
