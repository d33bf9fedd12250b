// SPDX-License-Identifier: Apache-2.0
#include "mdim/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mdim/error.hpp"

namespace mdim {
namespace {

using nlohmann::json;

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::config, "config field '" + where + "': " + what);
}

void check_keys(const json& j, const std::string& where,
                const std::vector<std::string>& allowed) {
  if (!j.is_object()) config_fail(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      config_fail(where.empty() ? k : where + "." + k, "unknown key (valid: " + list + ")");
    }
  }
}

double get_number(const json& j, const std::string& key, const std::string& where,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) config_fail(join(where, key), "expected a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key, const std::string& where,
                        std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  config_fail(join(where, key), "expected a non-negative integer");
}

Vec get_vec(const json& v, const std::string& where) {
  if (!v.is_array()) config_fail(where, "expected an array of numbers");
  Vec out;
  for (const auto& e : v) {
    if (!e.is_number()) config_fail(where, "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

ProcessSpec parse_process(const json& j, const std::string& where) {
  try {
    ProcessSpec p = process_from_json(j);
    p.validate();
    return p;
  } catch (const Error& e) {
    config_fail(where, e.what());
  } catch (const json::exception& e) {
    config_fail(where, e.what());
  }
}

NamedSet parse_set(const json& j, const std::string& where, std::size_t index) {
  if (!j.is_object()) config_fail(where, "expected an object");
  const std::string type = j.value("type", std::string("interval"));
  NamedSet ns;
  ns.name = j.value("name", type + std::to_string(index));
  for (char c : ns.name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'))
      config_fail(where + ".name", "use letters, digits, '_' or '-'");
  try {
    if (type == "interval") {
      check_keys(j, where, {"name", "type"});
      ns.set = unit_interval();
    } else if (type == "cantor") {
      check_keys(j, where, {"name", "type", "base", "keep", "depth"});
      CantorSpec c;
      c.base = static_cast<int>(get_count(j, "base", where, 3));
      c.depth = static_cast<int>(get_count(j, "depth", where, 1));
      if (j.contains("keep")) {
        c.kept_digits.clear();
        for (double v : get_vec(j.at("keep"), where + ".keep"))
          c.kept_digits.push_back(static_cast<int>(v));
      }
      ns.set = build_cantor_set(c);
    } else if (type == "cell") {
      check_keys(j, where, {"name", "type", "base", "level", "index"});
      ns.set = single_cell(static_cast<int>(get_count(j, "base", where, 2)),
                           static_cast<int>(get_count(j, "level", where, 0)),
                           get_count(j, "index", where, 0));
    } else if (type == "cells") {
      check_keys(j, where, {"name", "type", "base", "level", "cells", "analytic_dim"});
      json t = j;
      t.erase("name");
      t.erase("type");
      ns.set = timeset_from_json(t);
    } else {
      config_fail(where + ".type", "unknown set type '" + type +
                                       "' (valid: interval, cantor, cell, cells)");
    }
    ns.set.validate();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config) throw;
    config_fail(where, e.what());
  } catch (const json::exception& e) {
    config_fail(where, e.what());
  }
  return ns;
}

std::pair<int, int> line_col(const std::string& text, std::size_t byte) {
  int line = 1, col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {"a1",      "a2",     "a3",      "mclass",
                                                 "ottaviani", "pruitt", "hitting", "moment",
                                                 "selfsim"};
  return names;
}

std::vector<double> parse_number_list(const json& j, const std::string& where) {
  if (j.is_object()) {
    check_keys(j, where, {"pow2"});
    const Vec e = get_vec(j.at("pow2"), where + ".pow2");
    if (e.size() != 2 || e[0] != std::floor(e[0]) || e[1] != std::floor(e[1]))
      config_fail(where + ".pow2", "expected two integer exponents");
    std::vector<double> out;
    const int a = static_cast<int>(e[0]), b = static_cast<int>(e[1]);
    const int step = a <= b ? 1 : -1;
    for (int k = a;; k += step) {
      out.push_back(std::ldexp(1.0, k));
      if (k == b) break;
    }
    return out;
  }
  if (j.is_number()) return {j.get<double>()};
  return get_vec(j, where);
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double ExperimentConfig::effective_H() const {
  if (H > 0) return H;
  return process ? process->natural_H() : 0.0;
}

nlohmann::json ExperimentConfig::canonical() const {
  json c = raw;
  if (seed) c["seed"] = *seed;
  c["output_dir"] = output_dir;
  return c;
}

std::string ExperimentConfig::hash() const { return fnv1a_hex(canonical().dump()); }

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte);
    throw Error(ErrorCode::config, "config syntax error at line " + std::to_string(line) +
                                       ", column " + std::to_string(col) + ": " + e.what());
  }
  check_keys(j, "",
             {"name", "process", "H", "sets", "n_paths", "n_steps", "T", "x0", "ladder",
              "window", "tolerance", "bootstrap_reps", "seed", "checks", "covering",
              "output_dir"});
  ExperimentConfig c;
  c.raw = j;
  if (j.contains("name")) {
    if (!j["name"].is_string()) config_fail("name", "expected a string");
    c.name = j["name"].get<std::string>();
  }
  if (j.contains("process")) c.process = parse_process(j["process"], "process");
  c.H = get_number(j, "H", "", 0.0);
  if (c.H < 0) config_fail("H", "must be positive");
  c.n_paths = get_count(j, "n_paths", "", c.n_paths);
  c.n_steps = get_count(j, "n_steps", "", c.n_steps);
  if (c.n_paths < 1) config_fail("n_paths", "must be at least 1");
  if (c.n_steps < 1) config_fail("n_steps", "must be at least 1");
  c.T = get_number(j, "T", "", 1.0);
  if (!(c.T > 0)) config_fail("T", "must be positive");
  if (j.contains("x0")) c.x0 = get_vec(j["x0"], "x0");
  if (c.process && !c.x0.empty() && static_cast<int>(c.x0.size()) != c.process->dim())
    config_fail("x0", "dimension does not match the process");
  if (j.contains("sets")) {
    if (!j["sets"].is_array()) config_fail("sets", "expected an array");
    std::set<std::string> names;
    for (std::size_t k = 0; k < j["sets"].size(); ++k) {
      const std::string where = "sets[" + std::to_string(k) + "]";
      c.sets.push_back(parse_set(j["sets"][k], where, k));
      if (!names.insert(c.sets.back().name).second)
        config_fail(where + ".name", "duplicate set name");
    }
  }
  if (j.contains("ladder")) {
    c.ladder = parse_number_list(j["ladder"], "ladder");
    for (std::size_t k = 0; k < c.ladder.size(); ++k) {
      if (!(c.ladder[k] > 0)) config_fail("ladder", "scales must be positive");
      if (k > 0 && !(c.ladder[k] < c.ladder[k - 1]))
        config_fail("ladder", "scales must be strictly decreasing");
    }
  }
  if (j.contains("window")) {
    const auto& w = j["window"];
    check_keys(w, "window", {"drop_coarse", "drop_fine", "i_min", "i_max"});
    c.window.drop_coarse = static_cast<int>(get_count(w, "drop_coarse", "window", 2));
    c.window.drop_fine = static_cast<int>(get_count(w, "drop_fine", "window", 2));
    if (w.contains("i_min") != w.contains("i_max"))
      config_fail("window", "give both i_min and i_max");
    if (w.contains("i_min")) {
      c.window.i_min = static_cast<int>(get_count(w, "i_min", "window", 0));
      c.window.i_max = static_cast<int>(get_count(w, "i_max", "window", 0));
    }
  }
  c.tolerance = get_number(j, "tolerance", "", c.tolerance);
  if (!(c.tolerance > 0)) config_fail("tolerance", "must be positive");
  c.bootstrap_reps = static_cast<int>(get_count(j, "bootstrap_reps", "", 500));
  if (j.contains("seed")) c.seed = get_count(j, "seed", "", 0);
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) config_fail("output_dir", "expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("checks")) {
    if (!j["checks"].is_array()) config_fail("checks", "expected an array");
    for (std::size_t k = 0; k < j["checks"].size(); ++k) {
      const std::string where = "checks[" + std::to_string(k) + "]";
      const auto& b = j["checks"][k];
      if (!b.is_object()) config_fail(where, "expected an object");
      if (!b.contains("check") || !b["check"].is_string())
        config_fail(where + ".check", "missing check name");
      CheckBlock blk;
      blk.check = b["check"].get<std::string>();
      const auto& names = known_checks();
      if (std::find(names.begin(), names.end(), blk.check) == names.end()) {
        std::string list;
        for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
        config_fail(where + ".check", "unknown check '" + blk.check + "' (valid: " + list + ")");
      }
      blk.name = b.value("name", blk.check + std::to_string(k));
      blk.path = where;
      if (b.contains("process")) blk.process = parse_process(b["process"], where + ".process");
      blk.params = b;
      blk.params.erase("check");
      blk.params.erase("name");
      blk.params.erase("process");
      c.checks.push_back(std::move(blk));
    }
  }
  if (j.contains("covering")) {
    const auto& v = j["covering"];
    check_keys(v, "covering", {"kind", "levels", "gamma", "T", "n_steps", "m", "n_paths"});
    CoveringBlock cb;
    const std::string kind = v.value("kind", std::string("image"));
    if (kind == "image")
      cb.config.kind = CoverKind::image;
    else if (kind == "preimage")
      cb.config.kind = CoverKind::preimage;
    else
      config_fail("covering.kind", "expected 'image' or 'preimage'");
    if (v.contains("levels"))
      for (double n : get_vec(v["levels"], "covering.levels"))
        cb.config.levels.push_back(static_cast<int>(n));
    cb.config.gamma = get_number(v, "gamma", "covering", cb.config.gamma);
    cb.config.T = get_number(v, "T", "covering", cb.config.T);
    cb.config.n_steps = get_count(v, "n_steps", "covering", cb.config.n_steps);
    cb.config.m = static_cast<int>(get_count(v, "m", "covering", 1));
    cb.n_paths = get_count(v, "n_paths", "covering", cb.n_paths);
    cb.config.x0 = c.x0;
    try {
      cb.config.validate(c.process ? c.process->dim() : 1);
    } catch (const Error& e) {
      config_fail("covering", e.what());
    }
    c.covering = cb;
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mdim
