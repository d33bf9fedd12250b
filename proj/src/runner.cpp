// SPDX-License-Identifier: Apache-2.0
#include "mdim/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mdim/conditions.hpp"
#include "mdim/error.hpp"
#include "mdim/parallel.hpp"
#include "mdim/paths.hpp"
#include "mdim/stats.hpp"
#include "mdim/timesets.hpp"

namespace mdim {
namespace {

using nlohmann::json;

constexpr std::uint64_t kPathDomain = 0xD1;
constexpr std::uint64_t kCheckDomain = 0xC4EC;
constexpr std::uint64_t kBootDomain = 0xB007;
constexpr std::uint64_t kCoverDomain = 0xC0FE;

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::config, "config field '" + where + "': " + what);
}

std::uint64_t require_seed(const ExperimentConfig& c) {
  if (!c.seed) throw Error(ErrorCode::config, "config has no seed; set \"seed\" or pass --seed");
  return *c.seed;
}

/// Typed access to a check block with unknown-key detection.
class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {}

  double num(const std::string& k, double def) {
    used_.insert(k);
    if (!j_.contains(k)) return def;
    if (!j_[k].is_number()) config_fail(at(k), "expected a number");
    return j_[k].get<double>();
  }
  double num_required(const std::string& k) {
    if (!j_.contains(k)) config_fail(at(k), "required");
    return num(k, 0.0);
  }
  std::uint64_t count(const std::string& k, std::uint64_t def) {
    const double v = num(k, static_cast<double>(def));
    if (v < 0 || v != std::floor(v)) config_fail(at(k), "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  std::vector<double> list(const std::string& k, std::vector<double> def) {
    used_.insert(k);
    if (!j_.contains(k)) {
      if (def.empty()) config_fail(at(k), "required");
      return def;
    }
    return parse_number_list(j_[k], at(k));
  }
  Vec vec(const std::string& k, Vec def) {
    used_.insert(k);
    if (!j_.contains(k)) return def;
    return parse_number_list(j_[k], at(k));
  }
  std::vector<Vec> vecs(const std::string& k) {
    used_.insert(k);
    std::vector<Vec> out;
    if (!j_.contains(k)) return out;
    if (!j_[k].is_array()) config_fail(at(k), "expected an array of points");
    for (std::size_t i = 0; i < j_[k].size(); ++i)
      out.push_back(parse_number_list(j_[k][i], at(k) + "[" + std::to_string(i) + "]"));
    return out;
  }
  const json* object(const std::string& k) {
    used_.insert(k);
    if (!j_.contains(k)) return nullptr;
    if (!j_[k].is_object()) config_fail(at(k), "expected an object");
    return &j_[k];
  }
  const json* raw(const std::string& k) {
    used_.insert(k);
    return j_.contains(k) ? &j_[k] : nullptr;
  }
  std::string at(const std::string& k) const { return where_ + "." + k; }
  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!used_.count(k)) {
        std::string list;
        for (const auto& u : used_) list += (list.empty() ? "" : ", ") + u;
        config_fail(at(k), "unknown key (valid: " + list + ")");
      }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> used_;
};

CheckOptions read_options(Params& p, int threads) {
  CheckOptions o;
  o.x_grid = p.vecs("x_grid");
  o.sup_steps = p.count("sup_steps", o.sup_steps);
  o.endpoint_steps = p.count("endpoint_steps", o.endpoint_steps);
  o.n_sigma = p.num("n_sigma", o.n_sigma);
  o.threads = threads;
  return o;
}

std::vector<TrPoint> tr_grid(const std::vector<double>& ts, const std::vector<double>& rs) {
  std::vector<TrPoint> g;
  for (double t : ts)
    for (double r : rs) g.push_back({t, r});
  return g;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw Error(ErrorCode::io, "cannot create directory '" + p.parent_path().string() +
                                         "': " + ec.message());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot open '" + p.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::io, "write to '" + p.string() + "' failed");
}

}  // namespace

bool DimensionReport::passed() const {
  return std::all_of(sets.begin(), sets.end(), [](const SetResult& s) { return s.pass; });
}

nlohmann::json DimensionReport::to_json() const {
  json j;
  j["name"] = name;
  j["process"] = process;
  j["H"] = H;
  j["dim"] = dim;
  j["tolerance"] = tolerance;
  j["ladder"] = ladder;
  j["regime"] = {{"Hd", H * dim}, {"holds", regime_holds()}};
  if (!regime_holds()) j["regime"]["note"] = "H d < 1: outside the regime of the dimension formula";
  j["sets"] = json::array();
  for (const auto& s : sets) {
    json o;
    o["name"] = s.name;
    o["analytic_dim"] = s.analytic_dim;
    o["predicted"] = s.predicted;
    o["measured"] = s.measured;
    o["iqr"] = {s.q25, s.q75};
    o["ci"] = {s.ci.lo, s.ci.hi};
    o["per_path"] = s.per_path;
    o["saturated_paths"] = s.saturated_paths;
    o["grid_points"] = s.grid_points;
    o["pass"] = s.pass;
    j["sets"].push_back(std::move(o));
  }
  j["passed"] = passed();
  return j;
}

DimensionReport run_dimension_experiment(const ExperimentConfig& c, int threads) {
  const std::uint64_t seed = require_seed(c);
  if (!c.process) throw Error(ErrorCode::config, "config field 'process': required");
  const ProcessSpec& spec = *c.process;
  DimensionReport rep;
  rep.name = c.name;
  rep.process = to_json(spec);
  rep.dim = spec.dim();
  rep.H = c.effective_H();
  rep.tolerance = c.tolerance;
  if (!(rep.H > 0)) throw Error(ErrorCode::config, "config field 'H': required for this process");
  const double dt = c.T / static_cast<double>(c.n_steps);
  rep.ladder = c.ladder.empty() ? default_ladder(c.T, c.n_steps, rep.H) : c.ladder;
  const Vec x0 = c.x0.empty() ? Vec(static_cast<std::size_t>(rep.dim), 0.0) : c.x0;

  std::vector<std::vector<std::size_t>> indices;
  for (const auto& s : c.sets) {
    try {
      indices.push_back(restrict_to_grid(s.set, dt, c.T));
    } catch (const Error& e) {
      throw Error(ErrorCode::config, "set '" + s.name + "': " + e.what());
    }
  }
  const std::size_t S = c.sets.size();
  const bool levy = has_exact_increments(spec);
  std::vector<bool> sparse(S);
  bool need_full = false;
  for (std::size_t k = 0; k < S; ++k) {
    sparse[k] = levy && indices[k].size() * 4 < c.n_steps;
    need_full = need_full || !sparse[k];
  }

  std::vector<std::vector<double>> slopes(S, std::vector<double>(c.n_paths, 0.0));
  std::vector<std::vector<char>> sat(S, std::vector<char>(c.n_paths, 0));
  std::vector<std::vector<BoxCountCurve>> curves(S, std::vector<BoxCountCurve>(c.n_paths));
  const RngStream root(seed, kPathDomain);
  parallel_for(
      c.n_paths,
      [&](std::size_t p) {
        const RngStream ps = root.split(p);
        SamplePath full;
        if (need_full) {
          RngStream r = ps.split(0);
          full = simulate(spec, x0, c.T, c.n_steps, r);
        }
        for (std::size_t k = 0; k < S; ++k) {
          PointCloud cloud;
          if (sparse[k]) {
            RngStream r = ps.split(1 + k);
            cloud.dim = rep.dim;
            cloud.coords = simulate_levy_at(spec, x0, dt, indices[k], r);
          } else {
            cloud = image_points(full, indices[k]);
          }
          curves[k][p] = box_count(cloud, rep.ladder);
          const BoxDimensions bd = estimate_box_dimensions(curves[k][p], c.window, 0);
          slopes[k][p] = bd.saturated ? 0.0 : bd.central.slope;
          sat[k][p] = bd.saturated ? 1 : 0;
        }
      },
      threads);

  for (std::size_t k = 0; k < S; ++k) {
    SetResult r;
    r.name = c.sets[k].name;
    r.analytic_dim = c.sets[k].set.analytic_dim.value_or(0.0);
    r.predicted = std::min(static_cast<double>(rep.dim), r.analytic_dim / rep.H);
    r.per_path = slopes[k];
    r.measured = median(slopes[k]);
    r.q25 = quantile(slopes[k], 0.25);
    r.q75 = quantile(slopes[k], 0.75);
    RngStream br(seed, stream_hash(kBootDomain, k));
    r.ci = c.bootstrap_reps > 0 ? bootstrap_median_ci(slopes[k], c.bootstrap_reps, 0.95, br)
                                : Interval{r.measured, r.measured};
    r.saturated_paths =
        static_cast<std::size_t>(std::count(sat[k].begin(), sat[k].end(), 1));
    r.grid_points = indices[k].size();
    r.pass = std::abs(r.measured - r.predicted) <= c.tolerance;
    r.curves = std::move(curves[k]);
    rep.sets.push_back(std::move(r));
  }
  return rep;
}

bool CheckRun::passed() const {
  return std::all_of(reports.begin(), reports.end(),
                     [](const BoundCheckReport& r) { return r.passed(); });
}

nlohmann::json CheckRun::to_json() const {
  json j;
  j["name"] = name;
  j["check"] = check;
  j["reports"] = json::array();
  for (const auto& r : reports) j["reports"].push_back(r.to_json());
  j["passed"] = passed();
  return j;
}

namespace {

std::vector<BoundCheckReport> run_block(const CheckBlock& b, const ExperimentConfig& c,
                                        std::size_t index, int threads) {
  if (!b.process && !c.process) config_fail(b.path + ".process", "required");
  const ProcessSpec& spec = b.process ? *b.process : *c.process;
  const int d = spec.dim();
  RngStream rng(require_seed(c), stream_hash(kCheckDomain, index));
  Params p(b.params, b.path);
  const double H_default = c.H > 0 && !b.process ? c.H : spec.natural_H();
  const Vec origin(static_cast<std::size_t>(d), 0.0);
  std::vector<BoundCheckReport> out;
  auto check_dim = [&](const Vec& v, const std::string& key) {
    if (static_cast<int>(v.size()) != d) config_fail(p.at(key), "dimension does not match the process");
  };

  if (b.check == "a1") {
    const double H = p.num("H", H_default);
    const auto gammas = p.list("gamma", {});
    const auto ts = p.list("t", {});
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    out.push_back(check_a1(spec, H, gammas, ts, n_mc, rng, opts));
  } else if (b.check == "a2" || b.check == "a3") {
    BallBoundSpec bs;
    bs.variant = b.check == "a2" ? BallVariant::a2 : BallVariant::a3;
    bs.H = p.num("H", H_default);
    bs.r0 = p.num("r0", bs.r0);
    bs.max_spread = p.num("max_spread", bs.max_spread);
    std::vector<std::pair<double, double>> pairs;
    if (const json* pr = p.raw("pairs")) {
      if (!pr->is_array()) config_fail(p.at("pairs"), "expected [[eps, zeta], ...]");
      for (const auto& e : *pr) {
        const auto v = parse_number_list(e, p.at("pairs"));
        if (v.size() != 2) config_fail(p.at("pairs"), "expected [[eps, zeta], ...]");
        pairs.emplace_back(v[0], v[1]);
      }
    }
    const double eps = p.num("eps", 0.05), zeta = p.num("zeta", 0.05);
    if (pairs.empty()) pairs.emplace_back(eps, zeta);
    const auto grid = tr_grid(p.list("t", {}), p.list("r", {}));
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      bs.eps = pairs[k].first;
      bs.zeta = pairs[k].second;
      RngStream r = rng.split(k);
      out.push_back(check_ball_bounds(spec, bs, grid, n_mc, r, opts));
    }
  } else if (b.check == "mclass") {
    MClassSpec m;
    m.H = p.num("H", H_default);
    m.beta = p.num("beta", m.beta);
    m.C = p.num("C", m.C);
    m.h0 = p.num("h0", m.h0);
    m.a0 = p.num("a0", m.a0);
    std::vector<HaPoint> grid;
    for (double h : p.list("h", {}))
      for (double a : p.list("a", {})) grid.push_back({h, a});
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    out.push_back(check_M_class(spec, m, grid, n_mc, rng, opts));
  } else if (b.check == "ottaviani") {
    const Vec x = p.vec("x", origin);
    check_dim(x, "x");
    std::vector<HaPoint> grid;
    for (double h : p.list("h", {}))
      for (double a : p.list("a", {})) grid.push_back({h, a});
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    out.push_back(verify_ottaviani(spec, x, grid, n_mc, rng, opts));
  } else if (b.check == "pruitt") {
    const auto grid = tr_grid(p.list("t", {}), p.list("r", {}));
    XiSearch s;
    if (const json* sj = p.object("search")) {
      Params sp(*sj, p.at("search"));
      s.directions = static_cast<int>(sp.count("directions", s.directions));
      s.radial = static_cast<int>(sp.count("radial", s.radial));
      s.spatial = static_cast<int>(sp.count("spatial", s.spatial));
      s.max_refinements = static_cast<int>(sp.count("max_refinements", s.max_refinements));
      s.tol = sp.num("tol", s.tol);
      sp.finish();
    }
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    out.push_back(check_pruitt(spec, symbol_for(spec), grid, n_mc, rng, opts, s));
  } else if (b.check == "hitting") {
    const Vec x = p.vec("x", origin);
    check_dim(x, "x");
    const double T = p.num("T", 1.0);
    const auto grid = tr_grid(p.list("t", {}), p.list("r", {}));
    const auto n_mc = p.count("n_mc", 2000);
    const auto n_steps = p.count("n_steps", 16384);
    const auto bound_n_mc = p.count("bound_n_mc", 4000);
    HittingQuad q;
    q.nodes = static_cast<int>(p.count("nodes", static_cast<std::uint64_t>(q.nodes)));
    read_options(p, threads);
    p.finish();
    out.push_back(check_hitting(spec, x, grid, T, n_mc, rng, n_steps, q, bound_n_mc));
  } else if (b.check == "moment") {
    const auto* sl = std::get_if<StableLike>(&spec.family);
    if (!sl) config_fail(b.path + ".process", "the moment check needs a stable_like process");
    MomentSpec m;
    m.p = p.num("p", m.p);
    m.max_ratio = p.num("max_ratio", m.max_ratio);
    const auto Ts = p.list("T", {});
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    out.push_back(check_moment_bound(sl->kernel, m, Ts, n_mc, rng, opts));
  } else if (b.check == "selfsim") {
    const double H = p.num("H", H_default);
    const double r_scale = p.num("r_scale", 4.0);
    const double t = p.num("t", 1.0);
    const double level = p.num("level", 1e-3);
    const auto n_mc = p.count("n_mc", 10000);
    const auto opts = read_options(p, threads);
    p.finish();
    out.push_back(check_self_similarity(spec, H, r_scale, t, n_mc, rng, opts, level));
  } else {
    config_fail(b.path + ".check", "unknown check '" + b.check + "'");
  }
  return out;
}

}  // namespace

std::vector<CheckRun> run_checks(const ExperimentConfig& c, const std::vector<std::string>& only,
                                 int threads) {
  const auto& names = known_checks();
  for (const auto& o : only)
    if (std::find(names.begin(), names.end(), o) == names.end()) {
      std::string list;
      for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
      throw Error(ErrorCode::config, "unknown check '" + o + "' (valid: " + list + ")");
    }
  std::vector<CheckRun> runs;
  for (std::size_t k = 0; k < c.checks.size(); ++k) {
    const auto& b = c.checks[k];
    if (!only.empty() && std::find(only.begin(), only.end(), b.check) == only.end()) continue;
    CheckRun run;
    run.name = b.name;
    run.check = b.check;
    try {
      run.reports = run_block(b, c, k, threads);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::config) throw;
      if (e.code() == ErrorCode::invalid_argument)
        throw Error(ErrorCode::config, b.path + ": " + e.what());
      throw;
    }
    runs.push_back(std::move(run));
  }
  return runs;
}

CoverSummary run_covering(const ExperimentConfig& c, int threads) {
  if (!c.covering) throw Error(ErrorCode::config, "config field 'covering': required");
  if (!c.process) throw Error(ErrorCode::config, "config field 'process': required");
  RngStream rng(require_seed(c), kCoverDomain);
  return covering_statistics(*c.process, c.covering->config, c.covering->n_paths, rng, threads);
}

namespace {

json header(const ExperimentConfig& c, const std::string& command) {
  json j;
  j["schema"] = "v1";
  j["command"] = command;
  j["name"] = c.name;
  j["seed"] = require_seed(c);
  j["config_hash"] = c.hash();
  return j;
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& c, const RunRequest& req) {
  RunOutput out;
  out.command = req.dimensions && req.checks ? "experiment" : (req.dimensions ? "dim" : "check");
  out.report = header(c, out.command);
  out.report["experiment"] = nullptr;
  out.report["checks"] = json::array();
  if (req.dimensions) {
    const DimensionReport dims = run_dimension_experiment(c, req.threads);
    out.report["experiment"] = dims.to_json();
    out.passed = out.passed && dims.passed();
    for (const auto& s : dims.sets) {
      std::ostringstream os;
      os.precision(12);
      os << "path,epsilon,count\n";
      for (std::size_t p = 0; p < s.curves.size(); ++p)
        for (std::size_t i = 0; i < s.curves[p].epsilon.size(); ++i)
          os << p << ',' << s.curves[p].epsilon[i] << ',' << s.curves[p].count[i] << '\n';
      out.files["curves/" + s.name + ".csv"] = os.str();
    }
  }
  if (req.checks) {
    const auto runs = run_checks(c, req.only_checks, req.threads);
    for (const auto& r : runs) {
      out.report["checks"].push_back(r.to_json());
      out.passed = out.passed && r.passed();
      for (std::size_t k = 0; k < r.reports.size(); ++k)
        out.files["checks/" + r.name + (r.reports.size() > 1 ? "_" + std::to_string(k) : "") +
                  ".csv"] = r.reports[k].to_csv();
    }
  }
  out.report["passed"] = out.passed;
  return out;
}

RunOutput run_simulate(const ExperimentConfig& c, bool dump_paths, int threads) {
  if (!c.process) throw Error(ErrorCode::config, "config field 'process': required");
  const ProcessSpec& spec = *c.process;
  const int d = spec.dim();
  const Vec x0 = c.x0.empty() ? Vec(static_cast<std::size_t>(d), 0.0) : c.x0;
  RunOutput out;
  out.command = "simulate";
  out.report = header(c, out.command);
  const RngStream root(require_seed(c), kPathDomain);
  std::vector<Vec> finals(c.n_paths);
  std::vector<double> sups(c.n_paths);
  std::vector<std::string> dumps(dump_paths ? c.n_paths : 0);
  parallel_for(
      c.n_paths,
      [&](std::size_t p) {
        RngStream r = root.split(p).split(0);
        const SamplePath path = simulate(spec, x0, c.T, c.n_steps, r);
        const auto last = path.at(path.size() - 1);
        finals[p].assign(last.begin(), last.end());
        double m = 0.0;
        for (std::size_t i = 0; i < path.size(); ++i) {
          double s = 0.0;
          for (int j = 0; j < d; ++j) {
            const double v = path.at(i)[static_cast<std::size_t>(j)] - x0[static_cast<std::size_t>(j)];
            s += v * v;
          }
          m = std::max(m, std::sqrt(s));
        }
        sups[p] = m;
        if (dump_paths) {
          std::ostringstream os(std::ios::binary);
          write_path_binary(path, os);
          dumps[p] = os.str();
        }
      },
      threads);
  std::ostringstream os;
  os.precision(12);
  os << "path";
  for (int j = 0; j < d; ++j) os << ",x" << j;
  os << ",sup_displacement\n";
  for (std::size_t p = 0; p < c.n_paths; ++p) {
    os << p;
    for (double v : finals[p]) os << ',' << v;
    os << ',' << sups[p] << '\n';
  }
  out.files["simulate.csv"] = os.str();
  for (std::size_t p = 0; p < dumps.size(); ++p)
    out.files["paths/path_" + std::to_string(p) + ".bin"] = std::move(dumps[p]);
  out.report["process"] = to_json(spec);
  out.report["n_paths"] = c.n_paths;
  out.report["n_steps"] = c.n_steps;
  out.report["T"] = c.T;
  out.report["sup_displacement_median"] = median(sups);
  out.report["passed"] = true;
  return out;
}

RunOutput run_cover(const ExperimentConfig& c, int threads) {
  RunOutput out;
  out.command = "cover";
  out.report = header(c, out.command);
  const CoverSummary s = run_covering(c, threads);
  out.report["covering"] = s.to_json();
  out.report["covering"]["gamma"] = c.covering->config.gamma;
  out.report["passed"] = true;
  out.files["cover.csv"] = s.to_csv();
  return out;
}

void write_report(const RunOutput& output, const ExperimentConfig& c, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  json report = output.report;
  report["timestamp"] = utc_timestamp();
  write_file(root / "report.json", report.dump(2) + "\n");
  json files = json::array();
  files.push_back("report.json");
  for (const auto& [name, content] : output.files) {
    write_file(root / name, content);
    files.push_back(name);
  }
  json manifest;
  manifest["schema"] = "v1";
  manifest["command"] = output.command;
  manifest["config_hash"] = c.hash();
  manifest["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  manifest["files"] = files;
  manifest["config"] = c.canonical();
  write_file(root / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace mdim
