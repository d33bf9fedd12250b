// SPDX-License-Identifier: Apache-2.0
#include "mdim/covering.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "mdim/error.hpp"
#include "mdim/numerics.hpp"
#include "mdim/parallel.hpp"
#include "mdim/stats.hpp"

namespace mdim {
namespace {

std::atomic<bool> g_self_check{false};

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

constexpr double kSlack = 1e-9;

std::size_t first_index_at_or_after(const SamplePath& p, double s) {
  const double u = (s - p.t0) / p.dt;
  if (u <= 0) return 0;
  return static_cast<std::size_t>(std::ceil(u - kSlack));
}

}  // namespace

void set_cover_self_check(bool on) { g_self_check = on; }
bool cover_self_check() { return g_self_check; }

void ImageCoverConfig::validate() const {
  require(t_n > 0 && theta_n > 0, "image cover needs t_n, theta_n > 0");
  for (const auto& [a, b] : intervals)
    require(a >= 0 && b <= 1 + 1e-12 && a <= b, "cover intervals must lie in [0, 1]");
}

ImageCoverConfig ImageCoverConfig::dyadic(int n, double gamma) {
  require(n >= 0 && n <= 30, "dyadic level out of range");
  require(gamma > 0, "gamma must be positive");
  ImageCoverConfig c;
  c.t_n = std::ldexp(1.0, -n);
  c.theta_n = std::pow(c.t_n, gamma);
  const std::size_t m = std::size_t{1} << n;
  c.intervals.reserve(m);
  for (std::size_t j = 0; j < m; ++j)
    c.intervals.emplace_back(static_cast<double>(j) * c.t_n, static_cast<double>(j + 1) * c.t_n);
  return c;
}

void PreimageCoverConfig::validate() const {
  require(r_n > 0 && t_n > 0 && T > 0 && m >= 1, "preimage cover parameters must be positive");
  require(t_n < T, "preimage cover needs t_n < T");
}

PreimageCoverConfig PreimageCoverConfig::dyadic(int n, double gamma, double T, int m) {
  require(n >= 0 && n <= 20, "dyadic level out of range");
  PreimageCoverConfig c;
  c.r_n = std::ldexp(1.0, -n);
  c.t_n = std::pow(2.0, -gamma * n);
  c.T = T;
  c.m = m;
  return c;
}

double PreimageCoverConfig::family_size(int dim) const {
  return std::pow(2.0 * m / r_n, dim);
}

std::size_t image_cover_count(const SamplePath& path, double a, double b, double theta,
                              std::vector<std::size_t>* centers) {
  require(theta > 0, "theta must be positive");
  const double end = path.time(path.steps());
  require(a >= path.t0 - kSlack * path.dt && b <= end + kSlack * path.dt && a <= b,
          "cover interval outside the path domain");
  const std::size_t ia = first_index_at_or_after(path, a);
  const std::size_t ib = std::min<std::size_t>(
      path.steps(), static_cast<std::size_t>(std::floor((b - path.t0) / path.dt + kSlack)));
  if (ia > ib) return 0;
  std::vector<std::size_t> local;
  std::vector<std::size_t>& out = centers ? *centers : local;
  out.clear();
  std::size_t cur = ia;
  out.push_back(cur);
  for (std::size_t i = ia + 1; i <= ib; ++i) {
    if (dist(path.at(i), path.at(cur)) > theta) {
      cur = i;
      out.push_back(cur);
    }
  }
  if (g_self_check) {
    for (std::size_t i = ia; i <= ib; ++i) {
      bool covered = false;
      for (std::size_t c : out)
        if (dist(path.at(i), path.at(c)) <= theta) {
          covered = true;
          break;
        }
      if (!covered) throw Error(ErrorCode::internal, "image cover misses a grid point");
    }
  }
  return out.size();
}

std::size_t max_image_cover_count(const SamplePath& path, const ImageCoverConfig& config) {
  config.validate();
  std::size_t best = 0;
  for (const auto& [a, b] : config.intervals)
    best = std::max(best, image_cover_count(path, a, b, config.theta_n));
  return best;
}

std::size_t preimage_cover_count(const SamplePath& path, std::span<const double> z,
                                 double radius, double t_n, double T,
                                 std::vector<std::size_t>* starts) {
  require(static_cast<int>(z.size()) == path.dim, "ball center has wrong dimension");
  require(radius > 0 && t_n > 0 && t_n < T, "preimage cover needs radius > 0 and 0 < t_n < T");
  std::vector<std::size_t> local;
  std::vector<std::size_t>& out = starts ? *starts : local;
  out.clear();
  double next = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double s = path.time(i);
    if (s >= T - kSlack * path.dt) break;
    if (s < next - kSlack * path.dt) continue;
    if (dist(path.at(i), z) <= radius) {
      out.push_back(i);
      next = s + t_n;
    }
  }
  if (g_self_check) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const double s = path.time(i);
      if (s >= T - kSlack * path.dt) break;
      if (dist(path.at(i), z) > radius) continue;
      while (k + 1 < out.size() && out[k + 1] <= i) ++k;
      const bool ok = !out.empty() && out[k] <= i &&
                      s < path.time(out[k]) + t_n - kSlack * path.dt;
      if (!ok) throw Error(ErrorCode::internal, "preimage cover misses a grid time");
    }
  }
  return out.size();
}

std::vector<std::size_t> preimage_family_counts(const SamplePath& path,
                                                const PreimageCoverConfig& c) {
  c.validate();
  const int d = path.dim;
  require(d >= 1 && d <= 3, "preimage families support d <= 3");
  const double side = c.r_n;
  const double cells = 2.0 * c.m / side;
  require(cells < 2097152.0, "preimage family too fine");
  const auto per_axis = static_cast<std::uint64_t>(cells);
  struct State {
    double next;
    std::size_t count;
  };
  std::unordered_map<std::uint64_t, State> visited;
  Vec centre(static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double s = path.time(i);
    if (s >= c.T - kSlack * path.dt) break;
    const auto x = path.at(i);
    std::uint64_t key = 0;
    bool inside = true;
    for (int j = 0; j < d; ++j) {
      const double q = std::floor((x[static_cast<std::size_t>(j)] + c.m) / side);
      if (q < 0 || q >= cells) {
        inside = false;
        break;
      }
      centre[static_cast<std::size_t>(j)] = -c.m + (q + 0.5) * side;
      key = key * per_axis + static_cast<std::uint64_t>(q);
    }
    if (!inside || dist(x, centre) > side / 2) continue;
    auto [it, fresh] = visited.try_emplace(key, State{-1.0, 0});
    State& st = it->second;
    if (fresh || s >= st.next - kSlack * path.dt) {
      ++st.count;
      st.next = s + c.t_n;
    }
  }
  std::vector<std::pair<std::uint64_t, std::size_t>> sorted;
  sorted.reserve(visited.size());
  for (const auto& [k, st] : visited) sorted.emplace_back(k, st.count);
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> out;
  out.reserve(sorted.size());
  for (const auto& kv : sorted) out.push_back(kv.second);
  return out;
}

void CoveringConfig::validate(int dim) const {
  require(!levels.empty(), "covering needs at least one level");
  for (int n : levels) require(n >= 0 && n <= 24, "covering level out of range");
  require(gamma > 0, "gamma must be positive");
  require(n_steps >= 1 && T > 0, "covering needs n_steps >= 1 and T > 0");
  require(x0.empty() || static_cast<int>(x0.size()) == dim, "x0 has wrong dimension");
  if (kind == CoverKind::image) require(T >= 1.0, "image covers need T >= 1");
}

std::pair<double, double> tail_slope(std::span<const std::size_t> counts) {
  if (counts.empty()) return {std::nan(""), std::nan("")};
  const std::size_t kmax = *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> hist(kmax + 1, 0);
  for (std::size_t c : counts) ++hist[c];
  std::vector<double> ks, lp;
  std::size_t above = counts.size();
  for (std::size_t k = 0; k <= kmax; ++k) {
    above -= hist[k];
    if (k >= 1 && above > 0) {
      ks.push_back(static_cast<double>(k));
      lp.push_back(std::log(static_cast<double>(above) / static_cast<double>(counts.size())));
    }
  }
  if (ks.size() < 2) return {std::nan(""), std::nan("")};
  const LinearFit f = ols(ks, lp);
  return {f.slope, f.slope_se};
}

CoverSummary covering_statistics(const ProcessSpec& spec, const CoveringConfig& config,
                                 std::size_t n_paths, RngStream& rng, int threads) {
  const int d = spec.dim();
  config.validate(d);
  require(n_paths >= 1, "covering needs at least one path");
  const Vec x0 = config.x0.empty() ? Vec(static_cast<std::size_t>(d), 0.0) : config.x0;
  const std::size_t L = config.levels.size();
  // counts[p][l] = counts over the family at level l for path p.
  std::vector<std::vector<std::vector<std::size_t>>> counts(
      n_paths, std::vector<std::vector<std::size_t>>(L));
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        RngStream r = rng.split(p);
        const SamplePath path = simulate(spec, x0, config.T, config.n_steps, r);
        for (std::size_t l = 0; l < L; ++l) {
          const int n = config.levels[l];
          if (config.kind == CoverKind::image) {
            const auto c = ImageCoverConfig::dyadic(n, config.gamma);
            auto& out = counts[p][l];
            out.reserve(c.intervals.size());
            for (const auto& [a, b] : c.intervals)
              out.push_back(image_cover_count(path, a, b, c.theta_n));
          } else {
            const auto c = PreimageCoverConfig::dyadic(n, config.gamma, config.T, config.m);
            counts[p][l] = preimage_family_counts(path, c);
          }
        }
      },
      threads);

  CoverSummary s;
  s.kind = config.kind;
  for (std::size_t l = 0; l < L; ++l) {
    CoverRow row;
    row.n = config.levels[l];
    row.family_size = config.kind == CoverKind::image
                          ? std::ldexp(1.0, row.n)
                          : PreimageCoverConfig::dyadic(row.n, config.gamma, config.T, config.m)
                                .family_size(d);
    std::vector<std::size_t> pooled;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const auto& v = counts[p][l];
      pooled.insert(pooled.end(), v.begin(), v.end());
      row.path_max.push_back(v.empty() ? 0 : *std::max_element(v.begin(), v.end()));
    }
    row.max_count = pooled.empty() ? 0 : *std::max_element(pooled.begin(), pooled.end());
    std::vector<double> asd(pooled.begin(), pooled.end());
    row.q50 = asd.empty() ? 0.0 : quantile(asd, 0.5);
    row.q95 = asd.empty() ? 0.0 : quantile(asd, 0.95);
    std::tie(row.tail_slope, row.tail_slope_se) = tail_slope(pooled);
    s.rows.push_back(std::move(row));
  }
  return s;
}

nlohmann::json CoverSummary::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == CoverKind::image ? "image" : "preimage";
  if (kind == CoverKind::preimage) j["quantiles_over"] = "visited balls";
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o;
    o["n"] = r.n;
    o["family_size"] = r.family_size;
    o["max_count"] = r.max_count;
    o["q50"] = r.q50;
    o["q95"] = r.q95;
    o["tail_slope"] = std::isfinite(r.tail_slope) ? nlohmann::json(r.tail_slope) : nullptr;
    o["tail_slope_se"] =
        std::isfinite(r.tail_slope_se) ? nlohmann::json(r.tail_slope_se) : nullptr;
    o["path_max"] = r.path_max;
    j["rows"].push_back(std::move(o));
  }
  return j;
}

std::string CoverSummary::to_csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "n,family_size,max_count,q50,q95,tail_slope\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.family_size << ',' << r.max_count << ',' << r.q50 << ',' << r.q95
       << ',';
    if (std::isfinite(r.tail_slope)) os << r.tail_slope;
    os << '\n';
  }
  return os.str();
}

}  // namespace mdim
