// SPDX-License-Identifier: Apache-2.0
#include "mdim/mdim.h"

#include <exception>
#include <new>
#include <sstream>
#include <string>

#include "mdim/boxdim.hpp"
#include "mdim/config.hpp"
#include "mdim/error.hpp"
#include "mdim/parallel.hpp"
#include "mdim/paths.hpp"
#include "mdim/process.hpp"
#include "mdim/runner.hpp"

struct mdim_config {
  mdim::ExperimentConfig cfg;
};

struct mdim_result {
  mdim::RunOutput out;
  std::string json;
};

struct mdim_process {
  mdim::ProcessSpec spec;
};

struct mdim_path {
  mdim::SamplePath path;
};

namespace {

thread_local std::string g_last_error;

mdim_status to_status(mdim::ErrorCode c) {
  switch (c) {
    case mdim::ErrorCode::invalid_argument: return MDIM_E_INVALID;
    case mdim::ErrorCode::config: return MDIM_E_CONFIG;
    case mdim::ErrorCode::numeric: return MDIM_E_NUMERIC;
    case mdim::ErrorCode::io: return MDIM_E_IO;
    case mdim::ErrorCode::resource: return MDIM_E_RESOURCE;
    case mdim::ErrorCode::internal: return MDIM_E_INTERNAL;
  }
  return MDIM_E_INTERNAL;
}

template <class F>
mdim_status guard(F&& f) {
  try {
    g_last_error.clear();
    f();
    return MDIM_OK;
  } catch (const mdim::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return MDIM_E_RESOURCE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MDIM_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MDIM_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw mdim::Error(mdim::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

std::vector<std::string> split_names(const char* s) {
  std::vector<std::string> out;
  if (!s) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

mdim_result* wrap(mdim::RunOutput out) {
  auto* r = new mdim_result{std::move(out), {}};
  r->json = r->out.report.dump(2);
  return r;
}

}  // namespace

extern "C" {

const char* mdim_last_error(void) { return g_last_error.c_str(); }

const char* mdim_version(void) { return "0.1.0"; }

void mdim_set_threads(int n) { mdim::set_default_threads(n); }

mdim_status mdim_config_load(const char* path, mdim_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new mdim_config{mdim::load_config(path)};
  });
}

mdim_status mdim_config_parse(const char* json_text, mdim_config** out) {
  return guard([&] {
    need(json_text, "json_text");
    need(out, "out");
    *out = new mdim_config{mdim::parse_config(json_text)};
  });
}

mdim_status mdim_config_set_seed(mdim_config* cfg, uint64_t seed) {
  return guard([&] {
    need(cfg, "cfg");
    cfg->cfg.seed = seed;
  });
}

mdim_status mdim_config_set_output_dir(mdim_config* cfg, const char* dir) {
  return guard([&] {
    need(cfg, "cfg");
    need(dir, "dir");
    cfg->cfg.output_dir = dir;
  });
}

const char* mdim_config_output_dir(const mdim_config* cfg) {
  return cfg ? cfg->cfg.output_dir.c_str() : "";
}

void mdim_config_free(mdim_config* cfg) { delete cfg; }

mdim_status mdim_run_experiment(const mdim_config* cfg, unsigned flags, const char* only_checks,
                                mdim_result** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    mdim::RunRequest req;
    req.dimensions = (flags & MDIM_RUN_DIMENSIONS) != 0;
    req.checks = (flags & MDIM_RUN_CHECKS) != 0;
    req.only_checks = split_names(only_checks);
    *out = wrap(mdim::run_experiment(cfg->cfg, req));
  });
}

mdim_status mdim_run_simulate(const mdim_config* cfg, int dump_paths, mdim_result** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = wrap(mdim::run_simulate(cfg->cfg, dump_paths != 0));
  });
}

mdim_status mdim_run_cover(const mdim_config* cfg, mdim_result** out) {
  return guard([&] {
    need(cfg, "cfg");
    need(out, "out");
    *out = wrap(mdim::run_cover(cfg->cfg));
  });
}

int mdim_result_passed(const mdim_result* res) { return res && res->out.passed ? 1 : 0; }

const char* mdim_result_json(const mdim_result* res) { return res ? res->json.c_str() : ""; }

mdim_status mdim_result_write(const mdim_result* res, const mdim_config* cfg, const char* dir) {
  return guard([&] {
    need(res, "res");
    need(cfg, "cfg");
    need(dir, "dir");
    mdim::write_report(res->out, cfg->cfg, dir);
  });
}

void mdim_result_free(mdim_result* res) { delete res; }

mdim_status mdim_process_from_json(const char* json_text, mdim_process** out) {
  return guard([&] {
    need(json_text, "json_text");
    need(out, "out");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
      throw mdim::Error(mdim::ErrorCode::config, e.what());
    }
    auto spec = mdim::process_from_json(j);
    spec.validate();
    *out = new mdim_process{std::move(spec)};
  });
}

int mdim_process_dim(const mdim_process* p) { return p ? p->spec.dim() : 0; }

double mdim_process_natural_index(const mdim_process* p) {
  return p ? p->spec.natural_H() : 0.0;
}

void mdim_process_free(mdim_process* p) { delete p; }

mdim_status mdim_levy_exponent(const mdim_process* p, const double* xi, double* re,
                               double* im) {
  return guard([&] {
    need(p, "process");
    need(xi, "xi");
    const auto psi = mdim::levy_exponent(p->spec);
    const auto v = psi(std::span<const double>(xi, static_cast<std::size_t>(p->spec.dim())));
    if (re) *re = v.real();
    if (im) *im = v.imag();
  });
}

mdim_status mdim_simulate(const mdim_process* p, const double* x0, double T, uint64_t n_steps,
                          uint64_t seed, uint64_t stream, mdim_path** out) {
  return guard([&] {
    need(p, "process");
    need(out, "out");
    const std::size_t d = static_cast<std::size_t>(p->spec.dim());
    std::vector<double> start(d, 0.0);
    if (x0) start.assign(x0, x0 + d);
    mdim::RngStream rng(seed, stream);
    *out = new mdim_path{mdim::simulate(p->spec, start, T, n_steps, rng)};
  });
}

size_t mdim_path_points(const mdim_path* path) { return path ? path->path.size() : 0; }

int mdim_path_dim(const mdim_path* path) { return path ? path->path.dim : 0; }

double mdim_path_dt(const mdim_path* path) { return path ? path->path.dt : 0.0; }

const double* mdim_path_values(const mdim_path* path) {
  return path ? path->path.values.data() : nullptr;
}

void mdim_path_free(mdim_path* path) { delete path; }

mdim_status mdim_box_dimension(const double* points, size_t n, int dim, const double* ladder,
                               size_t n_ladder, int drop_coarse, int drop_fine, double* slope,
                               double* lo, double* hi, int* saturated) {
  return guard([&] {
    need(points, "points");
    need(ladder, "ladder");
    mdim::require(dim >= 1, "dim must be positive");
    mdim::PointCloud cloud;
    cloud.dim = dim;
    cloud.coords.assign(points, points + n * static_cast<std::size_t>(dim));
    const std::vector<double> lad(ladder, ladder + n_ladder);
    const auto curve = mdim::box_count(cloud, lad);
    mdim::WindowPolicy w;
    w.drop_coarse = drop_coarse;
    w.drop_fine = drop_fine;
    const auto bd = mdim::estimate_box_dimensions(curve, w);
    if (slope) *slope = bd.central.slope;
    if (lo) *lo = bd.central.lower_ci;
    if (hi) *hi = bd.central.upper_ci;
    if (saturated) *saturated = bd.saturated ? 1 : 0;
  });
}

double mdim_hawkes_inverse_image_dimension(double rho, double dim_e) {
  try {
    return mdim::hawkes_inverse_image_dimension(rho, dim_e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return -1.0;
  }
}

}  // extern "C"
