// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mdim/process.hpp"
#include "mdim/rng.hpp"

namespace mdim {

/// Path sampled at t0 + i*dt, i = 0..steps(); values are row-major.
struct SamplePath {
  double t0 = 0.0;
  double dt = 1.0;
  int dim = 1;
  std::vector<double> values;

  std::size_t size() const { return values.size() / static_cast<std::size_t>(dim); }
  std::size_t steps() const { return size() == 0 ? 0 : size() - 1; }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  std::span<const double> at(std::size_t i) const {
    return {values.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  std::span<double> at(std::size_t i) {
    return {values.data() + i * dim, static_cast<std::size_t>(dim)};
  }
  /// Throws a numeric Error if any coordinate is not finite.
  void check_finite() const;
};

// ---- one-dimensional laws ------------------------------------------------

/// S_alpha(1, beta, 0) in the standard (tan) parameterization, via the
/// Chambers-Mallows-Stuck transform. alpha = 1 requires beta = 0.
double sample_stable(double alpha, double beta, RngStream& rng);
/// Positive stable with E e^{-lambda S} = e^{-lambda^rho}, rho in (0, 1)
/// (Kanter's representation).
double sample_positive_stable(double rho, RngStream& rng);
/// Symmetric stable increment over time scale_t: E e^{i xi X} = e^{-t|xi|^alpha}.
double sample_stable_increment(double alpha, double scale_t, RngStream& rng);

/// Increment over time t of the stable process with the given spectral
/// measure; atoms use one-dimensional draws along each axis, uniform
/// measures use a Gaussian vector subordinated by a positive alpha/2-stable.
Vec sample_stable_increment(const StableSpectralSpec& spec, double t, RngStream& rng);

/// Whether `spec` has an exact increment sampler: Brownian, stable,
/// subordinator, zero, or subordination of one of these. Homogeneous
/// families such as constant-kernel stable-like processes are not included.
bool has_exact_increments(const ProcessSpec& spec);

/// Exact increment over time t for Levy families (Brownian, stable,
/// subordinator, subordinated Levy base, zero).
void sample_levy_increment(const ProcessSpec& spec, double t, RngStream& rng,
                           std::span<double> out);

// ---- path simulators -----------------------------------------------------

SamplePath simulate_levy_path(const ProcessSpec& spec, std::span<const double> x0,
                              double T, std::size_t n_steps, RngStream& rng);
SamplePath simulate_subordinator(double rho, double T, std::size_t n_steps,
                                 RngStream& rng);
/// tau from rng.split(0), base from rng.split(1).
SamplePath subordinate_path(const Subordinated& spec, std::span<const double> x0,
                            double T, std::size_t n_steps, RngStream& rng);
/// Time-changes a base process by an explicit clock path (test hook). The
/// base is read at the greatest base-grid point <= clock value.
SamplePath subordinate_with_clock(const ProcessSpec& base, const SamplePath& clock,
                                  std::span<const double> x0, int base_refine,
                                  double horizon, RngStream& rng);
SamplePath simulate_stable_like_sde(const StableLikeKernel& kernel,
                                    std::span<const double> x0, double T,
                                    std::size_t n_steps, RngStream& rng);
SamplePath simulate_jump_diffusion(const JumpDiffusionSpec& spec,
                                   std::span<const double> x0, double T,
                                   std::size_t n_steps, RngStream& rng);

/// Dispatches on the process family.
SamplePath simulate(const ProcessSpec& spec, std::span<const double> x0, double T,
                    std::size_t n_steps, RngStream& rng);

/// Levy families only: values at the sorted grid indices `indices` of the
/// grid i*dt, sampled by exact increments between consecutive indices.
/// Same law as reading simulate() at those indices, with O(|indices|) work.
std::vector<double> simulate_levy_at(const ProcessSpec& spec,
                                     std::span<const double> x0, double dt,
                                     std::span<const std::size_t> indices,
                                     RngStream& rng);

/// Expected large-jump count per unit time, kappa_1 |S^{d-1}| l^{-alpha}/alpha,
/// for the Euler scheme with cutoff l = dt^{1/alpha}.
double large_jump_rate(const StableLikeKernel& kernel, double dt);

/// Binary dump: u64 d, u64 steps, f64 t0, f64 dt (little-endian), then
/// (steps+1)*d row-major f64.
void write_path_binary(const SamplePath& path, std::ostream& os);
SamplePath read_path_binary(std::istream& is);

}  // namespace mdim
