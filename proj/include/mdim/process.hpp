// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <variant>

#include <json.hpp>

#include "mdim/symbols.hpp"

namespace mdim {

/// X = sigma B with B standard Brownian motion in R^dim.
struct BrownianMotion {
  int dim = 1;
  double sigma = 1.0;
};

struct StableLevy {
  StableSpectralSpec spectral;
};

/// rho-stable subordinator, E e^{-lambda tau_t} = e^{-t lambda^rho}.
struct Subordinator {
  double rho = 0.5;
};

struct ProcessSpec;

/// Y_t = X(tau_t) for an independent rho-stable subordinator tau.
struct Subordinated {
  std::shared_ptr<const ProcessSpec> base;
  double rho = 0.5;
  /// Base-grid points per output step when X must be simulated on a grid.
  int base_refine = 16;
  /// tau_T larger than horizon_multiplier * T is treated as overflow.
  double horizon_multiplier = 1e8;
};

struct StableLike {
  StableLikeKernel kernel;
};

struct JumpDiffusion {
  JumpDiffusionSpec spec;
};

/// X_t = x0 for all t.
struct ZeroProcess {
  int dim = 1;
};

struct ProcessSpec {
  std::variant<BrownianMotion, StableLevy, Subordinator, Subordinated,
               StableLike, JumpDiffusion, ZeroProcess>
      family;

  int dim() const;
  /// Stationary independent increments (Subordinated inherits from its base).
  bool is_levy() const;
  bool spatially_homogeneous() const { return is_levy(); }
  /// Natural self-similarity index where one exists; 0 otherwise.
  double natural_H() const;
  std::string kind() const;
  void validate() const;
};

ProcessSpec brownian(int dim, double sigma = 1.0);
/// psi(xi) = scale |xi|^alpha in R^dim.
ProcessSpec isotropic_stable(int dim, double alpha, double scale = 1.0);
ProcessSpec stable_from_spectral(StableSpectralSpec spec);
ProcessSpec subordinator(double rho);
ProcessSpec subordinated(ProcessSpec base, double rho);
ProcessSpec stable_like(StableLikeKernel kernel);
ProcessSpec jump_diffusion(JumpDiffusionSpec spec);
ProcessSpec zero_process(int dim);

/// Uniform spectral mass giving psi = scale |xi|^alpha.
double isotropic_uniform_mass(int dim, double alpha, double scale);
/// Isotropic stable spec with the same exponent as a constant kernel.
StableSpectralSpec isotropic_equivalent(const StableLikeKernel& kernel);

nlohmann::json to_json(const ProcessSpec& spec);
ProcessSpec process_from_json(const nlohmann::json& j);

/// Exponent of a Levy family; throws for state-dependent families.
ExponentFn levy_exponent(const ProcessSpec& spec);
/// Symbol q(x, xi) for every family (x ignored for Levy families).
SymbolFn symbol_for(const ProcessSpec& spec, const QuadratureConfig& quad = {});

/// Rough size of a one-step displacement over dt, used by resolution guards.
double typical_step_displacement(const ProcessSpec& spec, double dt);

}  // namespace mdim
