// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "mdim/bound_check.hpp"

namespace mdim {

using Vec = std::vector<double>;
using cplx = std::complex<double>;

/// Characteristic exponent as a function of the frequency: E e^{i<xi,X_t>} =
/// e^{-t psi(xi)}.
using ExponentFn = std::function<cplx(std::span<const double> xi)>;
/// State-dependent symbol q(x, xi) in the same sign convention.
using SymbolFn =
    std::function<cplx(std::span<const double> x, std::span<const double> xi)>;

struct SpectralAtom {
  Vec direction;  // unit vector
  double weight = 0.0;
};

/// Finite measure on the unit sphere: either atoms or the uniform
/// probability measure scaled to `uniform_mass`.
struct AngularMeasure {
  std::vector<SpectralAtom> atoms;
  bool uniform = false;
  double uniform_mass = 0.0;

  double total_mass() const;
  /// Symmetric under y -> -y (atoms matched with equal weights).
  bool symmetric(double tol = 1e-12) const;
  void validate(int dim) const;
  /// Atoms merged with their antipodes: direction, total weight, and skewness
  /// (w+ - w-)/(w+ + w-) along the returned direction.
  struct Axis {
    Vec direction;
    double weight;
    double skew;
  };
  std::vector<Axis> axes() const;
};

struct StableSpectralSpec {
  double alpha = 2.0;
  int dim = 1;
  AngularMeasure measure;
  Vec shift;  // A0; empty means zero

  void validate() const;
  bool symmetric() const;
};

/// L(dx) = r^{-1-alpha} dr nu(dy) with x = r y.
struct StableLevyMeasure {
  double alpha = 1.5;
  AngularMeasure nu;
};
/// L(dx) = c |x|^{-d-alpha} dx.
struct IsotropicDensity {
  double alpha = 1.5;
  double c = 1.0;
};

struct LevyTriplet {
  int dim = 1;
  Vec drift;   // empty means zero
  Vec sigma;   // d*d row-major; empty means zero
  std::variant<std::monostate, StableLevyMeasure, IsotropicDensity> levy;

  void validate() const;
};

/// Quadrature node for the uniform probability measure on the sphere, placed
/// relative to the hyperplane <xi, s> = 0 where integrands have a kink.
struct DirectionNode {
  Vec s;
  double weight;
};
/// `refine` >= 0 doubles the node count per step. d = 1 gives the exact
/// two-point rule; d >= 4 is unsupported.
std::vector<DirectionNode> direction_nodes(int d, std::span<const double> xi,
                                           int refine = 0);

/// Integral of |u|^alpha against the symmetric radial Levy measure
/// dr / r^{1+alpha} along one direction: int_0^inf (1 - cos(r u)) r^{-1-alpha} dr
/// = radial_stable_constant(alpha) |u|^alpha.
double radial_stable_constant(double alpha);
/// c K_{d,alpha} |xi|^alpha is the exponent of c |x|^{-d-alpha} dx.
double isotropic_density_constant(int d, double alpha);

cplx eval_levy_exponent(const LevyTriplet& triplet, std::span<const double> xi);
cplx eval_stable_exponent(const StableSpectralSpec& spec,
                          std::span<const double> xi);

// ---- state-dependent symbols --------------------------------------------

/// A(x): zero, constant v, or v cos(x_1).
struct DriftField {
  enum class Form { zero, constant, cosine };
  Form form = Form::zero;
  Vec v;

  Vec operator()(std::span<const double> x) const;
  bool is_zero() const;
  double sup_norm() const;
};

/// M(x, .): atoms with weights w_k + a_k sin^2(x_1), or the uniform measure
/// with mass m + a sin^2(x_1).
struct StateSpectralMeasure {
  std::vector<SpectralAtom> atoms;
  std::vector<double> atom_amp;
  bool uniform = false;
  double uniform_mass = 0.0;
  double uniform_amp = 0.0;

  AngularMeasure at(std::span<const double> x) const;
  bool state_free() const;
  void validate(int dim) const;
};

struct JumpDiffusionSpec {
  double alpha = 1.5;
  int dim = 1;
  DriftField drift;
  StateSpectralMeasure measure;

  void validate() const;
};

/// q(x, xi) = int |<xi,s>|^alpha M(x,ds) - i <A(x), xi>.
cplx eval_jump_diffusion_symbol(const JumpDiffusionSpec& spec,
                                std::span<const double> x,
                                std::span<const double> xi);

/// kappa(x, z) for the supported parametric families:
///   constant: base
///   sin2:     base + amp sin^2(freq x_1)
///   aniso:    base + amp sin^2(freq x_1) (z_1/|z|)^2
///   radial:   base + amp sin^2(freq x_1) exp(-|z|)
struct StableLikeKernel {
  enum class Form { constant, sin2, aniso, radial };
  double alpha = 1.5;
  int dim = 1;
  Form form = Form::constant;
  double base = 1.0;
  double amp = 0.0;
  double freq = 1.0;
  double beta = 0.5;

  double operator()(std::span<const double> x, std::span<const double> z) const;
  double kappa0() const { return base; }
  double kappa1() const { return form == Form::constant ? base : base + amp; }
  /// Holder constant for exponent beta.
  double kappa2() const;
  bool depends_on_x() const { return form != Form::constant && amp != 0.0; }
  bool depends_on_z() const {
    return (form == Form::aniso || form == Form::radial) && amp != 0.0;
  }
  void validate() const;
};

struct QuadratureConfig {
  double rel_tol = 1e-6;
  int max_levels = 20;
  double inner_cut = 1e-3;  // in units of 1/|<xi,s>|
  double outer_cut = 128.0;
};

struct SymbolValue {
  cplx value;
  double bound_constant = 0.0;  // |q| / |xi|^alpha
  int levels = 0;
};

/// q(x, xi) = int (1 - cos<z,xi>) kappa(x,z) |z|^{-d-alpha} dz, by a
/// direction x radial product rule refined until two levels agree.
SymbolValue eval_stable_like_symbol(const StableLikeKernel& kernel,
                                    std::span<const double> x,
                                    std::span<const double> xi,
                                    const QuadratureConfig& quad = {});

struct GrowthConditionSpec {
  double alpha = 2.0;
  double zeta_prime = 0.05;
  double K5 = 1.0;
  double tau = 1.0;
  bool global_lower = false;

  void validate() const;
};

/// K5^{-1}|xi|^{alpha-zeta'} <= psi(xi) <= K5 |xi|^{alpha+zeta'} (upper
/// exponent 2 when alpha = 2). Reports the minimal K5 that would pass.
BoundCheckReport check_growth_condition(const ExponentFn& exponent,
                                        const GrowthConditionSpec& spec,
                                        const std::vector<Vec>& xi_grid);

nlohmann::json to_json(const AngularMeasure& m);
AngularMeasure angular_measure_from_json(const nlohmann::json& j, int dim);

}  // namespace mdim
