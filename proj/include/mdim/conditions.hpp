// SPDX-License-Identifier: Apache-2.0
#pragma once
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "mdim/bound_check.hpp"
#include "mdim/process.hpp"
#include "mdim/rng.hpp"

namespace mdim {

struct TailEstimate {
  double t = 0.0;
  double threshold = 0.0;
  double prob_hat = 0.0;
  std::uint64_t n_mc = 0;
  double std_err = 0.0;
};

struct BallProbEstimate {
  double t = 0.0;
  Vec x;
  Vec y;
  double r = 0.0;
  double prob_hat = 0.0;
  std::uint64_t n_mc = 0;
  double std_err = 0.0;
};

/// Shared knobs for the Monte Carlo verifiers.
struct CheckOptions {
  /// Start points for "for all x" conditions. Empty means {0, e1, 2.5 e1};
  /// spatially homogeneous processes only use the first point.
  std::vector<Vec> x_grid;
  /// Grid steps used to approximate a running supremum. The grid sup is
  /// biased low.
  std::size_t sup_steps = 256;
  /// Steps used to reach an endpoint for families without exact increments.
  std::size_t endpoint_steps = 256;
  double n_sigma = 3.0;
  int threads = 0;
};

/// The x-grid actually used for `spec`.
std::vector<Vec> effective_x_grid(const ProcessSpec& spec, const CheckOptions& opts);

/// n_mc draws of sup_{s<=t} |X_s - x| on a grid of opts.sup_steps steps.
/// Replica i uses rng.split(i).
std::vector<double> sample_sup_displacements(const ProcessSpec& spec,
                                             std::span<const double> x, double t,
                                             std::uint64_t n_mc, RngStream& rng,
                                             const CheckOptions& opts = {});

/// P^x{sup_{s<=t} |X_s - x| >= threshold} by grid-sup Monte Carlo.
TailEstimate estimate_max_tail(const ProcessSpec& spec, std::span<const double> x,
                               double t, double threshold, std::uint64_t n_mc,
                               RngStream& rng, const CheckOptions& opts = {});

/// Tail estimate from precomputed sup samples.
TailEstimate tail_from_samples(std::span<const double> sups, double t,
                               double threshold);

/// Sup-displacement tail bound P{sup |X-x| >= t^gamma} <= C t^eta.
BoundCheckReport check_a1(const ProcessSpec& spec, double H,
                          const std::vector<double>& gammas,
                          const std::vector<double>& t_ladder, std::uint64_t n_mc,
                          RngStream& rng, const CheckOptions& opts = {});

struct AlphaEstimate {
  double value = 0.0;
  double std_err = 0.0;
  /// Arguments of the supremum.
  double s_arg = 0.0;
  Vec x_arg;
};

/// sup over s in {h k/8} and the x-grid of P(s, x, B(x,a)^c).
AlphaEstimate estimate_alpha_function(const ProcessSpec& spec, double h, double a,
                                      std::uint64_t n_mc, RngStream& rng,
                                      const CheckOptions& opts = {});

struct MClassSpec {
  double H = 0.5;
  double beta = 1.0;
  double C = 1.0;
  double h0 = 1.0;
  double a0 = 1.0;
  void validate() const;
};

struct HaPoint {
  double h = 0.0;
  double a = 0.0;
};

/// alpha(h, a) <= C (h a^{-1/H})^beta on the grid.
BoundCheckReport check_M_class(const ProcessSpec& spec, const MClassSpec& mspec,
                               const std::vector<HaPoint>& grid, std::uint64_t n_mc,
                               RngStream& rng, const CheckOptions& opts = {});

/// P{sup_{s<=h}|X_s - x| > a} <= P{|X_h - x| > a/2} / (1 - alpha(h, a/2)),
/// one cell per grid point.
BoundCheckReport verify_ottaviani(const ProcessSpec& spec, std::span<const double> x,
                                  const std::vector<HaPoint>& grid, std::uint64_t n_mc,
                                  RngStream& rng, const CheckOptions& opts = {});

struct XiSearch {
  int directions = 8;
  int radial = 8;
  /// Points per radius for the spatial sup (state-dependent symbols only).
  int spatial = 4;
  int max_refinements = 4;
  double tol = 1e-3;
};

/// t * sup_{|y-x|<=r} sup_{|xi|<=1/r} |q(y, xi)| by refined grid search.
/// Throws SearchError when successive refinements still disagree.
double pruitt_upper_bound(const SymbolFn& symbol, std::span<const double> x, double t,
                          double r, int dim, const XiSearch& search = {},
                          bool x_dependent = true);

struct TrPoint {
  double t = 0.0;
  double r = 0.0;
};

/// P{sup_{s<=t}|X_s-x| >= r} <= C * pruitt_upper_bound with one fitted C.
BoundCheckReport check_pruitt(const ProcessSpec& spec, const SymbolFn& symbol,
                              const std::vector<TrPoint>& grid, std::uint64_t n_mc,
                              RngStream& rng, const CheckOptions& opts = {},
                              const XiSearch& search = {});

/// n_mc endpoints X_t started at y, row-major n_mc x d.
std::vector<double> sample_endpoints(const ProcessSpec& spec, std::span<const double> y,
                                     double t, std::uint64_t n_mc, const RngStream& rng,
                                     const CheckOptions& opts = {});

/// P(t, y, B(x, r)) with the closed ball.
BallProbEstimate estimate_ball_probability(const ProcessSpec& spec, double t,
                                           std::span<const double> x,
                                           std::span<const double> y, double r,
                                           std::uint64_t n_mc, RngStream& rng,
                                           const CheckOptions& opts = {});

enum class BallVariant { a2, a3 };

struct BallBoundSpec {
  double H = 0.5;
  double eps = 0.05;
  double zeta = 0.05;
  double r0 = 1.0;
  /// Largest admissible C2/C1. Wider spreads mean the envelopes do not
  /// track the scaling of the ball probabilities.
  double max_spread = 50.0;
  BallVariant variant = BallVariant::a2;
};

/// C1 min{1,(r/t^{H-zeta})^{d+eps}} <= P(t,y,B(x,r)) <= C2 min{1,(r/t^{H+zeta})^{d-eps}}
/// with y in {x, x + r e1} for the lower bound and y = x for the upper one.
BoundCheckReport check_ball_bounds(const ProcessSpec& spec, const BallBoundSpec& bspec,
                                   const std::vector<TrPoint>& grid, std::uint64_t n_mc,
                                   RngStream& rng, const CheckOptions& opts = {});

struct ExponentQuad {
  double rel_tol = 1e-8;
  double abs_tol = 1e-13;
  /// Radius of the low-frequency region removed from the lower bound.
  double tau = 0.0;
  /// e^{-t psi} is treated as negligible once t psi exceeds this.
  double cutoff = 40.0;
};

struct BallBracket {
  double lower = 0.0;
  double upper = 1.0;
};

/// Fejer-kernel sandwich for P{|X_t| <= r} from a real symmetric exponent,
/// d in {1, 2}. Both sides are clamped to [0, 1].
BallBracket ball_probability_via_exponent(const ExponentFn& psi, double t, double r,
                                          int d, const ExponentQuad& quad = {});

/// P(|y - x + sigma W_s| <= r) for d-dimensional Brownian motion, as a function
/// of dist = |y - x|.
double brownian_ball_probability(int dim, double sigma, double s, double dist, double r);

/// s -> P(s, y, B(x, r)) for a fixed ball.
using BallProbFn = std::function<double(double s, std::span<const double> y)>;

struct HittingQuad {
  /// Simpson nodes on each geometric grid (odd count enforced).
  int nodes = 65;
  /// Denominator integrals start at s_floor_frac * (T - t).
  double s_floor_frac = 1e-6;
  /// Boundary directions for the infimum over y (d = 2).
  int boundary_points = 8;
};

/// Ratio int_t^{2T} P(s,x,B(x,r)) ds / inf_y int_0^{T-t} P(s,y,B(x,r)) ds.
double hitting_probability_bound(const BallProbFn& prob, std::span<const double> x,
                                 double r, double t, double T,
                                 const HittingQuad& quad = {});

/// Closed form for Brownian motion, Monte Carlo ball probabilities otherwise.
BallProbFn ball_probability_fn(const ProcessSpec& spec, std::span<const double> x,
                               double r, std::uint64_t n_mc, RngStream rng,
                               const CheckOptions& opts = {});

/// P^x{inf_{t<=s<=T} |X_s - center| <= r} from grid paths with n_steps steps.
/// Requires r >= 4 * typical one-step displacement.
TailEstimate estimate_hitting_probability(const ProcessSpec& spec,
                                          std::span<const double> x,
                                          std::span<const double> center, double r,
                                          double t, double T, std::uint64_t n_mc,
                                          RngStream& rng, std::size_t n_steps);

/// Hitting estimate vs bound over a (t, r) grid with returns to the start.
BoundCheckReport check_hitting(const ProcessSpec& spec, std::span<const double> x,
                               const std::vector<TrPoint>& grid, double T,
                               std::uint64_t n_mc, RngStream& rng, std::size_t n_steps,
                               const HittingQuad& quad = {},
                               std::uint64_t bound_n_mc = 4000);

struct MomentSpec {
  double p = 0.8;
  double max_ratio = 5.0;
};

/// E sup_{s<=T}|X_s - x|^p / T^{p/alpha} across a T ladder.
BoundCheckReport check_moment_bound(const StableLikeKernel& kernel, const MomentSpec& mspec,
                                    const std::vector<double>& T_ladder,
                                    std::uint64_t n_mc, RngStream& rng,
                                    const CheckOptions& opts = {});

/// Two-sample KS between X(r t) r^{-H} and X(t), both from 0, on the first
/// coordinate and on |X|.
BoundCheckReport check_self_similarity(const ProcessSpec& spec, double H, double r_scale,
                                       double t, std::uint64_t n_mc, RngStream& rng,
                                       const CheckOptions& opts = {},
                                       double level = 1e-3);

}  // namespace mdim
