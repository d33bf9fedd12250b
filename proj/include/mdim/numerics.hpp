// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace mdim {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Gauss-Legendre rule on [-1, 1]; cached per n, thread-safe.
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (7/15) on a finite interval. Throws QuadratureError
/// when the error target is not met within max_depth bisections.
IntegralResult integrate_gk(const std::function<double(double)>& f, double a,
                            double b, double abs_tol = 1e-12,
                            double rel_tol = 1e-10, int max_depth = 40);

/// Surface area of the unit sphere in R^d.
double sphere_area(int d);
/// E|y_1|^p for y uniform on the unit sphere in R^d.
double sphere_moment(int d, double p);

double normal_cdf(double x);

/// Lower Cholesky factor of a symmetric PSD d x d row-major matrix. Tiny
/// negative pivots (>= -1e-12 relative) are clamped to zero.
std::vector<double> cholesky_psd(std::span<const double> a, int d);

double norm(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace mdim
