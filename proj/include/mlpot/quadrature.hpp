#pragma once

#include <functional>
#include <span>

namespace mlpot::quad {

using Fn1 = std::function<double(double)>;
using FnN = std::function<double(std::span<const double>)>;

/// Gauss-Legendre rule of the given order (2, 4 or 8) on [a, b].
double gauss_legendre(const Fn1& f, double a, double b, int order = 8);

/// Composite Gauss-Legendre over [a, b] with geometrically growing panels,
/// 0 < a < b.
double composite_log(const Fn1& f, double a, double b, int panels, int order = 8);

/// Integral over [0, t] of a function that may be singular at 0: dyadic
/// panels [t 2^{-j-1}, t 2^{-j}] with a geometric tail estimate. Throws
/// std::domain_error when the panel masses stop decreasing (divergence).
double integrate_from_zero(const Fn1& f, double t, int order = 8);

/// Tensor Gauss-Legendre over the box prod [lo_d, hi_d].
double box_integral(const FnN& f, std::span<const double> lo, std::span<const double> hi, int order);

/// Integral of f over a box whose closure contains the origin, where f may be
/// singular at the origin. The box is split into orthants with a vertex at the
/// origin; each orthant is peeled by repeated halving towards the origin and
/// the remaining corner is summed as a geometric tail. Throws
/// std::domain_error if the peeled masses do not decay.
double origin_box_integral(const FnN& f, std::span<const double> lo, std::span<const double> hi,
                           int max_levels = 24);

}  // namespace mlpot::quad
