#pragma once

#include "kolmo/group.hpp"

namespace kolmo {

/// Fundamental solution of L0 = dx^2 + x dy - dt with pole at the origin:
///
///   Gamma(x,y,t) = sqrt(3)/(2 pi t^2) exp(-(x^2 + 3xy/t + 3y^2/t^2)/t),  t > 0
///
/// and 0 for t <= 0. Arguments that underflow give exactly 0, never NaN.
double gamma_origin(const Point& z);

/// Two-point form Gamma(z, zeta), equal to gamma_origin(zeta^{-1} o z).
double gamma(const Point& z, const Point& zeta);

/// d Gamma(z, zeta) / d xi (derivative in the pole's first coordinate).
double gamma_dx(const Point& z, const Point& zeta);

/// Integral of Gamma(., ., t; 0, 0, tau) over a box of +-half_width standard
/// deviations per axis, by a grid_n x grid_n tensor trapezoid rule. Equals 1
/// analytically. Throws std::invalid_argument unless t > tau.
double gamma_mass(double t, double tau, double half_width = 8.0, int grid_n = 241);

/// Centered second-order finite-difference evaluation of L0 Gamma(., 0) at z
/// with step h on every axis. Throws std::invalid_argument when
/// group_norm(z) < 10 h.
double l0_residual(const Point& z, double h);

/// Log of the exponent argument with the prefactor folded in; -inf when the
/// kernel vanishes. Exposed for quadrature code that works in log space.
double log_gamma(const Point& z, const Point& zeta);

}  // namespace kolmo
