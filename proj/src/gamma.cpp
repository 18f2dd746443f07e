#include "kolmo/gamma.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kolmo {

namespace {

// Below this the exponential is subnormal; report an exact zero instead.
constexpr double kUnderflowExponent = -708.0;

const double kLogPrefactor = std::log(std::numbers::sqrt3 / (2.0 * std::numbers::pi));

// Exponent of (2.2) as a polynomial in q = 1/(t - tau), evaluated by Horner:
//   -q (A + q (B + q C)),  A = x^2 + x xi + xi^2,  B = 3 (x + xi)(y - eta),
//   C = 3 (y - eta)^2.
double exponent(const Point& z, const Point& zeta, double q) {
    double dy = z.y - zeta.y;
    double a = z.x * z.x + z.x * zeta.x + zeta.x * zeta.x;
    double b = 3.0 * (z.x + zeta.x) * dy;
    double c = 3.0 * dy * dy;
    return -q * (a + q * (b + q * c));
}

}  // namespace

double log_gamma(const Point& z, const Point& zeta) {
    double s = z.t - zeta.t;
    if (!(s > 0.0)) {
        return -std::numeric_limits<double>::infinity();
    }
    return kLogPrefactor - 2.0 * std::log(s) + exponent(z, zeta, 1.0 / s);
}

double gamma(const Point& z, const Point& zeta) {
    double s = z.t - zeta.t;
    if (!(s > 0.0)) {
        return 0.0;
    }
    double e = exponent(z, zeta, 1.0 / s);
    if (e < kUnderflowExponent) {
        return 0.0;
    }
    double v = std::exp(kLogPrefactor - 2.0 * std::log(s) + e);
    return std::isfinite(v) ? v : 0.0;
}

double gamma_origin(const Point& z) {
    return gamma(z, kOrigin);
}

double gamma_dx(const Point& z, const Point& zeta) {
    double s = z.t - zeta.t;
    if (!(s > 0.0)) {
        return 0.0;
    }
    double g = gamma(z, zeta);
    if (g == 0.0) {
        return 0.0;
    }
    double factor = (z.x + 2.0 * zeta.x) / s + 3.0 * (z.y - zeta.y) / (s * s);
    return -factor * g;
}

double gamma_mass(double t, double tau, double half_width, int grid_n) {
    if (!(t > tau)) {
        throw std::invalid_argument("gamma_mass: requires t > tau");
    }
    if (!(half_width > 0.0) || grid_n < 3) {
        throw std::invalid_argument("gamma_mass: bad quadrature parameters");
    }
    double s = t - tau;
    // Marginal standard deviations of the Gaussian: var x = 2s, var y = 2s^3/3.
    double wx = half_width * std::sqrt(2.0 * s);
    double wy = half_width * std::sqrt(2.0 * s * s * s / 3.0);
    double hx = 2.0 * wx / (grid_n - 1);
    double hy = 2.0 * wy / (grid_n - 1);
    Point pole{0.0, 0.0, tau};
    double sum = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        double x = -wx + i * hx;
        double wi = (i == 0 || i == grid_n - 1) ? 0.5 : 1.0;
        double row = 0.0;
        for (int j = 0; j < grid_n; ++j) {
            double y = -wy + j * hy;
            double wj = (j == 0 || j == grid_n - 1) ? 0.5 : 1.0;
            row += wj * gamma({x, y, t}, pole);
        }
        sum += wi * row;
    }
    return sum * hx * hy;
}

double l0_residual(const Point& z, double h) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("l0_residual: h must be positive");
    }
    if (group_norm(z) < 10.0 * h) {
        throw std::invalid_argument("l0_residual: point too close to the pole");
    }
    auto g = [](double x, double y, double t) { return gamma_origin({x, y, t}); };
    double c = g(z.x, z.y, z.t);
    double gxx = (g(z.x + h, z.y, z.t) - 2.0 * c + g(z.x - h, z.y, z.t)) / (h * h);
    double gy = (g(z.x, z.y + h, z.t) - g(z.x, z.y - h, z.t)) / (2.0 * h);
    double gt = (g(z.x, z.y, z.t + h) - g(z.x, z.y, z.t - h)) / (2.0 * h);
    return gxx + z.x * gy - gt;
}

}  // namespace kolmo
