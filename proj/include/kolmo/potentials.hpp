#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kolmo/group.hpp"

namespace kolmo {

/// Cell-centered space-time grid with nt x nx x ny cells.
struct SpaceTimeGrid {
    double x0 = -1.0, x1 = 1.0;
    double y0 = -1.0, y1 = 1.0;
    double t0 = 0.0, t1 = 1.0;
    int nx = 32, ny = 32, nt = 32;

    double dx() const { return (x1 - x0) / nx; }
    double dy() const { return (y1 - y0) / ny; }
    double dt() const { return (t1 - t0) / nt; }
    double xc(int i) const { return x0 + (i + 0.5) * dx(); }
    double yc(int j) const { return y0 + (j + 0.5) * dy(); }
    double tc(int k) const { return t0 + (k + 0.5) * dt(); }
    Point center(int k, int i, int j) const { return {xc(i), yc(j), tc(k)}; }
    double cell_volume() const { return dx() * dy() * dt(); }
    std::size_t size() const { return static_cast<std::size_t>(nt) * nx * ny; }

    /// Throws std::invalid_argument on a grid with no cells or an empty range.
    void check() const;
};

/// Values on a SpaceTimeGrid, index (k, i, j) -> (k * nx + i) * ny + j.
struct SpaceTimeField {
    SpaceTimeGrid grid;
    std::vector<double> v;

    double operator()(int k, int i, int j) const { return v[index(k, i, j)]; }
    double& operator()(int k, int i, int j) { return v[index(k, i, j)]; }
    std::size_t index(int k, int i, int j) const {
        return (static_cast<std::size_t>(k) * grid.nx + i) * grid.ny + j;
    }

    static SpaceTimeField zeros(const SpaceTimeGrid& grid);
    static SpaceTimeField sample(const SpaceTimeGrid& grid, const std::function<double(const Point&)>& f);
};

/// Kernel G of a group convolution, homogeneous of degree alpha - 6 under
/// the dilations: G(delta_mu z) = mu^(alpha - 6) G(z).
struct HomogeneousKernel {
    std::string name;
    std::function<double(const Point&)> evaluator;
    double alpha = 0.0;

    double operator()(const Point& z) const { return evaluator(z); }
};

/// Gamma itself, alpha = 2.
HomogeneousKernel gamma_kernel();

/// -d_xi Gamma(z, zeta) written as a function of zeta^{-1} o z, alpha = 1.
/// Convolving f with it gives the potential of d_xi f after integrating by
/// parts against compactly supported f.
HomogeneousKernel gamma_dx_kernel();

/// Kernel by CLI name: "gamma" or "gamma-dx". Throws std::invalid_argument.
HomogeneousKernel kernel_by_name(const std::string& name);

/// Largest relative deviation from exact homogeneity over seeded samples
/// with t in [0.05, 2], |x|, |y| <= 1 and mu in [1/4, 4]. Pairs where both
/// sides underflow below 1e-200 are skipped.
double homogeneity_defect(const HomogeneousKernel& kernel, int samples = 1000, std::uint64_t seed = 42);

/// Midpoint-rule group convolution on the input grid:
///   out(z) = sum over cells zeta of G(zeta^{-1} o z) f(zeta) |cell|,
/// skipping the cell containing z. Kernels vanish for t <= tau, so only
/// strictly earlier time slices contribute. For a fixed source column xi the
/// kernel depends only on the index offsets, so it is tabulated once per
/// column. Deterministic for any thread count.
SpaceTimeField convolve(const HomogeneousKernel& kernel, const SpaceTimeField& f);

/// convolve() over several fields on one grid, sharing the kernel tables.
std::vector<SpaceTimeField> convolve(const HomogeneousKernel& kernel, const std::vector<SpaceTimeField>& fs);

/// Riemann-sum L^p norm over the whole grid, or over the cells whose centers
/// lie in `region`. p = infinity gives the max. Throws std::invalid_argument
/// when p < 1.
double lp_norm(const SpaceTimeField& f, double p, const std::optional<BallSpec>& region = std::nullopt);

/// The target exponent q of 1/q = 1/p - alpha/6. Throws std::invalid_argument
/// unless p >= 1 and the right-hand side is positive.
double target_exponent(double alpha, double p);

/// ||G_f||_{L^q} / ||f||_{L^p}. Throws std::invalid_argument when q differs
/// from target_exponent(alpha, p) by more than 1e-9 relative, or when f == 0.
double gain_ratio(const HomogeneousKernel& kernel, const SpaceTimeField& f, double p, double q);

/// gain_ratio over a family, sharing the kernel tables.
std::vector<double> gain_ratios(const HomogeneousKernel& kernel, const std::vector<SpaceTimeField>& fs, double p,
                                double q);

/// Seeded family of smooth compactly supported bumps
///   A prod_v max(0, 1 - ((v - c_v)/r_v)^2)^3
/// with centers and radii chosen so that every support lies in the inner
/// half of the grid in x and y and in the first half in t.
std::vector<SpaceTimeField> bump_family(const SpaceTimeGrid& grid, int count, std::uint64_t seed = 42);

}  // namespace kolmo
