#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kolmo/coefficients.hpp"
#include "kolmo/dsl.hpp"
#include "kolmo/group.hpp"

namespace kolmo {

using ScalarFn = std::function<double(const Point&)>;

/// Cell-centered grid on [x0,x1] x [y0,y1] and time horizon [t0,t1].
struct Grid {
    double x0 = -1.0, x1 = 1.0;
    double y0 = -1.0, y1 = 1.0;
    int nx = 64, ny = 64;
    double t0 = 0.0, t1 = 1.0;

    double dx() const { return (x1 - x0) / nx; }
    double dy() const { return (y1 - y0) / ny; }
    double xc(int i) const { return x0 + (i + 0.5) * dx(); }
    double yc(int j) const { return y0 + (j + 0.5) * dy(); }
    Box box() const { return {x0, x1, y0, y1, t0, t1}; }

    /// Throws std::invalid_argument unless nx, ny >= 4, the ranges are
    /// nonempty and t1 > t0.
    void check() const;

    /// Resolving the cube C_dx needs dy <= 8 dx^3; returns a warning otherwise.
    std::optional<std::string> anisotropy_advisory() const;

    Grid refined(int x_factor, int y_factor) const;
};

/// One time level of cell values, row-major in x: value(i, j) = v[i * ny + j].
struct Field {
    int nx = 0, ny = 0;
    double t = 0.0;
    std::vector<double> v;

    double operator()(int i, int j) const { return v[static_cast<std::size_t>(i) * ny + j]; }
    double& operator()(int i, int j) { return v[static_cast<std::size_t>(i) * ny + j]; }
};

enum class EquationClass { L0, L1, L2, General };
enum class BoundaryKind { Dirichlet, PeriodicY };

/// x-boundaries are always Dirichlet; y-boundaries are Dirichlet or periodic.
/// Dirichlet data is imposed through ghost cells whose value is the boundary
/// function at the ghost-cell center.
struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::Dirichlet;
    ScalarFn value = [](const Point&) { return 0.0; };
};

struct ProblemSpec {
    Grid grid;
    SolverCoefficients coefficients;
    ScalarFn initial;
    BoundaryCondition boundary;
    EquationClass equation_class = EquationClass::General;
    /// Times in (t0, t1] to record besides t0 and t1.
    std::vector<double> output_times;
    bool record_every_step = false;
    /// Upper bound on the step; 0 means cfl_dt alone.
    double dt_max = 0.0;
};

/// Builds a spec from DSL expressions. Throws std::invalid_argument when the
/// coefficients contradict the class (L0: a=1, b0=0, b=x; L1: b0=0, b=x;
/// L2: b=x), judged on sampled values. `boundary` is ignored for PeriodicY
/// y-boundaries except on the x-boundaries.
ProblemSpec make_problem(const Grid& grid, const CoefficientSet& cs, EquationClass cls,
                         const dsl::Expr& initial, const dsl::Expr& boundary, BoundaryKind kind);

class InstabilityError : public std::runtime_error {
public:
    InstabilityError(double t, const std::string& message);
    double time() const noexcept { return t_; }

private:
    double t_;
};

/// Sampled space-time solution. Level k holds the field at times[k].
struct Trajectory {
    Grid grid;
    bool periodic_y = false;
    std::vector<double> times;
    std::vector<Field> levels;

    /// Trilinear interpolation between cell centers and recorded times.
    /// Throws std::out_of_range outside the hull of the samples (periodic
    /// trajectories wrap in y).
    double sample(const Point& z) const;
    bool covers(const Point& z) const;
};

struct SolveStats {
    long steps = 0;
    double dt = 0.0;
    long upwind_drift_cells = 0;  // cells where the Peclet switch chose upwinding
};

/// Explicit step bound. With sups over validation samples of the grid box and
/// all cell centers at 9 times:
///   min(0.9 min(dx^2/(2 sup a), dy/sup|b|, dx/sup|b0|),
///       0.98 / (2 sup a/dx^2 + sup|b|/dy + sup|b0|/dx)).
/// The second term keeps every stencil weight nonnegative.
double cfl_dt(const Grid& grid, const SolverCoefficients& cs, int samples = 10000);
double cfl_dt(const Grid& grid, const CoefficientSet& cs, int samples = 10000);

/// Explicit Euler update for one problem, with coefficient tables cached
/// when they do not depend on t.
class Stepper {
public:
    explicit Stepper(const ProblemSpec& spec);

    /// u^{n+1} from u^n = u at time u.t with step dt. Throws
    /// std::invalid_argument if a <= 0 at some cell.
    Field step(const Field& u, double dt);

    /// d/dt of sum(u) dx dy through the x-boundary faces, for the state u.
    double boundary_flux(const Field& u);

    long upwind_drift_cells() const { return upwind_cells_; }

private:
    void refresh(double t);

    const ProblemSpec& spec_;
    Grid g_;
    bool initialized_ = false;
    double cached_t_ = 0.0;
    std::vector<double> a_face_;  // (nx + 1) * ny
    std::vector<double> b0_;      // nx * ny, zeroed where upwinded
    std::vector<double> b0_up_;   // nx * ny, nonzero only where upwinded
    std::vector<double> b_;       // nx * ny
    std::vector<double> ghost_x_lo_, ghost_x_hi_;  // ny
    std::vector<double> ghost_y_lo_, ghost_y_hi_;  // nx
    long upwind_cells_ = 0;
};

Field initial_field(const ProblemSpec& spec);

/// Convenience wrapper: one step of the problem's scheme.
Field step(const ProblemSpec& spec, const Field& u, double dt);

/// Called with the initial field and with the state after every step.
using StepObserver = std::function<void(const Field&)>;

/// Marches from t0 to t1 landing exactly on every output time. Throws
/// InstabilityError on NaN/Inf or when max|u| exceeds 10 times the largest
/// initial/boundary magnitude.
Trajectory solve(const ProblemSpec& spec, SolveStats* stats = nullptr,
                 const StepObserver& observer = nullptr);

/// Streaming quadrature of the weak form
///   int phi (b0 ux + b uy) + u phi_t - a phi_x ux
/// over the levels passed to observe() in increasing time (trapezoid in
/// time, centered differences of u, harmonic face values of a, and phi_x
/// from differences of phi between neighboring cells). Feeding every solver
/// step avoids time-quadrature error at jumps of the coefficients.
class WeakResidual {
public:
    WeakResidual(const Grid& grid, bool periodic_y, const SolverCoefficients& cs, dsl::Expr phi);

    void observe(const Field& u);

    /// Throws std::invalid_argument when phi is not negligible on the
    /// boundary ring of some level or anywhere on the first/last level, or
    /// when fewer than two levels were observed.
    double value() const;

private:
    double level_sum(const Field& u);

    Grid g_;
    bool periodic_;
    SolverCoefficients cs_;
    dsl::Expr phi_;
    std::vector<double> phi_cells_, a_cells_, b0_cells_, b_cells_;
    bool coeff_cached_ = false;
    int levels_ = 0;
    double prev_t_ = 0.0, prev_sum_ = 0.0, total_ = 0.0;
    double phi_max_ = 0.0, phi_edge_ = 0.0, last_level_max_ = 0.0;
};

/// WeakResidual over the recorded levels of a trajectory.
double weak_residual(const Trajectory& traj, const SolverCoefficients& cs, const dsl::Expr& phi);

struct ConvergenceRow {
    int nx = 0, ny = 0;
    double h = 0.0;
    double max_error = 0.0;
    double l2_error = 0.0;
    double order_max = 0.0;  // log2 ratio against the previous row; 0 for the first
    double order_l2 = 0.0;
};

/// Per-level refinement factors. The operator is homogeneous with y ~ x^3,
/// so refining y faster than x (y_factor = 4 keeps dy ~ dx^2) keeps the
/// upwind y error from masking the x error.
struct Refinement {
    int x_factor = 2;
    int y_factor = 2;
};

/// Solves on grids refined k times, k = 0..levels-1, and compares the final
/// level against `exact` when given, else against the finest run restricted
/// by block averaging (the finest row is then omitted). Orders are
/// log2(error ratio) per halving of dx.
std::vector<ConvergenceRow> convergence_study(const ProblemSpec& base, int levels,
                                              const ScalarFn& exact = nullptr,
                                              Refinement refinement = {});

}  // namespace kolmo
