#include "kolmo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kolmo/parallel.hpp"

namespace kolmo {

void Grid::check() const {
    if (nx < 4 || ny < 4) throw std::invalid_argument("grid: nx and ny must be >= 4");
    if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("grid: empty spatial range");
    if (!(t1 > t0)) throw std::invalid_argument("grid: t1 must exceed t0");
}

std::optional<std::string> Grid::anisotropy_advisory() const {
    double h = dx();
    if (dy() > 8.0 * h * h * h) {
        std::ostringstream os;
        os << "dy = " << dy() << " exceeds 8 dx^3 = " << 8.0 * h * h * h
           << "; group balls of radius dx are not resolved in y";
        return os.str();
    }
    return std::nullopt;
}

Grid Grid::refined(int x_factor, int y_factor) const {
    Grid g = *this;
    g.nx *= x_factor;
    g.ny *= y_factor;
    return g;
}

InstabilityError::InstabilityError(double t, const std::string& message)
    : std::runtime_error("instability at t = " + std::to_string(t) + ": " + message), t_(t) {}

namespace {

bool same_values(const dsl::Expr& e, double expected_const, bool expect_x, const Box& box) {
    for (int i = 1; i <= 64; ++i) {
        Point z = halton_point(box, static_cast<std::uint64_t>(i));
        double want = expect_x ? z.x : expected_const;
        if (std::abs(e.eval(z) - want) > 1e-14 * (1.0 + std::abs(want))) return false;
    }
    return true;
}

}  // namespace

ProblemSpec make_problem(const Grid& grid, const CoefficientSet& cs, EquationClass cls,
                         const dsl::Expr& initial, const dsl::Expr& boundary, BoundaryKind kind) {
    grid.check();
    Box box = grid.box();
    bool b_is_x = same_values(cs.b, 0.0, true, box);
    bool b0_zero = same_values(cs.b0, 0.0, false, box);
    bool a_one = same_values(cs.a, 1.0, false, box);
    switch (cls) {
        case EquationClass::L0:
            if (!(a_one && b0_zero && b_is_x))
                throw std::invalid_argument("class L0 requires a = 1, b0 = 0, b = x");
            break;
        case EquationClass::L1:
            if (!(b0_zero && b_is_x)) throw std::invalid_argument("class L1 requires b0 = 0, b = x");
            break;
        case EquationClass::L2:
            if (!b_is_x) throw std::invalid_argument("class L2 requires b = x");
            break;
        case EquationClass::General: break;
    }
    ProblemSpec spec;
    spec.grid = grid;
    spec.coefficients = SolverCoefficients::from_set(cs);
    spec.initial = [initial](const Point& z) { return initial.eval(z); };
    spec.boundary.kind = kind;
    spec.boundary.value = [boundary](const Point& z) { return boundary.eval(z); };
    spec.equation_class = cls;
    return spec;
}

bool Trajectory::covers(const Point& z) const {
    if (times.empty()) return false;
    bool x_ok = z.x >= grid.xc(0) && z.x <= grid.xc(grid.nx - 1);
    bool y_ok = periodic_y || (z.y >= grid.yc(0) && z.y <= grid.yc(grid.ny - 1));
    bool t_ok = z.t >= times.front() && z.t <= times.back();
    return x_ok && y_ok && t_ok;
}

double Trajectory::sample(const Point& z) const {
    if (!covers(z)) throw std::out_of_range("trajectory: point outside the sampled region");
    const int nx = grid.nx, ny = grid.ny;
    double fx = (z.x - grid.xc(0)) / grid.dx();
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx - 2);
    double wx = fx - i;

    double fy = (z.y - grid.yc(0)) / grid.dy();
    int j0, j1;
    double wy;
    if (periodic_y) {
        double fl = std::floor(fy);
        wy = fy - fl;
        long jj = static_cast<long>(fl) % ny;
        if (jj < 0) jj += ny;
        j0 = static_cast<int>(jj);
        j1 = (j0 + 1) % ny;
    } else {
        j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, ny - 2);
        j1 = j0 + 1;
        wy = fy - j0;
    }

    auto bilinear = [&](const Field& f) {
        double v00 = f(i, j0), v01 = f(i, j1), v10 = f(i + 1, j0), v11 = f(i + 1, j1);
        return (1 - wx) * ((1 - wy) * v00 + wy * v01) + wx * ((1 - wy) * v10 + wy * v11);
    };
    if (times.size() == 1) return bilinear(levels[0]);
    auto it = std::upper_bound(times.begin(), times.end(), z.t);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    k = std::min(k, times.size() - 2);
    double span = times[k + 1] - times[k];
    double wt = span > 0 ? (z.t - times[k]) / span : 0.0;
    double lo = bilinear(levels[k]);
    if (wt == 0.0) return lo;
    return (1 - wt) * lo + wt * bilinear(levels[k + 1]);
}

double cfl_dt(const Grid& grid, const SolverCoefficients& cs, int samples) {
    grid.check();
    double sa = 0.0, sb = 0.0, sb0 = 0.0;
    auto take = [&](const Point& z) {
        sa = std::max(sa, cs.a(z));
        sb = std::max(sb, std::abs(cs.b(z)));
        sb0 = std::max(sb0, std::abs(cs.b0(z)));
    };
    Box box = grid.box();
    for (int i = 1; i <= samples; ++i) take(halton_point(box, static_cast<std::uint64_t>(i)));
    bool any_t = cs.a.time_dependent || cs.b.time_dependent || cs.b0.time_dependent;
    int nt = any_t ? 9 : 1;
    for (int k = 0; k < nt; ++k) {
        double t = grid.t0 + (grid.t1 - grid.t0) * k / 8.0;
        for (int i = 0; i < grid.nx; ++i) {
            for (int j = 0; j < grid.ny; ++j) take({grid.xc(i), grid.yc(j), t});
        }
    }
    if (!(sa > 0.0)) throw std::invalid_argument("cfl_dt: diffusion coefficient must be positive");
    double dx = grid.dx(), dy = grid.dy();
    double bound = dx * dx / (2.0 * sa);
    if (sb > 0.0) bound = std::min(bound, dy / sb);
    if (sb0 > 0.0) bound = std::min(bound, dx / sb0);
    double monotone = 0.98 / (2.0 * sa / (dx * dx) + sb / dy + sb0 / dx);
    return std::min(0.9 * bound, monotone);
}

double cfl_dt(const Grid& grid, const CoefficientSet& cs, int samples) {
    return cfl_dt(grid, SolverCoefficients::from_set(cs), samples);
}

Stepper::Stepper(const ProblemSpec& spec) : spec_(spec), g_(spec.grid) {
    g_.check();
    std::size_t n = static_cast<std::size_t>(g_.nx) * g_.ny;
    a_face_.assign(static_cast<std::size_t>(g_.nx + 1) * g_.ny, 0.0);
    b0_.assign(n, 0.0);
    b0_up_.assign(n, 0.0);
    b_.assign(n, 0.0);
    ghost_x_lo_.assign(g_.ny, 0.0);
    ghost_x_hi_.assign(g_.ny, 0.0);
    ghost_y_lo_.assign(g_.nx, 0.0);
    ghost_y_hi_.assign(g_.nx, 0.0);
}

void Stepper::refresh(double t) {
    const int nx = g_.nx, ny = g_.ny;
    const double dx = g_.dx(), dy = g_.dy();
    const auto& cs = spec_.coefficients;
    bool first = !initialized_;
    bool new_t = first || t != cached_t_;

    if (new_t) {
        for (int j = 0; j < ny; ++j) {
            ghost_x_lo_[j] = spec_.boundary.value({g_.x0 - 0.5 * dx, g_.yc(j), t});
            ghost_x_hi_[j] = spec_.boundary.value({g_.x1 + 0.5 * dx, g_.yc(j), t});
        }
        if (spec_.boundary.kind == BoundaryKind::Dirichlet) {
            for (int i = 0; i < nx; ++i) {
                ghost_y_lo_[i] = spec_.boundary.value({g_.xc(i), g_.y0 - 0.5 * dy, t});
                ghost_y_hi_[i] = spec_.boundary.value({g_.xc(i), g_.y1 + 0.5 * dy, t});
            }
        }
    }

    bool redo_a = first || (new_t && cs.a.time_dependent);
    bool redo_b0 = redo_a || (new_t && cs.b0.time_dependent);
    bool redo_b = first || (new_t && cs.b.time_dependent);

    if (redo_a) {
        // Cell values including one ghost column per side, then harmonic faces.
        std::vector<double> cell(static_cast<std::size_t>(nx + 2) * ny);
        for (int ii = 0; ii < nx + 2; ++ii) {
            double x = g_.x0 + (ii - 0.5) * dx;
            for (int j = 0; j < ny; ++j) {
                double a = cs.a({x, g_.yc(j), t});
                if (!(a > 0.0)) {
                    throw std::invalid_argument("solver: diffusion coefficient must be positive");
                }
                cell[static_cast<std::size_t>(ii) * ny + j] = a;
            }
        }
        for (int f = 0; f <= nx; ++f) {
            for (int j = 0; j < ny; ++j) {
                double al = cell[static_cast<std::size_t>(f) * ny + j];
                double ar = cell[static_cast<std::size_t>(f + 1) * ny + j];
                a_face_[static_cast<std::size_t>(f) * ny + j] = 2.0 * al * ar / (al + ar);
            }
        }
    }
    if (redo_b0) {
        long upwind = 0;
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                std::size_t c = static_cast<std::size_t>(i) * ny + j;
                double b0 = cs.b0({g_.xc(i), g_.yc(j), t});
                double amin = std::min(a_face_[c], a_face_[c + ny]);
                if (std::abs(b0) * dx <= 2.0 * amin) {
                    b0_[c] = b0;
                    b0_up_[c] = 0.0;
                } else {
                    b0_[c] = 0.0;
                    b0_up_[c] = b0;
                    ++upwind;
                }
            }
        }
        upwind_cells_ = std::max(upwind_cells_, upwind);
    }
    if (redo_b) {
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                b_[static_cast<std::size_t>(i) * ny + j] = cs.b({g_.xc(i), g_.yc(j), t});
            }
        }
    }
    initialized_ = true;
    cached_t_ = t;
}

Field Stepper::step(const Field& u, double dt) {
    refresh(u.t);
    const int nx = g_.nx, ny = g_.ny;
    const double inv_dx = 1.0 / g_.dx(), inv_dy = 1.0 / g_.dy();
    const double inv_dx2 = inv_dx * inv_dx;
    const bool periodic = spec_.boundary.kind == BoundaryKind::PeriodicY;
    Field out{nx, ny, u.t + dt, std::vector<double>(u.v.size())};

    parallel_for(nx, [&](int lo, int hi) {
        for (int i = lo; i < hi; ++i) {
            const double* row = &u.v[static_cast<std::size_t>(i) * ny];
            const double* left = i > 0 ? row - ny : nullptr;
            const double* right = i < nx - 1 ? row + ny : nullptr;
            const double* af_l = &a_face_[static_cast<std::size_t>(i) * ny];
            const double* af_r = af_l + ny;
            for (int j = 0; j < ny; ++j) {
                std::size_t c = static_cast<std::size_t>(i) * ny + j;
                double uc = row[j];
                double ul = left ? left[j] : ghost_x_lo_[j];
                double ur = right ? right[j] : ghost_x_hi_[j];
                double ud, uu;
                if (periodic) {
                    ud = row[j == 0 ? ny - 1 : j - 1];
                    uu = row[j == ny - 1 ? 0 : j + 1];
                } else {
                    ud = j > 0 ? row[j - 1] : ghost_y_lo_[i];
                    uu = j < ny - 1 ? row[j + 1] : ghost_y_hi_[i];
                }
                double rate = (af_r[j] * (ur - uc) - af_l[j] * (uc - ul)) * inv_dx2;
                rate += b0_[c] * (ur - ul) * 0.5 * inv_dx;
                double bu = b0_up_[c];
                rate += bu > 0 ? bu * (ur - uc) * inv_dx : bu * (uc - ul) * inv_dx;
                double b = b_[c];
                rate += b > 0 ? b * (uu - uc) * inv_dy : b * (uc - ud) * inv_dy;
                out.v[c] = uc + dt * rate;
            }
        }
    });
    return out;
}

double Stepper::boundary_flux(const Field& u) {
    refresh(u.t);
    const int nx = g_.nx, ny = g_.ny;
    double dx = g_.dx(), dy = g_.dy();
    double sum = 0.0;
    for (int j = 0; j < ny; ++j) {
        double in_lo = a_face_[j] * (ghost_x_lo_[j] - u(0, j)) / dx;
        double in_hi = a_face_[static_cast<std::size_t>(nx) * ny + j] * (ghost_x_hi_[j] - u(nx - 1, j)) / dx;
        sum += in_lo + in_hi;
    }
    return sum * dy;
}

Field initial_field(const ProblemSpec& spec) {
    const Grid& g = spec.grid;
    g.check();
    Field f{g.nx, g.ny, g.t0, std::vector<double>(static_cast<std::size_t>(g.nx) * g.ny)};
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) f(i, j) = spec.initial({g.xc(i), g.yc(j), g.t0});
    }
    return f;
}

Field step(const ProblemSpec& spec, const Field& u, double dt) {
    Stepper s(spec);
    return s.step(u, dt);
}

namespace {

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) {
        if (!std::isfinite(x)) return std::numeric_limits<double>::infinity();
        m = std::max(m, std::abs(x));
    }
    return m;
}

double boundary_max(const ProblemSpec& spec, double t) {
    const Grid& g = spec.grid;
    double m = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        m = std::max(m, std::abs(spec.boundary.value({g.x0 - 0.5 * g.dx(), g.yc(j), t})));
        m = std::max(m, std::abs(spec.boundary.value({g.x1 + 0.5 * g.dx(), g.yc(j), t})));
    }
    if (spec.boundary.kind == BoundaryKind::Dirichlet) {
        for (int i = 0; i < g.nx; ++i) {
            m = std::max(m, std::abs(spec.boundary.value({g.xc(i), g.y0 - 0.5 * g.dy(), t})));
            m = std::max(m, std::abs(spec.boundary.value({g.xc(i), g.y1 + 0.5 * g.dy(), t})));
        }
    }
    return m;
}

}  // namespace

Trajectory solve(const ProblemSpec& spec, SolveStats* stats, const StepObserver& observer) {
    const Grid& g = spec.grid;
    g.check();
    double dt_cap = cfl_dt(g, spec.coefficients);
    if (spec.dt_max > 0.0) dt_cap = std::min(dt_cap, spec.dt_max);

    std::vector<double> targets;
    for (double t : spec.output_times) {
        if (t > g.t0 && t < g.t1) targets.push_back(t);
    }
    targets.push_back(g.t1);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    Trajectory traj;
    traj.grid = g;
    traj.periodic_y = spec.boundary.kind == BoundaryKind::PeriodicY;
    Field u = initial_field(spec);
    double reference = std::max(max_abs(u.v), boundary_max(spec, g.t0));
    if (!std::isfinite(reference)) throw InstabilityError(g.t0, "non-finite initial data");
    traj.times.push_back(u.t);
    traj.levels.push_back(u);
    if (observer) observer(u);

    Stepper stepper(spec);
    long steps = 0;
    double used_dt = 0.0;
    double t = g.t0;
    for (double target : targets) {
        double span = target - t;
        long n = static_cast<long>(std::ceil(span / dt_cap * (1.0 - 1e-12)));
        n = std::max(1L, n);
        double h = span / static_cast<double>(n);
        used_dt = std::max(used_dt, h);
        for (long k = 0; k < n; ++k) {
            u = stepper.step(u, h);
            u.t = k + 1 == n ? target : t + (k + 1) * h;
            ++steps;
            if (observer) observer(u);
            reference = std::max(reference, boundary_max(spec, u.t));
            double m = max_abs(u.v);
            if (!std::isfinite(m)) throw InstabilityError(u.t, "non-finite value");
            if (m > 10.0 * reference && m > 0.0) {
                std::ostringstream os;
                os << "max|u| = " << m << " exceeds 10x the data bound " << reference;
                throw InstabilityError(u.t, os.str());
            }
            if (spec.record_every_step && k + 1 < n) {
                traj.times.push_back(u.t);
                traj.levels.push_back(u);
            }
        }
        t = target;
        traj.times.push_back(u.t);
        traj.levels.push_back(u);
    }
    if (stats) {
        stats->steps = steps;
        stats->dt = used_dt;
        stats->upwind_drift_cells = stepper.upwind_drift_cells();
    }
    return traj;
}

WeakResidual::WeakResidual(const Grid& grid, bool periodic_y, const SolverCoefficients& cs, dsl::Expr phi)
    : g_(grid), periodic_(periodic_y), cs_(cs), phi_(std::move(phi)) {
    g_.check();
    std::size_t n = static_cast<std::size_t>(g_.nx) * g_.ny;
    phi_cells_.assign(n, 0.0);
    a_cells_.assign(n, 0.0);
    b0_cells_.assign(n, 0.0);
    b_cells_.assign(n, 0.0);
}

double WeakResidual::level_sum(const Field& u) {
    const int nx = g_.nx, ny = g_.ny;
    const double dx = g_.dx(), dy = g_.dy();
    const double t = u.t;
    const double ht = 1e-6 * (g_.t1 - g_.t0);
    bool time_dep = cs_.a.time_dependent || cs_.b0.time_dependent || cs_.b.time_dependent;
    if (!coeff_cached_ || time_dep) {
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                std::size_t c = static_cast<std::size_t>(i) * ny + j;
                Point z{g_.xc(i), g_.yc(j), t};
                a_cells_[c] = cs_.a(z);
                b0_cells_[c] = cs_.b0(z);
                b_cells_[c] = cs_.b(z);
            }
        }
        coeff_cached_ = true;
    }

    double level_max = 0.0;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            double p = phi_.eval({g_.xc(i), g_.yc(j), t});
            phi_cells_[static_cast<std::size_t>(i) * ny + j] = p;
            double ap = std::abs(p);
            level_max = std::max(level_max, ap);
            bool ring = i == 0 || i == nx - 1 || (!periodic_ && (j == 0 || j == ny - 1));
            if (ring) phi_edge_ = std::max(phi_edge_, ap);
        }
    }
    phi_max_ = std::max(phi_max_, level_max);
    if (levels_ == 0) phi_edge_ = std::max(phi_edge_, level_max);
    last_level_max_ = level_max;

    int j_lo = periodic_ ? 0 : 1;
    int j_hi = periodic_ ? ny : ny - 1;
    double sum = 0.0;
    for (int i = 1; i < nx - 1; ++i) {
        double x = g_.xc(i);
        for (int j = j_lo; j < j_hi; ++j) {
            std::size_t c = static_cast<std::size_t>(i) * ny + j;
            double p = phi_cells_[c];
            double ux = (u(i + 1, j) - u(i - 1, j)) / (2 * dx);
            int jd = j == 0 ? ny - 1 : j - 1;
            int ju = j == ny - 1 ? 0 : j + 1;
            double uy = (u(i, ju) - u(i, jd)) / (2 * dy);
            double drift = p * (b0_cells_[c] * ux + b_cells_[c] * uy);
            double y = g_.yc(j);
            double pt = (phi_.eval({x, y, t + ht}) - phi_.eval({x, y, t - ht})) / (2 * ht);
            sum += drift + u(i, j) * pt;
        }
    }
    for (int i = 0; i < nx - 1; ++i) {
        for (int j = j_lo; j < j_hi; ++j) {
            std::size_t c = static_cast<std::size_t>(i) * ny + j;
            double px = (phi_cells_[c + ny] - phi_cells_[c]) / dx;
            if (px == 0.0) continue;
            double al = a_cells_[c], ar = a_cells_[c + ny];
            double af = 2 * al * ar / (al + ar);
            sum -= af * px * (u(i + 1, j) - u(i, j)) / dx;
        }
    }
    return sum * dx * dy;
}

void WeakResidual::observe(const Field& u) {
    if (u.nx != g_.nx || u.ny != g_.ny) throw std::invalid_argument("weak residual: field/grid mismatch");
    if (levels_ > 0 && !(u.t > prev_t_)) throw std::invalid_argument("weak residual: times must increase");
    double s = level_sum(u);
    if (levels_ > 0) total_ += 0.5 * (u.t - prev_t_) * (prev_sum_ + s);
    prev_sum_ = s;
    prev_t_ = u.t;
    ++levels_;
}

double WeakResidual::value() const {
    if (levels_ < 2) throw std::invalid_argument("weak residual: need at least two time levels");
    if (phi_max_ == 0.0) return 0.0;
    double edge = std::max(phi_edge_, last_level_max_);
    if (edge > 1e-12 * phi_max_) {
        throw std::invalid_argument("weak residual: test function is not compactly supported in the domain");
    }
    return total_;
}

double weak_residual(const Trajectory& traj, const SolverCoefficients& cs, const dsl::Expr& phi) {
    WeakResidual w(traj.grid, traj.periodic_y, cs, phi);
    for (const Field& f : traj.levels) w.observe(f);
    return w.value();
}

std::vector<ConvergenceRow> convergence_study(const ProblemSpec& base, int levels, const ScalarFn& exact,
                                              Refinement refinement) {
    if (levels < 2) throw std::invalid_argument("convergence_study: need at least two levels");
    if (refinement.x_factor < 2 || refinement.y_factor < 1) {
        throw std::invalid_argument("convergence_study: bad refinement factors");
    }
    std::vector<Field> finals;
    std::vector<Grid> grids;
    for (int k = 0; k < levels; ++k) {
        ProblemSpec spec = base;
        int fx = 1, fy = 1;
        for (int r = 0; r < k; ++r) {
            fx *= refinement.x_factor;
            fy *= refinement.y_factor;
        }
        spec.grid = base.grid.refined(fx, fy);
        spec.record_every_step = false;
        spec.output_times.clear();
        Trajectory tr = solve(spec);
        finals.push_back(tr.levels.back());
        grids.push_back(spec.grid);
    }
    std::vector<ConvergenceRow> rows;
    int compared = exact ? levels : levels - 1;
    const Field& finest = finals.back();
    const Grid& finest_grid = grids.back();
    for (int k = 0; k < compared; ++k) {
        const Grid& g = grids[k];
        const Field& u = finals[k];
        double emax = 0.0, e2 = 0.0;
        int rx = finest_grid.nx / g.nx;
        int ry = finest_grid.ny / g.ny;
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) {
                double ref;
                if (exact) {
                    ref = exact({g.xc(i), g.yc(j), g.t1});
                } else {
                    double s = 0.0;
                    for (int a = 0; a < rx; ++a) {
                        for (int b = 0; b < ry; ++b) s += finest(i * rx + a, j * ry + b);
                    }
                    ref = s / (rx * ry);
                }
                double e = std::abs(u(i, j) - ref);
                emax = std::max(emax, e);
                e2 += e * e;
            }
        }
        ConvergenceRow row;
        row.nx = g.nx;
        row.ny = g.ny;
        row.h = g.dx();
        row.max_error = emax;
        row.l2_error = std::sqrt(e2 * g.dx() * g.dy());
        if (!rows.empty()) {
            double halvings = std::log2(rows.back().h / row.h);
            row.order_max = std::log2(rows.back().max_error / emax) / halvings;
            row.order_l2 = std::log2(rows.back().l2_error / row.l2_error) / halvings;
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace kolmo
