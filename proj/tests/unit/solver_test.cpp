#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kolmo/coefficients.hpp"
#include "kolmo/gamma.hpp"
#include "kolmo/solver.hpp"

namespace kolmo {
namespace {

using dsl::Expr;

ProblemSpec problem(const Grid& g, const std::string& a, const std::string& b0, const std::string& b,
                    const std::string& init, const std::string& boundary,
                    BoundaryKind kind = BoundaryKind::Dirichlet) {
    return make_problem(g, CoefficientSet::parse(a, b0, b, 0.25), EquationClass::General, Expr::parse(init),
                        Expr::parse(boundary), kind);
}

double field_min(const Field& f) { return *std::min_element(f.v.begin(), f.v.end()); }
double field_max(const Field& f) { return *std::max_element(f.v.begin(), f.v.end()); }

TEST(Cfl, DiffusiveExample) {
    Grid g{-1, 1, -1, 1, 200, 200, 0, 1};
    EXPECT_NEAR(cfl_dt(g, CoefficientSet{}), 4.5e-5, 1e-18);
}

TEST(Cfl, DoublingNxQuartersDiffusiveBound) {
    Grid coarse{-1, 1, -1, 1, 100, 200, 0, 1};
    Grid fine{-1, 1, -1, 1, 200, 200, 0, 1};
    EXPECT_NEAR(cfl_dt(fine, CoefficientSet{}) / cfl_dt(coarse, CoefficientSet{}), 0.25, 1e-12);
}

TEST(Cfl, WiderXRangeTightensTransportBound) {
    // dx = 0.5 keeps diffusion harmless; dy = 1e-3 makes transport binding.
    Grid narrow{-1, 1, -1, 1, 4, 2000, 0, 1};
    Grid wide{-2, 2, -1, 1, 8, 2000, 0, 1};
    CoefficientSet cs;
    double r = cfl_dt(wide, cs) / cfl_dt(narrow, cs);
    EXPECT_NEAR(r, 0.5, 1e-3);
    EXPECT_NEAR(cfl_dt(narrow, cs), 0.9e-3, 1e-6);
}

TEST(Grid, Invariants) {
    EXPECT_THROW((Grid{-1, 1, -1, 1, 3, 8, 0, 1}.check()), std::invalid_argument);
    EXPECT_THROW((Grid{-1, 1, -1, 1, 8, 8, 1, 1}.check()), std::invalid_argument);
    EXPECT_TRUE((Grid{-1, 1, -1, 1, 8, 8, 0, 1}.anisotropy_advisory().has_value()));
    EXPECT_FALSE((Grid{-1, 1, -1e-3, 1e-3, 8, 8, 0, 1}.anisotropy_advisory().has_value()));
}

TEST(Problem, ClassConsistency) {
    Grid g{-1, 1, -1, 1, 8, 8, 0, 1};
    auto mk = [&](const char* a, const char* b0, const char* b, EquationClass cls) {
        return make_problem(g, CoefficientSet::parse(a, b0, b, 0.25), cls, Expr::parse("0"), Expr::parse("0"),
                            BoundaryKind::Dirichlet);
    };
    EXPECT_NO_THROW(mk("1", "0", "x", EquationClass::L0));
    EXPECT_THROW(mk("2", "0", "x", EquationClass::L0), std::invalid_argument);
    EXPECT_NO_THROW(mk("2 + sin(x)", "0", "x", EquationClass::L1));
    EXPECT_THROW(mk("1", "0.1", "x", EquationClass::L1), std::invalid_argument);
    EXPECT_NO_THROW(mk("1", "cos(y)", "x", EquationClass::L2));
    EXPECT_THROW(mk("1", "0", "2*x", EquationClass::L2), std::invalid_argument);
    EXPECT_NO_THROW(mk("1", "0", "2*x", EquationClass::General));
}

TEST(Step, ConstantStateIsPreserved) {
    Grid g{-1, 1, -1, 1, 24, 24, 0, 0.05};
    auto spec = problem(g, "checkerboard(5, 0.1, 0.1, 0.1, 0.6, 1.5)", "0.7*sin(3*y)", "x + 0.1*sin(y)", "2",
                        "2");
    auto traj = solve(spec);
    for (double v : traj.levels.back().v) EXPECT_NEAR(v, 2.0, 1e-13);
}

TEST(Step, HeatModeDecaysWithFourierSymbol) {
    const double k = 2.0;
    const int nx = 64;
    Grid g{0, std::numbers::pi, -1, 1, nx, 8, 0, 1};
    ProblemSpec spec;
    spec.grid = g;
    spec.coefficients = {CoefficientField::constant(1.0), CoefficientField::constant(0.0),
                         CoefficientField::constant(0.0)};
    spec.initial = [k](const Point& z) { return std::sin(k * z.x); };
    spec.boundary = {BoundaryKind::Dirichlet, spec.initial};
    Field u0 = initial_field(spec);
    double dx = g.dx();
    for (double dt : {1e-4, 2e-4}) {
        Field u1 = step(spec, u0, dt);
        // Exact decay versus the scheme: dt^2 k^4 / 2 from time, dt k^4 dx^2 / 12 from space.
        double bound = 1.01 * (dt * dt * std::pow(k, 4) / 2 + dt * std::pow(k, 4) * dx * dx / 12);
        double err = 0.0;
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < g.ny; ++j) err = std::max(err, std::abs(u1(i, j) - std::exp(-k * k * dt) * u0(i, j)));
        }
        EXPECT_LE(err, bound) << "dt=" << dt;
        EXPECT_GT(err, 0.1 * bound) << "dt=" << dt;
    }
}

TEST(Step, ReversingDriftMirrorsTheYStencil) {
    Grid g{-1, 1, -1, 1, 20, 24, 0, 0.1};
    const std::string init = "exp(-8*(x^2 + (y - 0.2)^2))*(1 + 0.3*y)";
    const std::string mirrored = "exp(-8*(x^2 + (-y - 0.2)^2))*(1 - 0.3*y)";
    auto a = solve(problem(g, "1 + 0.3*cos(x)", "0", "x", init, "0"));
    auto b = solve(problem(g, "1 + 0.3*cos(x)", "0", "-x", mirrored, "0"));
    const Field& ua = a.levels.back();
    const Field& ub = b.levels.back();
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) EXPECT_NEAR(ua(i, j), ub(i, g.ny - 1 - j), 1e-14);
    }
}

TEST(Step, DiffusionMustBePositive) {
    Grid g{-1, 1, -1, 1, 8, 8, 0, 0.1};
    ProblemSpec spec;
    spec.grid = g;
    spec.coefficients = {CoefficientField::constant(0.0), CoefficientField::constant(0.0),
                         CoefficientField::constant(1.0)};
    spec.initial = [](const Point&) { return 1.0; };
    Field u0 = initial_field(spec);
    EXPECT_THROW(step(spec, u0, 1e-3), std::invalid_argument);
}

// Ten rough instances: checkerboard diffusion, bounded first-order drift (one
// strong enough to trigger the Peclet switch), nonnegative data.
class RoughInstance : public ::testing::TestWithParam<int> {};

TEST_P(RoughInstance, DiscreteMaximumPrinciple) {
    int seed = GetParam();
    Grid g{-1.5, 1.5, -1, 1, 32, 32, 0, 0.1};
    std::string a = "checkerboard(" + std::to_string(seed) + ", 0.15, 0.1, 0.05, 0.6, 1.5)";
    std::string b0 = seed == 9 ? "25*cos(2*x + y)" : "0.8*sin(" + std::to_string(seed + 1) + "*y)";
    auto spec = problem(g, a, b0, "x", "exp(-6*((x - 0.2)^2 + y^2))", "0");
    SolveStats stats;
    auto traj = solve(spec, &stats);
    double top = field_max(traj.levels.front());
    for (const Field& f : traj.levels) {
        EXPECT_GE(field_min(f), -1e-12 * top);
        EXPECT_LE(field_max(f), top * (1 + 1e-12));
    }
    if (seed == 9) {
        EXPECT_GT(stats.upwind_drift_cells, 0);
    }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RoughInstance, ::testing::Range(0, 10));

TEST(Step, MassChangeEqualsBoundaryFlux) {
    Grid g{-1.5, 1.5, -1, 1, 40, 32, 0, 0.1};
    auto spec = problem(g, "checkerboard(1, 0.2, 0.2, 1, 0.6, 1.5)", "0", "x", "exp(-3*x^2)*(1 + 0.5*sin(pi*y))",
                        "0", BoundaryKind::PeriodicY);
    Stepper stepper(spec);
    Field u = initial_field(spec);
    double dt = cfl_dt(g, spec.coefficients);
    double cell = g.dx() * g.dy();
    for (int n = 0; n < 50; ++n) {
        double flux = stepper.boundary_flux(u);
        double m0 = 0.0, m1 = 0.0;
        Field next = stepper.step(u, dt);
        next.t = u.t + dt;
        for (double v : u.v) m0 += v;
        for (double v : next.v) m1 += v;
        EXPECT_NEAR((m1 - m0) * cell, dt * flux, 1e-12);
        u = std::move(next);
    }
}

TEST(Solve, BitIdenticalReruns) {
    Grid g{-1, 1, -1, 1, 24, 24, 0, 0.05};
    auto spec = problem(g, "checkerboard(2, 0.1, 0.1, 0.02, 0.6, 1.5)", "0.3*x", "x + 0.1*sin(y)",
                        "exp(-4*(x^2 + y^2))", "0");
    spec.output_times = {0.01, 0.02};
    auto a = solve(spec);
    auto b = solve(spec);
    ASSERT_EQ(a.levels.size(), 4u);
    ASSERT_EQ(a.times, b.times);
    for (std::size_t k = 0; k < a.levels.size(); ++k) EXPECT_EQ(a.levels[k].v, b.levels[k].v);
}

TEST(Solve, LandsOnOutputTimes) {
    Grid g{-1, 1, -1, 1, 16, 16, 0, 0.05};
    auto spec = problem(g, "1", "0", "x", "0", "0");
    spec.output_times = {0.0123, 0.05, 0.2};
    auto traj = solve(spec);
    EXPECT_EQ(traj.times, (std::vector<double>{0.0, 0.0123, 0.05}));
}

TEST(Solve, FundamentalSolutionBenchmarkConverges) {
    // L0 with initial data Gamma(., 0.1) is solved exactly by Gamma(., t).
    Grid g{-2, 2, -0.25, 0.25, 16, 64, 0.1, 0.2};
    CoefficientSet cs;
    cs.mu = 0.25;
    Expr gamma_at = Expr::parse("sqrt(3)/(2*pi*t^2)*exp(-(x^2 + 3*x*y/t + 3*y^2/t^2)/t)");
    auto spec = make_problem(g, cs, EquationClass::L0, gamma_at, gamma_at, BoundaryKind::Dirichlet);
    auto rows = convergence_study(spec, 3, [](const Point& z) { return gamma_origin(z); }, {2, 4});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_LT(rows[1].max_error, rows[0].max_error);
    EXPECT_LT(rows[2].max_error, rows[1].max_error);
    EXPECT_GE(rows[2].order_max, 1.0);
}

TEST(Solve, TranslationCovarianceOfL0) {
    // v(x, y, t) = u(x - p, y - q + p t, t) solves L0 whenever u does.
    const double p = 0.3, q = 0.1;
    double previous = 1e9;
    for (int n : {32, 64}) {
        Grid g{-2.5, 2.5, -2, 2, n, n, 0, 0.1};
        CoefficientSet cs;
        cs.mu = 0.2;
        auto u_spec = make_problem(g, cs, EquationClass::L0, Expr::parse("exp(-4*(x^2 + y^2))"), Expr::parse("0"),
                                   BoundaryKind::Dirichlet);
        auto v_spec = make_problem(g, cs, EquationClass::L0, Expr::parse("exp(-4*((x - 0.3)^2 + (y - 0.1)^2))"),
                                   Expr::parse("0"), BoundaryKind::Dirichlet);
        auto u = solve(u_spec);
        auto v = solve(v_spec);
        double err = 0.0;
        const Field& vf = v.levels.back();
        double t = g.t1;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Point z{g.xc(i) - p, g.yc(j) - q + p * t, t};
                if (std::abs(z.x) > 1.5 || std::abs(z.y) > 1.2) continue;
                err = std::max(err, std::abs(vf(i, j) - u.sample(z)));
            }
        }
        EXPECT_LT(err, previous);
        EXPECT_LT(err, 0.1);
        previous = err;
    }
}

TEST(WeakResidual, ZeroTestFunction) {
    Grid g{-1, 1, -1, 1, 16, 16, 0, 0.05};
    auto spec = problem(g, "1", "0", "x", "exp(-4*x^2)", "0");
    auto traj = solve(spec);
    EXPECT_EQ(weak_residual(traj, spec.coefficients, Expr::parse("0")), 0.0);
}

TEST(WeakResidual, SupportViolationIsRejected) {
    Grid g{-1, 1, -1, 1, 16, 16, 0, 0.05};
    auto spec = problem(g, "1", "0", "x", "exp(-4*x^2)", "0");
    auto traj = solve(spec);
    EXPECT_THROW(weak_residual(traj, spec.coefficients, Expr::parse("exp(-x^2)")), std::invalid_argument);
}

TEST(WeakResidual, StreamingMatchesRecordedLevels) {
    Grid g{-1.6, 1.6, -0.8, 0.8, 24, 24, 0, 0.25};
    auto spec = problem(g, "1 + 0.3*sin(2*x)", "0.2*cos(x)", "x", "exp(-4*x^2)", "exp(-4*x^2)",
                        BoundaryKind::PeriodicY);
    spec.record_every_step = true;
    Expr phi = Expr::parse("max(0, 1 - (x/0.6)^2)^4*max(0, 1 - (y/0.4)^2)^4*max(0, 1 - ((t - 0.12)/0.07)^2)^4");
    WeakResidual streaming(g, true, spec.coefficients, phi);
    auto traj = solve(spec, nullptr, [&](const Field& u) { streaming.observe(u); });
    EXPECT_EQ(streaming.value(), weak_residual(traj, spec.coefficients, phi));
}

TEST(WeakResidual, DecreasesUnderRefinement) {
    Expr phi = Expr::parse("max(0, 1 - (x/0.6)^2)^4*max(0, 1 - (y/0.4)^2)^4*max(0, 1 - ((t - 0.12)/0.07)^2)^4");
    double previous = 1e9;
    for (int n : {16, 32, 64}) {
        Grid g{-1.6, 1.6, -0.8, 0.8, n, n, 0, 0.25};
        auto spec = problem(g, "1 + 0.3*sin(2*x)*cos(3*y)", "0.3*cos(x)", "x", "exp(-4*x^2)*(1 + 0.5*sin(pi*y/0.8))",
                            "exp(-4*x^2)*(1 + 0.5*sin(pi*y/0.8))", BoundaryKind::PeriodicY);
        WeakResidual w(g, true, spec.coefficients, phi);
        solve(spec, nullptr, [&](const Field& u) { w.observe(u); });
        double r = std::abs(w.value());
        EXPECT_LT(r, previous) << "n=" << n;
        previous = r;
    }
}

TEST(Trajectory, SampleReproducesCellValuesAndRejectsOutside) {
    Grid g{-1, 1, -1, 1, 8, 8, 0, 0.05};
    auto spec = problem(g, "1", "0", "x", "x + 2*y", "x + 2*y");
    auto traj = solve(spec);
    EXPECT_NEAR(traj.sample({g.xc(3), g.yc(4), 0.0}), g.xc(3) + 2 * g.yc(4), 1e-15);
    EXPECT_THROW(traj.sample({0.99, 0, 0.0}), std::out_of_range);
    EXPECT_THROW(traj.sample({0, 0, 0.06}), std::out_of_range);
}

}  // namespace
}  // namespace kolmo
