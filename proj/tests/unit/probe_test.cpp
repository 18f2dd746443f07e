#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>

#include "kolmo/probe.hpp"
#include "kolmo/random.hpp"

namespace kolmo {
namespace {

Trajectory make_traj(const Grid& g, int levels, const std::function<double(double, double, double)>& f) {
    Trajectory tr;
    tr.grid = g;
    for (int k = 0; k < levels; ++k) {
        double t = g.t0 + (g.t1 - g.t0) * k / (levels - 1);
        Field u{g.nx, g.ny, t, std::vector<double>(static_cast<std::size_t>(g.nx) * g.ny)};
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) u(i, j) = f(g.xc(i), g.yc(j), t);
        }
        tr.times.push_back(t);
        tr.levels.push_back(std::move(u));
    }
    return tr;
}

const Grid kGrid{-2, 2, -0.5, 0.5, 80, 40, 0, 0.5};
const Point kCenter{0, 0, 0.4};

TEST(Oscillation, ConstantFieldIsZero) {
    auto tr = make_traj(kGrid, 11, [](double, double, double) { return 3.0; });
    EXPECT_EQ(oscillation(tr, kCenter, 0.3), 0.0);
}

TEST(Oscillation, LinearInXTouchesTheBallExtent) {
    auto tr = make_traj(kGrid, 11, [](double x, double, double) { return x; });
    for (double r : {0.4, 0.2, 0.1, 0.05}) EXPECT_NEAR(oscillation(tr, kCenter, r), 2 * r, 1e-12);
}

TEST(Oscillation, NestedMonotonicityForDyadicShrink) {
    auto tr = make_traj(kGrid, 21, [](double x, double y, double t) { return std::sin(3 * x + 7 * y) * std::cos(5 * t) + x * y; });
    std::mt19937_64 rng(42);
    for (int n = 0; n < 20; ++n) {
        Point c{uniform(rng, -0.5, 0.5), uniform(rng, -0.2, 0.2), uniform(rng, 0.3, 0.5)};
        for (double theta : {0.5, 0.25, 0.125}) {
            EXPECT_LE(oscillation(tr, c, theta * 0.4), oscillation(tr, c, 0.4));
        }
    }
}

TEST(Oscillation, Errors) {
    auto tr = make_traj(kGrid, 11, [](double x, double, double) { return x; });
    EXPECT_THROW(oscillation(tr, {1.9, 0, 0.4}, 0.3), std::out_of_range);
    EXPECT_THROW(oscillation(tr, {0, 0, 0.01}, 0.3), std::out_of_range);
    EXPECT_THROW(oscillation(tr, kCenter, 0.0), std::invalid_argument);
}

TEST(OscillationDecay, AffineFieldScalesWithTheta) {
    auto tr = make_traj(kGrid, 11, [](double x, double, double) { return 2 * x + 1; });
    ProbeConfig cfg;
    cfg.theta = 0.125;
    cfg.radii = {0.4, 0.2, 0.1};
    auto d = oscillation_decay(tr, kCenter, cfg);
    for (double ratio : d.ratios) EXPECT_NEAR(ratio, 0.125, 1e-12);
    EXPECT_NEAR(d.max_ratio, 0.125, 1e-12);
}

TEST(OscillationDecay, FlatFieldReportsZero) {
    auto tr = make_traj(kGrid, 11, [](double, double, double) { return 1.0; });
    ProbeConfig cfg;
    auto d = oscillation_decay(tr, kCenter, cfg);
    for (double ratio : d.ratios) EXPECT_EQ(ratio, 0.0);
}

TEST(ProbeConfig, Validation) {
    ProbeConfig cfg;
    EXPECT_NO_THROW(cfg.check());
    cfg.radii = {0.1, 0.2};
    EXPECT_THROW(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.theta = 1.0;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.p = 0.5;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
    cfg = {};
    cfg.lattice = 8;
    EXPECT_THROW(cfg.check(), std::invalid_argument);
}

// Monte-Carlo volume of B-_1 inside the box [-1,1] x [-1,1] x [-1,0].
double monte_carlo_unit_volume() {
    std::mt19937_64 rng(7);
    long hits = 0;
    const long n = 1'000'000;
    for (long k = 0; k < n; ++k) {
        Point p{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 0)};
        if (within_norm(p, 1.0)) ++hits;
    }
    return 4.0 * hits / n;
}

TEST(Moser, UnitFieldIsAGeometryConstant) {
    auto tr = make_traj(kGrid, 11, [](double, double, double) { return 1.0; });
    const double unit = monte_carlo_unit_volume();
    double first = moser_ratio(tr, kCenter, 0.4, 2).ratio;
    EXPECT_NEAR(first * unit, 1.0, 0.03);
    for (double r : {0.2, 0.1, 0.05}) {
        auto m = moser_ratio(tr, kCenter, r, 2);
        EXPECT_NEAR(m.ratio / first, 1.0, 1e-9) << "r=" << r;
        EXPECT_NEAR(m.integral, past_ball_volume(r), 1e-12 * m.integral);
    }
}

TEST(Moser, ExponentsReportedSeparatelyAndNegativesClipped) {
    auto tr = make_traj(kGrid, 11, [](double x, double, double) { return 1 + x; });
    auto m1 = moser_ratio(tr, kCenter, 0.2, 1), m2 = moser_ratio(tr, kCenter, 0.2, 2);
    EXPECT_TRUE(std::isfinite(m1.ratio) && std::isfinite(m2.ratio));
    EXPECT_NE(m1.ratio, m2.ratio);
    EXPECT_EQ(m1.clipped, 0);
    auto neg = make_traj(kGrid, 11, [](double x, double, double) { return x; });
    EXPECT_GT(moser_ratio(neg, kCenter, 0.2, 1).clipped, 0);
    auto zero = make_traj(kGrid, 11, [](double, double, double) { return 0.0; });
    EXPECT_THROW(moser_ratio(zero, kCenter, 0.2, 1), std::domain_error);
}

TEST(LevelSet, Fractions) {
    Grid g{-1, 1, -1, 1, 32, 32, 0, 1};
    Field one{32, 32, 0.0, std::vector<double>(32 * 32, 1.0)};
    EXPECT_EQ(level_set_fraction(one, g, CubeSpec{{0, 0, 0}, 0.5}, 0.5), 1.0);
    Field lin = one;
    for (int i = 0; i < 32; ++i) {
        for (int j = 0; j < 32; ++j) lin(i, j) = g.xc(i);
    }
    EXPECT_EQ(level_set_fraction(lin, g, CubeSpec{{0, 0, 0}, 0.5}, 0.0), 0.5);
    EXPECT_THROW(level_set_fraction(lin, g, CubeSpec{{0.8, 0, 0}, 0.5}, 0.0), std::out_of_range);
}

TEST(LevelSet, SectionFollowsTheGroupTranslate) {
    // At time t the section of the cube centered at (1, 0, 0) is centered at y = -t.
    auto sample = [](double, double y) { return y < -0.5 ? 1.0 : 0.0; };
    EXPECT_EQ(level_set_fraction(sample, 0.6, CubeSpec{{1, 0, 0}, 0.2}, 0.5), 1.0);
    EXPECT_EQ(level_set_fraction(sample, 0.0, CubeSpec{{1, 0, 0}, 0.2}, 0.5), 0.0);
}

TEST(Cutoff, EqualsOneOnTheSmallBall) {
    const double theta = 1.0 / 128, r = 1.0;
    std::mt19937_64 rng(3);
    const double s = theta * r;
    for (int n = 0; n < 10000; ++n) {
        Point z{uniform(rng, -s, s), uniform(rng, -s * s * s, s * s * s), uniform(rng, -s * s, 0)};
        if (within_norm(z, s)) EXPECT_EQ(cutoff_phi(theta, r, z), 1.0);
    }
}

TEST(Cutoff, VanishesOutsideQ) {
    const double theta = 1.0 / 128, r = 0.7;
    EXPECT_EQ(cutoff_phi(theta, r, {r / theta, 0, -0.01}), 0.0);
    EXPECT_EQ(cutoff_phi(theta, r, {-r / theta - 1, 0, -0.01}), 0.0);
    EXPECT_EQ(cutoff_phi(theta, r, {0, r * r * r / theta, -0.01}), 0.0);
    EXPECT_EQ(cutoff_phi(theta, r, {0, 0, -r * r}), 0.0);
}

TEST(Cutoff, IntermediateValuesAndMonotoneRays) {
    const double theta = 1.0 / 128, r = 1.0;
    Cutoff cut(theta, r);
    double mid = cut.phi({0, 0, -0.05});
    EXPECT_GT(mid, 0.0);
    EXPECT_LT(mid, 1.0);
    double prev = 1.0;
    for (int k = 0; k <= 400; ++k) {
        double v = cut.phi({k * 0.4, 0, -0.001});
        EXPECT_LE(v, prev);
        prev = v;
    }
    prev = 1.0;
    for (int k = 0; k <= 400; ++k) {
        double v = cut.phi({0, 0, -k * 0.001});
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Cutoff, DerivativeBound) {
    const double theta = 1.0 / 100, r = 0.5;
    Cutoff cut(theta, r);
    const double bound = 2.0 / ((1 - std::pow(theta, 1.0 / 6.0)) * r);
    for (int k = 0; k <= 10000; ++k) {
        double s = r * k / 10000.0;
        EXPECT_LE(cut.dchi(s), 0.0);
        EXPECT_LE(-cut.dchi(s), bound);
        double h = 1e-6;
        if (s > h && s < r - h) EXPECT_NEAR(cut.dchi(s), (cut.chi(s + h) - cut.chi(s - h)) / (2 * h), 1e-6 * bound);
    }
}

TEST(Cutoff, ParameterErrors) {
    EXPECT_THROW(Cutoff(0.125, 1.0), std::invalid_argument);
    EXPECT_THROW(Cutoff(1.0 / 128, 0.0), std::invalid_argument);
    EXPECT_THROW(Cutoff(0.0, 1.0), std::invalid_argument);
}

TEST(CutoffSign, NonpositiveOnQ) {
    EXPECT_LE(cutoff_sign_check(1.0 / 128, 1.0, 100000, 42), 1e-8);
    EXPECT_LE(cutoff_sign_check(1.0 / 100, 0.3, 20000, 1), 1e-8);
}

TEST(CutoffSign, ConstantRegionIsExactlyZero) {
    Cutoff cut(1.0 / 128, 1.0);
    EXPECT_EQ(cut.y_phi0({1.0, 1e-4, -1e-3}), 0.0);
    EXPECT_EQ(cut.y_phi0({-3.0, 0.0, 0.0}), 0.0);
}

TEST(CutoffSign, FlippedProfileIsDetected) {
    EXPECT_GT(cutoff_sign_check(1.0 / 128, 1.0, 100000, 42, CutoffProfile::Flipped), 1e-3);
}

TEST(CutoffSign, ClosedFormMatchesDifferences) {
    Cutoff cut(1.0 / 128, 1.0);
    std::mt19937_64 rng(5);
    for (int n = 0; n < 2000; ++n) {
        Point z{uniform(rng, -128, 128), uniform(rng, -128, 128), uniform(rng, -1, 0)};
        double hy = 1e-4, ht = 1e-7;
        double fd = z.x * (cut.phi0({z.x, z.y + hy, z.t}) - cut.phi0({z.x, z.y - hy, z.t})) / (2 * hy) -
                    (cut.phi0({z.x, z.y, z.t + ht}) - cut.phi0({z.x, z.y, z.t - ht})) / (2 * ht);
        EXPECT_NEAR(cut.y_phi0(z), fd, 1e-4 * (1 + std::abs(fd)));
    }
}

// With w = 1, I1(z) reproduces phi(z): phi = -int Gamma(z, .) L0 phi.
TEST(Poincare, PartitionIdentityReproducesTheCutoff) {
    const double theta = 1.0 / 100, r = 0.2;
    Cutoff cut(theta, r);
    auto one = [](const Point&) { return 1.0; };
    PoincareOptions opt;
    const Point center{0.3, -0.1, 1.0};
    for (Point local : {Point{0, 0, 0}, Point{0.002, 1e-9, -1e-5}, Point{0, 0, -0.004}, Point{0.05, 1e-4, -0.003},
                        Point{-0.4, 0.0, -0.002}}) {
        Point z = compose(center, local);
        EXPECT_NEAR(poincare_i1(one, center, z, cut, opt), cut.phi(local), 1e-6) << local.x << ' ' << local.t;
    }
}

TEST(Poincare, ZeroAndConstantWeights) {
    const double theta = 1.0 / 100, r = 0.004;
    Grid g{-1, 1, -0.2, 0.2, 40, 8, 0, 0.3};
    const Point center{0, 0, 0.25};
    auto zero = make_traj(g, 5, [](double, double, double) { return 0.0; });
    auto z = poincare_check(zero, center, r, theta);
    EXPECT_EQ(z.lhs, 0.0);
    EXPECT_EQ(z.i0, 0.0);
    auto c = make_traj(g, 5, [](double, double, double) { return 2.5; });
    auto res = poincare_check(c, center, r, theta);
    EXPECT_EQ(res.rhs, 0.0);
    EXPECT_GE(res.i0, 2.5 - 1e-3);
    // lhs is the quadrature error of I0 squared times the ball volume.
    EXPECT_LE(res.lhs, 1e-6 * past_ball_volume(theta * r, 16));
    EXPECT_GT(res.z_points, 1);
}

TEST(Poincare, LeavingTheTrajectoryThrows) {
    Grid g{-1, 1, -0.2, 0.2, 40, 8, 0, 0.3};
    auto c = make_traj(g, 5, [](double, double, double) { return 1.0; });
    EXPECT_THROW(poincare_check(c, {0, 0, 0.25}, 0.02, 1.0 / 100), std::out_of_range);
}

TEST(Poincare, LogTransform) {
    Grid g{-1, 1, -1, 1, 4, 4, 0, 1};
    auto u = make_traj(g, 2, [](double x, double, double) { return x + 1; });
    auto w = log_transform(u, 0.5);
    const double shift = std::pow(0.5, 9.0 / 8.0);
    for (std::size_t c = 0; c < u.levels[0].v.size(); ++c) {
        double v = u.levels[0].v[c];
        EXPECT_DOUBLE_EQ(w.levels[0].v[c], std::max(0.0, std::log(0.5 / (v + shift))));
        EXPECT_GE(w.levels[0].v[c], 0.0);
    }
    EXPECT_THROW(log_transform(u, 1.5), std::invalid_argument);
}

TEST(Holder, SquareRootProfile) {
    Grid g{-1, 1, -0.1, 0.1, 2000, 4, 0, 0.5};
    auto tr = make_traj(g, 3, [](double x, double, double) { return std::sqrt(std::abs(x)); });
    auto fit = holder_fit(tr, {0, 0, 0.4}, {0.4, 0.2, 0.1, 0.05});
    EXPECT_NEAR(fit.alpha_hat, 0.5, 0.05);
    EXPECT_LT(fit.residual, 0.01);
    EXPECT_FALSE(fit.locally_constant);
    EXPECT_GT(fit.pointwise, 0.0);
}

TEST(Holder, LinearProfileAndDegenerateCases) {
    auto tr = make_traj(kGrid, 11, [](double x, double, double) { return x; });
    auto fit = holder_fit(tr, kCenter, {0.4, 0.2, 0.1, 0.05});
    EXPECT_NEAR(fit.alpha_hat, 1.0, 1e-9);
    EXPECT_NEAR(fit.pointwise, 1.0, 1e-9);
    auto flat = make_traj(kGrid, 11, [](double, double, double) { return 4.0; });
    EXPECT_TRUE(holder_fit(flat, kCenter, {0.4, 0.2, 0.1, 0.05}).locally_constant);
    EXPECT_THROW(holder_fit(tr, kCenter, {0.4, 0.2, 0.1}), std::invalid_argument);
}

TEST(ProbeReport, DeterministicJson) {
    auto tr = make_traj(kGrid, 21, [](double x, double y, double t) { return 1 + 0.3 * std::sin(2 * x + y - t); });
    ProbeConfig cfg;
    auto a = run_probe(tr, kCenter, cfg), b = run_probe(tr, kCenter, cfg);
    EXPECT_EQ(a.to_json(), b.to_json());
    auto j = nlohmann::json::parse(a.to_json());
    EXPECT_EQ(j["oscillation"]["ratios"].size(), 4u);
    EXPECT_EQ(j["moser"].size(), 4u);
    EXPECT_EQ(j["level_sets"][0]["fractions"].size(), 3u);
    EXPECT_LT(j["oscillation"]["max_ratio"].get<double>(), 1.0);
    EXPECT_NE(a.to_csv().find("r,osc,osc_theta_r,ratio\n"), std::string::npos);
    cfg.radii = {0.9, 0.4, 0.2, 0.1};
    EXPECT_THROW(run_probe(tr, kCenter, cfg), std::invalid_argument);
}

}  // namespace
}  // namespace kolmo
