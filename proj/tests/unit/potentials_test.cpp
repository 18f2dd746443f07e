#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kolmo/gamma.hpp"
#include "kolmo/potentials.hpp"
#include "kolmo/random.hpp"

namespace kolmo {
namespace {

TEST(Kernel, Homogeneity) {
    EXPECT_LE(homogeneity_defect(gamma_kernel()), 1e-8);
    EXPECT_LE(homogeneity_defect(gamma_dx_kernel()), 1e-8);
    EXPECT_EQ(gamma_kernel().alpha, 2.0);
    EXPECT_EQ(gamma_dx_kernel().alpha, 1.0);
}

TEST(Kernel, HomogeneityDefectDetectsWrongDegree) {
    HomogeneousKernel wrong = gamma_kernel();
    wrong.alpha = 1.5;
    EXPECT_GT(homogeneity_defect(wrong), 0.1);
}

TEST(Kernel, DerivativeKernelIsATranslate) {
    // -d_xi Gamma(z, zeta) depends on the pair only through zeta^{-1} o z.
    auto k = gamma_dx_kernel();
    std::mt19937_64 rng(42);
    for (int n = 0; n < 1000; ++n) {
        Point z{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.5, 2)};
        Point zeta{uniform(rng, -1, 1), uniform(rng, -1, 1), z.t - uniform(rng, 0.1, 1.5)};
        double expected = -gamma_dx(z, zeta);
        double got = k(compose(inverse(zeta), z));
        EXPECT_NEAR(got, expected, 1e-10 * std::max(1e-300, std::abs(expected)));
    }
}

TEST(Kernel, ByName) {
    EXPECT_EQ(kernel_by_name("gamma").alpha, 2.0);
    EXPECT_EQ(kernel_by_name("gamma-dx").alpha, 1.0);
    EXPECT_THROW(kernel_by_name("heat"), std::invalid_argument);
}

const SpaceTimeGrid kSmall{-1, 1, -1, 1, 0, 1, 12, 12, 10};

TEST(Convolve, ZeroInZeroOut) {
    auto out = convolve(gamma_kernel(), SpaceTimeField::zeros(kSmall));
    for (double v : out.v) EXPECT_EQ(v, 0.0);
}

TEST(Convolve, RejectsEmptyGrid) {
    SpaceTimeGrid g = kSmall;
    g.nt = 0;
    EXPECT_THROW(SpaceTimeField::zeros(g), std::invalid_argument);
}

TEST(Convolve, SingleCellIsTheMidpointRule) {
    for (const auto& k : {gamma_kernel(), gamma_dx_kernel()}) {
        SpaceTimeField f = SpaceTimeField::zeros(kSmall);
        f(2, 5, 7) = 3.0;
        Point zeta = kSmall.center(2, 5, 7);
        auto out = convolve(k, f);
        for (int kk = 0; kk < kSmall.nt; ++kk) {
            for (int i = 0; i < kSmall.nx; ++i) {
                for (int j = 0; j < kSmall.ny; ++j) {
                    double expected = kk > 2 ? k(compose(inverse(zeta), kSmall.center(kk, i, j))) * 3.0 *
                                                   kSmall.cell_volume()
                                             : 0.0;
                    EXPECT_NEAR(out(kk, i, j), expected, 1e-12 * std::abs(expected) + 1e-300);
                }
            }
        }
    }
}

TEST(Convolve, ShrinkingBoxApproachesPointEvaluation) {
    // Unit density on |x|, |y| < w in time slice 1: the output at a late cell
    // tends to Gamma(z, zeta_c) vol(box) as w shrinks with the grid.
    double previous = 1.0;
    for (int refine : {1, 2, 4}) {
        SpaceTimeGrid g{-2, 2, -2, 2, 0, 1.5, 16 * refine, 16 * refine, 12};
        double w = 0.25 / refine;
        SpaceTimeField f = SpaceTimeField::zeros(g);
        double vol = 0.0;
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) {
                if (std::abs(g.xc(i)) < w && std::abs(g.yc(j)) < w) {
                    f(1, i, j) = 1.0;
                    vol += g.cell_volume();
                }
            }
        }
        ASSERT_GT(vol, 0.0);
        auto out = convolve(gamma_kernel(), f);
        int k = 10, i = static_cast<int>(2.4 / g.dx()), j = static_cast<int>(2.3 / g.dy());
        double point = gamma(g.center(k, i, j), {0.0, 0.0, g.tc(1)}) * vol;
        double rel = std::abs(out(k, i, j) - point) / point;
        EXPECT_LT(rel, previous) << "refine=" << refine;
        previous = rel;
    }
    EXPECT_LT(previous, 0.01);
}

TEST(Convolve, UnitMassIsTransported) {
    SpaceTimeGrid g{-5, 5, -5, 5, 0, 1.2, 60, 60, 12};
    SpaceTimeField f = SpaceTimeField::zeros(g);
    double total = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            double r2 = g.xc(i) * g.xc(i) + g.yc(j) * g.yc(j);
            f(0, i, j) = std::exp(-8 * r2);
            total += f(0, i, j) * g.cell_volume();
        }
    }
    for (double& v : f.v) v /= total;
    auto out = convolve(gamma_kernel(), f);
    double mass = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) mass += out(11, i, j) * g.dx() * g.dy();
    }
    EXPECT_NEAR(mass, 1.0, 0.02);
}

TEST(Convolve, Linearity) {
    auto fam = bump_family(kSmall, 2, 9);
    SpaceTimeField mix = SpaceTimeField::zeros(kSmall);
    for (std::size_t c = 0; c < mix.v.size(); ++c) mix.v[c] = 2.5 * fam[0].v[c] - 0.75 * fam[1].v[c];
    for (const auto& k : {gamma_kernel(), gamma_dx_kernel()}) {
        auto outs = convolve(k, fam);
        auto m = convolve(k, mix);
        double scale = 0.0;
        for (double v : m.v) scale = std::max(scale, std::abs(v));
        for (std::size_t c = 0; c < m.v.size(); ++c) {
            EXPECT_NEAR(m.v[c], 2.5 * outs[0].v[c] - 0.75 * outs[1].v[c], 1e-10 * scale);
        }
    }
}

TEST(Convolve, BatchMatchesSingle) {
    auto fam = bump_family(kSmall, 3, 11);
    auto batch = convolve(gamma_dx_kernel(), fam);
    for (std::size_t n = 0; n < fam.size(); ++n) EXPECT_EQ(batch[n].v, convolve(gamma_dx_kernel(), fam[n]).v);
}

TEST(Convolve, RefinementChangesOutputByOrderH) {
    // Smooth source, output compared at a fixed late point.
    auto source = [](const Point& z) {
        double s = 1 - (z.x * z.x + z.y * z.y) / 0.25 - (z.t - 0.3) * (z.t - 0.3) / 0.04;
        return s > 0 ? s * s * s : 0.0;
    };
    std::vector<double> values;
    for (int n : {16, 32, 64}) {
        SpaceTimeGrid g{-2, 2, -2, 2, 0, 1.6, n, n, n / 2};
        auto out = convolve(gamma_kernel(), SpaceTimeField::sample(g, source));
        // Average of the four cells around (0.5, 0.5, 1.2) removes cell-position effects.
        int k = static_cast<int>(1.2 / g.dt());
        int i = static_cast<int>((0.5 + 2) / g.dx()), j = static_cast<int>((0.5 + 2) / g.dy());
        values.push_back(0.25 * (out(k, i - 1, j - 1) + out(k, i, j - 1) + out(k, i - 1, j) + out(k, i, j)));
    }
    double d1 = std::abs(values[1] - values[0]), d2 = std::abs(values[2] - values[1]);
    EXPECT_LT(d2, d1);
    EXPECT_LT(d2 / std::abs(values[2]), 0.1);
}

TEST(LpNorm, ConstantOnUnitVolume) {
    SpaceTimeGrid g{0, 1, 0, 1, 0, 1, 4, 5, 6};
    auto f = SpaceTimeField::sample(g, [](const Point&) { return -2.5; });
    for (double p : {1.0, 2.0, 3.5, std::numeric_limits<double>::infinity()}) EXPECT_NEAR(lp_norm(f, p), 2.5, 1e-13);
    EXPECT_THROW(lp_norm(f, 0.5), std::invalid_argument);
}

TEST(LpNorm, HalfIndicator) {
    SpaceTimeGrid g{-1, 1, -1, 1, -1, 1, 8, 8, 8};
    auto f = SpaceTimeField::sample(g, [](const Point& z) { return z.x < 0 ? 1.0 : 0.0; });
    EXPECT_NEAR(lp_norm(f, 2), std::sqrt(0.5) * std::sqrt(8.0), 1e-13);
}

TEST(LpNorm, MonotoneInRegion) {
    SpaceTimeGrid g{-1, 1, -1, 1, -1, 1, 16, 16, 16};
    auto f = SpaceTimeField::sample(g, [](const Point& z) { return std::exp(z.x + z.y * z.t); });
    double small = lp_norm(f, 2, BallSpec{{0, 0, 0}, 0.6, false});
    double large = lp_norm(f, 2, BallSpec{{0, 0, 0}, 0.9, false});
    EXPECT_GT(small, 0.0);
    EXPECT_LE(small, large);
    EXPECT_LE(large, lp_norm(f, 2));
}

TEST(Gain, TargetExponents) {
    EXPECT_DOUBLE_EQ(target_exponent(2, 2), 6.0);
    EXPECT_DOUBLE_EQ(target_exponent(1, 2), 3.0);
    EXPECT_THROW(target_exponent(2, 3), std::invalid_argument);
    EXPECT_THROW(target_exponent(2, 0.5), std::invalid_argument);
}

TEST(Gain, ExponentMismatchAndZeroAreRejected) {
    auto f = bump_family(kSmall, 1, 1).front();
    EXPECT_THROW(gain_ratio(gamma_kernel(), f, 2, 3), std::invalid_argument);
    EXPECT_THROW(gain_ratio(gamma_dx_kernel(), f, 2, 6), std::invalid_argument);
    EXPECT_THROW(gain_ratio(gamma_kernel(), SpaceTimeField::zeros(kSmall), 2, 6), std::invalid_argument);
    EXPECT_GT(gain_ratio(gamma_kernel(), f, 2, 6), 0.0);
}

TEST(Gain, DiscreteScaleCovarianceOnCoDilatedGrids) {
    // Sampling f o delta_mu on the grid delta_{1/mu} G reproduces the ratio of
    // f on G: the kernel is homogeneous and the dilation is an automorphism.
    SpaceTimeGrid g{-1, 1, -1, 1, 0, 1, 12, 12, 12};
    auto f = bump_family(g, 1, 3).front();
    for (const auto& k : {gamma_kernel(), gamma_dx_kernel()}) {
        double q = target_exponent(k.alpha, 2);
        double base = gain_ratio(k, f, 2, q);
        for (double mu : {0.5, 2.0}) {
            SpaceTimeGrid h{g.x0 / mu, g.x1 / mu, g.y0 / (mu * mu * mu), g.y1 / (mu * mu * mu), g.t0 / (mu * mu),
                            g.t1 / (mu * mu), g.nx, g.ny, g.nt};
            SpaceTimeField fd{h, f.v};
            EXPECT_NEAR(gain_ratio(k, fd, 2, q) / base, 1.0, 1e-10) << k.name << " mu=" << mu;
        }
    }
}

TEST(Gain, DilationStableOnFixedGrid) {
    SpaceTimeGrid g{-2, 2, -1, 1, 0, 3, 48, 96, 64};
    auto cube = [](double s) {
        double w = 1 - s * s;
        return w > 0 ? w * w * w : 0.0;
    };
    auto ratio = [&](double mu) {
        auto f = SpaceTimeField::sample(g, [&](const Point& z) {
            Point w = dilate(mu, z);
            return cube(w.x / 0.5) * cube(w.y / 0.15) * cube((w.t - 0.3) / 0.2);
        });
        return gain_ratio(gamma_kernel(), f, 2, 6);
    };
    double base = ratio(1.0);
    for (double mu : {0.5, 2.0}) EXPECT_NEAR(ratio(mu) / base, 1.0, 0.1) << "mu=" << mu;
}

TEST(BumpFamily, SupportsAndDeterminism) {
    SpaceTimeGrid g{-2, 2, -2, 2, 0, 2, 16, 16, 16};
    auto a = bump_family(g, 5, 42);
    auto b = bump_family(g, 5, 42);
    ASSERT_EQ(a.size(), 5u);
    for (std::size_t n = 0; n < a.size(); ++n) {
        EXPECT_EQ(a[n].v, b[n].v);
        double peak = 0.0;
        for (int k = 0; k < g.nt; ++k) {
            for (int i = 0; i < g.nx; ++i) {
                for (int j = 0; j < g.ny; ++j) {
                    double v = a[n](k, i, j);
                    peak = std::max(peak, v);
                    if (std::abs(g.xc(i)) > 1.0 || std::abs(g.yc(j)) > 1.0 || g.tc(k) > 1.0) EXPECT_EQ(v, 0.0);
                }
            }
        }
        EXPECT_GT(peak, 0.0);
    }
    EXPECT_NE(bump_family(g, 1, 43).front().v, a.front().v);
}

}  // namespace
}  // namespace kolmo
