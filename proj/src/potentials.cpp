#include "kolmo/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "kolmo/gamma.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/random.hpp"

namespace kolmo {

void SpaceTimeGrid::check() const {
    if (nx < 1 || ny < 1 || nt < 1) throw std::invalid_argument("space-time grid: no cells");
    if (!(x1 > x0) || !(y1 > y0) || !(t1 > t0)) throw std::invalid_argument("space-time grid: empty range");
}

SpaceTimeField SpaceTimeField::zeros(const SpaceTimeGrid& grid) {
    grid.check();
    return {grid, std::vector<double>(grid.size(), 0.0)};
}

SpaceTimeField SpaceTimeField::sample(const SpaceTimeGrid& grid, const std::function<double(const Point&)>& f) {
    SpaceTimeField out = zeros(grid);
    for (int k = 0; k < grid.nt; ++k) {
        for (int i = 0; i < grid.nx; ++i) {
            for (int j = 0; j < grid.ny; ++j) out(k, i, j) = f(grid.center(k, i, j));
        }
    }
    return out;
}

HomogeneousKernel gamma_kernel() {
    return {"gamma", [](const Point& w) { return gamma_origin(w); }, 2.0};
}

HomogeneousKernel gamma_dx_kernel() {
    return {"gamma-dx", [](const Point& w) { return -gamma_dx(w, kOrigin); }, 1.0};
}

HomogeneousKernel kernel_by_name(const std::string& name) {
    if (name == "gamma") return gamma_kernel();
    if (name == "gamma-dx") return gamma_dx_kernel();
    throw std::invalid_argument("unknown kernel '" + name + "' (expected gamma or gamma-dx)");
}

double homogeneity_defect(const HomogeneousKernel& kernel, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int n = 0; n < samples; ++n) {
        Point z{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.05, 2)};
        double mu = std::exp(uniform(rng, std::log(0.25), std::log(4.0)));
        double lhs = kernel(dilate(mu, z));
        double rhs = std::pow(mu, kernel.alpha - 6.0) * kernel(z);
        double scale = std::max(std::abs(lhs), std::abs(rhs));
        if (scale < 1e-200) continue;
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

namespace {

void check_same_grid(const SpaceTimeGrid& a, const SpaceTimeGrid& b) {
    bool same = a.nx == b.nx && a.ny == b.ny && a.nt == b.nt && a.x0 == b.x0 && a.x1 == b.x1 && a.y0 == b.y0 &&
                a.y1 == b.y1 && a.t0 == b.t0 && a.t1 == b.t1;
    if (!same) throw std::invalid_argument("convolve: fields must share one grid");
}

}  // namespace

std::vector<SpaceTimeField> convolve(const HomogeneousKernel& kernel, const std::vector<SpaceTimeField>& fs) {
    if (fs.empty()) return {};
    const SpaceTimeGrid& g = fs.front().grid;
    g.check();
    for (const auto& f : fs) {
        check_same_grid(g, f.grid);
        if (f.v.size() != g.size()) throw std::invalid_argument("convolve: field size does not match its grid");
    }
    const int nx = g.nx, ny = g.ny, nt = g.nt;
    const int width = 2 * ny - 1;
    const double dy = g.dy(), dt = g.dt(), vol = g.cell_volume();

    std::vector<SpaceTimeField> outs;
    for (std::size_t n = 0; n < fs.size(); ++n) outs.push_back(SpaceTimeField::zeros(g));
    if (nt < 2) return outs;

    // table[((dk - 1) * nx + i) * width + m] = G at offset (k - k' = dk, i, j - j' = m - (ny - 1))
    // for the current source column; [lo, hi) brackets the nonzero m of each row.
    std::vector<double> table(static_cast<std::size_t>(nt - 1) * nx * width);
    std::vector<int> lo(static_cast<std::size_t>(nt - 1) * nx), hi(lo.size());

    for (int p = 0; p < nx; ++p) {
        bool active = false;
        for (const auto& f : fs) {
            for (int k = 0; k < nt - 1 && !active; ++k) {
                for (int j = 0; j < ny; ++j) {
                    if (f(k, p, j) != 0.0) {
                        active = true;
                        break;
                    }
                }
            }
        }
        if (!active) continue;

        const double xi = g.xc(p);
        parallel_for(nt - 1, [&](int begin, int end) {
            for (int d = begin; d < end; ++d) {
                double s = (d + 1) * dt;
                for (int i = 0; i < nx; ++i) {
                    std::size_t row = static_cast<std::size_t>(d) * nx + i;
                    double* out = &table[row * width];
                    int first = width, last = 0;
                    for (int m = 0; m < width; ++m) {
                        Point w{g.xc(i) - xi, (m - (ny - 1)) * dy + s * xi, s};
                        out[m] = kernel(w);
                        if (out[m] != 0.0) {
                            first = std::min(first, m);
                            last = m + 1;
                        }
                    }
                    lo[row] = first;
                    hi[row] = std::max(first, last);
                }
            }
        });

        for (std::size_t n = 0; n < fs.size(); ++n) {
            const SpaceTimeField& f = fs[n];
            SpaceTimeField& u = outs[n];
            parallel_for(nt, [&](int begin, int end) {
                for (int k = std::max(begin, 1); k < end; ++k) {
                    for (int kp = 0; kp < k; ++kp) {
                        int d = k - kp - 1;
                        for (int jp = 0; jp < ny; ++jp) {
                            double fv = f(kp, p, jp);
                            if (fv == 0.0) continue;
                            fv *= vol;
                            for (int i = 0; i < nx; ++i) {
                                std::size_t row = static_cast<std::size_t>(d) * nx + i;
                                const double* tr = &table[row * width];
                                double* ur = &u.v[u.index(k, i, 0)];
                                // j - jp + ny - 1 = m  =>  j in [m_lo + jp - ny + 1, m_hi + jp - ny + 1)
                                int j0 = std::max(0, lo[row] + jp - (ny - 1));
                                int j1 = std::min(ny, hi[row] + jp - (ny - 1));
                                const double* tk = tr + (ny - 1) - jp;
                                for (int j = j0; j < j1; ++j) ur[j] += fv * tk[j];
                            }
                        }
                    }
                }
            });
        }
    }
    return outs;
}

SpaceTimeField convolve(const HomogeneousKernel& kernel, const SpaceTimeField& f) {
    return std::move(convolve(kernel, std::vector<SpaceTimeField>{f}).front());
}

double lp_norm(const SpaceTimeField& f, double p, const std::optional<BallSpec>& region) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1");
    const SpaceTimeGrid& g = f.grid;
    bool inf = std::isinf(p);
    double acc = 0.0;
    for (int k = 0; k < g.nt; ++k) {
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) {
                if (region && !contains(*region, g.center(k, i, j))) continue;
                double a = std::abs(f(k, i, j));
                acc = inf ? std::max(acc, a) : acc + std::pow(a, p);
            }
        }
    }
    return inf ? acc : std::pow(acc * g.cell_volume(), 1.0 / p);
}

double target_exponent(double alpha, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("target_exponent: p must be >= 1");
    double inv_q = 1.0 / p - alpha / 6.0;
    if (!(inv_q > 0.0)) throw std::invalid_argument("target_exponent: 1/p - alpha/6 must be positive");
    return 1.0 / inv_q;
}

namespace {

void check_exponents(const HomogeneousKernel& kernel, double p, double q) {
    double expected = target_exponent(kernel.alpha, p);
    if (!(std::abs(q - expected) <= 1e-9 * expected)) {
        throw std::invalid_argument("gain_ratio: exponent mismatch for kernel " + kernel.name + ": p = " +
                                    std::to_string(p) + " requires q = " + std::to_string(expected) +
                                    ", got " + std::to_string(q));
    }
}

}  // namespace

std::vector<double> gain_ratios(const HomogeneousKernel& kernel, const std::vector<SpaceTimeField>& fs, double p,
                                double q) {
    check_exponents(kernel, p, q);
    std::vector<double> denom;
    for (const auto& f : fs) {
        double d = lp_norm(f, p);
        if (!(d > 0.0)) throw std::invalid_argument("gain_ratio: f vanishes identically");
        denom.push_back(d);
    }
    auto outs = convolve(kernel, fs);
    std::vector<double> ratios;
    for (std::size_t n = 0; n < fs.size(); ++n) ratios.push_back(lp_norm(outs[n], q) / denom[n]);
    return ratios;
}

double gain_ratio(const HomogeneousKernel& kernel, const SpaceTimeField& f, double p, double q) {
    return gain_ratios(kernel, std::vector<SpaceTimeField>{f}, p, q).front();
}

std::vector<SpaceTimeField> bump_family(const SpaceTimeGrid& grid, int count, std::uint64_t seed) {
    grid.check();
    std::mt19937_64 rng(seed);
    const double lx = grid.x1 - grid.x0, ly = grid.y1 - grid.y0, lt = grid.t1 - grid.t0;
    const double mx = 0.5 * (grid.x0 + grid.x1), my = 0.5 * (grid.y0 + grid.y1);
    auto factor = [](double v, double c, double r) {
        double s = (v - c) / r;
        double w = 1.0 - s * s;
        return w > 0.0 ? w * w * w : 0.0;
    };
    std::vector<SpaceTimeField> family;
    for (int n = 0; n < count; ++n) {
        double rx = uniform(rng, lx / 24, lx / 12), ry = uniform(rng, ly / 24, ly / 12);
        double rt = uniform(rng, lt / 24, lt / 12);
        double cx = mx + uniform(rng, -lx / 8, lx / 8), cy = my + uniform(rng, -ly / 8, ly / 8);
        double ct = grid.t0 + uniform(rng, lt / 8, 3 * lt / 8);
        double amp = uniform(rng, 0.5, 2.0);
        family.push_back(SpaceTimeField::sample(grid, [=](const Point& z) {
            return amp * factor(z.x, cx, rx) * factor(z.y, cy, ry) * factor(z.t, ct, rt);
        }));
    }
    return family;
}

}  // namespace kolmo
