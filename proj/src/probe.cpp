#include "kolmo/probe.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kolmo/gamma.hpp"
#include "kolmo/parallel.hpp"
#include "kolmo/random.hpp"

namespace kolmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Rule {
    std::vector<double> nodes, weights;
};

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix,
// weights the squared first eigenvector components times the total mass.
Rule golub_welsch(int n, const std::function<double(int)>& offdiag, double mass) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) j(k - 1, k) = j(k, k - 1) = offdiag(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    Rule r;
    for (int k = 0; k < n; ++k) {
        r.nodes.push_back(es.eigenvalues()(k));
        double v = es.eigenvectors()(0, k);
        r.weights.push_back(mass * v * v);
    }
    return r;
}

// Probabilists' Gauss-Hermite: expectation against N(0, 1).
Rule hermite_rule(int n) {
    return golub_welsch(n, [](int k) { return std::sqrt(static_cast<double>(k)); }, 1.0);
}

// Gauss-Legendre on [-1, 1].
Rule legendre_rule(int n) {
    return golub_welsch(n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
}

void check_radius(double r) {
    if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("probe: radius must be positive");
}

// Midpoint lattice over the bounding box of B-_rho; calls f(local point)
// for each cell whose center is in the ball and returns the cell volume.
template <class F>
double for_ball_cells(double rho, int n, F&& f) {
    const double hx = 2 * rho / n, hy = 2 * rho * rho * rho / n, ht = rho * rho / n;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            for (int c = 0; c < n; ++c) {
                Point local{-rho + (a + 0.5) * hx, -rho * rho * rho + (b + 0.5) * hy, -rho * rho + (c + 0.5) * ht};
                if (within_norm(local, rho)) f(local);
            }
        }
    }
    return hx * hy * ht;
}

double lattice_coord(int i, int n) { return n == 1 ? 0.0 : -1.0 + 2.0 * i / (n - 1); }

}  // namespace

void ProbeConfig::check() const {
    auto unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (!unit(theta)) throw std::invalid_argument("probe: theta must lie in (0, 1)");
    if (!unit(alpha) || !unit(beta)) throw std::invalid_argument("probe: alpha and beta must lie in (0, 1)");
    if (!(p >= 1.0)) throw std::invalid_argument("probe: p must be at least 1");
    if (radii.empty()) throw std::invalid_argument("probe: no radii");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        check_radius(radii[i]);
        if (i > 0 && !(radii[i] < radii[i - 1])) throw std::invalid_argument("probe: radii must strictly decrease");
    }
    for (double h : h_levels) {
        if (!unit(h)) throw std::invalid_argument("probe: h levels must lie in (0, 1)");
    }
    if (lattice < 3 || lattice % 2 == 0) throw std::invalid_argument("probe: lattice must be odd and at least 3");
}

std::vector<Point> ball_samples(const Point& center, double r, int lattice, double floor) {
    check_radius(r);
    if (lattice < 1) throw std::invalid_argument("probe: lattice must be positive");
    std::vector<Point> out;
    double rho = r;
    for (int shell = 0; shell < 24 && (shell == 0 || rho >= floor); ++shell, rho *= 0.5) {
        for (int a = 0; a < lattice; ++a) {
            for (int b = 0; b < lattice; ++b) {
                for (int c = 0; c < lattice; ++c) {
                    Point local{rho * lattice_coord(a, lattice), rho * rho * rho * lattice_coord(b, lattice),
                                -rho * rho * 0.5 * (1.0 - lattice_coord(c, lattice))};
                    if (within_norm(local, rho)) out.push_back(compose(center, local));
                }
            }
        }
    }
    return out;
}

namespace {

std::vector<double> sample_all(const Trajectory& u, const std::vector<Point>& pts) {
    std::vector<double> v(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!u.covers(pts[k])) throw std::out_of_range("probe: ball leaves the sampled space-time box");
        v[k] = u.sample(pts[k]);
    }
    return v;
}

double spread(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("probe: empty sample set (radius below resolution)");
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

double magnitude(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double oscillation(const Trajectory& u, const Point& center, double r, int lattice) {
    return spread(sample_all(u, ball_samples(center, r, lattice)));
}

DecayResult oscillation_decay(const Trajectory& u, const Point& center, const ProbeConfig& cfg) {
    cfg.check();
    const int n = static_cast<int>(cfg.radii.size());
    DecayResult d;
    d.radii = cfg.radii;
    d.osc_r.assign(n, 0.0);
    d.osc_theta_r.assign(n, 0.0);
    d.ratios.assign(n, 0.0);
    std::vector<double> scale(n, 0.0);
    parallel_for(n, [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            auto big = sample_all(u, ball_samples(center, cfg.radii[i], cfg.lattice));
            d.osc_r[i] = spread(big);
            scale[i] = magnitude(big);
            d.osc_theta_r[i] = oscillation(u, center, cfg.theta * cfg.radii[i], cfg.lattice);
        }
    });
    for (int i = 0; i < n; ++i) {
        bool flat = d.osc_r[i] < 1e-13 * std::max(scale[i], 1e-300);
        d.ratios[i] = flat ? 0.0 : d.osc_theta_r[i] / d.osc_r[i];
        d.max_ratio = std::max(d.max_ratio, d.ratios[i]);
    }
    return d;
}

double past_ball_volume(double r, int n) {
    check_radius(r);
    long cells = 0;
    double vol = for_ball_cells(r, n, [&](const Point&) { ++cells; });
    return vol * cells;
}

MoserResult moser_ratio(const Trajectory& u, const Point& center, double r, double p, int n) {
    check_radius(r);
    if (!(p >= 1.0)) throw std::invalid_argument("moser_ratio: p must be at least 1");
    MoserResult m;
    auto pos = [&](double v) {
        if (v < 0.0) {
            ++m.clipped;
            return 0.0;
        }
        return std::pow(v, p);
    };
    double sum = 0.0;
    double vol = for_ball_cells(r, n, [&](const Point& local) {
        Point z = compose(center, local);
        if (!u.covers(z)) throw std::out_of_range("probe: ball leaves the sampled space-time box");
        sum += pos(u.sample(z));
    });
    m.integral = sum * vol;
    for (double v : sample_all(u, ball_samples(center, 0.5 * r))) m.sup = std::max(m.sup, pos(v));
    if (!(m.integral > 0.0)) throw std::domain_error("moser_ratio: the integral of u^p vanishes on the ball");
    m.ratio = m.sup * std::pow(r, 6) / m.integral;
    return m;
}

double level_set_fraction(const std::function<double(double, double)>& sample, double t, const CubeSpec& region,
                          double h, int n) {
    check_radius(region.radius);
    const double rho = region.radius, half_y = 8 * rho * rho * rho;
    const Point& c = region.center;
    const double yc = c.y - (t - c.t) * c.x;
    long hits = 0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double x = c.x - rho + (a + 0.5) * 2 * rho / n;
            double y = yc - half_y + (b + 0.5) * 2 * half_y / n;
            if (sample(x, y) >= h) ++hits;
        }
    }
    return static_cast<double>(hits) / (static_cast<double>(n) * n);
}

double level_set_fraction(const Field& u, const Grid& grid, const CubeSpec& region, double h, int n) {
    if (u.nx != grid.nx || u.ny != grid.ny) throw std::invalid_argument("level_set_fraction: field does not match grid");
    auto sample = [&](double x, double y) {
        if (x < grid.x0 || x > grid.x1 || y < grid.y0 || y > grid.y1) {
            throw std::out_of_range("level_set_fraction: region leaves the grid");
        }
        auto locate = [](double v, double lo, double d, int m, int& i0, double& w) {
            double s = std::clamp((v - lo) / d - 0.5, 0.0, static_cast<double>(m - 1));
            i0 = std::min(static_cast<int>(std::floor(s)), m - 2);
            w = s - i0;
        };
        int i0, j0;
        double wx, wy;
        locate(x, grid.x0, grid.dx(), grid.nx, i0, wx);
        locate(y, grid.y0, grid.dy(), grid.ny, j0, wy);
        return (1 - wx) * ((1 - wy) * u(i0, j0) + wy * u(i0, j0 + 1)) +
               wx * ((1 - wy) * u(i0 + 1, j0) + wy * u(i0 + 1, j0 + 1));
    };
    return level_set_fraction(sample, u.t, region, h, n);
}

Cutoff::Cutoff(double theta, double r, CutoffProfile profile) : theta_(theta), r_(r) {
    if (!(theta > 0.0) || !(std::pow(theta, 1.0 / 6.0) < 0.5)) {
        throw std::invalid_argument("cutoff: theta^{1/6} must lie in (0, 1/2)");
    }
    check_radius(r);
    inner_ = std::pow(theta, 1.0 / 6.0) * r;
    sign_ = profile == CutoffProfile::Smoothstep ? 1.0 : -1.0;
}

// chi(s) = 1 - S(u), u = (s - inner)/(r - inner), S(u) = 6u^5 - 15u^4 + 10u^3.
double Cutoff::chi(double s) const {
    if (s <= inner_) return 1.0;
    if (s >= r_) return 0.0;
    double u = (s - inner_) / (r_ - inner_);
    double v = 1.0 - u * u * u * (10 + u * (-15 + 6 * u));
    return sign_ > 0 ? v : 1.0 - v;
}

double Cutoff::dchi(double s) const {
    if (s <= inner_ || s >= r_) return 0.0;
    double w = r_ - inner_, u = (s - inner_) / w;
    return -sign_ * 30 * u * u * (1 - u) * (1 - u) / w;
}

double Cutoff::d2chi(double s) const {
    if (s <= inner_ || s >= r_) return 0.0;
    double w = r_ - inner_, u = (s - inner_) / w;
    return -sign_ * 60 * u * (1 - u) * (1 - 2 * u) / (w * w);
}

namespace {
double bracket(double theta, double r, const Point& z) {
    return std::max(0.0, theta * theta * z.y * z.y - 6 * z.t * r * r * r * r);
}
}  // namespace

double Cutoff::phi0(const Point& z) const { return chi(std::pow(bracket(theta_, r_, z), 1.0 / 6.0)); }

double Cutoff::phi1(double x) const { return chi(theta_ * std::abs(x)); }

double Cutoff::y_phi0(const Point& z) const {
    double b = bracket(theta_, r_, z);
    double s = std::pow(b, 1.0 / 6.0);
    double d = dchi(s);
    if (d == 0.0) return 0.0;
    double r4 = r_ * r_ * r_ * r_;
    return d * (1.0 / 6.0) * std::pow(b, -5.0 / 6.0) * (6 * r4 + 2 * theta_ * theta_ * z.x * z.y);
}

double Cutoff::dxx_phi1(double x) const { return theta_ * theta_ * d2chi(theta_ * std::abs(x)); }

double cutoff_phi(double theta, double r, const Point& z) { return Cutoff(theta, r).phi(z); }

double cutoff_sign_check(double theta, double r, int samples, std::uint64_t seed, CutoffProfile profile) {
    Cutoff cut(theta, r, profile);
    std::mt19937_64 rng(seed);
    const double hy = 1e-5 * r * r * r / theta, ht = 1e-5 * r * r;
    double worst = -kInf;
    for (int n = 0; n < samples; ++n) {
        Point z{uniform(rng, -r / theta, r / theta), uniform(rng, -r * r * r / theta, r * r * r / theta),
                uniform(rng, -r * r, 0.0)};
        double dy = (cut.phi0({z.x, z.y + hy, z.t}) - cut.phi0({z.x, z.y - hy, z.t})) / (2 * hy);
        double dt = (cut.phi0({z.x, z.y, z.t + ht}) - cut.phi0({z.x, z.y, z.t - ht})) / (2 * ht);
        worst = std::max(worst, z.x * dy - dt);
    }
    return worst;
}

double poincare_i1(const std::function<double(const Point&)>& w, const Point& center, const Point& z,
                   const Cutoff& cut, const PoincareOptions& opt) {
    const Point zl = compose(inverse(center), z);
    const double r = cut.r(), theta = cut.theta();
    // phi0 vanishes for tau <= -r^2/6 and y_phi0 vanishes near tau = 0 up to
    // -theta r^2/6 (for small eta); both points are panel breaks.
    const double lo = -r * r / 6.0, kink = -theta * r * r / 6.0, hi = zl.t;
    if (!(hi > lo)) return 0.0;
    std::vector<std::pair<double, double>> segments;
    if (kink > lo && kink < hi) {
        segments = {{lo, kink}, {kink, hi}};
    } else {
        segments = {{lo, hi}};
    }
    const Rule gl = legendre_rule(opt.tau_nodes), gh = hermite_rule(opt.hermite_nodes);
    double total = 0.0;
    for (auto [a, b] : segments) {
        const double panel = (b - a) / opt.tau_panels;
        for (int p = 0; p < opt.tau_panels; ++p) {
            for (int k = 0; k < opt.tau_nodes; ++k) {
                double tau = a + panel * (p + 0.5 * (gl.nodes[k] + 1.0));
                double s = zl.t - tau;
                // Gamma(z, .) at fixed tau is Gaussian in (xi, eta) with mean
                // (x, y + s x) and covariance [[2s, s^2], [s^2, 2s^3/3]].
                double l11 = std::sqrt(2 * s), l21 = s * s / l11, l22 = std::sqrt(s * s * s / 6.0);
                double inner = 0.0;
                for (int i = 0; i < opt.hermite_nodes; ++i) {
                    double xi = zl.x + l11 * gh.nodes[i];
                    double phi1 = cut.phi1(xi), d2 = cut.dxx_phi1(xi);
                    for (int j = 0; j < opt.hermite_nodes; ++j) {
                        double eta = zl.y + s * zl.x + l21 * gh.nodes[i] + l22 * gh.nodes[j];
                        Point zeta{xi, eta, tau};
                        double yphi = phi1 * cut.y_phi0(zeta);
                        double dphi = d2 * cut.phi0(zeta);
                        if (yphi == 0.0 && dphi == 0.0) continue;
                        inner += gh.weights[i] * gh.weights[j] * -(yphi + dphi) * w(compose(center, zeta));
                    }
                }
                total += 0.5 * panel * gl.weights[k] * inner;
            }
        }
    }
    return total;
}

namespace {

// Trajectory values inside a thin window in (y, t), interpolated by cubic
// B-splines along x (C^2) and linearly in y and t. The Gaussian averages in
// I1 see the x-convexity of w at scales far below dx; a piecewise-linear
// interpolant would concentrate it on cell-center lines.
class RowSplines {
public:
    RowSplines(const Trajectory& tr, double y_lo, double y_hi, double t_lo, double t_hi) : tr_(tr) {
        if (!tr.covers({tr.grid.xc(0), y_lo, t_lo}) || !tr.covers({tr.grid.xc(0), y_hi, t_hi})) {
            throw std::out_of_range("poincare_check: ball leaves the sampled space-time box");
        }
        const double step = 0.5 * tr.grid.dy();
        for (std::size_t k = level(t_lo); k <= level(t_hi) + 1 && k < tr.levels.size(); ++k) {
            for (double y = y_lo;; y = std::min(y + step, y_hi)) {
                auto [j0, j1, wy] = column(y);
                row(k, j0);
                row(k, j1);
                if (y >= y_hi) break;
            }
        }
        t_lo_ = t_lo;
        t_hi_ = t_hi;
        y_lo_ = y_lo;
        y_hi_ = y_hi;
    }

    double operator()(const Point& z) const {
        if (z.t < t_lo_ || z.t > t_hi_ || z.y < y_lo_ || z.y > y_hi_ || !tr_.covers(z)) {
            throw std::out_of_range("poincare_check: point outside the interpolation window");
        }
        std::size_t k = level(z.t);
        double wt = 0.0;
        if (tr_.times.size() > 1) {
            double span = tr_.times[k + 1] - tr_.times[k];
            wt = span > 0 ? (z.t - tr_.times[k]) / span : 0.0;
        }
        auto [j0, j1, wy] = column(z.y);
        auto at = [&](std::size_t kk) {
            return (1 - wy) * rows_.at({kk, j0})(z.x) + wy * rows_.at({kk, j1})(z.x);
        };
        double v = at(k);
        return wt == 0.0 ? v : (1 - wt) * v + wt * at(k + 1);
    }

private:
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;

    std::size_t level(double t) const {
        if (tr_.times.size() == 1) return 0;
        auto it = std::upper_bound(tr_.times.begin(), tr_.times.end(), t);
        std::size_t k = it == tr_.times.begin() ? 0 : static_cast<std::size_t>(it - tr_.times.begin()) - 1;
        return std::min(k, tr_.times.size() - 2);
    }

    std::tuple<int, int, double> column(double y) const {
        const Grid& g = tr_.grid;
        double fy = (y - g.yc(0)) / g.dy();
        if (tr_.periodic_y) {
            double fl = std::floor(fy);
            long jj = static_cast<long>(fl) % g.ny;
            if (jj < 0) jj += g.ny;
            return {static_cast<int>(jj), static_cast<int>((jj + 1) % g.ny), fy - fl};
        }
        int j0 = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny - 2);
        return {j0, j0 + 1, fy - j0};
    }

    void row(std::size_t k, int j) {
        if (rows_.count({k, j})) return;
        const Grid& g = tr_.grid;
        std::vector<double> f(g.nx);
        for (int i = 0; i < g.nx; ++i) f[i] = tr_.levels[k](i, j);
        rows_.emplace(std::make_pair(k, j), Spline(f.begin(), f.end(), g.xc(0), g.dx()));
    }

    const Trajectory& tr_;
    std::map<std::pair<std::size_t, int>, Spline> rows_;
    double t_lo_ = 0, t_hi_ = 0, y_lo_ = 0, y_hi_ = 0;
};

}  // namespace

PoincareResult poincare_check(const Trajectory& w, const Point& center, double r, double theta,
                              const PoincareOptions& opt) {
    Cutoff cut(theta, r);
    auto sample = [&w](const Point& z) {
        if (!w.covers(z)) throw std::out_of_range("poincare_check: ball leaves the sampled space-time box");
        return w.sample(z);
    };
    // The integrands of I1 and of the left side vanish outside Q, whose
    // global image lies in this (y, t) window.
    const double y_reach = r * r * r / theta + r * r * std::abs(center.x);
    const RowSplines splines(w, center.y - y_reach, center.y + y_reach, center.t - r * r, center.t);
    auto smooth = [&splines](const Point& z) { return splines(z); };
    PoincareResult res;

    std::vector<Point> zs;
    const double small = theta * r;
    for (int a = 0; a < opt.z_lattice; ++a) {
        for (int b = 0; b < opt.z_lattice; ++b) {
            for (int c = 0; c < opt.z_lattice; ++c) {
                Point local{small * lattice_coord(a, opt.z_lattice),
                            small * small * small * lattice_coord(b, opt.z_lattice),
                            -small * small * 0.5 * (1.0 - lattice_coord(c, opt.z_lattice))};
                if (within_norm(local, small)) zs.push_back(compose(center, local));
            }
        }
    }
    std::vector<double> i1(zs.size());
    parallel_for(static_cast<int>(zs.size()), [&](int begin, int end) {
        for (int k = begin; k < end; ++k) i1[k] = poincare_i1(smooth, center, zs[k], cut, opt);
    });
    res.z_points = static_cast<int>(zs.size());
    res.i0 = *std::max_element(i1.begin(), i1.end());

    double lhs = 0.0;
    double vol = for_ball_cells(small, opt.integral_cells, [&](const Point& local) {
        double e = splines(compose(center, local)) - res.i0;
        if (e > 0.0) lhs += e * e;
    });
    res.lhs = lhs * vol;

    const double h = w.grid.dx();
    double grad = 0.0;
    vol = for_ball_cells(r / theta, opt.integral_cells, [&](const Point& local) {
        Point z = compose(center, local);
        double d = (sample({z.x + h, z.y, z.t}) - sample({z.x - h, z.y, z.t})) / (2 * h);
        grad += d * d;
    });
    res.dx_integral = grad * vol;
    res.rhs = theta * theta * r * r * res.dx_integral;
    res.constant = res.rhs > 0.0 ? res.lhs / res.rhs : (res.lhs > 0.0 ? kInf : 0.0);
    return res;
}

Trajectory log_transform(const Trajectory& u, double h) {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("log_transform: h must lie in (0, 1)");
    Trajectory w = u;
    const double shift = std::pow(h, 9.0 / 8.0);
    for (auto& level : w.levels) {
        for (double& v : level.v) v = std::max(0.0, std::log(h / (v + shift)));
    }
    return w;
}

HolderFit holder_fit(const Trajectory& u, const Point& center, const std::vector<double>& radii, int lattice) {
    if (radii.size() < 4) throw std::invalid_argument("holder_fit: at least 4 radii are required");
    HolderFit fit;
    fit.radii = radii;
    double scale = 0.0;
    for (double r : radii) {
        auto v = sample_all(u, ball_samples(center, r, lattice));
        fit.osc.push_back(spread(v));
        scale = std::max(scale, magnitude(v));
    }
    const double noise = 1e-13 * std::max(scale, 1e-300);
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (fit.osc[i] > noise) {
            lx.push_back(std::log(radii[i]));
            ly.push_back(std::log(fit.osc[i]));
        }
    }
    if (lx.size() < 2) {
        fit.locally_constant = true;
        return fit;
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / n;
        my += ly[i] / n;
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    fit.alpha_hat = sxy / sxx;
    double ss = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        double e = ly[i] - (my + fit.alpha_hat * (lx[i] - mx));
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);

    const double u0 = u.sample(center);
    for (const Point& z : ball_samples(center, radii.front(), lattice)) {
        double d = distance(center, z);
        if (d > 0.0) fit.pointwise = std::max(fit.pointwise, std::abs(u.sample(z) - u0) / std::pow(d, fit.alpha_hat));
    }
    return fit;
}

ProbeReport run_probe(const Trajectory& u, const Point& center, const ProbeConfig& cfg) {
    cfg.check();
    const double half_width = 0.5 * (u.grid.x1 - u.grid.x0);
    if (cfg.radii.front() > 0.25 * half_width) {
        throw std::invalid_argument("probe: radii must not exceed 1/4 of the domain half-width");
    }
    ProbeReport rep;
    rep.config = cfg;
    rep.center = center;
    rep.decay = oscillation_decay(u, center, cfg);
    for (double r : cfg.radii) rep.moser.push_back(moser_ratio(u, center, r, cfg.p));
    if (cfg.radii.size() >= 4) rep.holder = holder_fit(u, center, cfg.radii, cfg.lattice);
    const double r0 = cfg.radii.front();
    for (double h : cfg.h_levels) {
        LevelSetReport ls;
        ls.h = h;
        for (int k = 1; k <= 3; ++k) {
            double t = center.t - cfg.alpha * r0 * r0 * k / 4.0;
            auto sample = [&](double x, double y) { return u.sample({x, y, t}); };
            ls.times.push_back(t);
            ls.fractions.push_back(level_set_fraction(sample, t, CubeSpec{center, cfg.beta * r0}, h));
        }
        rep.level_sets.push_back(std::move(ls));
    }
    return rep;
}

std::string ProbeReport::to_json() const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["center"] = {center.x, center.y, center.t};
    j["config"] = {{"theta", config.theta}, {"alpha", config.alpha}, {"beta", config.beta}, {"p", config.p},
                   {"radii", config.radii},  {"h_levels", config.h_levels}, {"lattice", config.lattice}};
    j["oscillation"] = {{"radii", decay.radii},
                        {"osc_r", decay.osc_r},
                        {"osc_theta_r", decay.osc_theta_r},
                        {"ratios", decay.ratios},
                        {"max_ratio", decay.max_ratio}};
    ordered_json moser_rows = ordered_json::array();
    for (std::size_t i = 0; i < moser.size(); ++i) {
        moser_rows.push_back({{"r", config.radii[i]},
                              {"ratio", moser[i].ratio},
                              {"sup", moser[i].sup},
                              {"integral", moser[i].integral},
                              {"clipped", moser[i].clipped}});
    }
    j["moser"] = moser_rows;
    j["holder"] = {{"alpha_hat", holder.alpha_hat},
                   {"residual", holder.residual},
                   {"pointwise", holder.pointwise},
                   {"locally_constant", holder.locally_constant}};
    ordered_json levels = ordered_json::array();
    for (const auto& ls : level_sets) levels.push_back({{"h", ls.h}, {"times", ls.times}, {"fractions", ls.fractions}});
    j["level_sets"] = levels;
    if (poincare) {
        j["poincare"] = {{"lhs", poincare->lhs},
                         {"rhs", poincare->rhs},
                         {"i0", poincare->i0},
                         {"constant", poincare->constant},
                         {"dx_integral", poincare->dx_integral},
                         {"z_points", poincare->z_points}};
    }
    return j.dump(2) + "\n";
}

std::string ProbeReport::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "r,osc,osc_theta_r,ratio\n";
    for (std::size_t i = 0; i < decay.radii.size(); ++i) {
        os << decay.radii[i] << ',' << decay.osc_r[i] << ',' << decay.osc_theta_r[i] << ',' << decay.ratios[i] << '\n';
    }
    return os.str();
}

}  // namespace kolmo
