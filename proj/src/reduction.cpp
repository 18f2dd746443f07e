#include "kolmo/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

namespace kolmo {

namespace {

using BFn = std::function<double(double)>;

// Safeguarded Newton on g(x) = s (b(x) - xi), oriented so that g increases.
double newton_invert(const BFn& b, const BFn& bx, double xi, double lo, double hi) {
    double flo = b(lo) - xi, fhi = b(hi) - xi;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0) || !std::isfinite(flo) || !std::isfinite(fhi)) {
        throw std::domain_error("invert_b: xi lies outside the range of b on the search interval");
    }
    const double s = fhi > flo ? 1.0 : -1.0;
    double x = lo + (hi - lo) * (-flo / (fhi - flo));
    for (int iter = 0; iter < 200; ++iter) {
        double g = s * (b(x) - xi);
        if (std::abs(g) <= 1e-12) return x;
        if (g < 0) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) return x;
        double d = s * bx(x);
        if (!(d > 0.0)) throw std::domain_error("invert_b: dx b changes sign on the search interval");
        double next = x - g / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

}  // namespace

double invert_b(const CoefficientSet& cs, double xi, double eta, double tau, double x_lo, double x_hi) {
    if (!(x_hi > x_lo)) throw std::invalid_argument("invert_b: empty x range");
    const double h = 1e-7 * (x_hi - x_lo);
    auto b = [&](double x) { return cs.b.eval({x, eta, tau}); };
    auto bx = [&](double x) { return (b(x + h) - b(x - h)) / (2 * h); };
    return newton_invert(b, bx, xi, x_lo, x_hi);
}

DriftDerivatives::DriftDerivatives(const dsl::Expr& b, const Box& box) : b_(b) {
    using dsl::Variable;
    bx_ = dsl::derivative(b, Variable::X);
    if (bx_) bxx_ = dsl::derivative(*bx_, Variable::X);
    by_ = dsl::derivative(b, Variable::Y);
    bt_ = dsl::derivative(b, Variable::T);
    closed_form_ = bx_ && bxx_ && by_ && bt_;
    h_[0] = 1e-3 * (box.x1 - box.x0);
    h_[1] = 1e-3 * (box.y1 - box.y0);
    h_[2] = 1e-3 * std::max(box.t1 - box.t0, 1e-9);
}

double DriftDerivatives::fd(const Point& z, int axis, int order) const {
    static constexpr double d1[7] = {-1, 9, -45, 0, 45, -9, 1};
    static constexpr double d2[7] = {2, -27, 270, -490, 270, -27, 2};
    const double h = h_[axis];
    double acc = 0.0;
    for (int k = -3; k <= 3; ++k) {
        Point p = z;
        (axis == 0 ? p.x : axis == 1 ? p.y : p.t) += k * h;
        double w = order == 1 ? d1[k + 3] : d2[k + 3];
        if (w != 0.0) acc += w * b_.eval(p);
    }
    return order == 1 ? acc / (60 * h) : acc / (180 * h * h);
}

double DriftDerivatives::bx(const Point& z) const { return bx_ ? bx_->eval(z) : fd(z, 0, 1); }
double DriftDerivatives::bxx(const Point& z) const { return bxx_ ? bxx_->eval(z) : fd(z, 0, 2); }
double DriftDerivatives::by(const Point& z) const { return by_ ? by_->eval(z) : fd(z, 1, 1); }
double DriftDerivatives::bt(const Point& z) const { return bt_ ? bt_->eval(z) : fd(z, 2, 1); }

Box image_box(const CoefficientSet& cs, const Box& box, int samples) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    auto take = [&](const Point& z) {
        double v = cs.b.eval(z);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    for (int i = 1; i <= samples; ++i) take(halton_point(box, static_cast<std::uint64_t>(i)));
    // Monotone in x: extremes sit on the x-faces, so sample those densely.
    const int n = 64;
    for (int a = 0; a <= n; ++a) {
        for (int c = 0; c <= n; ++c) {
            double y = box.y0 + (box.y1 - box.y0) * a / n;
            double t = box.t0 + (box.t1 - box.t0) * c / n;
            take({box.x0, y, t});
            take({box.x1, y, t});
        }
    }
    double margin = 0.01 * (hi - lo);
    Box out = box;
    out.x0 = lo - margin;
    out.x1 = hi + margin;
    return out;
}

SolverCoefficients TransformedCoefficients::solver_coefficients() const {
    return {a_tilde, b0_tilde, CoefficientField{[](const Point& z) { return z.x; }, false}};
}

TransformedCoefficients transform_coeffs(const CoefficientSet& cs, const Box& box) {
    auto der = std::make_shared<const DriftDerivatives>(cs.b, box);
    int sign = 0;
    for (int i = 1; i <= 2000; ++i) {
        double v = der->bx(halton_point(box, static_cast<std::uint64_t>(i)));
        int s = v > 0 ? 1 : v < 0 ? -1 : 0;
        if (s == 0 || (sign != 0 && s != sign)) {
            throw std::invalid_argument("transform_coeffs: dx b must keep one strict sign on the box");
        }
        sign = s;
    }

    TransformedCoefficients tc;
    tc.source = cs;
    tc.source_box = box;
    tc.image_box = image_box(cs, box);
    tc.closed_form = der->closed_form();

    // Widen the search interval until b spans the image box at every
    // sampled (eta, tau).
    const double width = box.x1 - box.x0;
    double lo = box.x0, hi = box.x1;
    auto covers = [&](double l, double h) {
        const int n = 16;
        for (int a = 0; a <= n; ++a) {
            for (int c = 0; c <= n; ++c) {
                double y = box.y0 + (box.y1 - box.y0) * a / n;
                double t = box.t0 + (box.t1 - box.t0) * c / n;
                double bl = cs.b.eval({l, y, t}), bh = cs.b.eval({h, y, t});
                if (std::min(bl, bh) > tc.image_box.x0 || std::max(bl, bh) < tc.image_box.x1) return false;
            }
        }
        return true;
    };
    int widenings = 0;
    while (!covers(lo, hi)) {
        if (++widenings > 10) throw std::invalid_argument("transform_coeffs: b does not cover its image box");
        lo -= width;
        hi += width;
    }
    tc.x_search_lo = lo;
    tc.x_search_hi = hi;

    dsl::Expr bexpr = cs.b;
    auto inverse = [bexpr, der, lo, hi](const Point& z) {
        auto b = [&](double x) { return bexpr.eval({x, z.y, z.t}); };
        auto bx = [&](double x) { return der->bx({x, z.y, z.t}); };
        return newton_invert(b, bx, z.x, lo, hi);
    };
    tc.inverse_map = inverse;

    dsl::Expr a = cs.a, b0 = cs.b0;
    using dsl::Variable;
    bool a_t = a.depends_on(Variable::T) || bexpr.depends_on(Variable::T);
    bool b0_t = a_t || b0.depends_on(Variable::T);
    tc.a_tilde = {[a, der, inverse](const Point& z) {
                      Point p{inverse(z), z.y, z.t};
                      double bx = der->bx(p);
                      return bx * bx * a.eval(p);
                  },
                  a_t};
    tc.b0_tilde = {[a, b0, der, inverse](const Point& z) {
                       Point p{inverse(z), z.y, z.t};
                       return -a.eval(p) * der->bxx(p) + b0.eval(p) * der->bx(p) + z.x * der->by(p) - der->bt(p);
                   },
                   b0_t};
    return tc;
}

namespace {

// Bilinear interpolation between cell centers, clamped to the edge cells.
double bilinear(const Grid& g, const Field& f, double x, double y) {
    auto locate = [](double u, double lo, double h, int n, int& i0, double& w) {
        double s = std::clamp((u - lo) / h - 0.5, 0.0, static_cast<double>(n - 1));
        i0 = std::min(static_cast<int>(std::floor(s)), n - 2);
        w = s - i0;
    };
    int i0, j0;
    double wx, wy;
    locate(x, g.x0, g.dx(), g.nx, i0, wx);
    locate(y, g.y0, g.dy(), g.ny, j0, wy);
    return (1 - wx) * ((1 - wy) * f(i0, j0) + wy * f(i0, j0 + 1)) +
           wx * ((1 - wy) * f(i0 + 1, j0) + wy * f(i0 + 1, j0 + 1));
}

MaskedField blank(const Grid& g, double t) {
    MaskedField m;
    m.field = {g.nx, g.ny, t, std::vector<double>(static_cast<std::size_t>(g.nx) * g.ny, 0.0)};
    m.mask.assign(m.field.v.size(), 0);
    return m;
}

void check_shape(const Field& f, const Grid& g) {
    if (f.nx != g.nx || f.ny != g.ny) throw std::invalid_argument("resample: field does not match its grid");
}

}  // namespace

double MaskedField::max_discrepancy(const MaskedField& a, const Field& b) {
    if (a.field.nx != b.nx || a.field.ny != b.ny) throw std::invalid_argument("max_discrepancy: shape mismatch");
    double m = 0.0;
    for (std::size_t c = 0; c < b.v.size(); ++c) {
        if (!a.mask[c]) m = std::max(m, std::abs(a.field.v[c] - b.v[c]));
    }
    return m;
}

MaskedField pushforward_field(const Field& u, const Grid& source, const Grid& target,
                              const TransformedCoefficients& tc) {
    check_shape(u, source);
    MaskedField out = blank(target, u.t);
    for (int i = 0; i < target.nx; ++i) {
        for (int j = 0; j < target.ny; ++j) {
            Point z{target.xc(i), target.yc(j), u.t};
            std::size_t c = static_cast<std::size_t>(i) * target.ny + j;
            double x = std::numeric_limits<double>::quiet_NaN();
            try {
                x = tc.inverse_map(z);
            } catch (const std::domain_error&) {
            }
            if (!(x >= source.x0 && x <= source.x1 && z.y >= source.y0 && z.y <= source.y1)) {
                out.mask[c] = 1;
                ++out.masked_count;
                continue;
            }
            out.field.v[c] = bilinear(source, u, x, z.y);
        }
    }
    return out;
}

MaskedField pullback_field(const Field& v, const Grid& target, const Grid& source,
                           const TransformedCoefficients& tc) {
    check_shape(v, target);
    MaskedField out = blank(source, v.t);
    for (int i = 0; i < source.nx; ++i) {
        for (int j = 0; j < source.ny; ++j) {
            Point z{source.xc(i), source.yc(j), v.t};
            std::size_t c = static_cast<std::size_t>(i) * source.ny + j;
            double xi = tc.source.b.eval(z);
            if (!(xi >= target.x0 && xi <= target.x1 && z.y >= target.y0 && z.y <= target.y1)) {
                out.mask[c] = 1;
                ++out.masked_count;
                continue;
            }
            out.field.v[c] = bilinear(target, v, xi, z.y);
        }
    }
    return out;
}

}  // namespace kolmo
