#include "kolmo/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kolmo/random.hpp"

namespace kolmo {

namespace {

constexpr int kMaxWitnesses = 5;

void record(ValidationReport& rep, const std::string& check, const Point& z, double value) {
    rep.passed = false;
    int n = 0;
    for (const auto& v : rep.violations) n += v.check == check ? 1 : 0;
    if (n < kMaxWitnesses) rep.violations.push_back({check, z, value});
}

}  // namespace

CoefficientSet CoefficientSet::parse(const std::string& a, const std::string& b0,
                                     const std::string& b, double mu) {
    return {dsl::Expr::parse(a), dsl::Expr::parse(b0), dsl::Expr::parse(b), mu};
}

Point halton_point(const Box& box, std::uint64_t index) {
    return box.lerp(radical_inverse(index, 2), radical_inverse(index, 3), radical_inverse(index, 5));
}

ValidationReport validate(const CoefficientSet& cs, const Box& box, int samples, double bx_floor) {
    if (samples < 10000) {
        throw std::invalid_argument("validate: samples must be >= 10000");
    }
    ValidationReport rep;
    rep.samples = samples;
    if (!(cs.mu > 0.0 && cs.mu < 1.0)) {
        record(rep, "mu in (0,1)", kOrigin, cs.mu);
        return rep;
    }
    const double inv_mu = 1.0 / cs.mu;
    const double hx = 1e-4 * (box.x1 - box.x0);
    const double hy = 1e-4 * (box.y1 - box.y0);
    const double ht = 1e-4 * std::max(box.t1 - box.t0, 1e-12);

    rep.a_min = std::numeric_limits<double>::infinity();
    rep.a_max = -std::numeric_limits<double>::infinity();
    rep.bx_min_abs = std::numeric_limits<double>::infinity();
    double bx_sup = 0.0, by_sup = 0.0, bt_sup = 0.0, bxx_sup = 0.0;
    bool seen_pos = false, seen_neg = false;

    for (int i = 1; i <= samples; ++i) {
        Point z = halton_point(box, static_cast<std::uint64_t>(i));
        try {
            double a = cs.a.eval(z);
            rep.a_min = std::min(rep.a_min, a);
            rep.a_max = std::max(rep.a_max, a);
            if (!(a > cs.mu && a < inv_mu)) record(rep, "mu < a < 1/mu", z, a);

            double b0 = cs.b0.eval(z);
            rep.b0_sup = std::max(rep.b0_sup, std::abs(b0));

            auto b = [&](double dx, double dy, double dt) {
                return cs.b.eval({z.x + dx, z.y + dy, z.t + dt});
            };
            double bc = b(0, 0, 0);
            double bxp = b(hx, 0, 0), bxm = b(-hx, 0, 0);
            double bx = (bxp - bxm) / (2 * hx);
            double bxx = (bxp - 2 * bc + bxm) / (hx * hx);
            double by = (b(0, hy, 0) - b(0, -hy, 0)) / (2 * hy);
            double bt = (b(0, 0, ht) - b(0, 0, -ht)) / (2 * ht);
            rep.b_sup = std::max(rep.b_sup, std::abs(bc));
            bx_sup = std::max(bx_sup, std::abs(bx));
            by_sup = std::max(by_sup, std::abs(by));
            bt_sup = std::max(bt_sup, std::abs(bt));
            bxx_sup = std::max(bxx_sup, std::abs(bxx));
            rep.bx_min_abs = std::min(rep.bx_min_abs, std::abs(bx));
            seen_pos = seen_pos || bx > 0;
            seen_neg = seen_neg || bx < 0;
            if (!(std::abs(bx) >= bx_floor)) record(rep, "|dx b| >= floor", z, bx);
            for (double v : {a, b0, bc, bx, bxx, by, bt}) {
                if (!std::isfinite(v)) {
                    record(rep, "finite values", z, v);
                    break;
                }
            }
        } catch (const dsl::EvalError& e) {
            record(rep, std::string("evaluation: ") + e.what(), z, 0.0);
        }
    }
    rep.bx_sign = seen_pos && !seen_neg ? 1 : seen_neg && !seen_pos ? -1 : 0;
    if (rep.bx_sign == 0) record(rep, "dx b of constant sign", kOrigin, 0.0);
    rep.b_c2 = std::max({rep.b_sup, bx_sup, by_sup, bt_sup, bxx_sup});
    if (!(rep.b_c2 + rep.b0_sup <= inv_mu)) {
        record(rep, "|b|_C2 + |b0|_inf <= 1/mu", kOrigin, rep.b_c2 + rep.b0_sup);
    }
    return rep;
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << (passed ? "valid" : "invalid") << ": a in [" << a_min << ", " << a_max
       << "], |b0|_inf = " << b0_sup << ", |b|_C2 ~ " << b_c2 << ", inf|dx b| = " << bx_min_abs;
    for (const auto& v : violations) {
        os << "\n  " << v.check << " at (" << v.witness.x << ", " << v.witness.y << ", "
           << v.witness.t << "): " << v.value;
    }
    return os.str();
}

CoefficientField CoefficientField::from_expr(const dsl::Expr& e) {
    return {[e](const Point& z) { return e.eval(z); }, e.depends_on(dsl::Variable::T)};
}

CoefficientField CoefficientField::constant(double v) {
    return {[v](const Point&) { return v; }, false};
}

SolverCoefficients SolverCoefficients::from_set(const CoefficientSet& cs) {
    return {CoefficientField::from_expr(cs.a), CoefficientField::from_expr(cs.b0),
            CoefficientField::from_expr(cs.b)};
}

}  // namespace kolmo
