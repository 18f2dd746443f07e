#include "kolmo/verify.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "kolmo/coefficients.hpp"
#include "kolmo/dsl.hpp"
#include "kolmo/gamma.hpp"
#include "kolmo/group.hpp"
#include "kolmo/potentials.hpp"
#include "kolmo/probe.hpp"
#include "kolmo/random.hpp"
#include "kolmo/reduction.hpp"
#include "kolmo/solver.hpp"

namespace kolmo {

namespace {

Check le(std::string name, double value, double bound) {
    return {std::move(name), value, "<=", bound, value <= bound};
}

Check ge(std::string name, double value, double bound) {
    return {std::move(name), value, ">=", bound, value >= bound};
}

Check holds(std::string name, bool ok) { return {std::move(name), ok ? 1.0 : 0.0, ">=", 1.0, ok}; }

template <class E, class F>
bool throws(F&& f) {
    try {
        f();
    } catch (const E&) {
        return true;
    }
    return false;
}

double max_diff(const Point& a, const Point& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.t - b.t)});
}

Point random_point(std::mt19937_64& rng, double lo, double hi) {
    return {uniform(rng, lo, hi), uniform(rng, lo, hi), uniform(rng, lo, hi)};
}

std::vector<Check> group_suite(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double assoc = 0, inv = 0, ident = 0, homog = 0;
    for (int i = 0; i < 10000; ++i) {
        Point p = random_point(rng, -10, 10), q = random_point(rng, -10, 10), s = random_point(rng, -10, 10);
        assoc = std::max(assoc, max_diff(compose(compose(p, q), s), compose(p, compose(q, s))));
        inv = std::max({inv, max_diff(compose(p, inverse(p)), kOrigin), max_diff(compose(inverse(p), p), kOrigin)});
        ident = std::max({ident, max_diff(compose(p, kOrigin), p), max_diff(compose(kOrigin, p), p)});
        double mu = std::pow(10.0, uniform(rng, -2, 2));
        double n = group_norm(p);
        homog = std::max(homog, std::abs(group_norm(dilate(mu, p)) - mu * n) / (mu * n));
    }
    double cont = 0;
    Point p{0.5, -2.0, 1.5};
    double prev = group_norm(p);
    bool monotone = true;
    for (double eps = 0.5; eps > 1e-6; eps *= 0.5) {
        double n = group_norm(dilate(eps, p));
        monotone = monotone && n < prev;
        prev = n;
        cont = n;
    }
    double lambda = estimate_lambda(1.0, 20000, seed);
    return {le("associativity max abs error", assoc, 1e-12),
            le("identity max abs error", ident, 1e-14),
            le("inverse max abs error", inv, 1e-12),
            le("norm homogeneity max rel error", homog, 1e-10),
            holds("norm decreases along dilations to 0", monotone),
            le("norm at eps=1e-6 scale", cont, 1e-5),
            ge("cube-ball constant estimate", lambda, 1.0)};
}

std::vector<Check> gamma_suite(std::uint64_t seed) {
    std::vector<Check> out;
    for (double s : {0.01, 0.1, 1.0, 4.0}) {
        char name[48];
        std::snprintf(name, sizeof name, "mass error at t-tau=%g", s);
        out.push_back(le(name, std::abs(gamma_mass(s, 0.0) - 1), 1e-6));
    }
    std::mt19937_64 rng(seed);
    double homog = 0, transl = 0;
    for (int i = 0; i < 10000; ++i) {
        Point z{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.1, 2)};
        double mu = std::pow(10.0, uniform(rng, -1, 1));
        double rhs = std::pow(mu, -4) * gamma_origin(z);
        if (rhs > 1e-280) homog = std::max(homog, std::abs(gamma_origin(dilate(mu, z)) - rhs) / rhs);
        Point zeta{uniform(rng, -1, 1), uniform(rng, -1, 1), z.t - uniform(rng, 0.05, 1.5)};
        double a = gamma(z, zeta), b = gamma_origin(compose(inverse(zeta), z));
        if (std::max(a, b) > 1e-280) transl = std::max(transl, std::abs(a - b) / std::max(a, b));
    }
    out.push_back(le("homogeneity max rel error", homog, 1e-12));
    out.push_back(le("translation identity max rel error", transl, 1e-10));
    double worst = 0;
    for (int i = 0; i < 20; ++i) {
        Point z{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0.5, 2)};
        std::vector<double> r;
        for (double h : {1e-2, 5e-3, 2.5e-3}) r.push_back(std::abs(l0_residual(z, h)));
        double order = 0.5 * (std::log2(r[0] / r[1]) + std::log2(r[1] / r[2]));
        worst = std::max(worst, std::abs(order - 2.0));
    }
    out.push_back(le("L0 residual order deviation from 2", worst, 0.3));
    out.push_back(holds("t <= tau vanishes", gamma({0.1, 0.2, 0.5}, {0, 0, 0.5}) == 0.0 &&
                                                 gamma({0.1, 0.2, 0.4}, {0, 0, 0.5}) == 0.0));
    return out;
}

std::vector<Check> dsl_suite(std::uint64_t seed) {
    using dsl::Expr;
    auto ev = [](const char* s) { return Expr::parse(s).eval(0.0, 0.0, 0.0); };
    std::vector<Check> out;
    out.push_back(holds("precedence and associativity", ev("2^3^2") == 512 && ev("-2^2") == -4 && ev("8/4/2") == 1 &&
                                                            ev("8-4-2") == 2 && ev("2*-3") == -6 && ev("2^-1") == 0.5));
    const char* sources[] = {"1 + 0.2*sin(x + y)", "x^2*exp(-t)/(1 + y^2)", "-(x - y)^3", "sqrt(3)/(2*pi*t^2)",
                             "checkerboard(3, 0.1, 0.1, 0.1, 0.6, 1.5)", "max(0, 1 - x^2)^4", "2^-x^2"};
    bool roundtrip = true;
    for (const char* s : sources) {
        Expr e = Expr::parse(s);
        roundtrip = roundtrip && Expr::parse(e.print()) == e;
    }
    out.push_back(holds("print then parse reproduces the tree", roundtrip));
    out.push_back(holds("malformed input is rejected", throws<dsl::ParseError>([] { Expr::parse("x + "); }) &&
                                                          throws<dsl::ParseError>([] { Expr::parse("foo(x)"); }) &&
                                                          throws<dsl::ParseError>([] { Expr::parse("(x"); })));
    Expr f = Expr::parse("sin(x*y) + x^3*exp(-t) + log(2 + cos(y))");
    auto fx = derivative(f, dsl::Variable::X), fy = derivative(f, dsl::Variable::Y);
    std::mt19937_64 rng(seed);
    double err = 0;
    const double h = 1e-5;
    for (int i = 0; i < 200; ++i) {
        Point z = random_point(rng, -1, 1);
        double dx = (f.eval(z.x + h, z.y, z.t) - f.eval(z.x - h, z.y, z.t)) / (2 * h);
        double dy = (f.eval(z.x, z.y + h, z.t) - f.eval(z.x, z.y - h, z.t)) / (2 * h);
        err = std::max({err, std::abs(fx->eval(z) - dx), std::abs(fy->eval(z) - dy)});
    }
    out.push_back(le("symbolic derivative vs centered difference", err, 1e-8));
    out.push_back(holds("no classical derivative for abs", !derivative(Expr::parse("abs(x)"), dsl::Variable::X)));
    return out;
}

std::vector<Check> coefficients_suite(std::uint64_t) {
    Box box{-1, 1, -1, 1, 0, 1};
    auto good = validate(CoefficientSet::parse("checkerboard(3, 0.1, 0.1, 0.1, 0.6, 1.5)", "0.2*sin(y)", "x", 0.5), box);
    auto elliptic = validate(CoefficientSet::parse("1 + x^2", "0", "x", 0.6), box);
    auto sign = validate(CoefficientSet::parse("1", "0", "x^2 + 0.1*x", 0.3), box);
    auto flat = validate(CoefficientSet::parse("1", "0", "1", 0.5), box);
    return {holds("admissible rough set passes", good.passed),
            ge("rough set a_min", good.a_min, 0.6),
            le("rough set a_max", good.a_max, 1.5),
            holds("ellipticity violation is reported", !elliptic.passed && !elliptic.violations.empty()),
            holds("sign change of dx b is reported", !sign.passed && sign.bx_sign == 0),
            holds("constant drift is reported", !flat.passed)};
}

ProblemSpec rough_problem(const Grid& g, int seed, BoundaryKind kind) {
    auto cs = CoefficientSet::parse("checkerboard(" + std::to_string(seed) + ", 0.15, 0.1, 0.05, 0.6, 1.5)",
                                    "0.8*sin(" + std::to_string(seed + 1) + "*y)", "x", 0.25);
    return make_problem(g, cs, EquationClass::L2, dsl::Expr::parse("exp(-6*((x - 0.2)^2 + y^2))"),
                        dsl::Expr::parse("0"), kind);
}

std::vector<Check> solver_suite(std::uint64_t seed) {
    std::vector<Check> out;
    Grid g{-1.5, 1.5, -1, 1, 24, 24, 0, 0.05};
    double excess = 0;
    for (int k = 0; k < 3; ++k) {
        auto tr = solve(rough_problem(g, static_cast<int>(seed % 1000) + k, BoundaryKind::Dirichlet));
        double top = *std::max_element(tr.levels.front().v.begin(), tr.levels.front().v.end());
        for (const Field& f : tr.levels) {
            auto [lo, hi] = std::minmax_element(f.v.begin(), f.v.end());
            excess = std::max({excess, -*lo / top, *hi / top - 1});
        }
    }
    out.push_back(le("maximum principle excess (3 rough instances)", excess, 1e-12));

    // Without b0 the scheme is in flux form, so mass changes only through the x-boundaries.
    auto spec = make_problem(g, CoefficientSet::parse("checkerboard(1, 0.2, 0.2, 1, 0.6, 1.5)", "0", "x", 0.25),
                             EquationClass::L2, dsl::Expr::parse("exp(-3*x^2)*(1 + 0.5*sin(pi*y))"),
                             dsl::Expr::parse("0"), BoundaryKind::PeriodicY);
    Stepper stepper(spec);
    Field u = initial_field(spec);
    double dt = cfl_dt(g, spec.coefficients);
    double drift = 0;
    for (int n = 0; n < 20; ++n) {
        double flux = stepper.boundary_flux(u);
        double m0 = 0, m1 = 0;
        Field next = stepper.step(u, dt);
        next.t = u.t + dt;
        for (double v : u.v) m0 += v;
        for (double v : next.v) m1 += v;
        drift = std::max(drift, std::abs((m1 - m0) * g.dx() * g.dy() - dt * flux));
        u = std::move(next);
    }
    out.push_back(le("mass change minus boundary flux", drift, 1e-12));

    auto a = solve(spec), b = solve(spec);
    bool same = a.times == b.times;
    for (std::size_t k = 0; same && k < a.levels.size(); ++k) same = a.levels[k].v == b.levels[k].v;
    out.push_back(holds("bit-identical rerun", same));

    Grid l0{-2, 2, -0.25, 0.25, 16, 64, 0.1, 0.2};
    CoefficientSet cs;
    cs.mu = 0.25;
    auto gamma_at = dsl::Expr::parse("sqrt(3)/(2*pi*t^2)*exp(-(x^2 + 3*x*y/t + 3*y^2/t^2)/t)");
    auto rows = convergence_study(make_problem(l0, cs, EquationClass::L0, gamma_at, gamma_at, BoundaryKind::Dirichlet),
                                  2, [](const Point& z) { return gamma_origin(z); }, {2, 4});
    out.push_back(ge("L0 benchmark max-norm order (one refinement)", rows.back().order_max, 1.0));
    return out;
}

std::vector<Check> potentials_suite(std::uint64_t seed) {
    std::vector<Check> out;
    out.push_back(le("Gamma kernel homogeneity defect", homogeneity_defect(gamma_kernel(), 1000, seed), 1e-12));
    out.push_back(le("-dxi Gamma kernel homogeneity defect", homogeneity_defect(gamma_dx_kernel(), 1000, seed), 1e-12));
    out.push_back(holds("target exponents 6 and 3 from p = 2",
                        std::abs(target_exponent(2, 2) - 6) < 1e-12 && std::abs(target_exponent(1, 2) - 3) < 1e-12));
    SpaceTimeGrid g{-2, 2, -2, 2, 0, 2, 16, 16, 16};
    auto fam = bump_family(g, 4, seed);
    out.push_back(holds("exponent mismatch is rejected",
                        throws<std::invalid_argument>([&] { gain_ratio(gamma_kernel(), fam[0], 2, 5); })));
    auto r = gain_ratios(gamma_kernel(), fam, 2, 6);
    double lo = *std::min_element(r.begin(), r.end()), hi = *std::max_element(r.begin(), r.end());
    out.push_back(holds("gain ratios finite and positive", std::isfinite(hi) && lo > 0));
    out.push_back(le("gain ratio spread (16^3, 4 bumps)", hi / lo, 50));
    return out;
}

std::vector<Check> reduction_suite(std::uint64_t seed) {
    std::vector<Check> out;
    Box box{-1, 1, -1, 1, 0, 1};
    std::mt19937_64 rng(seed);
    {
        auto cs = CoefficientSet::parse("1 + 0.2*sin(x + y)", "0.3*cos(x)", "x + 0.1*sin(y)", 0.3);
        auto tc = transform_coeffs(cs, box);
        double ea = 0, eb = 0, einv = 0;
        for (int i = 0; i < 500; ++i) {
            Point z{uniform(rng, -0.9, 0.9), uniform(rng, -1, 1), uniform(rng, 0, 1)};
            double x = z.x - 0.1 * std::sin(z.y);
            Point src{x, z.y, z.t};
            einv = std::max(einv, std::abs(tc.inverse_map(z) - x));
            ea = std::max(ea, std::abs(tc.a_tilde(z) - cs.a.eval(src)));
            eb = std::max(eb, std::abs(tc.b0_tilde(z) - (cs.b0.eval(src) + z.x * 0.1 * std::cos(z.y))));
        }
        out.push_back(le("inverse map for b = x + 0.1 sin y", einv, 1e-12));
        out.push_back(le("a~ = bx^2 a for b = x + 0.1 sin y", ea, 1e-8));
        out.push_back(le("b0~ closed form for b = x + 0.1 sin y", eb, 1e-8));
    }
    {
        auto cs = CoefficientSet::parse("1 + 0.2*sin(x + y)", "0", "2*x", 0.15);
        auto tc = transform_coeffs(cs, box);
        double ea = 0, eb = 0;
        for (int i = 0; i < 500; ++i) {
            Point z{uniform(rng, -1.8, 1.8), uniform(rng, -1, 1), uniform(rng, 0, 1)};
            ea = std::max(ea, std::abs(tc.a_tilde(z) - 4 * cs.a.eval({z.x / 2, z.y, z.t})));
            eb = std::max(eb, std::abs(tc.b0_tilde(z)));
        }
        out.push_back(le("a~ = 4a for b = 2x", ea, 1e-8));
        out.push_back(le("b0~ = 0 for b = 2x", eb, 1e-8));
    }
    out.push_back(holds("sign-changing drift is rejected",
                        throws<std::invalid_argument>([&] { transform_coeffs(CoefficientSet::parse("1", "0", "x^2", 0.5), box); })));
    return out;
}

Trajectory synthetic(const Grid& g, int levels, const std::function<double(const Point&)>& f) {
    Trajectory tr;
    tr.grid = g;
    for (int k = 0; k < levels; ++k) {
        double t = g.t0 + (g.t1 - g.t0) * k / (levels - 1);
        Field u{g.nx, g.ny, t, std::vector<double>(static_cast<std::size_t>(g.nx) * g.ny)};
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) u(i, j) = f({g.xc(i), g.yc(j), t});
        }
        tr.times.push_back(t);
        tr.levels.push_back(std::move(u));
    }
    return tr;
}

std::vector<Check> probe_suite(std::uint64_t seed) {
    std::vector<Check> out;
    const double theta = 1.0 / 128, r = 1.0;
    Cutoff cut(theta, r);
    std::mt19937_64 rng(seed);
    double inner = 0, outer = 0;
    const double s = theta * r;
    for (int i = 0; i < 2000; ++i) {
        Point z{uniform(rng, -s, s), uniform(rng, -s * s * s, s * s * s), uniform(rng, -s * s, 0)};
        if (within_norm(z, s) && z.t < 0) inner = std::max(inner, std::abs(cut.phi(z) - 1));
        Point w{uniform(rng, -2, 2) * r / theta, uniform(rng, -2, 2) * r * r * r / theta, uniform(rng, -2, 0) * r * r};
        if (std::abs(w.x) > r / theta || std::abs(w.y) > r * r * r / theta || w.t < -r * r) {
            outer = std::max(outer, std::abs(cut.phi(w)));
        }
    }
    out.push_back(le("cut-off equals 1 on the inner past ball", inner, 0.0));
    out.push_back(le("cut-off vanishes outside its box", outer, 0.0));
    out.push_back(le("drift sign of the cut-off (1e4 samples)", cutoff_sign_check(theta, r, 10000, seed), 1e-8));

    Cutoff pc(0.01, 0.2);
    double partition = 0;
    for (Point z : {Point{0, 0, 0}, Point{0.002, 1e-9, -1e-5}, Point{0.05, 1e-4, -0.003}}) {
        partition = std::max(partition, std::abs(poincare_i1([](const Point&) { return 1.0; }, kOrigin, z, pc) - pc.phi(z)));
    }
    out.push_back(le("I1 of w = 1 reproduces the cut-off", partition, 1e-6));

    Grid g{-2, 2, -0.5, 0.5, 80, 40, 0, 0.5};
    Point c{0, 0, 0.4};
    auto affine = synthetic(g, 11, [](const Point& z) { return z.x; });
    ProbeConfig cfg;
    cfg.theta = 0.125;
    cfg.radii = {0.4, 0.2, 0.1};
    auto decay = oscillation_decay(affine, c, cfg);
    out.push_back(le("decay ratio of u = x minus theta", std::abs(decay.max_ratio - 0.125), 1e-12));
    auto one = synthetic(g, 11, [](const Point&) { return 1.0; });
    double m1 = moser_ratio(one, c, 0.4, 2).ratio, m2 = moser_ratio(one, c, 0.1, 2).ratio;
    out.push_back(le("Moser ratio of u = 1 dilation invariance", std::abs(m1 - m2) / m1, 1e-9));
    // The cusp needs a fine x-grid; interpolation is linear between cell centers.
    Grid fine{-1, 1, -0.1, 0.1, 2000, 4, 0, 0.5};
    auto root = synthetic(fine, 3, [](const Point& z) { return std::sqrt(std::abs(z.x)); });
    out.push_back(le("Holder exponent of sqrt|x| minus 1/2",
                     std::abs(holder_fit(root, c, {0.4, 0.2, 0.1, 0.05}).alpha_hat - 0.5), 0.05));
    return out;
}

const std::map<std::string, std::vector<Check> (*)(std::uint64_t)>& suites() {
    static const std::map<std::string, std::vector<Check> (*)(std::uint64_t)> s{
        {"group", group_suite},           {"gamma", gamma_suite},         {"dsl", dsl_suite},
        {"coefficients", coefficients_suite}, {"solver", solver_suite}, {"potentials", potentials_suite},
        {"reduction", reduction_suite},   {"probe", probe_suite},
    };
    return s;
}

nlohmann::ordered_json number(double v) {
    // JSON has no infinities or NaN; they are spelled out.
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

bool SuiteResult::passed() const {
    if (!error.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

bool VerifyReport::passed() const {
    return std::all_of(suites.begin(), suites.end(), [](const SuiteResult& s) { return s.passed(); });
}

std::string VerifyReport::to_json() const {
    nlohmann::ordered_json j;
    j["tool"] = "kolmo";
    j["version"] = "0.1.0";
    j["seed"] = seed;
    j["passed"] = passed();
    j["suites"] = nlohmann::ordered_json::array();
    for (const auto& s : suites) {
        nlohmann::ordered_json js;
        js["name"] = s.name;
        js["passed"] = s.passed();
        if (!s.error.empty()) js["error"] = s.error;
        js["checks"] = nlohmann::ordered_json::array();
        for (const auto& c : s.checks) {
            js["checks"].push_back({{"name", c.name},
                                    {"value", number(c.value)},
                                    {"relation", c.relation},
                                    {"bound", number(c.bound)},
                                    {"passed", c.passed}});
        }
        j["suites"].push_back(std::move(js));
    }
    return j.dump(2) + "\n";
}

std::vector<std::string> verify_suite_names() {
    return {"group", "gamma", "dsl", "coefficients", "solver", "potentials", "reduction", "probe"};
}

SuiteResult run_verify_suite(const std::string& name, std::uint64_t seed) {
    auto it = suites().find(name);
    if (it == suites().end()) throw std::invalid_argument("unknown verify suite '" + name + "'");
    SuiteResult r;
    r.name = name;
    try {
        r.checks = it->second(seed);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

VerifyReport run_verify(std::uint64_t seed, std::ostream* log) {
    VerifyReport rep;
    rep.seed = seed;
    for (const auto& name : verify_suite_names()) {
        auto t0 = std::chrono::steady_clock::now();
        rep.suites.push_back(run_verify_suite(name, seed));
        if (log) {
            double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            *log << "verify: " << name << (rep.suites.back().passed() ? " pass" : " FAIL") << " (" << s << " s)\n";
        }
    }
    return rep;
}

}  // namespace kolmo
