#pragma once

#include <functional>
#include <string>
#include <vector>

#include "kolmo/dsl.hpp"
#include "kolmo/group.hpp"

namespace kolmo {

/// Axis-aligned space-time box [x0,x1] x [y0,y1] x [t0,t1].
struct Box {
    double x0 = -1.0, x1 = 1.0;
    double y0 = -1.0, y1 = 1.0;
    double t0 = 0.0, t1 = 1.0;

    Point lerp(double u, double v, double w) const {
        return {x0 + u * (x1 - x0), y0 + v * (y1 - y0), t0 + w * (t1 - t0)};
    }
};

/// Coefficients of  dx(a dx u) + b0 dx u + b dy u - dt u  and the structural
/// constant mu of mu < a < 1/mu, |b|_{C^2} + |b0|_inf <= 1/mu, dx b != 0.
struct CoefficientSet {
    dsl::Expr a = dsl::Expr::constant(1.0);
    dsl::Expr b0 = dsl::Expr::constant(0.0);
    dsl::Expr b = dsl::Expr::parse("x");
    double mu = 0.5;

    static CoefficientSet parse(const std::string& a, const std::string& b0, const std::string& b,
                                double mu);
};

struct Violation {
    std::string check;
    Point witness;
    double value = 0.0;
};

struct ValidationReport {
    bool passed = true;
    int samples = 0;
    double a_min = 0.0;
    double a_max = 0.0;
    double b0_sup = 0.0;
    double b_sup = 0.0;
    double b_c2 = 0.0;        // max over orders 0..2 of the sampled derivative sups
    double bx_min_abs = 0.0;  // inf |dx b|
    int bx_sign = 0;          // common sign of dx b, 0 if it changes
    std::vector<Violation> violations;  // at most a few witnesses per check

    std::string summary() const;
};

/// Sample the structural conditions on `samples` Halton points of the box.
/// Derivatives of b come from centered differences with step 1e-4 of the box
/// extent along each axis. dx b must keep one sign with |dx b| >= bx_floor.
/// Evaluation errors are reported as violations. Throws std::invalid_argument
/// when samples < 10000.
ValidationReport validate(const CoefficientSet& cs, const Box& box, int samples = 10000,
                          double bx_floor = 1e-6);

/// Point i (from 1) of the 3D Halton sequence in bases 2, 3, 5 mapped to the box.
Point halton_point(const Box& box, std::uint64_t index);

/// Callable coefficient with a flag telling the solver whether values may be
/// cached across time steps.
struct CoefficientField {
    std::function<double(const Point&)> fn;
    bool time_dependent = true;

    double operator()(const Point& z) const { return fn(z); }

    static CoefficientField from_expr(const dsl::Expr& e);
    static CoefficientField constant(double v);
};

struct SolverCoefficients {
    CoefficientField a;
    CoefficientField b0;
    CoefficientField b;

    static SolverCoefficients from_set(const CoefficientSet& cs);
};

}  // namespace kolmo
