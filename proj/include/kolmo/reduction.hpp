#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kolmo/coefficients.hpp"
#include "kolmo/dsl.hpp"
#include "kolmo/solver.hpp"

namespace kolmo {

/// The unique x in [x_lo, x_hi] with b(x, eta, tau) = xi, by Newton's method
/// safeguarded with a bisection bracket. Stops when |b(x) - xi| <= 1e-12 or
/// the bracket is a few ulps wide. Throws std::domain_error when xi lies
/// outside b([x_lo, x_hi]) or when dx b changes sign along the iteration.
double invert_b(const CoefficientSet& cs, double xi, double eta, double tau, double x_lo, double x_hi);

/// First and second derivatives of the drift b. Symbolic when the expression
/// is smooth, otherwise sixth-order centered differences with step 1e-3 of
/// the box extent along each axis.
class DriftDerivatives {
public:
    DriftDerivatives(const dsl::Expr& b, const Box& box);

    double bx(const Point& z) const;
    double bxx(const Point& z) const;
    double by(const Point& z) const;
    double bt(const Point& z) const;
    bool closed_form() const { return closed_form_; }

private:
    double fd(const Point& z, int axis, int order) const;

    dsl::Expr b_;
    std::optional<dsl::Expr> bx_, bxx_, by_, bt_;
    double h_[3];
    bool closed_form_ = false;
};

/// Coefficients of the equation for v(xi, eta, tau) = u(x, y, t) under
/// xi = b(x, y, t), eta = y, tau = t:
///   d_xi(a~ d_xi v) + b0~ d_xi v + xi d_eta v - d_tau v = 0,
///   a~  = bx^2 a,
///   b0~ = -a bxx + b0 bx + b by - bt,
/// with everything on the right evaluated at (x(xi, eta, tau), eta, tau).
struct TransformedCoefficients {
    CoefficientSet source;
    Box source_box;
    /// Image of source_box: xi over [min b, max b] sampled, widened by 1%
    /// of its length on each side; eta and tau unchanged.
    Box image_box;
    /// Interval searched by the inverse map. It contains the x-range of the
    /// source box and is wide enough to cover the preimage of image_box.
    double x_search_lo = 0.0, x_search_hi = 0.0;
    CoefficientField a_tilde;
    CoefficientField b0_tilde;
    std::function<double(const Point&)> inverse_map;  // (xi, eta, tau) -> x
    bool closed_form = false;

    /// Coefficients for the solver in the (xi, eta, tau) variables: a~, b0~
    /// and the canonical drift xi.
    SolverCoefficients solver_coefficients() const;
};

/// Throws std::invalid_argument when dx b is not of one sign on samples of
/// the box.
TransformedCoefficients transform_coeffs(const CoefficientSet& cs, const Box& box);

/// Image box of `box` under b: [min b, max b] over the box corners, edges
/// and `samples` Halton points, widened by 1% on each side.
Box image_box(const CoefficientSet& cs, const Box& box, int samples = 10000);

/// A field with a per-cell mask; masked cells fall outside the image of the
/// map and are excluded from norms.
struct MaskedField {
    Field field;
    std::vector<std::uint8_t> mask;  // 1 = masked
    long masked_count = 0;

    /// max |a - b| over cells unmasked in both; throws on shape mismatch.
    static double max_discrepancy(const MaskedField& a, const Field& b);
};

/// Samples u (on the x-grid `source`) at (x(xi, eta, tau), eta, tau) for the
/// cell centers of `target` (a grid in xi, eta). Values come from bilinear
/// interpolation between source cell centers, clamped to the edge cells in
/// the half-cell border. Cells whose preimage leaves the source box are masked.
MaskedField pushforward_field(const Field& u, const Grid& source, const Grid& target,
                              const TransformedCoefficients& tc);

/// Inverse resampling: samples v (on the xi-grid `target`) at
/// (b(x, y, t), y, t) for the cell centers of `source`.
MaskedField pullback_field(const Field& v, const Grid& target, const Grid& source,
                           const TransformedCoefficients& tc);

}  // namespace kolmo
