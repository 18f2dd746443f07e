#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kolmo/group.hpp"
#include "kolmo/solver.hpp"

namespace kolmo {

/// Probe parameters. theta shrinks balls, alpha and beta are the time and
/// space fractions of the level-set cylinders, p is the Moser exponent.
struct ProbeConfig {
    double theta = 0.125;
    double alpha = 0.5;
    double beta = 0.5;
    double p = 2.0;
    std::vector<double> radii{0.4, 0.2, 0.1, 0.05};
    std::vector<double> h_levels{0.5};
    /// Vertex lattice points per axis on each ball shell; odd so that the
    /// center axes are sampled.
    int lattice = 9;

    /// Throws std::invalid_argument on out-of-range fields or radii that are
    /// not strictly decreasing and positive.
    void check() const;
};

/// Sample points of the past ball B-_r(center) in global coordinates: the
/// union over dyadic shells rho = r, r/2, r/4, ... while rho >= floor (at
/// least the shell rho = r, at most 24 shells) of a vertex lattice on the box
/// [-rho,rho] x [-rho^3,rho^3] x [-rho^2,0] restricted to the ball. For a
/// dyadic theta the samples of B-_{theta r} are a subset of those of B-_r.
std::vector<Point> ball_samples(const Point& center, double r, int lattice = 9, double floor = 1e-3);

/// max - min of the trajectory over ball_samples(center, r). Throws
/// std::out_of_range when the ball leaves the trajectory and
/// std::invalid_argument for r <= 0.
double oscillation(const Trajectory& u, const Point& center, double r, int lattice = 9);

struct DecayResult {
    std::vector<double> radii;
    std::vector<double> osc_r;
    std::vector<double> osc_theta_r;
    std::vector<double> ratios;  // 0 where osc_r is below the noise floor
    double max_ratio = 0.0;      // the empirical h2
};

DecayResult oscillation_decay(const Trajectory& u, const Point& center, const ProbeConfig& cfg);

struct MoserResult {
    double ratio = 0.0;     // sup_{B-_{r/2}} u^p * r^6 / integral_{B-_r} u^p
    double sup = 0.0;
    double integral = 0.0;
    long clipped = 0;       // samples with u < 0 set to 0
};

/// Integral by the midpoint rule on an n^3 cell lattice over the bounding
/// box of B-_r(center); a cell counts iff its center lies in the ball. The
/// sup uses ball_samples(center, r/2). Throws std::domain_error when the
/// integral vanishes.
MoserResult moser_ratio(const Trajectory& u, const Point& center, double r, double p, int n = 24);

/// Volume of B-_r by the same lattice rule as moser_ratio (u = 1).
double past_ball_volume(double r, int n = 24);

/// Fraction of an n x n cell-centered lattice over the spatial section of the
/// cube at time t with value >= h. The cube {|x| <= rho, |y| <= 8 rho^3} is
/// left-translated to the cube's center, which at time t is the section
/// |x - cx| <= rho, |y - cy + (t - ct) cx| <= 8 rho^3. `sample` takes (x, y).
double level_set_fraction(const std::function<double(double, double)>& sample, double t,
                          const CubeSpec& region, double h, int n = 64);

/// Field variant: bilinear interpolation between cell centers. Throws
/// std::out_of_range when the section leaves the grid.
double level_set_fraction(const Field& u, const Grid& grid, const CubeSpec& region, double h, int n = 64);

enum class CutoffProfile {
    Smoothstep,  // chi decreasing from 1 to 0
    Flipped      // chi' with its sign reversed; only for testing the sign check
};

/// The cut-off phi = phi0 phi1 centered at the origin with
///   phi0 = chi([theta^2 y^2 - 6 t r^4]^{1/6}),  phi1 = chi(theta |x|),
/// chi = 1 on [0, theta^{1/6} r], 0 on [r, inf) and a quintic smoothstep in
/// between, so 0 <= -chi' <= 1.875 / ((1 - theta^{1/6}) r). A negative
/// bracket (t > 0) is treated as 0.
class Cutoff {
public:
    /// Throws std::invalid_argument unless 0 < theta, theta^{1/6} < 1/2 and r > 0.
    Cutoff(double theta, double r, CutoffProfile profile = CutoffProfile::Smoothstep);

    double chi(double s) const;
    double dchi(double s) const;
    double d2chi(double s) const;

    double phi0(const Point& z) const;
    double phi1(double x) const;
    double phi(const Point& z) const { return phi0(z) * phi1(z.x); }

    /// (x dy - dt) phi0 in closed form.
    double y_phi0(const Point& z) const;
    /// dx^2 phi1.
    double dxx_phi1(double x) const;

    double theta() const { return theta_; }
    double r() const { return r_; }

private:
    double theta_, r_, inner_, sign_;
};

double cutoff_phi(double theta, double r, const Point& z);

/// Max over `samples` seeded uniform points of Q = {-r^2 <= t <= 0,
/// |x| <= r/theta, |y| <= r^3/theta} of (x dy - dt) phi0, by centered
/// differences with steps 1e-5 r^3/theta in y and 1e-5 r^2 in t.
double cutoff_sign_check(double theta, double r, int samples = 100000, std::uint64_t seed = 42,
                         CutoffProfile profile = CutoffProfile::Smoothstep);

struct PoincareOptions {
    int tau_nodes = 16;      // Gauss-Legendre nodes per tau panel
    int tau_panels = 16;     // panels on each side of the inner kink
    int hermite_nodes = 12;  // Gauss-Hermite nodes per axis in (xi, eta)
    int z_lattice = 5;       // vertex lattice per axis for the sup over B-_{theta r}
    int integral_cells = 16; // midpoint lattice per axis for the ball integrals
};

struct PoincareResult {
    double lhs = 0.0;       // integral over B-_{theta r} of (w - I0)_+^2
    double rhs = 0.0;       // theta^2 r^2 integral over B-_{r/theta} of |dx w|^2
    double i0 = 0.0;        // sup of I1 over the z lattice
    double constant = 0.0;  // lhs / rhs; +inf when rhs = 0 < lhs, 0 when both vanish
    double dx_integral = 0.0;
    int z_points = 0;
};

/// I1(z) = integral of [-Gamma(z,zeta) w (xi d_eta - d_tau) phi - dxi^2 phi Gamma w]
/// with phi the cut-off centered at `center`. For each tau the (xi, eta)
/// integral is an expectation against the Gaussian Gamma(z, .) and is done by
/// tensor Gauss-Hermite; tau runs over composite Gauss-Legendre panels split
/// at the kinks -theta r^2/6 and -r^2/6 of phi0. `w` takes global points.
double poincare_i1(const std::function<double(const Point&)>& w, const Point& center, const Point& z,
                   const Cutoff& cut, const PoincareOptions& opt = {});

/// Both sides of the Poincare-type inequality for w around `center`. dx w is
/// a centered difference of the trajectory with step dx of its grid.
/// Throws std::out_of_range when B-_{r/theta}(center) leaves the trajectory.
PoincareResult poincare_check(const Trajectory& w, const Point& center, double r, double theta,
                              const PoincareOptions& opt = {});

/// The trajectory of ln+(h / (u + h^{9/8})), cellwise.
Trajectory log_transform(const Trajectory& u, double h);

struct HolderFit {
    std::vector<double> radii;
    std::vector<double> osc;
    double alpha_hat = 0.0;
    double residual = 0.0;   // RMS of the log-log fit residuals
    double pointwise = 0.0;  // sup |u(z) - u(center)| / d(center, z)^alpha_hat
    bool locally_constant = false;
};

/// Least-squares slope of log osc(r) against log r over at least 4 radii.
/// When every oscillation is below 1e-13 of the sampled magnitude the fit is
/// reported as locally constant with alpha_hat = 0.
HolderFit holder_fit(const Trajectory& u, const Point& center, const std::vector<double>& radii,
                     int lattice = 9);

struct LevelSetReport {
    double h = 0.0;
    std::vector<double> times;
    std::vector<double> fractions;
};

struct ProbeReport {
    ProbeConfig config;
    Point center;
    DecayResult decay;
    std::vector<MoserResult> moser;  // one per radius
    HolderFit holder;
    std::vector<LevelSetReport> level_sets;  // for the largest radius
    std::optional<PoincareResult> poincare;

    /// Pretty-printed JSON with a fixed key order.
    std::string to_json() const;
    /// "r,osc,osc_theta_r,ratio" rows, one per radius.
    std::string to_csv() const;
};

/// Runs the decay, Moser, Holder and level-set probes; radii must fit in
/// the trajectory (each at most 1/4 of the x half-width).
ProbeReport run_probe(const Trajectory& u, const Point& center, const ProbeConfig& cfg);

}  // namespace kolmo
