#pragma once

#include <cstdint>

namespace kolmo {

/// A point z = (x, y, t) of R^{2+1}.
///
/// Under the dilation family x has degree 1, y degree 3 and t degree 2, so
/// the homogeneous dimension of the group is 6.
struct Point {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline constexpr Point kOrigin{0.0, 0.0, 0.0};

/// Group law (x,y,t) o (xi,eta,tau) = ((xi,eta) + E(tau)(x,y)^T, t + tau)
/// with E(tau) = [[1,0],[-tau,1]]. The operator dx^2 + x dy - dt is
/// invariant under left translation z -> p o z.
Point compose(const Point& p, const Point& q);

/// (x,y,t)^{-1} = (-x, -y - t x, -t).
Point inverse(const Point& p);

/// delta_mu(x,y,t) = (mu x, mu^3 y, mu^2 t). Throws std::invalid_argument
/// when mu <= 0.
Point dilate(double mu, const Point& p);

/// Homogeneous norm: the unique r > 0 with x^2/r^2 + y^2/r^6 + t^2/r^4 = 1,
/// and 0 at the origin. Solved by bisection to full double precision.
double group_norm(const Point& p);

/// Quasi-distance ||z0^{-1} o z||. Not symmetric in its arguments.
double distance(const Point& z0, const Point& z);

/// Closed ball {z : d(center, z) <= radius}; with past_only the half-space
/// {t < t_center} is intersected in.
struct BallSpec {
    Point center;
    double radius = 1.0;
    bool past_only = false;
};

/// Cube {|x| <= r, |y| <= 8 r^3, |t| <= r^2} left-translated to center.
struct CubeSpec {
    Point center;
    double radius = 1.0;
};

bool contains(const BallSpec& ball, const Point& p);
bool contains(const CubeSpec& cube, const Point& p);

/// Membership of a point already expressed in the ball's local frame
/// (i.e. center^{-1} o p). Avoids the root finder: the defining function is
/// monotone in r, so ||w|| <= r iff x^2/r^2 + y^2/r^6 + t^2/r^4 <= 1.
bool within_norm(const Point& local, double radius);

/// Monte-Carlo estimate of the smallest Lambda with
/// C_{r/Lambda} subset B_r subset C_{Lambda r} on a seeded sample.
/// An estimate, not a proof: corners of the cube are rarely sampled, so the
/// value approaches the exact constant from below.
double estimate_lambda(double r, int sample_count, std::uint64_t seed = 42);

}  // namespace kolmo
