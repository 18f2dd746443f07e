#include "kolmo/group.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "kolmo/random.hpp"

namespace kolmo {

Point compose(const Point& p, const Point& q) {
    // ((xi, eta) + E(tau) (x, y)^T, t + tau),  E(tau) = [[1, 0], [-tau, 1]]
    return {q.x + p.x, q.y + p.y - q.t * p.x, p.t + q.t};
}

Point inverse(const Point& p) {
    return {-p.x, -p.y - p.t * p.x, -p.t};
}

Point dilate(double mu, const Point& p) {
    if (!(mu > 0.0)) {
        throw std::invalid_argument("dilate: mu must be positive");
    }
    return {mu * p.x, mu * mu * mu * p.y, mu * mu * p.t};
}

namespace {

double norm_equation(const Point& p, double r) {
    double r2 = r * r;
    double r4 = r2 * r2;
    double r6 = r4 * r2;
    return p.x * p.x / r2 + p.y * p.y / r6 + p.t * p.t / r4;
}

}  // namespace

double group_norm(const Point& p) {
    if (p.x == 0.0 && p.y == 0.0 && p.t == 0.0) {
        return 0.0;
    }
    double m = std::max({std::abs(p.x), std::cbrt(std::abs(p.y)), std::sqrt(std::abs(p.t))});
    // The root lies in [m, 3^{1/2} m]; the bracket [m/2, 2m] is safe.
    double lo = 0.5 * m;
    double hi = 2.0 * m;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (norm_equation(p, mid) > 1.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double distance(const Point& z0, const Point& z) {
    return group_norm(compose(inverse(z0), z));
}

bool within_norm(const Point& local, double radius) {
    if (local.x == 0.0 && local.y == 0.0 && local.t == 0.0) {
        return true;
    }
    return norm_equation(local, radius) <= 1.0;
}

bool contains(const BallSpec& ball, const Point& p) {
    if (ball.past_only && !(p.t < ball.center.t)) {
        return false;
    }
    return within_norm(compose(inverse(ball.center), p), ball.radius);
}

bool contains(const CubeSpec& cube, const Point& p) {
    Point w = compose(inverse(cube.center), p);
    double r = cube.radius;
    return std::abs(w.x) <= r && std::abs(w.y) <= 8.0 * r * r * r && std::abs(w.t) <= r * r;
}

double estimate_lambda(double r, int sample_count, std::uint64_t seed) {
    if (!(r > 0.0)) {
        throw std::invalid_argument("estimate_lambda: r must be positive");
    }
    if (sample_count < 1000) {
        throw std::invalid_argument("estimate_lambda: sample_count must be >= 1000");
    }
    std::mt19937_64 rng(seed);
    // Unit-cube samples (scaled per trial Lambda) and samples of B_1, which
    // is the Euclidean unit ball in these coordinates.
    std::vector<Point> cube_unit(sample_count);
    for (auto& c : cube_unit) {
        c = {uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
    }
    std::vector<Point> ball_pts;
    ball_pts.reserve(sample_count);
    while (static_cast<int>(ball_pts.size()) < sample_count) {
        Point w{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
        if (w.x * w.x + w.y * w.y + w.t * w.t <= 1.0) {
            ball_pts.push_back(dilate(r, w));
        }
    }

    auto inclusions_hold = [&](double lambda) {
        double s = r / lambda;
        for (const auto& c : cube_unit) {
            Point q{c.x * s, 8.0 * c.y * s * s * s, c.t * s * s};
            if (!within_norm(q, r)) {
                return false;
            }
        }
        CubeSpec outer{kOrigin, lambda * r};
        for (const auto& b : ball_pts) {
            if (!contains(outer, b)) {
                return false;
            }
        }
        return true;
    };

    double lo = 1.0;
    double hi = 2.0;
    while (!inclusions_hold(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    if (inclusions_hold(lo)) {
        return lo;
    }
    while (hi - lo > 1e-10 * hi) {
        double mid = 0.5 * (lo + hi);
        if (inclusions_hold(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace kolmo
