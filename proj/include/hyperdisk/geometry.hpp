#pragma once

// Poincare-disk primitives for the two-dimensional hyperbolic plane.

#include <cmath>
#include <numbers>
#include <string>

#include "hyperdisk/error.hpp"

namespace hyperdisk {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kDefaultDiskEpsilon = 1e-5;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend bool operator==(Vec2, Vec2) = default;

    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm_sq() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

struct Polar {
    double r = 0.0;
    double theta = 0.0;
};

// Wraps any finite angle into [0, 2pi).
inline double normalize_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    // fmod of a tiny negative value can round up to exactly 2pi
    if (t >= kTwoPi) t = 0.0;
    return t;
}

// Smallest absolute difference between two angles, in [0, pi].
inline double angular_separation(double a, double b) {
    const double d = std::fabs(normalize_angle(a) - normalize_angle(b));
    return std::fmin(d, kTwoPi - d);
}

/// A point strictly inside the unit disk. Stored in Cartesian form; the
/// polar view is derived on demand.
class HyperbolicPoint {
public:
    HyperbolicPoint() = default;

    HyperbolicPoint(double x, double y) : x_(x), y_(y) {
        if (!std::isfinite(x) || !std::isfinite(y)) {
            throw DomainError("hyperbolic point has non-finite coordinates");
        }
        if (x * x + y * y >= 1.0) {
            throw DomainError("hyperbolic point (" + std::to_string(x) + ", " + std::to_string(y) +
                              ") is not strictly inside the unit disk");
        }
    }

    explicit HyperbolicPoint(Vec2 v) : HyperbolicPoint(v.x, v.y) {}

    static HyperbolicPoint from_polar(double r, double theta) {
        if (!(r >= 0.0) || !(r < 1.0)) throw DomainError("polar radius must lie in [0, 1)");
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    double x() const { return x_; }
    double y() const { return y_; }
    Vec2 vec() const { return {x_, y_}; }

    double norm_sq() const { return x_ * x_ + y_ * y_; }
    double radius() const { return std::hypot(x_, y_); }
    // Counterclockwise from the positive x-axis, in [0, 2pi).
    double angle() const { return normalize_angle(std::atan2(y_, x_)); }

    friend bool operator==(const HyperbolicPoint&, const HyperbolicPoint&) = default;

private:
    double x_ = 0.0;
    double y_ = 0.0;
};

inline Polar to_polar(const HyperbolicPoint& p) { return {p.radius(), p.angle()}; }

inline HyperbolicPoint from_polar(Polar p) { return HyperbolicPoint::from_polar(p.r, p.theta); }

namespace detail {

// arcosh(1 + z) for z >= 0, accurate when z is tiny.
inline double arcosh1p(double z) { return std::log1p(z + std::sqrt(z * (z + 2.0))); }

// The argument z of arcosh(1 + z) for the Poincare distance.
inline double distance_argument(Vec2 u, Vec2 v) {
    const double alpha = 1.0 - u.norm_sq();
    const double beta = 1.0 - v.norm_sq();
    return 2.0 * (u - v).norm_sq() / (alpha * beta);
}

}  // namespace detail

/// Geodesic distance in the Poincare disk,
/// d(u, v) = arcosh(1 + 2|u - v|^2 / ((1 - |u|^2)(1 - |v|^2))).
inline double poincare_distance(const HyperbolicPoint& u, const HyperbolicPoint& v) {
    return detail::arcosh1p(detail::distance_argument(u.vec(), v.vec()));
}

/// Hyperbolic inner product in polar form:
/// <x, y> = 4 artanh(r_x) artanh(r_y) cos(theta_x - theta_y).
inline double hyperbolic_inner_product(const HyperbolicPoint& a, const HyperbolicPoint& b) {
    const Polar pa = to_polar(a);
    const Polar pb = to_polar(b);
    return 4.0 * std::atanh(pa.r) * std::atanh(pb.r) * std::cos(pa.theta - pb.theta);
}

/// Pulls a raw vector back inside the disk. Vectors whose norm reaches
/// 1 - epsilon are rescaled, direction preserved, onto that radius.
inline HyperbolicPoint project_into_disk(Vec2 p, double epsilon = kDefaultDiskEpsilon) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw DomainError("cannot project a non-finite vector into the disk");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("disk epsilon must lie in (0, 1)");
    const double limit = 1.0 - epsilon;
    const double norm = p.norm();
    if (norm < limit) return {p.x, p.y};
    double scale = limit / norm;
    Vec2 q = scale * p;
    // rounding can leave the result a few ulps outside the cap
    while (q.norm() > limit) {
        scale = std::nextafter(scale, 0.0);
        q = scale * p;
    }
    return {q.x, q.y};
}

}  // namespace hyperdisk
