#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "aurora/core.hpp"

namespace aurora::geom {

inline constexpr Real kPi = 3.14159265358979323846;

struct Vec2 {
    Real x = 0.0;
    Real y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(Real s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Real dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline Real cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline Real norm(Vec2 a) { return std::sqrt(dot(a, a)); }

struct Segment {
    Vec2 a;
    Vec2 b;
};

/// Closest point of segment s to p, with its parameter along s in [0, 1].
inline Vec2 closest_point(const Segment& s, Vec2 p, Real* param = nullptr) {
    const Vec2 ab = s.b - s.a;
    const Real len2 = dot(ab, ab);
    Real t = len2 > 0.0 ? dot(p - s.a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    if (param) *param = t;
    return s.a + ab * t;
}

inline Real distance(const Segment& s, Vec2 p) { return norm(p - closest_point(s, p)); }

/// Distance along the ray (origin, unit dir) to segment s, if it is hit.
inline std::optional<Real> ray_hit(Vec2 origin, Vec2 dir, const Segment& s) {
    const Vec2 e = s.b - s.a;
    const Real denom = cross(dir, e);
    if (std::abs(denom) < 1e-12) return std::nullopt;  // parallel or collinear
    const Vec2 w = s.a - origin;
    const Real t = cross(w, e) / denom;
    const Real u = cross(w, dir) / denom;
    if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

/// Wraps an angle to (-pi, pi].
inline Real wrap_angle(Real a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

}  // namespace aurora::geom
