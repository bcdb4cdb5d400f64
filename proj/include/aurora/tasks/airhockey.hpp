#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "aurora/core.hpp"
#include "aurora/tasks/geometry.hpp"

namespace aurora::airhockey {

using geom::Vec2;

inline constexpr std::size_t kJoints = 4;
inline constexpr std::size_t kGenotypeSize = 2 * kJoints;
inline constexpr std::size_t kSamples = 50;
inline constexpr std::size_t kSensoryDim = 2 * kSamples;

using ArmConfig = std::array<Real, kJoints>;
using ArmPoints = std::array<Vec2, kJoints + 1>;

struct Params {
    Real link_length = 0.5;
    Vec2 base{0.0, -1.0};
    Vec2 puck_spawn{0.0, 0.0};
    Real puck_radius = 0.08;
    Real dt = 0.01;
    std::size_t steps_per_phase = 500;  // 5 s
    std::size_t sample_every = 10;      // 0.1 s
    Real restitution = 0.9;
    Real damping = 0.98;
    Real arena_half_width = 1.0;
};

/// Joint positions from the base to the end effector. Angles are relative;
/// each link's absolute orientation is the running sum.
inline ArmPoints forward_kinematics(const ArmConfig& q, const Params& p = {}) {
    ArmPoints pts{};
    pts[0] = p.base;
    Real phi = 0.0;
    for (std::size_t i = 0; i < kJoints; ++i) {
        phi += q[i];
        pts[i + 1] = pts[i] + Vec2{std::cos(phi), std::sin(phi)} * p.link_length;
    }
    return pts;
}

/// Linear velocity of every joint point for joint rates qdot.
inline ArmPoints point_velocities(const ArmConfig& q, const ArmConfig& qdot, const Params& p = {}) {
    ArmPoints vel{};
    Real phi = 0.0;
    Real phidot = 0.0;
    for (std::size_t i = 0; i < kJoints; ++i) {
        phi += q[i];
        phidot += qdot[i];
        vel[i + 1] = vel[i] + Vec2{-std::sin(phi), std::cos(phi)} * (p.link_length * phidot);
    }
    return vel;
}

struct ArmSegment {
    geom::Segment seg;
    Vec2 va;
    Vec2 vb;
};

inline std::array<ArmSegment, kJoints> arm_segments(const ArmConfig& q, const ArmConfig& qdot, const Params& p = {}) {
    const auto pts = forward_kinematics(q, p);
    const auto vel = point_velocities(q, qdot, p);
    std::array<ArmSegment, kJoints> segs{};
    for (std::size_t i = 0; i < kJoints; ++i) segs[i] = {{pts[i], pts[i + 1]}, vel[i], vel[i + 1]};
    return segs;
}

struct PuckState {
    Vec2 position;
    Vec2 velocity;
};

/// One integration step: kinematic push by penetrating arm segments,
/// position update, wall reflection with restitution, then damping.
inline PuckState puck_step(PuckState puck, std::span<const ArmSegment> arm, Real dt, const Params& p = {}) {
    if (!(dt > 0.0)) throw std::invalid_argument("puck_step needs dt > 0");
    for (const auto& s : arm) {
        Real t = 0.0;
        const Vec2 contact = geom::closest_point(s.seg, puck.position, &t);
        const Vec2 offset = puck.position - contact;
        const Real dist = geom::norm(offset);
        if (dist >= p.puck_radius) continue;
        Vec2 n;
        if (dist > 0.0) {
            n = offset * (1.0 / dist);
        } else {
            const Vec2 e = s.seg.b - s.seg.a;
            const Real len = geom::norm(e);
            n = len > 0.0 ? Vec2{-e.y / len, e.x / len} : Vec2{0.0, 1.0};
        }
        // A rigid link's velocity field is affine along the link.
        const Vec2 vc = s.va * (1.0 - t) + s.vb * t;
        puck.velocity = n * std::max(0.0, geom::dot(vc, n));
        puck.position = contact + n * p.puck_radius;
    }

    puck.position += puck.velocity * dt;

    const Real limit = p.arena_half_width - p.puck_radius;
    auto bounce = [&](Real& x, Real& v) {
        if (x > limit) {
            x = 2.0 * limit - x;
            v = -p.restitution * v;
        } else if (x < -limit) {
            x = -2.0 * limit - x;
            v = -p.restitution * v;
        }
        x = std::clamp(x, -limit, limit);
    };
    bounce(puck.position.x, puck.velocity.x);
    bounce(puck.position.y, puck.velocity.y);

    puck.velocity = puck.velocity * p.damping;
    return puck;
}

class AirHockeyTask {
public:
    static constexpr const char* kName = "airhockey";

    explicit AirHockeyTask(Params p = {}) : params_(p), bounds_(uniform_bounds(kGenotypeSize, {-geom::kPi, geom::kPi})) {}

    const Params& params() const { return params_; }
    const std::shared_ptr<const GeneBounds>& genotype_bounds() const { return bounds_; }
    std::size_t sensory_dim() const { return kSensoryDim; }
    std::array<Interval, 2> bd_bounds() const { return {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}}; }
    std::vector<std::size_t> encoder_hidden() const { return {32, 8}; }

    /// Phase 1: zero -> A without the puck. Phase 2: A -> B with the puck
    /// spawned, sampled every 0.1 s. Both motions are linear in joint space.
    Evaluation evaluate(const Genotype& g) const {
        if (g.size() != kGenotypeSize) throw std::invalid_argument("air-hockey genotype needs 8 genes");
        const auto& p = params_;
        ArmConfig a{}, b{};
        for (std::size_t i = 0; i < kJoints; ++i) {
            a[i] = g[i];
            b[i] = g[kJoints + i];
        }
        const Real duration = static_cast<Real>(p.steps_per_phase) * p.dt;
        ArmConfig rate1{}, rate2{};
        for (std::size_t i = 0; i < kJoints; ++i) {
            rate1[i] = a[i] / duration;
            rate2[i] = (b[i] - a[i]) / duration;
        }
        auto speed2 = [](const ArmConfig& r) {
            Real s = 0.0;
            for (Real v : r) s += v * v;
            return s;
        };

        Evaluation e;
        Real fitness = 0.0;
        for (std::size_t t = 0; t < p.steps_per_phase; ++t) fitness -= speed2(rate1);

        PuckState puck{p.puck_spawn, {0.0, 0.0}};
        e.sensory.values.reserve(kSensoryDim);
        for (std::size_t t = 1; t <= p.steps_per_phase; ++t) {
            fitness -= speed2(rate2);
            const Real frac = static_cast<Real>(t) / static_cast<Real>(p.steps_per_phase);
            ArmConfig q{};
            for (std::size_t i = 0; i < kJoints; ++i) q[i] = a[i] + (b[i] - a[i]) * frac;
            const auto segs = arm_segments(q, rate2, p);
            puck = puck_step(puck, segs, p.dt, p);
            if (t % p.sample_every == 0) {
                e.sensory.values.push_back(puck.position.x);
                e.sensory.values.push_back(puck.position.y);
            }
        }
        e.fitness = fitness;
        e.hand_coded_bd.values = {puck.position.x, puck.position.y};
        return e;
    }

private:
    Params params_;
    std::shared_ptr<const GeneBounds> bounds_;
};

}  // namespace aurora::airhockey
