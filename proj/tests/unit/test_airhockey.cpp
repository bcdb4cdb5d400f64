#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "aurora/tasks/airhockey.hpp"

namespace {

using namespace aurora;
using airhockey::AirHockeyTask;
using airhockey::ArmConfig;
using airhockey::ArmSegment;
using airhockey::Params;
using airhockey::PuckState;
using geom::Vec2;

constexpr double kPi = 3.14159265358979323846;

Genotype make_genotype(const ArmConfig& a, const ArmConfig& b) {
    std::vector<double> v(a.begin(), a.end());
    v.insert(v.end(), b.begin(), b.end());
    return Genotype(v, uniform_bounds(8, {-kPi, kPi}));
}

// Joint positions as running complex products.
std::array<std::complex<double>, 5> complex_fk(const ArmConfig& q, const Params& p) {
    std::array<std::complex<double>, 5> z{};
    z[0] = {p.base.x, p.base.y};
    double phi = 0.0;
    for (int i = 0; i < 4; ++i) {
        phi += q[i];
        z[i + 1] = z[i] + std::polar(p.link_length, phi);
    }
    return z;
}

TEST(Kinematics, ZeroConfigurationIsStraightAlongX) {
    const auto pts = airhockey::forward_kinematics({0, 0, 0, 0});
    for (int i = 0; i < 5; ++i) {
        EXPECT_DOUBLE_EQ(pts[i].x, 0.5 * i);
        EXPECT_DOUBLE_EQ(pts[i].y, -1.0);
    }
}

TEST(Kinematics, FirstJointQuarterTurnPointsUp) {
    const auto pts = airhockey::forward_kinematics({kPi / 2, 0, 0, 0});
    for (int i = 0; i < 5; ++i) {
        EXPECT_NEAR(pts[i].x, 0.0, 1e-15);
        EXPECT_NEAR(pts[i].y, -1.0 + 0.5 * i, 1e-15);
    }
}

TEST(Kinematics, MatchesComplexOracle) {
    Rng rng(10);
    const Params p;
    for (int trial = 0; trial < 200; ++trial) {
        ArmConfig q{};
        for (auto& v : q) v = rng.uniform(-kPi, kPi);
        const auto pts = airhockey::forward_kinematics(q, p);
        const auto z = complex_fk(q, p);
        for (int i = 0; i < 5; ++i) {
            EXPECT_NEAR(pts[i].x, z[i].real(), 1e-12);
            EXPECT_NEAR(pts[i].y, z[i].imag(), 1e-12);
        }
    }
}

TEST(Kinematics, PointVelocitiesMatchFiniteDifferences) {
    Rng rng(11);
    const double h = 1e-6;
    for (int trial = 0; trial < 50; ++trial) {
        ArmConfig q{}, qd{}, qp{}, qm{};
        for (int i = 0; i < 4; ++i) {
            q[i] = rng.uniform(-kPi, kPi);
            qd[i] = rng.uniform(-1.0, 1.0);
            qp[i] = q[i] + h * qd[i];
            qm[i] = q[i] - h * qd[i];
        }
        const auto v = airhockey::point_velocities(q, qd);
        const auto fp = airhockey::forward_kinematics(qp), fm = airhockey::forward_kinematics(qm);
        for (int i = 0; i < 5; ++i) {
            EXPECT_NEAR(v[i].x, (fp[i].x - fm[i].x) / (2 * h), 1e-7);
            EXPECT_NEAR(v[i].y, (fp[i].y - fm[i].y) / (2 * h), 1e-7);
        }
    }
}

TEST(PuckStep, NoContactIntegratesAndDamps) {
    const PuckState s{{0.1, -0.2}, {0.5, 0.25}};
    const PuckState n = airhockey::puck_step(s, {}, 0.01);
    EXPECT_DOUBLE_EQ(n.position.x, 0.1 + 0.005);
    EXPECT_DOUBLE_EQ(n.position.y, -0.2 + 0.0025);
    EXPECT_DOUBLE_EQ(n.velocity.x, 0.5 * 0.98);
    EXPECT_DOUBLE_EQ(n.velocity.y, 0.25 * 0.98);
}

TEST(PuckStep, StationaryPuckStaysPut) {
    const PuckState s{{0.3, 0.4}, {0.0, 0.0}};
    const PuckState n = airhockey::puck_step(s, {}, 0.01);
    EXPECT_EQ(n.position, s.position);
    EXPECT_EQ(n.velocity, s.velocity);
}

TEST(PuckStep, PerpendicularWallBounce) {
    const double limit = 1.0 - 0.08;
    const PuckState s{{limit - 0.001, 0.0}, {1.0, 0.0}};
    const PuckState n = airhockey::puck_step(s, {}, 0.01);
    EXPECT_NEAR(n.position.x, limit - 0.009, 1e-12);
    EXPECT_NEAR(n.velocity.x, -0.9 * 1.0 * 0.98, 1e-15);
    EXPECT_EQ(n.velocity.y, 0.0);
}

TEST(PuckStep, KineticEnergyNeverIncreasesWithoutContact) {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        PuckState s{{rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9)}, {rng.uniform(-5, 5), rng.uniform(-5, 5)}};
        for (int t = 0; t < 200; ++t) {
            const PuckState n = airhockey::puck_step(s, {}, 0.01);
            ASSERT_LE(geom::dot(n.velocity, n.velocity), geom::dot(s.velocity, s.velocity));
            ASSERT_LE(std::abs(n.position.x), 0.92);
            ASSERT_LE(std::abs(n.position.y), 0.92);
            s = n;
        }
    }
}

TEST(PuckStep, PushTakesNormalComponentOfContactVelocity) {
    // Horizontal link just below the puck centre, moving diagonally: the
    // puck keeps only the upward component and sits on the link surface.
    const ArmSegment seg{{{-1.0, -0.05}, {1.0, -0.05}}, {1.0, 1.0}, {1.0, 1.0}};
    const PuckState n = airhockey::puck_step({{0.0, 0.0}, {0.0, 0.0}}, std::span(&seg, 1), 0.01);
    EXPECT_NEAR(n.position.x, 0.0, 1e-15);
    EXPECT_NEAR(n.position.y, -0.05 + 0.08 + 0.01, 1e-15);
    EXPECT_NEAR(n.velocity.x, 0.0, 1e-15);
    EXPECT_NEAR(n.velocity.y, 0.98, 1e-15);
}

TEST(PuckStep, RetreatingLinkDoesNotPull) {
    const ArmSegment seg{{{-1.0, -0.05}, {1.0, -0.05}}, {0.0, -1.0}, {0.0, -1.0}};
    const PuckState n = airhockey::puck_step({{0.0, 0.0}, {0.0, 0.0}}, std::span(&seg, 1), 0.01);
    EXPECT_EQ(n.velocity.y, 0.0);
    EXPECT_NEAR(n.position.y, 0.03, 1e-15);
}

TEST(PuckStep, RejectsNonPositiveDt) {
    EXPECT_THROW(airhockey::puck_step({}, {}, 0.0), std::invalid_argument);
}

TEST(Evaluate, ZeroGenotypeLeavesPuckAtSpawn) {
    const AirHockeyTask task;
    const auto e = task.evaluate(make_genotype({}, {}));
    EXPECT_EQ(e.fitness, 0.0);
    ASSERT_EQ(e.sensory.dim(), 100u);
    for (double v : e.sensory.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(e.hand_coded_bd.values, (std::vector<double>{0.0, 0.0}));
}

TEST(Evaluate, StaticSecondPhaseCostsPhaseOneOnly) {
    // Arm folded downwards, away from the puck, for the whole second phase.
    const ArmConfig a{-kPi / 2, 0.3, -0.2, 0.1};
    const AirHockeyTask task;
    const auto e = task.evaluate(make_genotype(a, a));
    double rate2 = 0.0;
    for (double q : a) rate2 += (q / 5.0) * (q / 5.0);
    EXPECT_NEAR(e.fitness, -500.0 * rate2, 1e-9);
    for (double v : e.sensory.values) EXPECT_EQ(v, 0.0);
}

// Straight-line re-simulation of the second phase with its own kinematics.
struct Replay {
    std::vector<double> samples;
    double fitness = 0.0;
};

Replay replay(const ArmConfig& a, const ArmConfig& b) {
    const Params p;
    Replay r;
    double rate1 = 0.0, rate2 = 0.0;
    for (int i = 0; i < 4; ++i) {
        rate1 += std::pow(a[i] / 5.0, 2);
        rate2 += std::pow((b[i] - a[i]) / 5.0, 2);
    }
    r.fitness = -500.0 * (rate1 + rate2);
    std::complex<double> pos(0.0, 0.0), vel(0.0, 0.0);
    const double limit = 0.92;
    for (int t = 1; t <= 500; ++t) {
        ArmConfig q{};
        for (int i = 0; i < 4; ++i) q[i] = a[i] + (b[i] - a[i]) * (t / 500.0);
        const auto z = complex_fk(q, p);
        // Velocity of joint k is i * sum_j phidot_j-prefix * (z_{j+1} - z_j).
        std::array<std::complex<double>, 5> v{};
        double phidot = 0.0;
        for (int i = 0; i < 4; ++i) {
            phidot += (b[i] - a[i]) / 5.0;
            v[i + 1] = v[i] + std::complex<double>(0.0, phidot) * (z[i + 1] - z[i]);
        }
        for (int i = 0; i < 4; ++i) {
            const auto e = z[i + 1] - z[i];
            double s = std::real((pos - z[i]) * std::conj(e)) / std::norm(e);
            s = std::clamp(s, 0.0, 1.0);
            const auto c = z[i] + s * e;
            const double d = std::abs(pos - c);
            if (d >= p.puck_radius) continue;
            const auto n = (pos - c) / d;
            const auto vc = v[i] * (1.0 - s) + v[i + 1] * s;
            vel = n * std::max(0.0, std::real(vc * std::conj(n)));
            pos = c + n * p.puck_radius;
        }
        pos += vel * 0.01;
        double x = pos.real(), y = pos.imag(), vx = vel.real(), vy = vel.imag();
        if (x > limit) { x = 2 * limit - x; vx = -0.9 * vx; }
        if (x < -limit) { x = -2 * limit - x; vx = -0.9 * vx; }
        if (y > limit) { y = 2 * limit - y; vy = -0.9 * vy; }
        if (y < -limit) { y = -2 * limit - y; vy = -0.9 * vy; }
        x = std::clamp(x, -limit, limit);
        y = std::clamp(y, -limit, limit);
        pos = {x, y};
        vel = std::complex<double>(vx, vy) * 0.98;
        if (t % 10 == 0) {
            r.samples.push_back(x);
            r.samples.push_back(y);
        }
    }
    return r;
}

TEST(Evaluate, SweepThroughSpawnMatchesReplay) {
    const ArmConfig a{kPi / 2 + 0.6, 0.0, 0.0, 0.0};
    const ArmConfig b{kPi / 2 - 0.6, 0.0, 0.0, 0.0};
    const AirHockeyTask task;
    const auto e = task.evaluate(make_genotype(a, b));
    const Replay r = replay(a, b);
    ASSERT_EQ(r.samples.size(), 100u);
    EXPECT_GT(std::abs(e.hand_coded_bd.values[0]), 0.05);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_NEAR(e.sensory.values[i], r.samples[i], 1e-9) << i;
    EXPECT_NEAR(e.fitness, r.fitness, 1e-9);
}

TEST(Evaluate, RandomGenotypesMatchReplay) {
    Rng rng(13);
    const AirHockeyTask task;
    int moved = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ArmConfig a{}, b{};
        for (int i = 0; i < 4; ++i) {
            a[i] = rng.uniform(-kPi, kPi);
            b[i] = rng.uniform(-kPi, kPi);
        }
        const auto e = task.evaluate(make_genotype(a, b));
        const Replay r = replay(a, b);
        for (std::size_t i = 0; i < 100; ++i) ASSERT_NEAR(e.sensory.values[i], r.samples[i], 1e-9) << trial << " " << i;
        moved += e.hand_coded_bd.values[0] != 0.0 || e.hand_coded_bd.values[1] != 0.0;
    }
    EXPECT_GT(moved, 10);
}

TEST(Evaluate, BoundsAndLastSampleIsDescriptor) {
    Rng rng(14);
    const AirHockeyTask task;
    for (int trial = 0; trial < 2000; ++trial) {
        const auto e = task.evaluate(random_genotype(task.genotype_bounds(), rng));
        EXPECT_LE(e.fitness, 0.0);
        for (double v : e.sensory.values) {
            ASSERT_GE(v, -1.0);
            ASSERT_LE(v, 1.0);
        }
        ASSERT_EQ(e.sensory.values[98], e.hand_coded_bd.values[0]);
        ASSERT_EQ(e.sensory.values[99], e.hand_coded_bd.values[1]);
    }
}

TEST(Evaluate, Deterministic) {
    Rng rng(15);
    const AirHockeyTask task;
    const Genotype g = random_genotype(task.genotype_bounds(), rng);
    const auto x = task.evaluate(g), y = task.evaluate(g);
    EXPECT_EQ(x.fitness, y.fitness);
    EXPECT_EQ(x.sensory, y.sensory);
    EXPECT_EQ(x.hand_coded_bd, y.hand_coded_bd);
}

TEST(Evaluate, WrongGenotypeLengthThrows) {
    const AirHockeyTask task;
    EXPECT_THROW(task.evaluate(Genotype(std::vector<double>(7, 0.0), uniform_bounds(7, {-kPi, kPi}))),
                 std::invalid_argument);
}

}  // namespace
