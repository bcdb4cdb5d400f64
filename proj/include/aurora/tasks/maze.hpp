#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aurora/core.hpp"
#include "aurora/tasks/geometry.hpp"

namespace aurora::maze {

using geom::Segment;
using geom::Vec2;

inline constexpr Real kArenaSize = 600.0;
inline constexpr std::size_t kImageSide = 64;
inline constexpr std::size_t kSensoryDim = kImageSide * kImageSide;
inline constexpr std::size_t kInputs = 5;
inline constexpr std::size_t kHidden = 5;
inline constexpr std::size_t kOutputs = 2;
inline constexpr std::size_t kGenotypeSize = kHidden * kInputs + kHidden + kOutputs * kHidden + kOutputs;
static_assert(kGenotypeSize == 42);

inline constexpr std::array<Real, 3> kLaserAngles = {-geom::kPi / 4.0, 0.0, geom::kPi / 4.0};

struct Pose {
    Real x = 0.0;
    Real y = 0.0;
    Real heading = 0.0;
};

struct RobotParams {
    Real radius = 10.0;
    Real axle = 20.0;
    Real dt = 1.0;
    Real u_max = 2.0;
    Real laser_range = 100.0;
    std::size_t steps = 2000;
};

struct MazeWorld {
    std::vector<Segment> walls;
    Pose start{40.0, 40.0, 0.0};
    RobotParams robot;

    static std::vector<Segment> arena_boundary() {
        const Real s = kArenaSize;
        return {{{0, 0}, {s, 0}}, {{s, 0}, {s, s}}, {{s, s}, {0, s}}, {{0, s}, {0, 0}}};
    }

    /// Parses one wall per line ("x1 y1 x2 y2"); blank lines and '#'
    /// comments are ignored. The arena boundary is always added.
    static MazeWorld parse(std::istream& in) {
        MazeWorld w;
        w.walls = arena_boundary();
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream ss(line);
            Real x1, y1, x2, y2;
            if (!(ss >> x1)) continue;
            if (!(ss >> y1 >> x2 >> y2)) {
                throw std::runtime_error("world file line " + std::to_string(lineno) + ": expected x1 y1 x2 y2");
            }
            std::string extra;
            if (ss >> extra) throw std::runtime_error("world file line " + std::to_string(lineno) + ": trailing data");
            for (Real v : {x1, y1, x2, y2}) {
                if (!(v >= 0.0 && v <= kArenaSize)) {
                    throw std::runtime_error("world file line " + std::to_string(lineno) + ": coordinate outside arena");
                }
            }
            w.walls.push_back({{x1, y1}, {x2, y2}});
        }
        return w;
    }

    static MazeWorld load(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw std::runtime_error("cannot open world file " + path);
        return parse(f);
    }

    /// Zig-zag of three long walls with alternating gaps plus two stubs; the
    /// robot starts in the bottom-left corner and the far corner is only
    /// reachable through the whole corridor.
    static constexpr const char* kDefaultLayout =
        "# x1 y1 x2 y2\n"
        "0 150 450 150\n"
        "150 300 600 300\n"
        "0 450 450 450\n"
        "300 150 300 225\n"
        "300 450 300 375\n";

    static MazeWorld default_world() {
        std::istringstream in(kDefaultLayout);
        return parse(in);
    }

    static MazeWorld empty_arena() {
        MazeWorld w;
        w.walls = arena_boundary();
        return w;
    }
};

struct RobotState {
    Real x = 0.0;
    Real y = 0.0;
    Real heading = 0.0;
    bool contact_left = false;
    bool contact_right = false;
};

/// Distance from the robot's edge to the nearest wall along the ray at
/// heading + relative_angle, clamped to [0, laser_range].
inline Real laser_reading(const MazeWorld& world, const RobotState& s, Real relative_angle) {
    const Real a = s.heading + relative_angle;
    const Vec2 dir{std::cos(a), std::sin(a)};
    const Vec2 origin{s.x, s.y};
    Real best = std::numeric_limits<Real>::infinity();
    for (const auto& w : world.walls) {
        if (const auto t = geom::ray_hit(origin, dir, w); t && *t < best) best = *t;
    }
    const Real range = world.robot.laser_range;
    return std::clamp(best - world.robot.radius, 0.0, range);
}

namespace detail {

// Accepted positions keep at least radius - kSlack from every wall.
inline constexpr Real kSlack = 1e-9;
inline constexpr int kSearchIterations = 48;
inline constexpr int kMaxSubSteps = 3;

using WallSet = std::vector<const geom::Segment*>;

inline bool collides(const WallSet& walls, Real radius, Vec2 p) {
    const Real limit = radius - kSlack;
    for (const auto* w : walls) {
        if (geom::distance(*w, p) < limit) return true;
    }
    return false;
}

/// Walls close enough to touch the robot anywhere within `reach` of `p`.
inline void walls_near(const MazeWorld& world, Vec2 p, Real reach, WallSet& out) {
    out.clear();
    for (const auto& w : world.walls) {
        if (geom::distance(w, p) < world.robot.radius + reach) out.push_back(&w);
    }
}

}  // namespace detail

/// Differential-drive kinematic update with slide-along-wall collision
/// handling. Contact flags report which front quarter was blocked during
/// this step.
inline RobotState step(const MazeWorld& world, const RobotState& s, Real u_left, Real u_right) {
    const auto& rp = world.robot;
    u_left = std::clamp(u_left, -rp.u_max, rp.u_max);
    u_right = std::clamp(u_right, -rp.u_max, rp.u_max);
    const Real v = 0.5 * (u_left + u_right);
    const Real omega = (u_right - u_left) / rp.axle;

    RobotState next = s;
    next.contact_left = false;
    next.contact_right = false;
    next.heading = geom::wrap_angle(s.heading + omega * rp.dt);

    Vec2 pos{s.x, s.y};
    Vec2 remaining = Vec2{std::cos(s.heading), std::sin(s.heading)} * (v * rp.dt);
    // Sub-steps never carry the robot further than the initial displacement.
    thread_local detail::WallSet near;
    detail::walls_near(world, pos, geom::norm(remaining) + 1.0, near);
    for (int sub = 0; sub < detail::kMaxSubSteps; ++sub) {
        if (remaining.x == 0.0 && remaining.y == 0.0) break;
        if (!detail::collides(near, rp.radius, pos + remaining)) {
            pos += remaining;
            remaining = {};
            break;
        }
        Real lo = 0.0;
        Real hi = 1.0;
        for (int it = 0; it < detail::kSearchIterations; ++it) {
            const Real mid = 0.5 * (lo + hi);
            (detail::collides(near, rp.radius, pos + remaining * mid) ? hi : lo) = mid;
        }
        const Vec2 blocked = pos + remaining * hi;
        pos += remaining * lo;

        // Blocking wall: the one penetrated deepest just past the contact.
        const geom::Segment* wall = nullptr;
        Real best = std::numeric_limits<Real>::infinity();
        for (const auto* w : near) {
            const Real d = geom::distance(*w, blocked);
            if (d < best) {
                best = d;
                wall = w;
            }
        }
        Vec2 normal = pos - geom::closest_point(*wall, pos);
        const Real nlen = geom::norm(normal);
        normal = nlen > 0.0 ? normal * (1.0 / nlen) : Vec2{-std::cos(s.heading), -std::sin(s.heading)};

        const Real rel = geom::wrap_angle(std::atan2(-normal.y, -normal.x) - s.heading);
        if (rel >= 0.0 && rel <= geom::kPi / 2.0) next.contact_left = true;
        if (rel <= 0.0 && rel >= -geom::kPi / 2.0) next.contact_right = true;

        const Vec2 leftover = remaining * (1.0 - lo);
        remaining = leftover - normal * geom::dot(leftover, normal);
    }
    // Anything still unresolved after the sub-steps is dropped.
    next.x = pos.x;
    next.y = pos.y;
    return next;
}

/// 5-5-2 tanh perceptron; the 42 genes are hidden weights (row-major),
/// hidden biases, output weights (row-major), output biases.
class Controller {
public:
    explicit Controller(std::span<const Real> genes) {
        if (genes.size() != kGenotypeSize) throw std::invalid_argument("maze controller needs 42 genes");
        std::copy(genes.begin(), genes.end(), genes_.begin());
    }

    std::array<Real, kOutputs> operator()(const std::array<Real, kInputs>& in, Real u_max) const {
        std::array<Real, kHidden> h{};
        const Real* w = genes_.data();
        const Real* b = w + kHidden * kInputs;
        for (std::size_t i = 0; i < kHidden; ++i) {
            Real acc = b[i];
            for (std::size_t j = 0; j < kInputs; ++j) acc += w[i * kInputs + j] * in[j];
            h[i] = std::tanh(acc);
        }
        const Real* wo = b + kHidden;
        const Real* bo = wo + kOutputs * kHidden;
        std::array<Real, kOutputs> out{};
        for (std::size_t i = 0; i < kOutputs; ++i) {
            Real acc = bo[i];
            for (std::size_t j = 0; j < kHidden; ++j) acc += wo[i * kHidden + j] * h[j];
            out[i] = u_max * std::tanh(acc);
        }
        return out;
    }

private:
    std::array<Real, kGenotypeSize> genes_{};
};

inline std::size_t to_pixel(Real v) {
    const auto p = static_cast<long>(std::floor(v * static_cast<Real>(kImageSide) / kArenaSize));
    return static_cast<std::size_t>(std::clamp(p, 0L, static_cast<long>(kImageSide) - 1));
}

inline constexpr Real kWallIntensity = 0.5;
inline constexpr Real kRobotIntensity = 1.0;

/// Walls only, drawn with integer line stepping. Pixel (col, row) is at
/// index row * 64 + col with col from x and row from y.
inline std::vector<Real> render_walls(const MazeWorld& world) {
    std::vector<Real> img(kSensoryDim, 0.0);
    for (const auto& w : world.walls) {
        long x0 = static_cast<long>(to_pixel(w.a.x)), y0 = static_cast<long>(to_pixel(w.a.y));
        const long x1 = static_cast<long>(to_pixel(w.b.x)), y1 = static_cast<long>(to_pixel(w.b.y));
        const long dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const long sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        long err = dx + dy;
        while (true) {
            img[static_cast<std::size_t>(y0) * kImageSide + static_cast<std::size_t>(x0)] = kWallIntensity;
            if (x0 == x1 && y0 == y1) break;
            const long e2 = 2 * err;
            if (e2 >= dy) { err += dy; x0 += sx; }
            if (e2 <= dx) { err += dx; y0 += sy; }
        }
    }
    return img;
}

/// Marks every pixel whose centre lies inside the robot disc.
inline void draw_robot(std::vector<Real>& img, Real x, Real y, Real radius) {
    const Real cell = kArenaSize / static_cast<Real>(kImageSide);
    const std::size_t c0 = to_pixel(x - radius), c1 = to_pixel(x + radius);
    const std::size_t r0 = to_pixel(y - radius), r1 = to_pixel(y + radius);
    for (std::size_t r = r0; r <= r1; ++r) {
        for (std::size_t c = c0; c <= c1; ++c) {
            const Real cx = (static_cast<Real>(c) + 0.5) * cell;
            const Real cy = (static_cast<Real>(r) + 0.5) * cell;
            if ((cx - x) * (cx - x) + (cy - y) * (cy - y) <= radius * radius) img[r * kImageSide + c] = kRobotIntensity;
        }
    }
}

inline SensoryData render_topdown(const MazeWorld& world, const RobotState& s) {
    SensoryData sd{render_walls(world)};
    draw_robot(sd.values, s.x, s.y, world.robot.radius);
    return sd;
}

class MazeTask {
public:
    static constexpr const char* kName = "maze";

    explicit MazeTask(MazeWorld world = MazeWorld::default_world())
        : world_(std::move(world)),
          bounds_(uniform_bounds(kGenotypeSize, {-5.0, 5.0})),
          background_(render_walls(world_)) {}

    const MazeWorld& world() const { return world_; }
    const std::shared_ptr<const GeneBounds>& genotype_bounds() const { return bounds_; }
    std::size_t sensory_dim() const { return kSensoryDim; }
    std::array<Interval, 2> bd_bounds() const { return {Interval{0.0, kArenaSize}, Interval{0.0, kArenaSize}}; }
    std::vector<std::size_t> encoder_hidden() const { return {256, 64}; }

    RobotState simulate(const Genotype& g, Real* fitness = nullptr) const {
        const Controller ctrl(g.values());
        const auto& rp = world_.robot;
        RobotState s{world_.start.x, world_.start.y, world_.start.heading, false, false};
        Real f = 0.0;
        for (std::size_t t = 0; t < rp.steps; ++t) {
            std::array<Real, kInputs> in{};
            for (std::size_t i = 0; i < kLaserAngles.size(); ++i) {
                in[i] = laser_reading(world_, s, kLaserAngles[i]) / rp.laser_range;
            }
            in[3] = s.contact_left ? 1.0 : 0.0;
            in[4] = s.contact_right ? 1.0 : 0.0;
            const auto u = ctrl(in, rp.u_max);
            f -= u[0] * u[0] + u[1] * u[1];
            s = step(world_, s, u[0], u[1]);
        }
        if (fitness) *fitness = f;
        return s;
    }

    Evaluation evaluate(const Genotype& g) const {
        Evaluation e;
        const RobotState s = simulate(g, &e.fitness);
        e.sensory.values = background_;
        draw_robot(e.sensory.values, s.x, s.y, world_.robot.radius);
        e.hand_coded_bd.values = {s.x, s.y};
        return e;
    }

private:
    MazeWorld world_;
    std::shared_ptr<const GeneBounds> bounds_;
    std::vector<Real> background_;
};

}  // namespace aurora::maze
