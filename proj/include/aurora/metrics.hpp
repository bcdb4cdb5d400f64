#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <spdlog/spdlog.h>

#include "aurora/core.hpp"

namespace aurora {

using BdBounds = std::array<Interval, 2>;

inline constexpr std::size_t kCoverageGrid = 40;
inline constexpr std::size_t kTrajectoryGrid = 10;

struct MetricsRecord {
    std::uint64_t iteration = 0;
    Real coverage_pct = 0.0;
    std::optional<Real> grid_mean_fitness;
    std::size_t container_size = 0;
    std::optional<Real> d_min;
    std::size_t cumulative_loss = 0;
    std::size_t updates = 0;

    friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

/// A hand-coded descriptor with the fitness of the individual behind it.
struct ScoredPoint {
    Real x = 0.0;
    Real y = 0.0;
    Real fitness = 0.0;
};

inline std::vector<ScoredPoint> scored_points(std::span<const Individual> members) {
    std::vector<ScoredPoint> pts;
    pts.reserve(members.size());
    for (const auto& m : members) pts.push_back({m.hand_coded_bd.values.at(0), m.hand_coded_bd.values.at(1), m.fitness});
    return pts;
}

/// Cell along one axis. Values on an interior cell boundary go to the
/// higher cell; the top edge folds into the last cell; out-of-range values
/// are clamped.
inline std::size_t axis_cell(Real v, const Interval& iv, std::size_t cells, bool& clamped) {
    const Real scaled = (v - iv.lo) * static_cast<Real>(cells) / iv.width();
    if (!(scaled >= 0.0)) {
        clamped = clamped || v < iv.lo;
        return 0;
    }
    if (v > iv.hi) clamped = true;
    const auto c = static_cast<std::size_t>(std::floor(scaled));
    return c >= cells ? cells - 1 : c;
}

inline std::size_t grid_cell(Real x, Real y, const BdBounds& b, std::size_t cells, bool& clamped) {
    return axis_cell(y, b[1], cells, clamped) * cells + axis_cell(x, b[0], cells, clamped);
}

namespace detail {

inline std::vector<std::optional<Real>> best_per_cell(std::span<const ScoredPoint> pts, const BdBounds& b,
                                                      std::size_t cells) {
    std::vector<std::optional<Real>> best(cells * cells);
    std::size_t clamped_count = 0;
    for (const auto& p : pts) {
        bool clamped = false;
        auto& slot = best[grid_cell(p.x, p.y, b, cells, clamped)];
        if (clamped) ++clamped_count;
        if (!slot || p.fitness > *slot) slot = p.fitness;
    }
    if (clamped_count > 0) spdlog::warn("{} descriptors outside the grid bounds were clamped to edge cells", clamped_count);
    return best;
}

}  // namespace detail

/// Percentage of occupied cells of a cells x cells grid over the bounds.
inline Real coverage(std::span<const ScoredPoint> pts, const BdBounds& b, std::size_t cells = kCoverageGrid) {
    const auto best = detail::best_per_cell(pts, b, cells);
    std::size_t occupied = 0;
    for (const auto& s : best) occupied += s.has_value();
    return 100.0 * static_cast<Real>(occupied) / static_cast<Real>(cells * cells);
}

/// Mean over occupied cells of the best fitness in each cell; empty when no
/// cell is occupied.
inline std::optional<Real> grid_mean_fitness(std::span<const ScoredPoint> pts, const BdBounds& b,
                                             std::size_t cells = kCoverageGrid) {
    const auto best = detail::best_per_cell(pts, b, cells);
    Real sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : best) {
        if (s) {
            sum += *s;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<Real>(n);
}

inline Real coverage(std::span<const Individual> members, const BdBounds& b, std::size_t cells = kCoverageGrid) {
    return coverage(scored_points(members), b, cells);
}

inline std::optional<Real> grid_mean_fitness(std::span<const Individual> members, const BdBounds& b,
                                             std::size_t cells = kCoverageGrid) {
    return grid_mean_fitness(scored_points(members), b, cells);
}

/// Individuals lost per container update; zero before the first update.
inline Real avg_container_loss(std::size_t cumulative_loss, std::size_t update_count) {
    if (update_count == 0) {
        spdlog::debug("average container loss requested before any container update");
        return 0.0;
    }
    return static_cast<Real>(cumulative_loss) / static_cast<Real>(update_count);
}

struct TrajectoryDiversity {
    // Indexed by final-position cell; empty where no trajectory ends.
    std::vector<std::optional<Real>> per_cell;
    std::optional<Real> mean;
};

/// For each cell where trajectories end, the percentage of grid cells
/// crossed by any of those trajectories. Trajectories are flattened
/// (x1, y1, ..., xT, yT).
inline TrajectoryDiversity trajectory_diversity(std::span<const SensoryData> trajectories,
                                                const BdBounds& b = {Interval{-1.0, 1.0}, Interval{-1.0, 1.0}},
                                                std::size_t cells = kTrajectoryGrid) {
    const std::size_t total = cells * cells;
    std::vector<std::vector<bool>> visited(total);
    for (const auto& t : trajectories) {
        if (t.dim() < 2 || t.dim() % 2 != 0) throw std::invalid_argument("trajectory must hold (x, y) pairs");
        bool clamped = false;
        const std::size_t n = t.dim() / 2;
        const std::size_t end = grid_cell(t.values[2 * n - 2], t.values[2 * n - 1], b, cells, clamped);
        auto& seen = visited[end];
        if (seen.empty()) seen.assign(total, false);
        for (std::size_t i = 0; i < n; ++i) seen[grid_cell(t.values[2 * i], t.values[2 * i + 1], b, cells, clamped)] = true;
    }
    TrajectoryDiversity out;
    out.per_cell.resize(total);
    Real sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = 0; c < total; ++c) {
        if (visited[c].empty()) continue;
        std::size_t count = 0;
        for (bool v : visited[c]) count += v;
        const Real score = 100.0 * static_cast<Real>(count) / static_cast<Real>(total);
        out.per_cell[c] = score;
        sum += score;
        ++n;
    }
    if (n > 0) out.mean = sum / static_cast<Real>(n);
    return out;
}

}  // namespace aurora
