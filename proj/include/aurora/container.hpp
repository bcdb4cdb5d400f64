#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aurora/core.hpp"

namespace aurora {

/// Lower bound applied to thresholds produced by the proportional controller;
/// the multiplicative update can never leave zero once it gets there.
inline constexpr Real kMinThreshold = 1e-9;

struct ContainerParams {
    std::size_t k = 15;
    Real epsilon = 0.1;
    // Unset until the first threshold is computed; every candidate is
    // admitted while it is unset.
    std::optional<Real> d_min;
    std::size_t n_target = 10000;
    Real k_csc = 5e-6;
    Real k_vat = 25.0;
    std::size_t update_period = 10;

    void validate() const {
        if (k == 0) throw std::invalid_argument("container k must be positive");
        if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1)");
        if (d_min && !(*d_min > 0.0)) throw std::invalid_argument("d_min must be positive");
        if (n_target == 0) throw std::invalid_argument("n_target must be positive");
        if (!(k_csc > 0.0)) throw std::invalid_argument("k_csc must be positive");
        if (!(k_vat > 0.0)) throw std::invalid_argument("k_vat must be positive");
        if (update_period == 0) throw std::invalid_argument("container update period must be positive");
    }
};

struct Neighbour {
    Real distance = 0.0;
    std::size_t index = 0;
};

/// Neighbour search strategy used by the container. `exclude` removes one
/// member from consideration (the member being scored, or the one a
/// candidate would replace).
template <class S>
concept NeighbourSearch = requires(std::span<const Individual> pool, const Descriptor& q, std::size_t k,
                                   std::optional<std::size_t> exclude) {
    { S::nearest(pool, q, k, exclude) } -> std::same_as<std::vector<Neighbour>>;
};

/// Exact k-nearest neighbours by linear scan. Results sorted by distance,
/// ties by index.
struct LinearScan {
    static std::vector<Neighbour> nearest(std::span<const Individual> pool, const Descriptor& query, std::size_t k,
                                          std::optional<std::size_t> exclude = std::nullopt) {
        std::vector<Neighbour> all;
        all.reserve(pool.size());
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (exclude && *exclude == i) continue;
            all.push_back({squared_distance(query, pool[i].descriptor), i});
        }
        const auto less = [](const Neighbour& a, const Neighbour& b) {
            return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
        };
        const std::size_t m = std::min(k, all.size());
        std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), less);
        all.resize(m);
        for (auto& n : all) n.distance = std::sqrt(n.distance);
        return all;
    }
};

/// Mean distance to the k nearest members of `pool`; +inf when the pool
/// (after exclusion) is empty.
template <NeighbourSearch Search = LinearScan>
Real novelty_in(std::span<const Individual> pool, const Descriptor& bd, std::size_t k,
                std::optional<std::size_t> exclude = std::nullopt) {
    const auto nn = Search::nearest(pool, bd, k, exclude);
    if (nn.empty()) return std::numeric_limits<Real>::infinity();
    Real sum = 0.0;
    for (const auto& n : nn) sum += n.distance;
    return sum / static_cast<Real>(nn.size());
}

enum class AddStatus { Added, Replaced, Rejected };

struct AddOutcome {
    AddStatus status = AddStatus::Rejected;
    std::optional<Individual> replaced;
};

/// Unstructured archive: a candidate is admitted when its nearest neighbour
/// is farther than d_min; otherwise it may replace that neighbour under
/// exclusive epsilon-dominance on (novelty, fitness).
template <NeighbourSearch Search = LinearScan>
class BasicContainer {
public:
    BasicContainer() = default;
    explicit BasicContainer(ContainerParams params) : params_(std::move(params)) { params_.validate(); }

    const ContainerParams& params() const { return params_; }
    std::optional<Real> d_min() const { return params_.d_min; }
    void set_d_min(Real d) { params_.d_min = d; }

    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    std::span<const Individual> members() const { return members_; }
    const Individual& operator[](std::size_t i) const { return members_[i]; }

    std::size_t cumulative_loss() const { return cumulative_loss_; }
    std::size_t update_count() const { return update_count_; }

    std::vector<Neighbour> nearest(const Descriptor& bd, std::size_t k,
                                   std::optional<std::size_t> exclude = std::nullopt) const {
        return Search::nearest(members_, bd, k, exclude);
    }

    Real novelty(const Descriptor& bd, std::optional<std::size_t> exclude = std::nullopt) const {
        return novelty_in<Search>(members_, bd, params_.k, exclude);
    }

    /// Novelty of member i against the rest of the container, cached until
    /// the next membership or descriptor change.
    Real member_novelty(std::size_t i) {
        auto& m = members_[i];
        if (!m.novelty) m.novelty = novelty(m.descriptor, i);
        return *m.novelty;
    }

    void set_surprise(std::size_t i, Real s) { members_[i].surprise = s; }

    AddOutcome try_add(Individual ind) {
        if (!members_.empty() && ind.descriptor.dim() != members_.front().descriptor.dim()) {
            throw std::invalid_argument("descriptor dimension does not match container members");
        }
        ind.novelty.reset();
        if (!params_.d_min || members_.empty()) {
            push(std::move(ind));
            return {AddStatus::Added, std::nullopt};
        }
        const auto nn = Search::nearest(members_, ind.descriptor, 1, std::nullopt);
        const Neighbour closest = nn.front();
        if (closest.distance > *params_.d_min) {
            push(std::move(ind));
            return {AddStatus::Added, std::nullopt};
        }
        // Both novelties are measured against the container without the
        // neighbour under threat.
        const Real nov_new = novelty(ind.descriptor, closest.index);
        const Real nov_old = novelty(members_[closest.index].descriptor, closest.index);
        if (!epsilon_dominates(nov_new, ind.fitness, nov_old, members_[closest.index].fitness, params_.epsilon)) {
            return {AddStatus::Rejected, std::nullopt};
        }
        Individual old = std::move(members_[closest.index]);
        members_[closest.index] = std::move(ind);
        invalidate_caches();
        return {AddStatus::Replaced, std::move(old)};
    }

    /// Takes every member out and re-inserts them with the new threshold,
    /// best fitness first (older first on ties). Returns the number lost.
    std::size_t update(Real new_d_min) {
        std::vector<Individual> old = std::move(members_);
        members_.clear();
        members_.reserve(old.size());
        std::vector<std::size_t> order(old.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (old[a].fitness != old[b].fitness) return old[a].fitness > old[b].fitness;
            return old[a].id < old[b].id;
        });
        params_.d_min = new_d_min;
        for (std::size_t i : order) try_add(std::move(old[i]));
        const std::size_t lost = old.size() - members_.size();
        cumulative_loss_ += lost;
        ++update_count_;
        return lost;
    }

    /// Replaces every descriptor with encode(sensory). Membership is left
    /// alone; filtering happens at the next update().
    template <class Encode>
    void recompute_descriptors(Encode&& encode) {
        std::vector<Descriptor> next;
        next.reserve(members_.size());
        for (const auto& m : members_) next.push_back(encode(m.sensory));
        assign_descriptors(std::move(next));
    }

    /// Batched form of recompute_descriptors: descriptors in member order.
    void assign_descriptors(std::vector<Descriptor> descriptors) {
        if (descriptors.size() != members_.size()) {
            throw std::invalid_argument("descriptor count does not match container size");
        }
        for (std::size_t i = 1; i < descriptors.size(); ++i) {
            if (descriptors[i].dim() != descriptors[0].dim()) {
                throw std::invalid_argument("recomputed descriptors have inconsistent dimensions");
            }
        }
        for (std::size_t i = 0; i < members_.size(); ++i) {
            members_[i].descriptor = std::move(descriptors[i]);
            members_[i].surprise.reset();
        }
        invalidate_caches();
    }

    static bool epsilon_dominates(Real nov_new, Real fit_new, Real nov_old, Real fit_old, Real eps) {
        const Real nov_bar = (1.0 - eps) * nov_old;
        const Real fit_bar = fit_old - eps * std::abs(fit_old);
        const bool weak = nov_new >= nov_bar && fit_new >= fit_bar;
        const bool strict = nov_new > nov_bar || fit_new > fit_bar;
        return weak && strict;
    }

private:
    void push(Individual ind) {
        members_.push_back(std::move(ind));
        invalidate_caches();
    }

    void invalidate_caches() {
        for (auto& m : members_) m.novelty.reset();
    }

    ContainerParams params_;
    std::vector<Individual> members_;
    std::size_t cumulative_loss_ = 0;
    std::size_t update_count_ = 0;
};

using Container = BasicContainer<>;

template <NeighbourSearch S>
Real novelty_score(const Descriptor& bd, const BasicContainer<S>& container, std::size_t k) {
    return novelty_in<S>(container.members(), bd, k);
}

inline Real csc_update_threshold(Real d_min, std::size_t size, std::size_t n_target, Real k_csc) {
    const Real error = static_cast<Real>(size) - static_cast<Real>(n_target);
    return std::max(kMinThreshold, d_min * (1.0 + k_csc * error));
}

inline Real vat_update_threshold(Real max_pairwise_bd_distance, std::size_t n_target, Real k_vat, std::size_t n) {
    if (n == 0 || n_target == 0 || !(k_vat > 0.0)) {
        throw std::invalid_argument("vat_update_threshold needs n >= 1, n_target >= 1, k_vat > 0");
    }
    return max_pairwise_bd_distance / std::pow(k_vat * static_cast<Real>(n_target), 1.0 / static_cast<Real>(n));
}

inline Real max_pairwise_distance(std::span<const Individual> members) {
    Real best = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            best = std::max(best, squared_distance(members[i].descriptor, members[j].descriptor));
        }
    }
    return std::sqrt(best);
}

template <NeighbourSearch S>
Real max_pairwise_distance(const BasicContainer<S>& c) {
    return max_pairwise_distance(c.members());
}

/// Returns the number of members lost.
template <NeighbourSearch S>
std::size_t container_update(BasicContainer<S>& c, Real d_min) {
    return c.update(d_min);
}

template <NeighbourSearch S, class Encode>
void recompute_descriptors(BasicContainer<S>& c, Encode&& encode) {
    c.recompute_descriptors(std::forward<Encode>(encode));
}

}  // namespace aurora
