#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <spdlog/spdlog.h>

#include "aurora/container.hpp"
#include "aurora/core.hpp"

namespace aurora {

enum class SelectorKind { Uniform, NoveltyProportional, SurpriseProportional, Random };

struct MutationParams {
    Real eta_m = 10.0;
    Real per_gene_rate = 0.05;

    void validate() const {
        if (!(eta_m > 0.0)) throw std::invalid_argument("eta_m must be positive");
        if (!(per_gene_rate > 0.0 && per_gene_rate < 1.0)) throw std::invalid_argument("mutation rate must lie in (0, 1)");
    }
};

/// Deb's polynomial perturbation for a draw u in [0, 1), as a fraction of
/// the gene's range.
inline Real polynomial_delta(Real u, Real eta) {
    const Real p = 1.0 / (eta + 1.0);
    if (u < 0.5) return std::pow(2.0 * u, p) - 1.0;
    return 1.0 - std::pow(2.0 * (1.0 - u), p);
}

/// Polynomial mutation, each gene independently with probability
/// per_gene_rate, then clamped to the gene bounds. Draw order per gene:
/// the mutate/keep draw, then (if mutating) the perturbation draw.
inline Genotype polynomial_mutation(Genotype g, const MutationParams& p, Rng& rng) {
    const auto& bounds = g.bounds();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (rng.uniform() >= p.per_gene_rate) continue;
        const Real delta = polynomial_delta(rng.uniform(), p.eta_m);
        g[i] = bounds[i].clamp(g[i] + delta * bounds[i].width());
    }
    return g;
}

/// Draws an index with probability proportional to its weight. Falls back
/// to a uniform draw when all weights are zero.
class WeightedSampler {
public:
    explicit WeightedSampler(std::span<const Real> weights) {
        cumulative_.reserve(weights.size());
        Real acc = 0.0;
        for (Real w : weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("selection weights must be finite and >= 0");
            acc += w;
            cumulative_.push_back(acc);
        }
        if (weights.empty()) throw std::invalid_argument("cannot sample from an empty set");
        degenerate_ = !(acc > 0.0);
    }

    bool degenerate() const { return degenerate_; }

    std::size_t operator()(Rng& rng) const {
        if (degenerate_) return rng.index(cumulative_.size());
        const Real target = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        return std::min(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
    }

private:
    std::vector<Real> cumulative_;
    bool degenerate_ = false;
};

/// Parent genotypes drawn with replacement. `Random` ignores the container
/// and returns fresh uniform genotypes. `surprise(ind)` is consulted for
/// members without a cached surprise score.
template <NeighbourSearch S, class SurpriseFn>
std::vector<Genotype> select_batch(BasicContainer<S>& container, SelectorKind kind, std::size_t batch, Rng& rng,
                                   const std::shared_ptr<const GeneBounds>& bounds, SurpriseFn&& surprise) {
    std::vector<Genotype> out;
    out.reserve(batch);
    if (kind == SelectorKind::Random) {
        for (std::size_t i = 0; i < batch; ++i) out.push_back(random_genotype(bounds, rng));
        return out;
    }
    if (container.empty()) throw std::invalid_argument("cannot select parents from an empty container");
    if (kind == SelectorKind::Uniform) {
        for (std::size_t i = 0; i < batch; ++i) out.push_back(container[rng.index(container.size())].genotype);
        return out;
    }
    std::vector<Real> weights(container.size());
    for (std::size_t i = 0; i < container.size(); ++i) {
        if (kind == SelectorKind::NoveltyProportional) {
            weights[i] = container.member_novelty(i);
        } else {
            if (!container[i].surprise) container.set_surprise(i, surprise(container[i]));
            weights[i] = *container[i].surprise;
        }
        // A lone member has infinite novelty; it is then the only choice.
        if (std::isinf(weights[i])) weights[i] = 1.0;
    }
    WeightedSampler sampler(weights);
    if (sampler.degenerate()) spdlog::warn("all selection weights are zero; selecting uniformly");
    for (std::size_t i = 0; i < batch; ++i) out.push_back(container[sampler(rng)].genotype);
    return out;
}

template <NeighbourSearch S>
std::vector<Genotype> select_batch(BasicContainer<S>& container, SelectorKind kind, std::size_t batch, Rng& rng,
                                   const std::shared_ptr<const GeneBounds>& bounds) {
    return select_batch(container, kind, batch, rng, bounds, [](const Individual&) -> Real {
        throw std::logic_error("surprise selection needs a reconstruction-error source");
    });
}

}  // namespace aurora
