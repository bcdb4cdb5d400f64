#pragma once

#include <algorithm>
#include <concepts>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aurora/container.hpp"
#include "aurora/core.hpp"
#include "aurora/metrics.hpp"
#include "aurora/reduction.hpp"
#include "aurora/variation.hpp"

namespace aurora {

/// Rejected configuration: bad value or an unsupported combination.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class T>
concept Task = requires(const T& t, const Genotype& g) {
    { t.evaluate(g) } -> std::same_as<Evaluation>;
    { t.genotype_bounds() } -> std::convertible_to<std::shared_ptr<const GeneBounds>>;
    { t.sensory_dim() } -> std::convertible_to<std::size_t>;
    { t.bd_bounds() } -> std::convertible_to<BdBounds>;
};

/// Maps sensory data to descriptors and surprise scores, and can be refitted.
template <class M>
concept DescriptorModel = requires(M& m, const M& cm, std::span<const SensoryData* const> batch, Rng& rng) {
    { cm.encode(batch) } -> std::same_as<std::vector<Descriptor>>;
    { cm.surprise(batch) } -> std::same_as<std::vector<Real>>;
    { m.fit(batch, rng) } -> std::same_as<TrainReport>;
};

enum class Algorithm { Aurora, Taxons, NoveltySearch, RandomSearch, HandCodedQd };
enum class DescriptorSource { Unsupervised, HandCoded };
enum class ThresholdMode { Csc, Vat, None };
enum class ReductionKind { Autoencoder, Pca };

struct VariantSpec {
    Algorithm algorithm = Algorithm::Aurora;
    DescriptorSource descriptor_source = DescriptorSource::Unsupervised;
    std::size_t latent_dim = 5;
    ThresholdMode threshold = ThresholdMode::Csc;
    SelectorKind selector = SelectorKind::Uniform;
    ReductionKind reduction = ReductionKind::Autoencoder;

    static VariantSpec aurora_csc(SelectorKind sel, std::size_t n) {
        return {Algorithm::Aurora, DescriptorSource::Unsupervised, n, ThresholdMode::Csc, sel, ReductionKind::Autoencoder};
    }
    static VariantSpec aurora_vat(std::size_t n) {
        return {Algorithm::Aurora, DescriptorSource::Unsupervised, n, ThresholdMode::Vat, SelectorKind::Uniform,
                ReductionKind::Autoencoder};
    }
    static VariantSpec hc_csc() {
        return {Algorithm::HandCodedQd, DescriptorSource::HandCoded, 2, ThresholdMode::Csc, SelectorKind::Uniform,
                ReductionKind::Autoencoder};
    }
    static VariantSpec random_search() {
        return {Algorithm::RandomSearch, DescriptorSource::HandCoded, 2, ThresholdMode::Csc, SelectorKind::Random,
                ReductionKind::Autoencoder};
    }
    static VariantSpec novelty_search() {
        return {Algorithm::NoveltySearch, DescriptorSource::HandCoded, 2, ThresholdMode::None,
                SelectorKind::NoveltyProportional, ReductionKind::Autoencoder};
    }
    static VariantSpec taxons(std::size_t n) {
        return {Algorithm::Taxons, DescriptorSource::Unsupervised, n, ThresholdMode::None,
                SelectorKind::NoveltyProportional, ReductionKind::Autoencoder};
    }

    bool uses_encoder() const { return descriptor_source == DescriptorSource::Unsupervised; }

    void validate() const {
        const bool unsup = descriptor_source == DescriptorSource::Unsupervised;
        if (unsup && latent_dim == 0) throw ConfigError("latent_dim must be positive");
        switch (algorithm) {
            case Algorithm::Aurora:
                if (!unsup) throw ConfigError("AURORA needs unsupervised descriptors");
                if (threshold == ThresholdMode::None) throw ConfigError("AURORA needs CSC or VAT threshold adaptation");
                if (selector == SelectorKind::Random) throw ConfigError("AURORA selects parents from the container");
                break;
            case Algorithm::HandCodedQd:
                if (unsup) throw ConfigError("HC-QD uses hand-coded descriptors");
                if (threshold != ThresholdMode::Csc) throw ConfigError("HC-QD uses CSC threshold adaptation, not VAT");
                if (selector == SelectorKind::Random || selector == SelectorKind::SurpriseProportional) {
                    throw ConfigError("HC-QD supports uniform or novelty selection");
                }
                break;
            case Algorithm::RandomSearch:
                if (unsup) throw ConfigError("random search uses hand-coded descriptors");
                if (threshold != ThresholdMode::Csc) throw ConfigError("random search uses CSC threshold adaptation, not VAT");
                if (selector != SelectorKind::Random) throw ConfigError("random search has no parent selection");
                break;
            case Algorithm::NoveltySearch:
                if (unsup) throw ConfigError("novelty search uses hand-coded descriptors");
                if (threshold != ThresholdMode::None) throw ConfigError("novelty search has no threshold adaptation");
                if (selector != SelectorKind::NoveltyProportional) throw ConfigError("novelty search selects by novelty");
                break;
            case Algorithm::Taxons:
                if (!unsup) throw ConfigError("TAXONS needs unsupervised descriptors");
                if (threshold != ThresholdMode::None) throw ConfigError("TAXONS has no threshold adaptation");
                if (selector != SelectorKind::NoveltyProportional) {
                    throw ConfigError("TAXONS selects by novelty and surprise (selector = novelty)");
                }
                break;
        }
        if (threshold == ThresholdMode::Vat && !unsup) {
            throw ConfigError("VAT needs a learned latent space; it cannot run on hand-coded descriptors");
        }
    }
};

struct RunConfig {
    std::uint64_t iterations = 1000;
    std::size_t batch_size = 128;
    std::uint64_t seed = 0;
    ContainerParams container;
    TrainConfig train;
    MutationParams mutation;
    std::size_t metrics_every = 10;
    // d_min starts at this fraction of the largest pairwise distance within
    // the initial random batch, at the first encoder-schedule iteration.
    Real initial_threshold_fraction = 0.1;
    // TAXONS Q / novelty-search N_add.
    std::size_t additions_per_generation = 5;

    void validate() const {
        if (batch_size == 0) throw ConfigError("batch_size must be positive");
        if (metrics_every == 0) throw ConfigError("metrics_every must be positive");
        if (!(initial_threshold_fraction > 0.0)) throw ConfigError("initial threshold fraction must be positive");
        try {
            container.validate();
            train.validate();
            mutation.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
};

enum class ThresholdEventKind { Init, Csc, Vat };

struct ThresholdEvent {
    std::uint64_t iteration = 0;
    ThresholdEventKind kind = ThresholdEventKind::Csc;
    std::size_t container_size = 0;
    std::optional<Real> before;
    Real after = 0.0;
};

struct ContainerUpdateEvent {
    std::uint64_t iteration = 0;
    std::size_t size_before = 0;
    std::size_t size_after = 0;
    std::size_t lost = 0;
};

struct EncoderUpdateEvent {
    std::uint64_t iteration = 0;
    TrainReport report;
};

struct RunResult {
    Container container;
    std::vector<MetricsRecord> metrics;
    std::vector<ThresholdEvent> thresholds;
    std::vector<ContainerUpdateEvent> container_updates;
    std::vector<EncoderUpdateEvent> encoder_updates;
    std::size_t evaluations = 0;
};

/// Stand-in model for hand-coded variants; never called.
struct NoModel {
    std::vector<Descriptor> encode(std::span<const SensoryData* const>) const {
        throw std::logic_error("hand-coded variant has no encoder");
    }
    std::vector<Real> surprise(std::span<const SensoryData* const>) const {
        throw std::logic_error("hand-coded variant has no encoder");
    }
    TrainReport fit(std::span<const SensoryData* const>, Rng&) { return {}; }
};

namespace detail {

inline std::vector<const SensoryData*> sensory_of(std::span<const Individual> inds) {
    std::vector<const SensoryData*> out;
    out.reserve(inds.size());
    for (const auto& i : inds) out.push_back(&i.sensory);
    return out;
}

template <Task T>
std::vector<Individual> evaluate_all(const T& task, std::vector<Genotype> genotypes, std::uint64_t iteration,
                                     std::uint64_t& next_id) {
    std::vector<Individual> out;
    out.reserve(genotypes.size());
    for (auto& g : genotypes) {
        Evaluation e = task.evaluate(g);
        Individual ind;
        ind.genotype = std::move(g);
        ind.fitness = e.fitness;
        ind.sensory = std::move(e.sensory);
        ind.hand_coded_bd = std::move(e.hand_coded_bd);
        ind.id = next_id++;
        ind.birth_iteration = iteration;
        out.push_back(std::move(ind));
    }
    return out;
}

template <DescriptorModel M>
void describe(std::vector<Individual>& inds, bool unsupervised, const M& model, bool with_surprise) {
    if (!unsupervised) {
        for (auto& i : inds) i.descriptor = i.hand_coded_bd;
        return;
    }
    const auto ptrs = sensory_of(inds);
    auto bds = model.encode(ptrs);
    for (std::size_t i = 0; i < inds.size(); ++i) inds[i].descriptor = std::move(bds[i]);
    if (with_surprise) {
        const auto s = model.surprise(ptrs);
        for (std::size_t i = 0; i < inds.size(); ++i) inds[i].surprise = s[i];
    }
}

inline MetricsRecord snapshot(std::uint64_t iteration, const Container& c, const BdBounds& bounds) {
    const auto pts = scored_points(c.members());
    MetricsRecord r;
    r.iteration = iteration;
    r.coverage_pct = coverage(pts, bounds);
    r.grid_mean_fitness = grid_mean_fitness(pts, bounds);
    r.container_size = c.size();
    r.d_min = c.d_min();
    r.cumulative_loss = c.cumulative_loss();
    r.updates = c.update_count();
    return r;
}

inline bool log_due(std::uint64_t iter, std::uint64_t last, std::size_t every) {
    return iter % every == 0 || iter == last;
}

/// Indices of the `count` largest scores; ties go to the lower index.
inline std::vector<std::size_t> top_indices(std::span<const Real> scores, std::size_t count) {
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    idx.resize(std::min(count, idx.size()));
    return idx;
}

/// Novelty of every member of `pool` against archive plus pool (itself
/// excluded).
inline std::vector<Real> pool_novelty(const Container& archive, std::span<const Individual> pool, std::size_t k) {
    std::vector<Individual> ref(archive.members().begin(), archive.members().end());
    const std::size_t offset = ref.size();
    ref.insert(ref.end(), pool.begin(), pool.end());
    std::vector<Real> out(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) out[i] = novelty_in(ref, pool[i].descriptor, k, offset + i);
    return out;
}

}  // namespace detail

/// The container-driven loop shared by AURORA, HC-QD and random search.
/// Per iteration: generate and evaluate offspring, offer them to the
/// container, update the encoder on schedule, adapt d_min, and
/// periodically re-insert every member under the current threshold.
template <Task T, DescriptorModel M>
RunResult run_container_qd(const RunConfig& cfg, const VariantSpec& variant, const T& task, M& model) {
    cfg.validate();
    variant.validate();
    if (variant.algorithm != Algorithm::Aurora && variant.algorithm != Algorithm::HandCodedQd &&
        variant.algorithm != Algorithm::RandomSearch) {
        throw ConfigError("run_container_qd drives AURORA, HC-QD and random search only");
    }
    const bool unsupervised = variant.uses_encoder();
    const bool want_surprise = variant.selector == SelectorKind::SurpriseProportional;
    const bool random_only = variant.algorithm == Algorithm::RandomSearch;
    const auto& bounds = task.genotype_bounds();
    const BdBounds bd_bounds = task.bd_bounds();

    Rng root(cfg.seed);
    Rng variation = root.derive("variation");
    Rng training = root.derive("encoder-train");

    ContainerParams cp = cfg.container;
    cp.d_min.reset();
    RunResult result;
    result.container = Container(cp);
    Container& c = result.container;
    std::uint64_t next_id = 0;

    auto surprise_of = [&](const Individual& ind) {
        const SensoryData* p = &ind.sensory;
        return model.surprise(std::span<const SensoryData* const>(&p, 1)).front();
    };

    auto do_container_update = [&](std::uint64_t iter) {
        const std::size_t before = c.size();
        const std::size_t lost = c.update(*c.d_min());
        result.container_updates.push_back({iter, before, c.size(), lost});
    };

    const std::uint64_t first_schedule = encoder_update_iteration(1);
    if (cfg.iterations > 0) result.metrics.push_back(detail::snapshot(0, c, bd_bounds));
    for (std::uint64_t iter = 1; iter <= cfg.iterations; ++iter) {
        std::vector<Genotype> genotypes;
        if (random_only) {
            for (std::size_t i = 0; i < cfg.batch_size; ++i) genotypes.push_back(random_genotype(bounds, variation));
        } else if (iter == 1) {
            for (std::size_t i = 0; i < 2 * cfg.batch_size; ++i) genotypes.push_back(random_genotype(bounds, variation));
        } else {
            auto parents = select_batch(c, variant.selector, cfg.batch_size, variation, bounds, surprise_of);
            for (auto& p : parents) genotypes.push_back(polynomial_mutation(std::move(p), cfg.mutation, variation));
        }

        auto offspring = detail::evaluate_all(task, std::move(genotypes), iter, next_id);
        result.evaluations += offspring.size();
        detail::describe(offspring, unsupervised, model, want_surprise);
        for (auto& ind : offspring) c.try_add(std::move(ind));

        const bool schedule = is_encoder_update_iteration(iter);
        if (schedule && unsupervised) {
            const auto data = detail::sensory_of(c.members());
            const TrainReport rep = model.fit(data, training);
            result.encoder_updates.push_back({iter, rep});
            c.assign_descriptors(model.encode(data));
            if (want_surprise) {
                const auto s = model.surprise(data);
                for (std::size_t i = 0; i < c.size(); ++i) c.set_surprise(i, s[i]);
            }
        }

        if (variant.threshold == ThresholdMode::Vat) {
            if (schedule) {
                const Real d = vat_update_threshold(max_pairwise_distance(c), cp.n_target, cp.k_vat, variant.latent_dim);
                result.thresholds.push_back({iter, ThresholdEventKind::Vat, c.size(), c.d_min(), d});
                c.set_d_min(d);
                do_container_update(iter);
            }
        } else {
            if (!c.d_min() && iter == first_schedule) {
                std::vector<Individual> initial;
                for (const auto& m : c.members()) {
                    if (m.birth_iteration == 1) initial.push_back(m);
                }
                const Real d = std::max(kMinThreshold, cfg.initial_threshold_fraction * max_pairwise_distance(initial));
                result.thresholds.push_back({iter, ThresholdEventKind::Init, c.size(), std::nullopt, d});
                c.set_d_min(d);
            }
            if (c.d_min()) {
                const Real before = *c.d_min();
                const Real d = csc_update_threshold(before, c.size(), cp.n_target, cp.k_csc);
                result.thresholds.push_back({iter, ThresholdEventKind::Csc, c.size(), before, d});
                c.set_d_min(d);
                if (iter % cp.update_period == 0) do_container_update(iter);
            }
        }

        if (detail::log_due(iter, cfg.iterations, cfg.metrics_every)) {
            result.metrics.push_back(detail::snapshot(iter, c, bd_bounds));
        }
    }
    return result;
}

template <Task T, DescriptorModel M>
RunResult run_aurora(const RunConfig& cfg, const VariantSpec& variant, const T& task, M& model) {
    if (variant.algorithm != Algorithm::Aurora) throw ConfigError("run_aurora needs the AURORA algorithm");
    return run_container_qd(cfg, variant, task, model);
}

template <Task T>
RunResult run_hc_qd(const RunConfig& cfg, const T& task, const VariantSpec& variant = VariantSpec::hc_csc()) {
    NoModel none;
    return run_container_qd(cfg, variant, task, none);
}

template <Task T>
RunResult run_random_search(const RunConfig& cfg, const T& task) {
    NoModel none;
    return run_container_qd(cfg, VariantSpec::random_search(), task, none);
}

namespace detail {

/// Generational loop shared by novelty search and TAXONS. A population of
/// batch_size evolves; each generation a fixed number of offspring joins an
/// archive that never loses members.
template <Task T, DescriptorModel M>
RunResult run_archive_search(const RunConfig& cfg, const VariantSpec& variant, const T& task, M& model) {
    cfg.validate();
    variant.validate();
    const bool taxons = variant.algorithm == Algorithm::Taxons;
    const auto& bounds = task.genotype_bounds();
    const BdBounds bd_bounds = task.bd_bounds();
    const std::size_t k = cfg.container.k;

    Rng root(cfg.seed);
    Rng variation = root.derive("variation");
    Rng training = root.derive("encoder-train");

    ContainerParams cp = cfg.container;
    cp.d_min.reset();
    RunResult result;
    result.container = Container(cp);
    Container& archive = result.container;
    std::uint64_t next_id = 0;

    if (cfg.iterations == 0) return result;
    result.metrics.push_back(snapshot(0, archive, bd_bounds));

    std::vector<Genotype> init;
    for (std::size_t i = 0; i < cfg.batch_size; ++i) init.push_back(random_genotype(bounds, variation));
    auto population = evaluate_all(task, std::move(init), 0, next_id);
    result.evaluations += population.size();
    describe(population, taxons, model, taxons);

    for (std::uint64_t gen = 1; gen <= cfg.iterations; ++gen) {
        // TAXONS alternates its criterion: novelty on odd generations,
        // surprise on even ones.
        const bool by_surprise = taxons && gen % 2 == 0;
        std::vector<Real> parent_scores;
        if (by_surprise) {
            for (const auto& p : population) parent_scores.push_back(*p.surprise);
        } else {
            parent_scores = pool_novelty(archive, population, k);
        }
        for (auto& s : parent_scores) {
            if (std::isinf(s)) s = 1.0;
        }
        WeightedSampler sampler(parent_scores);
        std::vector<Genotype> children;
        for (std::size_t i = 0; i < cfg.batch_size; ++i) {
            children.push_back(polynomial_mutation(population[sampler(variation)].genotype, cfg.mutation, variation));
        }
        auto offspring = evaluate_all(task, std::move(children), gen, next_id);
        result.evaluations += offspring.size();
        describe(offspring, taxons, model, taxons);

        std::vector<Individual> pool = std::move(population);
        const std::size_t parents_end = pool.size();
        for (auto& o : offspring) pool.push_back(std::move(o));
        const auto novelty = pool_novelty(archive, pool, k);

        std::vector<Real> add_scores;
        for (std::size_t i = parents_end; i < pool.size(); ++i) {
            add_scores.push_back(by_surprise ? *pool[i].surprise : novelty[i]);
        }
        for (std::size_t i : top_indices(add_scores, cfg.additions_per_generation)) {
            archive.try_add(pool[parents_end + i]);
        }

        population.clear();
        for (std::size_t i : top_indices(novelty, cfg.batch_size)) population.push_back(std::move(pool[i]));

        if (taxons && is_encoder_update_iteration(gen)) {
            auto data = sensory_of(archive.members());
            const auto pop_data = sensory_of(population);
            data.insert(data.end(), pop_data.begin(), pop_data.end());
            const TrainReport rep = model.fit(data, training);
            result.encoder_updates.push_back({gen, rep});
            archive.assign_descriptors(model.encode(sensory_of(archive.members())));
            describe(population, true, model, true);
        }

        if (log_due(gen, cfg.iterations, cfg.metrics_every)) result.metrics.push_back(snapshot(gen, archive, bd_bounds));
    }
    return result;
}

}  // namespace detail

template <Task T>
RunResult run_novelty_search(const RunConfig& cfg, const T& task) {
    NoModel none;
    return detail::run_archive_search(cfg, VariantSpec::novelty_search(), task, none);
}

template <Task T, DescriptorModel M>
RunResult run_taxons(const RunConfig& cfg, std::size_t latent_dim, const T& task, M& model) {
    return detail::run_archive_search(cfg, VariantSpec::taxons(latent_dim), task, model);
}

/// Default encoder for a task: the task's fully-connected autoencoder, or
/// PCA when requested.
template <Task T>
auto make_autoencoder(const T& task, std::size_t latent_dim, const RunConfig& cfg) {
    Rng init = Rng(cfg.seed).derive("encoder-init");
    return AutoencoderModel<float>(task.sensory_dim(), task.encoder_hidden(), latent_dim, cfg.train, init);
}

/// Runs any variant with its default descriptor model. `on_model` receives
/// the final model (e.g. to write a checkpoint) for unsupervised variants.
template <Task T, class OnModel>
RunResult run_variant(const RunConfig& cfg, const VariantSpec& variant, const T& task, OnModel&& on_model) {
    variant.validate();
    auto dispatch = [&](auto& model) {
        RunResult r;
        switch (variant.algorithm) {
            case Algorithm::Aurora: r = run_aurora(cfg, variant, task, model); break;
            case Algorithm::Taxons: r = detail::run_archive_search(cfg, variant, task, model); break;
            default: break;
        }
        on_model(model);
        return r;
    };
    switch (variant.algorithm) {
        case Algorithm::HandCodedQd: return run_hc_qd(cfg, task, variant);
        case Algorithm::RandomSearch: return run_random_search(cfg, task);
        case Algorithm::NoveltySearch: return run_novelty_search(cfg, task);
        default: break;
    }
    if (variant.reduction == ReductionKind::Pca) {
        PcaModel model(task.sensory_dim(), variant.latent_dim);
        return dispatch(model);
    }
    auto model = make_autoencoder(task, variant.latent_dim, cfg);
    return dispatch(model);
}

template <Task T>
RunResult run_variant(const RunConfig& cfg, const VariantSpec& variant, const T& task) {
    return run_variant(cfg, variant, task, [](const auto&) {});
}

}  // namespace aurora
