#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <spdlog/spdlog.h>

#include "aurora/engine.hpp"
#include "aurora/io.hpp"
#include "aurora/tasks/airhockey.hpp"
#include "aurora/tasks/maze.hpp"

namespace aurora {

inline constexpr const char* kOutputRootEnv = "AURORA_OUTPUT_ROOT";

/// Everything one invocation of `run` needs. Text form is `key = value`
/// lines; `#` starts a comment.
struct ExperimentConfig {
    std::string task = "maze";
    std::string maze_layout;  // empty: built-in layout
    VariantSpec variant;
    RunConfig run;
    std::size_t replications = 1;
    std::string variant_name;  // empty: derived from the variant
    std::string output_dir;    // empty: $AURORA_OUTPUT_ROOT or "output"

    std::string resolved_variant_name() const;
    std::filesystem::path output_root() const {
        if (!output_dir.empty()) return output_dir;
        if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
        return "output";
    }
    void validate() const {
        if (task != "maze" && task != "airhockey") throw ConfigError("task: unknown task '" + task + "'");
        if (replications == 0) throw ConfigError("replications: must be positive");
        run.validate();
        variant.validate();
    }
};

namespace config_detail {

inline const std::map<std::string, Algorithm>& algorithms() {
    static const std::map<std::string, Algorithm> m{{"aurora", Algorithm::Aurora},
                                                    {"taxons", Algorithm::Taxons},
                                                    {"ns", Algorithm::NoveltySearch},
                                                    {"random", Algorithm::RandomSearch},
                                                    {"hc", Algorithm::HandCodedQd}};
    return m;
}
inline const std::map<std::string, ThresholdMode>& thresholds() {
    static const std::map<std::string, ThresholdMode> m{
        {"csc", ThresholdMode::Csc}, {"vat", ThresholdMode::Vat}, {"none", ThresholdMode::None}};
    return m;
}
inline const std::map<std::string, SelectorKind>& selectors() {
    static const std::map<std::string, SelectorKind> m{{"uniform", SelectorKind::Uniform},
                                                       {"novelty", SelectorKind::NoveltyProportional},
                                                       {"surprise", SelectorKind::SurpriseProportional},
                                                       {"random", SelectorKind::Random}};
    return m;
}
inline const std::map<std::string, DescriptorSource>& descriptor_sources() {
    static const std::map<std::string, DescriptorSource> m{{"unsupervised", DescriptorSource::Unsupervised},
                                                           {"handcoded", DescriptorSource::HandCoded}};
    return m;
}
inline const std::map<std::string, ReductionKind>& reductions() {
    static const std::map<std::string, ReductionKind> m{{"ae", ReductionKind::Autoencoder},
                                                        {"pca", ReductionKind::Pca}};
    return m;
}

template <class E>
std::string name_of(const std::map<std::string, E>& m, E v) {
    for (const auto& [k, e] : m) {
        if (e == v) return k;
    }
    return "?";
}

template <class E>
E lookup(const std::map<std::string, E>& m, const std::string& key, const std::string& value) {
    const auto it = m.find(value);
    if (it == m.end()) throw ConfigError(key + ": unknown value '" + value + "'");
    return it->second;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& value) {
    const auto v = io::parse_uint(value);
    if (!v) throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    return *v;
}

inline Real to_real(const std::string& key, const std::string& value) {
    const auto v = io::parse_real(value);
    if (!v || !std::isfinite(*v)) throw ConfigError(key + ": expected a number, got '" + value + "'");
    return *v;
}

/// Threshold, selector and descriptor source each algorithm runs with
/// unless the config says otherwise.
inline void apply_algorithm_defaults(VariantSpec& v) {
    switch (v.algorithm) {
        case Algorithm::Aurora:
            v.descriptor_source = DescriptorSource::Unsupervised;
            v.threshold = ThresholdMode::Csc;
            v.selector = SelectorKind::Uniform;
            break;
        case Algorithm::HandCodedQd:
            v.descriptor_source = DescriptorSource::HandCoded;
            v.threshold = ThresholdMode::Csc;
            v.selector = SelectorKind::Uniform;
            break;
        case Algorithm::RandomSearch:
            v.descriptor_source = DescriptorSource::HandCoded;
            v.threshold = ThresholdMode::Csc;
            v.selector = SelectorKind::Random;
            break;
        case Algorithm::NoveltySearch:
            v.descriptor_source = DescriptorSource::HandCoded;
            v.threshold = ThresholdMode::None;
            v.selector = SelectorKind::NoveltyProportional;
            break;
        case Algorithm::Taxons:
            v.descriptor_source = DescriptorSource::Unsupervised;
            v.threshold = ThresholdMode::None;
            v.selector = SelectorKind::NoveltyProportional;
            break;
    }
}

}  // namespace config_detail

inline std::string ExperimentConfig::resolved_variant_name() const {
    using namespace config_detail;
    if (!variant_name.empty()) return variant_name;
    const std::string alg = name_of(algorithms(), variant.algorithm);
    switch (variant.algorithm) {
        case Algorithm::Aurora:
            return alg + "-" + name_of(thresholds(), variant.threshold) + "-" + name_of(selectors(), variant.selector) +
                   (variant.reduction == ReductionKind::Pca ? "-pca" : "") + "-n" + std::to_string(variant.latent_dim);
        case Algorithm::Taxons: return alg + "-n" + std::to_string(variant.latent_dim);
        case Algorithm::HandCodedQd: return alg + "-csc-" + name_of(selectors(), variant.selector);
        default: return alg;
    }
}

/// Applies presets and key/value settings in order: `preset` first, then
/// `algorithm` (which resets the per-algorithm defaults), then every other
/// key. Later settings of the same key win.
class ConfigBuilder {
public:
    static const std::vector<std::string>& presets() {
        static const std::vector<std::string> p{"maze-small", "maze-paper", "airhockey-small", "airhockey-paper"};
        return p;
    }

    static const std::vector<std::string>& keys() {
        static const std::vector<std::string> k{
            "preset", "task", "maze_layout", "algorithm", "descriptor", "latent_dim", "threshold", "selector",
            "reduction", "iterations", "batch_size", "seed", "replications", "variant_name", "output_dir", "k",
            "epsilon", "n_target", "k_csc", "k_vat", "update_period", "epochs", "minibatch", "learning_rate",
            "clip_norm", "max_train_samples", "eta_m", "mutation_rate", "metrics_every", "initial_threshold_fraction",
            "additions_per_generation"};
        return k;
    }

    /// Records `key = value`; `line` is for error messages (0: command line).
    void set(const std::string& key, const std::string& value, std::size_t line = 0) {
        if (std::find(keys().begin(), keys().end(), key) == keys().end()) {
            throw ConfigError(where(line) + "unknown key '" + key + "'");
        }
        values_[key] = {value, line};
    }

    void set_assignment(std::string_view text, std::size_t line = 0) {
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where(line) + "expected key=value, got '" + std::string(text) + "'");
        const std::string key(io::trim(text.substr(0, eq)));
        const std::string value(io::trim(text.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where(line) + "missing key before '='");
        set(key, value, line);
    }

    void read(std::istream& is) {
        std::string line;
        std::size_t n = 0;
        while (std::getline(is, line)) {
            ++n;
            std::string_view v = line;
            if (const auto hash = v.find('#'); hash != std::string_view::npos) v = v.substr(0, hash);
            v = io::trim(v);
            if (v.empty()) continue;
            set_assignment(v, n);
        }
    }

    void read_file(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
        read(in);
    }

    ExperimentConfig build() const {
        using namespace config_detail;
        ExperimentConfig c;
        if (auto p = get("preset")) apply_preset(c, *p);
        if (auto a = get("algorithm")) {
            c.variant.algorithm = lookup(algorithms(), "algorithm", *a);
            apply_algorithm_defaults(c.variant);
        }
        for (const auto& [key, entry] : values_) {
            if (key == "preset" || key == "algorithm") continue;
            try {
                apply(c, key, entry.value);
            } catch (const ConfigError& e) {
                throw ConfigError(where(entry.line) + e.what());
            }
        }
        c.validate();
        return c;
    }

private:
    struct Entry {
        std::string value;
        std::size_t line = 0;
    };

    static std::string where(std::size_t line) { return line ? "line " + std::to_string(line) + ": " : std::string{}; }

    std::optional<std::string> get(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) return std::nullopt;
        return it->second.value;
    }

    static void apply_preset(ExperimentConfig& c, const std::string& name) {
        if (name == "maze-small" || name == "maze-paper") {
            c.task = "maze";
            c.run.container.k_vat = 25.0;
            c.run.mutation.per_gene_rate = 0.05;
        } else if (name == "airhockey-small" || name == "airhockey-paper") {
            c.task = "airhockey";
            c.run.container.k_vat = 18.0;
            c.run.mutation.per_gene_rate = 0.15;
        } else {
            throw ConfigError("preset: unknown preset '" + name + "'");
        }
        const bool small = name.ends_with("-small");
        if (small) {
            c.run.iterations = c.task == "maze" ? 1500 : 800;
            c.run.batch_size = 64;
            c.run.container.n_target = 1000;
            // Same K_CSC * N_target as the full-scale presets.
            c.run.container.k_csc = 5e-5;
            c.variant.latent_dim = 5;
            c.replications = 5;
        } else {
            c.run.iterations = c.task == "maze" ? 10000 : 1000;
            c.run.batch_size = 128;
            c.run.container.n_target = 10000;
            c.variant.latent_dim = 10;
            c.replications = 20;
        }
    }

    static void apply(ExperimentConfig& c, const std::string& key, const std::string& v) {
        using namespace config_detail;
        auto& r = c.run;
        if (key == "task") c.task = v;
        else if (key == "maze_layout") c.maze_layout = v;
        else if (key == "descriptor") c.variant.descriptor_source = lookup(descriptor_sources(), key, v);
        else if (key == "latent_dim") c.variant.latent_dim = to_uint(key, v);
        else if (key == "threshold") c.variant.threshold = lookup(thresholds(), key, v);
        else if (key == "selector") c.variant.selector = lookup(selectors(), key, v);
        else if (key == "reduction") c.variant.reduction = lookup(reductions(), key, v);
        else if (key == "iterations") r.iterations = to_uint(key, v);
        else if (key == "batch_size") r.batch_size = to_uint(key, v);
        else if (key == "seed") r.seed = to_uint(key, v);
        else if (key == "replications") c.replications = to_uint(key, v);
        else if (key == "variant_name") c.variant_name = v;
        else if (key == "output_dir") c.output_dir = v;
        else if (key == "k") r.container.k = to_uint(key, v);
        else if (key == "epsilon") r.container.epsilon = to_real(key, v);
        else if (key == "n_target") r.container.n_target = to_uint(key, v);
        else if (key == "k_csc") r.container.k_csc = to_real(key, v);
        else if (key == "k_vat") r.container.k_vat = to_real(key, v);
        else if (key == "update_period") r.container.update_period = to_uint(key, v);
        else if (key == "epochs") r.train.epochs = to_uint(key, v);
        else if (key == "minibatch") r.train.minibatch = to_uint(key, v);
        else if (key == "learning_rate") r.train.learning_rate = to_real(key, v);
        else if (key == "clip_norm") r.train.clip_norm = to_real(key, v);
        else if (key == "max_train_samples") r.train.max_samples = to_uint(key, v);
        else if (key == "eta_m") r.mutation.eta_m = to_real(key, v);
        else if (key == "mutation_rate") r.mutation.per_gene_rate = to_real(key, v);
        else if (key == "metrics_every") r.metrics_every = to_uint(key, v);
        else if (key == "initial_threshold_fraction") r.initial_threshold_fraction = to_real(key, v);
        else if (key == "additions_per_generation") r.additions_per_generation = to_uint(key, v);
        else throw ConfigError("unknown key '" + key + "'");
    }

    std::map<std::string, Entry> values_;
};

/// Every key with its effective value; reading it back reproduces `c`.
inline void write_resolved(std::ostream& os, const ExperimentConfig& c) {
    using namespace config_detail;
    const auto& r = c.run;
    os << "task = " << c.task << '\n';
    if (!c.maze_layout.empty()) os << "maze_layout = " << c.maze_layout << '\n';
    os << "algorithm = " << name_of(algorithms(), c.variant.algorithm) << '\n'
       << "descriptor = " << name_of(descriptor_sources(), c.variant.descriptor_source) << '\n'
       << "latent_dim = " << c.variant.latent_dim << '\n'
       << "threshold = " << name_of(thresholds(), c.variant.threshold) << '\n'
       << "selector = " << name_of(selectors(), c.variant.selector) << '\n'
       << "reduction = " << name_of(reductions(), c.variant.reduction) << '\n'
       << "iterations = " << r.iterations << '\n'
       << "batch_size = " << r.batch_size << '\n'
       << "seed = " << r.seed << '\n'
       << "replications = " << c.replications << '\n'
       << "variant_name = " << c.resolved_variant_name() << '\n'
       << "k = " << r.container.k << '\n'
       << "epsilon = " << io::format_real(r.container.epsilon) << '\n'
       << "n_target = " << r.container.n_target << '\n'
       << "k_csc = " << io::format_real(r.container.k_csc) << '\n'
       << "k_vat = " << io::format_real(r.container.k_vat) << '\n'
       << "update_period = " << r.container.update_period << '\n'
       << "epochs = " << r.train.epochs << '\n'
       << "minibatch = " << r.train.minibatch << '\n'
       << "learning_rate = " << io::format_real(r.train.learning_rate) << '\n'
       << "clip_norm = " << io::format_real(r.train.clip_norm) << '\n'
       << "max_train_samples = " << r.train.max_samples << '\n'
       << "eta_m = " << io::format_real(r.mutation.eta_m) << '\n'
       << "mutation_rate = " << io::format_real(r.mutation.per_gene_rate) << '\n'
       << "metrics_every = " << r.metrics_every << '\n'
       << "initial_threshold_fraction = " << io::format_real(r.initial_threshold_fraction) << '\n'
       << "additions_per_generation = " << r.additions_per_generation << '\n';
}

/// Files written for one replication, relative to its directory.
struct RunFiles {
    static constexpr const char* kMetrics = "metrics.csv";
    static constexpr const char* kDump = "container.csv";
    static constexpr const char* kEncoder = "encoder.bin";
    static constexpr const char* kThresholds = "threshold.csv";
    static constexpr const char* kContainerUpdates = "container_updates.csv";
    static constexpr const char* kEncoderUpdates = "encoder_updates.csv";
    static constexpr const char* kResolved = "config.resolved";
};

struct ReplicationSummary {
    std::size_t replication = 0;
    std::uint64_t seed = 0;
    std::filesystem::path directory;
    Real coverage_pct = 0.0;
    std::size_t container_size = 0;
};

namespace experiment_detail {

inline std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    return out;
}

template <Task T>
ReplicationSummary run_replication(const ExperimentConfig& c, const T& task, std::size_t index,
                                   const std::filesystem::path& dir) {
    RunConfig rc = c.run;
    rc.seed = c.run.seed + index;
    std::filesystem::create_directories(dir);

    std::optional<std::string> checkpoint;
    const RunResult res = run_variant(rc, c.variant, task, [&](const auto& model) {
        std::ostringstream os(std::ios::binary);
        model.save(os);
        checkpoint = os.str();
    });

    {
        auto out = open_out(dir / RunFiles::kMetrics);
        io::write_metrics(out, res.metrics);
    }
    {
        auto out = open_out(dir / RunFiles::kDump);
        const std::size_t ddim = c.variant.uses_encoder() ? c.variant.latent_dim : 2;
        io::write_dump(out, res.container.members(), index, ddim, task.genotype_bounds()->size());
    }
    {
        auto out = open_out(dir / RunFiles::kThresholds);
        io::write_thresholds(out, res.thresholds);
    }
    {
        auto out = open_out(dir / RunFiles::kContainerUpdates);
        io::write_container_updates(out, res.container_updates);
    }
    {
        auto out = open_out(dir / RunFiles::kEncoderUpdates);
        io::write_encoder_updates(out, res.encoder_updates);
    }
    if (checkpoint) {
        auto out = open_out(dir / RunFiles::kEncoder);
        out << *checkpoint;
    }

    ReplicationSummary s;
    s.replication = index;
    s.seed = rc.seed;
    s.directory = dir;
    s.container_size = res.container.size();
    s.coverage_pct = coverage(res.container.members(), task.bd_bounds());
    return s;
}

}  // namespace experiment_detail

/// Runs every replication (seeds seed, seed+1, ...) into
/// <root>/<variant>/<replication>/ and calls `report` after each.
inline std::vector<ReplicationSummary> run_experiment(
    const ExperimentConfig& c, const std::function<void(const ReplicationSummary&)>& report = {}) {
    c.validate();
    const auto base = c.output_root() / c.resolved_variant_name();
    std::filesystem::create_directories(base);
    {
        auto out = experiment_detail::open_out(base / RunFiles::kResolved);
        write_resolved(out, c);
    }

    std::vector<ReplicationSummary> out;
    auto run_all = [&](const auto& task) {
        for (std::size_t i = 0; i < c.replications; ++i) {
            out.push_back(experiment_detail::run_replication(c, task, i, base / std::to_string(i)));
            if (report) report(out.back());
        }
    };
    if (c.task == "maze") {
        run_all(maze::MazeTask(c.maze_layout.empty() ? maze::MazeWorld::default_world()
                                                     : maze::MazeWorld::load(c.maze_layout)));
    } else {
        run_all(airhockey::AirHockeyTask());
    }
    return out;
}

inline BdBounds task_bd_bounds(const std::string& task) {
    if (task == "maze") return maze::MazeTask().bd_bounds();
    if (task == "airhockey") return airhockey::AirHockeyTask().bd_bounds();
    throw ConfigError("task: unknown task '" + task + "'");
}

}  // namespace aurora
