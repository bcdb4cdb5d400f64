#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "aurora/engine.hpp"
#include "aurora/experiment.hpp"
#include "aurora/io.hpp"
#include "aurora/tasks/airhockey.hpp"

namespace {

namespace fs = std::filesystem;
using namespace aurora;

constexpr std::size_t kReplications = 5;
constexpr std::size_t kTarget = 1000;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string join(const std::vector<double>& v, int precision = 4) {
    std::string s;
    for (double x : v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        s += (s.empty() ? "" : " ") + std::string(buf);
    }
    return s;
}

/// Experiment groups run through the same path as the CLI, each into
/// <work>/<name>/<replication>/. Runs happen on first use.
class Runs {
public:
    explicit Runs(fs::path work) : work_(std::move(work)) {}

    const std::vector<fs::path>& get(const std::string& name) {
        if (auto it = done_.find(name); it != done_.end()) return it->second;
        const auto& settings = recipes().at(name);
        ConfigBuilder b;
        for (const auto& s : settings) b.set_assignment(s);
        b.set("variant_name", name);
        b.set("output_dir", work_.string());
        const ExperimentConfig cfg = b.build();
        fs::remove_all(work_ / name);
        const auto t0 = std::chrono::steady_clock::now();
        std::fprintf(stderr, "running %s (%zu replications)\n", name.c_str(), cfg.replications);
        std::vector<fs::path> dirs;
        run_experiment(cfg, [&](const ReplicationSummary& s) {
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::fprintf(stderr, "  %s/%zu: size %zu coverage %.3f%% (%.0f s)\n", name.c_str(), s.replication,
                         s.container_size, s.coverage_pct, secs);
            dirs.push_back(s.directory);
        });
        return done_[name] = dirs;
    }

private:
    static const std::map<std::string, std::vector<std::string>>& recipes() {
        static const std::map<std::string, std::vector<std::string>> r{
            {"maze-aurora", {"preset=maze-small"}},
            {"maze-aurora-repeat", {"preset=maze-small", "replications=1"}},
            {"maze-hc", {"preset=maze-small", "algorithm=hc"}},
            {"maze-random", {"preset=maze-small", "algorithm=random"}},
            {"air-aurora", {"preset=airhockey-small"}},
            {"air-aurora-repeat", {"preset=airhockey-small", "replications=1"}},
            {"air-vat8", {"preset=airhockey-small", "threshold=vat", "latent_dim=8"}},
            {"air-csc8", {"preset=airhockey-small", "latent_dim=8"}},
        };
        return r;
    }

    fs::path work_;
    std::map<std::string, std::vector<fs::path>> done_;
};

MetricsRecord final_row(const fs::path& dir) {
    std::ifstream in(dir / RunFiles::kMetrics);
    const auto recs = io::read_metrics(in);
    if (recs.empty()) throw std::runtime_error("empty metrics in " + dir.string());
    return recs.back();
}

// --- 1 --------------------------------------------------------------------

Verdict csc_size_control(Runs& runs) {
    Verdict v{true, ""};
    for (const char* group : {"maze-aurora", "air-aurora"}) {
        std::vector<double> sizes;
        std::size_t in_band = 0;
        for (const auto& d : runs.get(group)) {
            const double s = static_cast<double>(final_row(d).container_size);
            sizes.push_back(s);
            in_band += s >= 0.85 * kTarget && s <= 1.15 * kTarget;
        }
        v.pass = v.pass && in_band >= 4;
        v.detail += std::string(v.detail.empty() ? "" : "; ") + group + " " + std::to_string(in_band) + "/5 in [850, 1150] (" +
                    join(sizes) + ")";
    }
    return v;
}

// --- 2 --------------------------------------------------------------------

double csc_rule(double d, std::size_t size, std::size_t target, double k) {
    return std::max(1e-9, d * (1.0 + k * (static_cast<double>(size) - static_cast<double>(target))));
}

Verdict csc_arithmetic_and_replay(Runs& runs) {
    Verdict v{true, ""};
    const double a = csc_update_threshold(1.0, 10000, 10000, 5e-6);
    const double b = csc_update_threshold(1.0, 12000, 10000, 5e-6);
    const double c = csc_update_threshold(0.5, 8000, 10000, 5e-6);
    const bool examples = std::abs(a - 1.0) <= 1e-12 && std::abs(b - 1.01) <= 1e-12 && std::abs(c - 0.495) <= 1e-12;
    v.pass = examples;
    std::size_t checked = 0, bad = 0;
    double worst_ulps = 0.0;
    for (const char* group : {"maze-aurora", "air-aurora"}) {
        for (const auto& d : runs.get(group)) {
            // Gain and target as recorded for the run.
            ConfigBuilder recorded;
            recorded.read_file(d.parent_path() / RunFiles::kResolved);
            const auto& cp = recorded.build().run.container;
            std::ifstream tin(d / RunFiles::kThresholds);
            const auto events = io::read_thresholds(tin);
            std::optional<double> prev;
            std::map<std::uint64_t, double> at_iteration;
            for (const auto& e : events) {
                if (e.kind == ThresholdEventKind::Init) {
                    if (prev || e.before) ++bad;
                } else if (e.kind == ThresholdEventKind::Csc) {
                    ++checked;
                    if (!e.before || !prev || *e.before != *prev) ++bad;
                    if (e.before) {
                        // Contracted multiply-adds may round once instead of twice.
                        const double want = csc_rule(*e.before, e.container_size, cp.n_target, cp.k_csc);
                        const double ulps = std::abs(e.after - want) / (std::numeric_limits<double>::epsilon() * want);
                        worst_ulps = std::max(worst_ulps, ulps);
                        if (ulps > 4.0) ++bad;
                    }
                } else {
                    ++bad;
                }
                prev = e.after;
                at_iteration[e.iteration] = e.after;
            }
            // Every logged d_min is the last threshold of its iteration.
            std::ifstream min(d / RunFiles::kMetrics);
            for (const auto& r : io::read_metrics(min)) {
                auto it = at_iteration.upper_bound(r.iteration);
                if (it == at_iteration.begin()) {
                    if (r.d_min) ++bad;
                } else if (!r.d_min || *r.d_min != std::prev(it)->second) {
                    ++bad;
                }
            }
        }
    }
    v.pass = v.pass && bad == 0 && checked > 0;
    v.detail = std::string("examples ") + (examples ? "exact" : "WRONG") + "; replayed " + std::to_string(checked) +
               " CSC steps from threshold traces, " + std::to_string(bad) + " mismatches, worst " +
               join({worst_ulps}, 2) + " ulp";
    return v;
}

// --- 3 --------------------------------------------------------------------

Verdict vat_vs_csc(Runs& runs) {
    auto deviations = [&](const char* group) {
        std::vector<double> dev;
        for (const auto& d : runs.get(group)) {
            dev.push_back(std::abs(static_cast<double>(final_row(d).container_size) - kTarget) / kTarget);
        }
        return dev;
    };
    const auto vat = deviations("air-vat8");
    const auto csc = deviations("air-csc8");
    const double mv = median(vat), mc = median(csc);
    return {mv > mc, "median |size - N|/N at n = 8: VAT " + join({mv}) + " (" + join(vat) + "), CSC " + join({mc}) +
                         " (" + join(csc) + ")"};
}

// --- 4 --------------------------------------------------------------------

Verdict coverage_parity(Runs& runs) {
    auto cov = [&](const char* group) {
        std::vector<double> c;
        for (const auto& d : runs.get(group)) c.push_back(final_row(d).coverage_pct);
        return c;
    };
    const auto au = cov("maze-aurora"), hc = cov("maze-hc"), rs = cov("maze-random");
    const double ma = median(au), mh = median(hc), mr = median(rs);
    const bool pass = ma >= 0.6 * mh && mr < ma;
    return {pass, "median coverage % AURORA " + join({ma}) + ", HC " + join({mh}) + " (ratio " + join({ma / mh}) +
                      "), random " + join({mr})};
}

// --- 5 --------------------------------------------------------------------

Verdict deducibility() {
    const airhockey::AirHockeyTask task;
    Rng rng = Rng(2024).derive("deducibility");
    std::size_t checked = 0, bad = 0, moved = 0;
    for (; checked < 10000; ++checked) {
        const auto e = task.evaluate(random_genotype(task.genotype_bounds(), rng));
        const auto& sd = e.sensory.values;
        if (sd.size() != airhockey::kSensoryDim || sd[sd.size() - 2] != e.hand_coded_bd.values.at(0) ||
            sd[sd.size() - 1] != e.hand_coded_bd.values.at(1)) {
            ++bad;
        }
        moved += e.hand_coded_bd.values[0] != 0.0 || e.hand_coded_bd.values[1] != 0.0;
    }
    return {bad == 0 && moved > 0, std::to_string(checked) + " evaluations, " + std::to_string(bad) +
                                       " mismatches, " + std::to_string(moved) + " with a displaced puck"};
}

// --- 6 --------------------------------------------------------------------

std::vector<const SensoryData*> ptrs(const std::vector<SensoryData>& v) {
    std::vector<const SensoryData*> out;
    for (const auto& s : v) out.push_back(&s);
    return out;
}

Verdict encoder_correctness() {
    using AE = Autoencoder<double>;
    Rng rng(606);
    AE ae = AE::random(12, {9, 6}, 3, rng);
    for (auto& l : ae.network().layers) {
        for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = rng.uniform(-0.5, 0.5);
    }
    std::vector<SensoryData> data;
    for (int i = 0; i < 8; ++i) {
        SensoryData s;
        for (int j = 0; j < 12; ++j) s.values.push_back(rng.uniform(-1.0, 1.0));
        data.push_back(std::move(s));
    }
    const Eigen::MatrixXd x = ae.to_matrix(ptrs(data));
    const auto grad = ae.gradient(x);
    const double h = 1e-5;
    double worst = 0.0;
    for (std::size_t li = 0; li < ae.network().layers.size(); ++li) {
        auto& L = ae.network().layers[li];
        auto check = [&](double& p, double g) {
            const double saved = p;
            p = saved + h;
            const double up = ae.loss(x);
            p = saved - h;
            const double down = ae.loss(x);
            p = saved;
            const double numeric = (up - down) / (2.0 * h);
            worst = std::max(worst, std::abs(numeric - g) / std::max({std::abs(numeric), std::abs(g), 1e-8}));
        };
        for (Eigen::Index i = 0; i < L.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < L.weights.cols(); ++j) check(L.weights(i, j), grad.layers[li].weights(i, j));
        }
        for (Eigen::Index i = 0; i < L.bias.size(); ++i) check(L.bias(i), grad.layers[li].bias(i));
    }

    // Latent-2 autoencoder on a random plane in 20-D.
    std::vector<double> u(20), w(20);
    for (std::size_t i = 0; i < 20; ++i) {
        u[i] = rng.uniform(-1.0, 1.0);
        w[i] = rng.uniform(-1.0, 1.0);
    }
    std::vector<SensoryData> plane;
    for (int k = 0; k < 200; ++k) {
        const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
        SensoryData s;
        for (std::size_t i = 0; i < 20; ++i) s.values.push_back(a * u[i] + b * w[i]);
        plane.push_back(std::move(s));
    }
    AE ae2 = AE::random(20, {10}, 2, rng);
    auto mse = [&](const AE& m) {
        double total = 0.0;
        for (const auto& s : plane) {
            const auto z = m.encode(s);
            (void)z;
            total += m.reconstruction_error(s);
        }
        return total / static_cast<double>(plane.size());
    };
    const double before = mse(ae2);
    auto adam = make_adam(ae2, 1e-3);
    TrainConfig tc;
    tc.epochs = 50;
    tc.minibatch = 16;
    train(ae2, ptrs(plane), tc, adam, rng);
    const double after = mse(ae2);
    const bool pass = worst < 1e-4 && after < 0.25 * before;
    char buf[160];
    std::snprintf(buf, sizeof buf, "worst gradient relative error %.2e; planar MSE %.4g -> %.4g (%.1f%%)", worst, before,
                  after, 100.0 * after / before);
    return {pass, buf};
}

// --- 7 --------------------------------------------------------------------

Verdict novelty_oracle() {
    Rng rng(707);
    double worst = 0.0;
    std::size_t queries = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t dim = 2 + rng.index(9);
        const std::size_t size = 1 + rng.index(200);
        const std::size_t k = std::array<std::size_t, 3>{1, 3, 15}[rng.index(3)];
        ContainerParams p;
        p.k = k;
        Container c(p);
        std::vector<std::vector<double>> pts;
        for (std::size_t i = 0; i < size; ++i) {
            Individual ind;
            for (std::size_t d = 0; d < dim; ++d) ind.descriptor.values.push_back(rng.uniform(-5.0, 5.0));
            ind.genotype = Genotype({0.0}, uniform_bounds(1, {0.0, 1.0}));
            ind.id = i;
            pts.push_back(ind.descriptor.values);
            c.try_add(std::move(ind));
        }
        auto oracle = [&](const std::vector<double>& q, std::optional<std::size_t> self) {
            std::vector<double> dist;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (self && *self == i) continue;
                double s = 0.0;
                for (std::size_t d = 0; d < dim; ++d) s += (pts[i][d] - q[d]) * (pts[i][d] - q[d]);
                dist.push_back(std::sqrt(s));
            }
            if (dist.empty()) return std::numeric_limits<double>::infinity();
            std::sort(dist.begin(), dist.end());
            const std::size_t m = std::min(k, dist.size());
            return std::accumulate(dist.begin(), dist.begin() + static_cast<long>(m), 0.0) / static_cast<double>(m);
        };
        auto compare = [&](double got, double want) {
            ++queries;
            if (std::isinf(want) || std::isinf(got)) {
                if (got != want) worst = std::numeric_limits<double>::infinity();
                return;
            }
            worst = std::max(worst, std::abs(got - want));
        };
        for (int q = 0; q < 5; ++q) {
            std::vector<double> probe;
            for (std::size_t d = 0; d < dim; ++d) probe.push_back(rng.uniform(-6.0, 6.0));
            compare(novelty_score(Descriptor{probe}, c, k), oracle(probe, std::nullopt));
        }
        for (std::size_t i = 0; i < size; i += 1 + size / 10) compare(c.member_novelty(i), oracle(pts[i], i));
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "100 containers, %zu queries, worst |error| %.2e", queries, worst);
    return {worst <= 1e-9, buf};
}

// --- 8 --------------------------------------------------------------------

Verdict schedule_exactness(Runs& runs) {
    std::size_t files = 0, bad = 0;
    std::string sample;
    for (const char* group : {"maze-aurora", "air-aurora"}) {
        for (const auto& d : runs.get(group)) {
            std::ifstream in(d / RunFiles::kEncoderUpdates);
            const auto its = io::read_encoder_update_iterations(in);
            const std::uint64_t iters = final_row(d).iteration;
            std::vector<std::uint64_t> want;
            for (std::uint64_t k = 1; 5 * k * (k + 1) <= iters; ++k) want.push_back(5 * k * (k + 1));
            ++files;
            if (its != want) ++bad;
            if (sample.empty()) {
                for (std::size_t i = 0; i < std::min<std::size_t>(6, its.size()); ++i) sample += std::to_string(its[i]) + " ";
                sample += "... " + std::to_string(its.empty() ? 0 : its.back());
            }
        }
    }
    return {bad == 0 && files > 0,
            std::to_string(files) + " logged runs, " + std::to_string(bad) + " deviating; e.g. " + sample};
}

// --- 9 --------------------------------------------------------------------

Verdict growth_laws() {
    ConfigBuilder b;
    b.set("preset", "airhockey-small");
    ExperimentConfig cfg = b.build();
    RunConfig rc = cfg.run;
    rc.iterations = 100;
    rc.seed = 9;
    const airhockey::AirHockeyTask task;
    const auto ns = run_novelty_search(rc, task);
    auto model = make_autoencoder(task, 5, rc);
    const auto tx = run_taxons(rc, 5, task, model);
    bool rows_ok = true;
    for (const auto* r : {&ns, &tx}) {
        for (const auto& m : r->metrics) rows_ok = rows_ok && m.container_size == 5 * m.iteration;
    }
    const bool pass = ns.container.size() == 5 * 100 && tx.container.size() == 5 * 100 && rows_ok &&
                      tx.encoder_updates.size() == 4;
    return {pass, "after 100 generations: NS archive " + std::to_string(ns.container.size()) + ", TAXONS archive " +
                      std::to_string(tx.container.size()) + " (expected 500); per-row growth " +
                      (rows_ok ? "exact" : "WRONG")};
}

// --- 10 -------------------------------------------------------------------

Verdict determinism(Runs& runs) {
    std::size_t compared = 0, differing = 0;
    for (auto [a, b] : {std::pair{"air-aurora", "air-aurora-repeat"}, std::pair{"maze-aurora", "maze-aurora-repeat"}}) {
        const fs::path da = runs.get(a).at(0), db = runs.get(b).at(0);
        for (const char* f : {RunFiles::kMetrics, RunFiles::kDump, RunFiles::kThresholds, RunFiles::kEncoder}) {
            ++compared;
            if (slurp(da / f) != slurp(db / f)) ++differing;
        }
    }
    return {differing == 0, std::to_string(compared) + " file pairs (metrics, dump, thresholds, checkpoint) over both presets, " +
                                std::to_string(differing) + " differing"};
}

// --- 11 -------------------------------------------------------------------

Verdict mutation() {
    const double want = 1.0 - std::pow(0.5, 1.0 / 11.0);
    const bool examples = std::abs(polynomial_delta(0.5, 10.0)) <= 1e-6 &&
                          std::abs(polynomial_delta(0.75, 10.0) - want) <= 1e-6 &&
                          std::abs(polynomial_delta(0.75, 10.0) - 0.06107) <= 1e-5 &&
                          std::abs(polynomial_delta(0.25, 10.0) + want) <= 1e-6 &&
                          std::abs(polynomial_delta(1.0, 10.0) - 1.0) <= 1e-6;
    // u -> 1 drives a gene to its upper bound, where it is clamped.
    const auto bounds = std::make_shared<const GeneBounds>(GeneBounds{{-1.0, 1.0}, {0.0, 10.0}, {-3.14, 3.14}, {5.0, 5.5}});
    Rng rng(1111);
    MutationParams mp;
    mp.per_gene_rate = 0.5;
    std::size_t draws = 0, out = 0;
    while (draws < 1000000) {
        Genotype g = random_genotype(bounds, rng);
        // Half the parents sit on a bound to stress clamping.
        if (rng.uniform() < 0.5) {
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.uniform() < 0.5 ? (*bounds)[i].lo : (*bounds)[i].hi;
        }
        const Genotype child = polynomial_mutation(g, mp, rng);
        for (std::size_t i = 0; i < g.size(); ++i) draws += child[i] != g[i];
        out += !child.within_bounds();
    }
    return {examples && out == 0, std::string("delta examples ") + (examples ? "match" : "WRONG") + "; " +
                                      std::to_string(draws) + " mutated genes, " + std::to_string(out) +
                                      " children out of bounds"};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    std::string work = "acceptance_runs";
    std::vector<int> only;
    app.add_option("--work-dir", work, "Directory for experiment outputs");
    app.add_option("--only", only, "Run only these criteria");
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::warn);

    Runs runs{fs::path(work)};
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"CSC size control", [&] { return csc_size_control(runs); }},
        {"CSC arithmetic and replay", [&] { return csc_arithmetic_and_replay(runs); }},
        {"VAT less stable than CSC at n = 8", [&] { return vat_vs_csc(runs); }},
        {"coverage parity with hand-coded QD", [&] { return coverage_parity(runs); }},
        {"descriptor deducible from sensory data", deducibility},
        {"encoder gradients and training", encoder_correctness},
        {"novelty matches brute force", novelty_oracle},
        {"encoder schedule exactness", [&] { return schedule_exactness(runs); }},
        {"archive growth laws", growth_laws},
        {"determinism", [&] { return determinism(runs); }},
        {"polynomial mutation", mutation},
    };
    // Cheap checks first, then the ones that need experiment runs.
    const std::vector<int> order{5, 6, 7, 9, 11, 1, 2, 8, 10, 3, 4};
    std::map<int, Verdict> results;
    for (int id : order) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Verdict v;
        try {
            v = criteria[static_cast<std::size_t>(id - 1)].second();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[static_cast<std::size_t>(id - 1)].first.c_str(),
                    v.detail.c_str());
        std::fflush(stdout);
        results[id] = v;
    }
    std::size_t passed = 0;
    for (const auto& [id, v] : results) passed += v.pass;
    std::printf("%zu/%zu criteria passed\n", passed, results.size());
    return passed == results.size() ? 0 : 1;
}
