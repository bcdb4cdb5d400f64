#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "aurora/experiment.hpp"
#include "aurora/io.hpp"
#include "aurora/metrics.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::vector<std::pair<std::string, std::string>>& flags) {
    aurora::ExperimentConfig cfg;
    try {
        aurora::ConfigBuilder builder;
        if (!config_path.empty()) builder.read_file(config_path);
        for (const auto& o : overrides) builder.set_assignment(o);
        for (const auto& [key, value] : flags) builder.set(key, value);
        cfg = builder.build();
    } catch (const aurora::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        aurora::run_experiment(cfg, [](const aurora::ReplicationSummary& s) {
            std::printf("replication %zu seed %llu: coverage %.4f%% size %zu -> %s\n", s.replication,
                        static_cast<unsigned long long>(s.seed), s.coverage_pct, s.container_size,
                        s.directory.string().c_str());
            std::fflush(stdout);
        });
    } catch (const aurora::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

int cmd_metrics(const std::string& dump_path, const std::string& task) {
    aurora::BdBounds bounds;
    try {
        bounds = aurora::task_bd_bounds(task);
    } catch (const aurora::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    try {
        std::ifstream in(dump_path);
        if (!in) throw std::runtime_error("cannot open dump '" + dump_path + "'");
        const auto dump = aurora::io::read_dump(in);
        const auto pts = dump.scored_points();
        std::cout << "coverage_pct,grid_mean_fitness,container_size\n"
                  << aurora::io::format_real(aurora::coverage(pts, bounds)) << ','
                  << aurora::io::format_optional(aurora::grid_mean_fitness(pts, bounds)) << ',' << pts.size() << '\n';
    } catch (const aurora::io::ParseError& e) {
        std::cerr << dump_path << ": " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality-diversity search with learned behavioural descriptors"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log debug messages");

    std::string config_path;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Run an experiment from a key=value config file");
    run->add_option("--config", config_path, "Config file")->check(CLI::ExistingFile);
    run->add_option("--set", overrides, "Override a config key (key=value); repeatable")->take_all();
    // Every config key is also a flag: --iterations 0 equals --set iterations=0.
    std::map<std::string, std::string> flag_values;
    std::vector<std::pair<std::string, CLI::Option*>> flag_options;
    for (const auto& key : aurora::ConfigBuilder::keys()) {
        flag_options.emplace_back(key, run->add_option("--" + key, flag_values[key], "Config key " + key));
    }

    std::string dump_path;
    std::string task;
    auto* metrics = app.add_subcommand("metrics", "Recompute coverage and grid mean fitness from a container dump");
    metrics->add_option("--dump", dump_path, "Container dump CSV")->required();
    metrics->add_option("--task", task, "Task id (maze or airhockey)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

    if (*run) {
        std::vector<std::pair<std::string, std::string>> flags;
        for (const auto& [key, opt] : flag_options) {
            if (opt->count() > 0) flags.emplace_back(key, flag_values[key]);
        }
        return cmd_run(config_path, overrides, flags);
    }
    return cmd_metrics(dump_path, task);
}
