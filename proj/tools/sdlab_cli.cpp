// sdlab: run, validate and list experiment configs.
//
// Exit status: 0 consistent (or nothing to check), 3 violated, 4 inconclusive,
// 2 invalid config or failed hypothesis, 1 I/O and other failures.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <yaml-cpp/yaml.h>

#include "sdlab/runner/config.hpp"
#include "sdlab/runner/report.hpp"
#include "sdlab/runner/run.hpp"

#ifndef SDLAB_GIT_DESCRIBE
#define SDLAB_GIT_DESCRIBE "unknown"
#endif
#ifndef SDLAB_COOKBOOK_DIR
#define SDLAB_COOKBOOK_DIR "cookbook"
#endif

namespace fs = std::filesystem;
using namespace sdlab;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

int print_problems(const std::string& path, const std::vector<std::string>& problems) {
    std::cerr << path << ": invalid config\n";
    for (const auto& p : problems) std::cerr << "  " << p << "\n";
    return 2;
}

fs::path output_dir(const std::string& flag, const runner::ExperimentConfig& c, const std::string& config_path) {
    if (!flag.empty()) return flag;
    if (!c.output.empty()) return c.output;
    return fs::path(env_or("SDLAB_OUT_DIR", "sdlab-out")) / fs::path(config_path).stem();
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, std::optional<int> workers,
            std::optional<std::size_t> max_m, const std::string& out) {
    runner::ExperimentConfig c;
    try {
        c = runner::load_config(path);
    } catch (const ConfigError& e) {
        return print_problems(path, e.problems());
    }
    runner::RunOptions opt;
    opt.seed_override = seed;
    opt.workers = workers;
    opt.max_m = max_m;
    opt.build = SDLAB_GIT_DESCRIBE;
    runner::Report rep;
    try {
        rep = runner::run_experiment(c, opt);
    } catch (const HypothesisError& e) {
        std::cerr << path << ": hypothesis violated: " << e.what() << "\n";
        return 2;
    } catch (const DimensionError& e) {
        std::cerr << path << ": " << e.what() << "\n";
        return 2;
    }
    const fs::path dir = output_dir(out, c, path);
    runner::write_artifacts(rep, dir);
    std::cout << rep.verdict() << "  " << rep.experiment << "  " << (dir / "report.json").string() << "\n";
    return runner::exit_code(rep.verdict());
}

int cmd_validate(const std::string& path) {
    try {
        const auto c = runner::load_config(path);
        std::cout << path << ": valid " << runner::kind_name(c.kind) << " config\n";
        return 0;
    } catch (const ConfigError& e) {
        return print_problems(path, e.problems());
    }
}

int cmd_cookbook_list() {
    const fs::path dir = env_or("SDLAB_COOKBOOK_DIR", SDLAB_COOKBOOK_DIR);
    if (!fs::is_directory(dir)) {
        std::cerr << "cookbook directory not found: " << dir.string() << "\n";
        return 1;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".yaml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::string kind = "?", desc;
        try {
            const auto y = YAML::LoadFile(f.string());
            if (y["experiment"]) kind = y["experiment"].as<std::string>();
            if (y["description"]) desc = y["description"].as<std::string>();
        } catch (const YAML::Exception&) {
            kind = "unreadable";
        }
        std::cout << f.string() << "  [" << kind << "]";
        if (!desc.empty()) std::cout << "  " << desc;
        std::cout << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic dominance lab for random convex sets"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::size_t> max_m;
    auto* run = app.add_subcommand("run", "Run an experiment config and write report.json, curves.csv, summary.txt");
    run->add_option("config", config, "YAML experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--seed-override", seed, "Replace the config seed");
    run->add_option("--workers", workers, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    run->add_option("--max-m", max_m, "Cap the replica count m")->check(CLI::PositiveNumber);
    run->add_option("--out", out, "Output directory (default: config output, then $SDLAB_OUT_DIR/<config>)");

    std::string vconfig;
    auto* validate = app.add_subcommand("validate", "Parse and validate a config without running it");
    validate->add_option("config", vconfig, "YAML experiment config")->required();

    auto* cookbook = app.add_subcommand("cookbook", "Example configs");
    cookbook->require_subcommand(1);
    auto* list = cookbook->add_subcommand("list", "List the cookbook configs");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(config, seed, workers, max_m, out);
        if (*validate) return cmd_validate(vconfig);
        if (*list) return cmd_cookbook_list();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
