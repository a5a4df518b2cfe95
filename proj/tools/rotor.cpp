// rotor: run, validate and list engine experiments.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rotor/app/config.hpp"
#include "rotor/app/run.hpp"

#ifndef ROTOR_CONFIG_DIR
#define ROTOR_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace rotor::app;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v && *v ? v : fallback;
}

int list_experiments(const std::string& dir) {
    if (!fs::is_directory(dir)) {
        std::cerr << "no config directory at " << dir << " (set ROTOR_CONFIG_DIR)\n";
        return exit_config;
    }
    std::vector<fs::path> paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".cfg") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    int status = exit_ok;
    for (const auto& p : paths) {
        try {
            const ExperimentSpec s = load_config(p.string());
            std::printf("%-18s %-22s %s\n", s.name.c_str(), to_string(s.kind).c_str(),
                        s.description.c_str());
        } catch (const ConfigError& e) {
            std::printf("%-18s INVALID (%zu errors)\n", p.stem().string().c_str(), e.errors().size());
            status = exit_config;
        }
    }
    return status;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Autonomous rotor heat engine: classical, quantum and analytic experiments"};
    app.require_subcommand(1);

    std::string out = env_or("ROTOR_OUT", "out");
    std::string config;
    std::uint64_t seed = 0;
    int workers = 0;
    bool quiet = false;

    auto* run = app.add_subcommand("run", "run an experiment configuration");
    run->add_option("config", config, "configuration file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "output root (default: $ROTOR_OUT or ./out)");
    auto* seed_opt = run->add_option("--seed", seed, "override every base seed");
    run->add_option("--workers", workers, "worker threads (default: OpenMP runtime)")
        ->check(CLI::NonNegativeNumber);
    run->add_flag("--quiet", quiet, "no progress output");

    auto* val = app.add_subcommand("validate", "check a configuration and print it normalized");
    val->add_option("config", config, "configuration file")->required();
    val->add_flag("--quiet", quiet, "only the exit status");

    std::string config_dir = env_or("ROTOR_CONFIG_DIR", ROTOR_CONFIG_DIR);
    auto* list = app.add_subcommand("list-experiments", "list the bundled configurations");
    list->add_option("--dir", config_dir, "config directory (default: $ROTOR_CONFIG_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : exit_config;
    }

    if (*list) return list_experiments(config_dir);

    ExperimentSpec spec;
    try {
        spec = load_config(config);
    } catch (const ConfigError& e) {
        std::cerr << config << ": " << e.what() << "\n";
        return exit_config;
    }
    if (*val) {
        if (!quiet) std::cout << render_config(spec);
        return exit_ok;
    }

    RunOptions opt;
    opt.out_root = out;
    if (seed_opt->count()) opt.seed = seed;
    opt.workers = workers;
    opt.quiet = quiet;
    const RunReport rep = run_experiment(spec, opt);
    if (rep.exit_code != exit_ok) std::cerr << spec.name << ": " << rep.status << ": " << rep.message << "\n";
    if (!quiet) std::cout << rep.directory.string() << "/manifest.json\n";
    return rep.exit_code;
}
