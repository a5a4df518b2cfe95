#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rotor/app/config.hpp"

namespace rotor::app {

/// Process exit codes of `rotor run`.
enum ExitCode : int {
    exit_ok = 0,
    exit_config = 1,
    exit_truncation = 2,
    exit_divergence = 3,
    exit_quota = 4,
    exit_failure = 5,
};

struct RunOptions {
    std::filesystem::path out_root = "out";
    std::optional<std::uint64_t> seed; ///< overrides every base seed of the spec
    int workers = 0;                   ///< OpenMP threads, 0 keeps the runtime default
    bool quiet = false;
    double memory_quota_gb = 4.0;      ///< classical trajectory storage
};

struct RunReport {
    int exit_code = exit_ok;
    std::string status; ///< ok | truncation | divergence | quota | failure
    std::string message;
    std::filesystem::path directory;
    std::vector<std::string> files; ///< written, relative to directory
};

/// Runs one experiment into out_root/<spec.output_directory()>: observable
/// CSVs, optional correlation/PV/angle/checkpoint files and manifest.json.
/// CSV contents depend only on the spec (and seed override).
RunReport run_experiment(const ExperimentSpec& spec, const RunOptions& options);

/// Version string recorded in every output.
std::string code_version();

} // namespace rotor::app
