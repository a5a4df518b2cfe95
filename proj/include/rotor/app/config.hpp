#pragma once

// Experiment configuration: a YAML document with fixed sections. See
// README.md for the key reference. parse_config reports every problem it
// finds; render_config writes a document that parses back to the same spec.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotor/classical.hpp"
#include "rotor/engine.hpp"

namespace rotor::app {

enum class Kind { classical, classical_backaction, quantum_master, quantum_mcwf, analytic };

std::string to_string(Kind k);
std::optional<Kind> kind_from_string(const std::string& s);
bool is_quantum(Kind k);
bool is_classical(Kind k);

struct InitConfig {
    bool deterministic = false; ///< classical only: phi = mu, L_z = 0
    double k = 10.0;
    double mu = 1.5707963267948966;
    classical::IntensityInit intensity = classical::IntensityInit::stationary;
    friend bool operator==(const InitConfig&, const InitConfig&) = default;
};

struct IntegratorConfig {
    classical::Scheme scheme = classical::Scheme::euler; ///< classical kinds
    std::optional<double> dt;  ///< classical step
    std::optional<double> tol; ///< quantum adaptive tolerance
    bool calibrate = true;     ///< halve dt until the intensity mean is unbiased
    friend bool operator==(const IntegratorConfig&, const IntegratorConfig&) = default;
};

struct ScheduleConfig {
    double t_max = 0.0;
    std::size_t outputs = 0; ///< output intervals; output i is at t_max * i / outputs
    friend bool operator==(const ScheduleConfig&, const ScheduleConfig&) = default;
};

struct EnsembleSpec {
    std::size_t trajectories = 0;
    std::uint64_t base_seed = 1;
    friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
};

struct SpaceConfig {
    std::optional<int> n_max;
    std::optional<int> m_min;
    std::optional<int> m_max;
    double spread_sigmas = 6.0;
    std::size_t max_rows = 400000;
    double memory_gb = 4.0;
    friend bool operator==(const SpaceConfig&, const SpaceConfig&) = default;
};

/// Classical ensembles run next to a quantum experiment with the same engine,
/// initial angle/momentum spread and output grid (mode starts empty).
struct ClassicalReference {
    std::size_t trajectories = 0; ///< 0: none
    std::uint64_t base_seed = 1;
    classical::Scheme scheme = classical::Scheme::euler;
    std::optional<double> dt;
    bool backaction_free = true;
    bool backaction = true;
    friend bool operator==(const ClassicalReference&, const ClassicalReference&) = default;
};

struct OutputConfig {
    std::string directory; ///< experiment directory name under the output root; default: name
    /// Classical: keep angles on every n-th output for the correlation grid.
    /// Quantum master: checkpoint every n-th output and run the regression grid.
    /// 0 disables.
    std::size_t correlation_every = 0;
    std::vector<double> pv_times;
    std::size_t pv_bins = 100;
    int angle_points = 0; ///< quantum p(phi) grid, 0 for none
    std::size_t rate_window = 11;
    bool checkpoint_files = false; ///< quantum master: write rho at checkpoints
    friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct AnalyticConfig {
    double x_min = 1e-3; ///< <L_z>/(I kappa)
    double x_max = 0.2;
    std::size_t points = 200;
    friend bool operator==(const AnalyticConfig&, const AnalyticConfig&) = default;
};

struct ExperimentSpec {
    std::string name;
    std::string description;
    Kind kind = Kind::classical;
    EngineParams engine;
    InitConfig init;
    IntegratorConfig integrator;
    ScheduleConfig schedule;
    EnsembleSpec ensemble;
    SpaceConfig space;
    ClassicalReference reference;
    OutputConfig outputs;
    AnalyticConfig analytic;
    friend bool operator==(const ExperimentSpec&, const ExperimentSpec&) = default;

    std::string output_directory() const { return outputs.directory.empty() ? name : outputs.directory; }
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

/// Throws ConfigError listing every problem found.
ExperimentSpec parse_config(const std::string& text);
ExperimentSpec load_config(const std::string& path);
std::string render_config(const ExperimentSpec& spec);

/// Re-runs the semantic checks (after programmatic edits such as overrides).
std::vector<std::string> validate(const ExperimentSpec& spec);

} // namespace rotor::app
