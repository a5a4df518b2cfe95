#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rotor/classical.hpp"

namespace rotor::classical {

struct EnsembleConfig {
    EngineParams params;
    ModulationProfile profile = ModulationProfile::standard();
    InitSpec init;
    IntegratorSpec integ;
    double t_max = 30.0;
    std::uint64_t output_stride = 100;
    std::size_t trajectories = 1000;
    std::uint64_t base_seed = 1;
    /// Retain the angle of every trajectory on every `keep_every`-th output
    /// (0 keeps nothing). Needed for two-time correlations.
    std::size_t keep_every = 0;
    /// Output times at which (phi, n) of every trajectory is retained.
    std::vector<double> snapshot_times;
};

/// Exact sample moments (1/N normalization) at one output time.
struct MomentRecord {
    double t = 0.0;
    double mean_lz = 0.0;
    double var_lz = 0.0;
    double mean_phi = 0.0; ///< unwrapped
    double var_phi = 0.0;
    double mean_cos = 0.0;
    double mean_sin = 0.0;
    double mean_cos2 = 0.0;
    double mean_sin2 = 0.0;
    double mean_n = 0.0;
    double var_n = 0.0;
    double n_sin = 0.0;          ///< <n sin phi>
    double n_sin_lz = 0.0;       ///< <n sin phi L_z>
    double hot_deficit = 0.0;    ///< <f_H^2 (nbar_H - n)>
    double hot_deficit_cos = 0.0;///< <f_H^2 cos phi (nbar_H - n)>
    double cold_deficit = 0.0;   ///< <f_C^2 (nbar_C - n)>
    double cold_deficit_cos = 0.0;
    double sin_nbar = 0.0;       ///< <sin phi nbar(phi)>
    double sin_nbar_lz = 0.0;    ///< <sin phi nbar(phi) L_z>
    double sin2_nbar2_rate = 0.0;///< <sin^2 phi nbar(phi)^2 / kappa(phi)>
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> phi;
    std::vector<double> n;
};

struct EnsembleSummary {
    std::vector<MomentRecord> records;
    std::size_t count = 0; ///< trajectories entering the moments
    std::vector<std::uint64_t> excluded; ///< indices of diverged trajectories

    /// Kept angles, row-major [trajectory][kept time].
    std::vector<double> kept_times;
    std::vector<double> kept_phi;
    std::vector<Snapshot> snapshots;

    double kept_phi_at(std::size_t trajectory, std::size_t kept_time) const {
        return kept_phi[trajectory * kept_times.size() + kept_time];
    }
};

/// Thrown when more than kMaxExcludedFraction of the trajectories diverged.
class EnsembleDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Maximum excluded fraction before an ensemble run fails.
inline constexpr double kMaxExcludedFraction = 1e-3;

/// OpenMP ensemble runner. Trajectory i is seeded with derive_seed(base_seed, i);
/// chunks of trajectories are merged in index order, so the result is
/// bit-identical for any number of threads.
EnsembleSummary run_ensemble(const EnsembleConfig& config);

/// Serial reference: integrates every trajectory with simulate_trajectory
/// and evaluates moments with a plain two-pass formula.
EnsembleSummary run_ensemble_serial(const EnsembleConfig& config);

} // namespace rotor::classical
