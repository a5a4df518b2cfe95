#pragma once

// Monte Carlo wavefunction unraveling of the master equation. A trajectory
// state is a rotor wavefunction together with a definite Fock level: every
// jump operator f_T a or f_T a^dag maps such a product to another one, and
// the no-jump generator K = H - (i/2) sum L^dag L is block diagonal.

#include <cstdint>
#include <vector>

#include "rotor/quantum/liouvillian.hpp"

namespace rotor::quantum {

enum class Channel : int { hot_down = 0, hot_up = 1, cold_down = 2, cold_up = 3 };

struct JumpEvent {
    double t = 0.0;
    Channel channel = Channel::hot_down;
    int level_after = 0;

    friend bool operator==(const JumpEvent&, const JumpEvent&) = default;
};

/// Normalized single-trajectory expectation values at one output time.
struct QSample {
    double lz = 0.0;
    double lz2 = 0.0;
    double n = 0.0;
    double work = 0.0; ///< n <{sin, L_z}> / 2I
};

struct McwfTrajectory {
    std::vector<QSample> samples; ///< one per output time
    std::vector<JumpEvent> jumps;
    int final_level = 0;
    Vector final_state;
};

struct McwfOptions {
    double tol = 1e-10;
    double jump_time_tol = 1e-12; ///< bisection width on the jump time
};

/// Deterministic given the seed. psi0 need not be normalized; the first
/// output time is times[0].
McwfTrajectory mcwf_trajectory(const Liouvillian& lv, const Vector& psi0, int level0,
                               const std::vector<double>& times, std::uint64_t seed,
                               const McwfOptions& opt = {});

struct McwfStat {
    double mean = 0.0;
    double se = 0.0; ///< standard error of the mean
};

struct McwfEnsemble {
    std::vector<double> times;
    std::vector<McwfStat> lz, lz2, n, work;
    std::size_t trajectories = 0;
    std::size_t jumps = 0;
};

/// OpenMP over trajectories; trajectory i uses derive_seed(base_seed, i) and
/// moments are accumulated in index order, so results do not depend on the
/// thread count.
McwfEnsemble mcwf_ensemble(const Liouvillian& lv, const Vector& psi0, int level0,
                           const std::vector<double>& times, std::size_t trajectories,
                           std::uint64_t base_seed, const McwfOptions& opt = {});

} // namespace rotor::quantum
