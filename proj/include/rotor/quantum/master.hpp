#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rotor/quantum/dopri.hpp"
#include "rotor/quantum/qobservables.hpp"

namespace rotor::quantum {

class TraceDrift : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    double t = 0.0;
    Matrix rho; ///< block storage
};

struct MasterOptions {
    double tol = 1e-8;
    double trace_drift_limit = 1e-6;
    int angle_points = 0;              ///< p(phi) grid size per record, 0 for none
    std::vector<double> checkpoint_times; ///< must be among the output times
    std::function<void(const QRecord&)> on_record;
};

struct MasterResult {
    std::vector<QRecord> records;
    std::vector<AngleDistribution> angles; ///< empty unless angle_points > 0
    std::vector<Checkpoint> checkpoints;
    std::size_t steps = 0;
    std::size_t attempts = 0;
};

/// Integrates the master equation from rho0 (block storage, at times[0])
/// through the increasing output times. rho is re-Hermitized after every
/// accepted step; a trace drift beyond the limit throws TraceDrift.
MasterResult evolve_master(const Liouvillian& lv, const Matrix& rho0,
                           const std::vector<double>& times, const MasterOptions& opt = {});

/// Initial state: von Mises rotor wavefunction (k, mu) times Fock vacuum.
Matrix von_mises_state(const QuantumSpace& space, double k, double mu);

/// Binary checkpoint: magic "RTRCHK01", int32 m_min, m_max, n_max, float64 t,
/// then for n = 0..n_max the M x M block of Fock level n, column-major,
/// complex128 (re, im), all little-endian. Row/column i is momentum m_min + i.
void write_checkpoint(const std::string& path, const QuantumSpace& space, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path, QuantumSpace& space);

/// Symmetrized two-time angle correlation via quantum regression: propagates
/// X = (E rho + rho E)/2 from t1 = c.t and reads
/// C_- = tr(E^dag X(t2)), C_+ = tr(E X(t2)), E = e^{i phi}. Entries whose
/// denominator (1 - |<E^2>|^2 at t1 or t2) is <= 1e-9 are NaN.
std::vector<double> q_two_time_S(const Liouvillian& lv, const Checkpoint& c,
                                 const std::vector<double>& t2_grid, double tol = 1e-8);

/// Square grid over the checkpoint times: entry (i, j), j >= i, from the
/// regression started at checkpoint i; the lower triangle mirrors it.
std::vector<std::vector<double>> q_correlation_grid(const Liouvillian& lv,
                                                    const std::vector<Checkpoint>& checkpoints,
                                                    double tol = 1e-8);

} // namespace rotor::quantum
