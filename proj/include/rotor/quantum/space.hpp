#pragma once

// Truncated rotor (x) mode Hilbert space and its operators.
//
// Basis is momentum-major: row = (m - m_min) * (n_max + 1) + n. The
// master equation never couples different mode coherence orders, so a state
// that starts diagonal in the Fock basis stays block diagonal; the dynamics
// code stores one M x M rotor block per Fock level and only the full-space
// operators below are used for references and checks.

#include <array>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "rotor/engine.hpp"

namespace rotor::quantum {

using cd = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Sparse = Eigen::SparseMatrix<cd>;

struct QuantumSpace {
    int m_min = -1;
    int m_max = 1;
    int n_max = 8;

    std::size_t momenta() const { return static_cast<std::size_t>(m_max - m_min + 1); }
    std::size_t levels() const { return static_cast<std::size_t>(n_max + 1); }
    std::size_t dim() const { return momenta() * levels(); }
    std::size_t index(int m, int n) const {
        return static_cast<std::size_t>(m - m_min) * levels() + static_cast<std::size_t>(n);
    }
    void validate() const;

    friend bool operator==(const QuantumSpace&, const QuantumSpace&) = default;
};

class SpaceTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The initial state does not fit the momentum window.
class WindowTooSmall : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SpaceRequest {
    double k = 10.0;
    double t_max = 1.0;
    std::optional<int> n_max;  ///< default: auto_fock_cutoff(n_hot)
    std::optional<int> m_min;  ///< explicit bounds override the drift/spread estimate
    std::optional<int> m_max;
    double spread_sigmas = 6.0;
    std::size_t max_rows = 400000;
    double memory_budget_bytes = 4e9;
};

/// Smallest n whose thermal population nbar^n / (nbar+1)^(n+1) is below
/// `population` (at least 2).
int auto_fock_cutoff(double n_hot, double population = 5e-7);

/// Upper estimate of the momentum variance growth rate: free-rotation rate,
/// backaction heating bound and thermal torque noise.
double momentum_diffusion_bound(const EngineParams& p);
/// Upper estimate of the mean momentum growth rate, valid before the rotor
/// has completed a cycle.
double momentum_drift_bound(const EngineParams& p);

/// Momentum window from the drift and spread estimates, Fock cutoff, and
/// size guards. Throws SpaceTooLarge with sizing advice.
QuantumSpace build_space(const EngineParams& p, const SpaceRequest& request);

/// Rough working-set estimate of a master-equation run (block storage, all
/// integrator stages).
double master_memory_bytes(const QuantumSpace& space);

/// Momentum coefficients of the periodic von Mises wavefunction,
/// c_m = I_m(k) e^{-i m mu} / sqrt(I_0(2k)), on [m_min, m_max], renormalized.
/// Throws if the dropped mass exceeds 1e-10.
Vector von_mises_coefficients(int m_min, int m_max, double k, double mu);

/// Banded operator on the momentum space: B(i, i + o) = diag[o + 2][i], |o| <= 2.
/// All rotor operators are polynomials of the (row-truncated) shift e^{i phi}.
struct Band {
    static constexpr int kHalf = 2;
    std::size_t size = 0;
    std::array<Vector, 2 * kHalf + 1> diag;

    explicit Band(std::size_t m = 0);

    cd at(std::size_t i, int offset) const;
    Band adjoint() const;
    Band operator*(const Band& other) const; ///< product, must stay within the band
    Band operator+(const Band& other) const;
    Band scaled(cd factor) const;
    Matrix dense() const;
    Sparse sparse() const;

    /// y = B x for a vector.
    void apply(const Vector& x, Vector& y) const;
    /// Y += alpha * B X.
    void left_add(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y, cd alpha) const;
    /// Y += alpha * X B.
    void right_add(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y, cd alpha) const;
};

/// Rotor operators on M momentum states.
struct RotorOps {
    std::size_t m = 0;
    Eigen::VectorXd lz;  ///< momentum quantum numbers
    Band shift;          ///< e^{i phi}: |m> -> |m+1>, top row truncated
    Band cos, sin;
    Band f_hot, f_cold;
    Band f_hot2, f_cold2; ///< products of the truncated weights
    Band cos2;
    Band sin_lz_sym;     ///< {sin phi, L_z}

    RotorOps(const QuantumSpace& space);
};

/// Full-space sparse operators for checks and the reference Liouvillian.
struct OperatorSet {
    QuantumSpace space;
    Sparse shift_up, lz, cos, sin, f_hot, f_cold, a, adag, num, hamiltonian;
    std::vector<Sparse> jumps; ///< nonzero channels: f_T a (rate kappa(nT+1)), f_T a^dag (kappa nT)

    OperatorSet(const QuantumSpace& space, const EngineParams& p);
};

} // namespace rotor::quantum
