#pragma once

// Classical Ito dynamics of the rotor engine with the mode phase eliminated:
//
//   dphi = (L_z / I) dt
//   dL_z = n sin(phi) dt  [- sqrt(2 n kappa (nH fH'^2 + nC fC'^2)) dU]
//   dn   = -kappa(phi) (n - nbar(phi)) dt + sqrt(2 n kappa(phi) nbar(phi)) dW
//
// The bracketed term is the backaction noise; dW, dU are independent.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "rotor/engine.hpp"
#include "rotor/rng.hpp"

namespace rotor::classical {

/// Phase-space point. phi is unwrapped (real line); n >= 0.
struct ClassicalState {
    double phi = 0.0;
    double lz = 0.0;
    double n = 0.0;

    friend bool operator==(const ClassicalState&, const ClassicalState&) = default;
};

enum class Scheme { euler, milstein };
enum class NoiseModel { backaction_free, backaction };

enum class IntensityInit {
    stationary, ///< Exponential with mean nbar(phi0)
    mean,       ///< n = nbar(phi0)
    zero,       ///< empty mode, the classical counterpart of the Fock vacuum
};

struct InitSpec {
    /// deterministic: phi = mu, L_z = 0. Otherwise the Gaussian mimic of a
    /// von Mises state: phi ~ N(mu, 1/(2k)), L_z ~ N(0, k/2).
    bool deterministic = true;
    double k = 10.0;
    double mu = std::numbers::pi / 2.0;
    IntensityInit intensity = IntensityInit::stationary;

    friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

struct IntegratorSpec {
    Scheme scheme = Scheme::euler;
    NoiseModel noise = NoiseModel::backaction_free;
    double dt = 1e-3;

    friend bool operator==(const IntegratorSpec&, const IntegratorSpec&) = default;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::uint64_t step, const std::string& what)
        : std::runtime_error(what), step_(step) {}
    std::uint64_t step() const { return step_; }

private:
    std::uint64_t step_;
};

ClassicalState sample_initial(const InitSpec& init, const EngineParams& p,
                              const ModulationProfile& profile, RandomStream& rng);
ClassicalState sample_initial(const InitSpec& init, const EngineParams& p, RandomStream& rng);

// Single steps with caller-supplied Wiener increments (variance dt each).
ClassicalState step_euler(const ClassicalState& s, double dt, double dW, const EngineParams& p);
ClassicalState step_milstein(const ClassicalState& s, double dt, double dW, const EngineParams& p);
ClassicalState step_backaction(const ClassicalState& s, double dt, double dW, double dU,
                               const EngineParams& p, Scheme scheme = Scheme::euler);
ClassicalState step_general(const ClassicalState& s, double dt, double dW, double dU,
                            const EngineParams& p, const ModulationProfile& profile,
                            const IntegratorSpec& integ);

namespace detail {

/// Intensity update at a frozen local bath; shared by every scheme.
inline double intensity_step(double n, double rate, double nbar, double dt, double dW,
                             Scheme scheme) {
    double next = n - rate * (n - nbar) * dt + std::sqrt(2.0 * n * rate * nbar) * dW;
    if (scheme == Scheme::milstein) next += 0.5 * rate * nbar * (dW * dW - dt);
    return next > 0.0 ? next : 0.0;
}

/// Standard-profile step, the hot loop of every ensemble.
inline ClassicalState advance_standard(const ClassicalState& s, double dt, double dW, double dU,
                                       const EngineParams& p, Scheme scheme, bool backaction) {
    const double sn = std::sin(s.phi);
    const double h = 0.5 * (1.0 + sn);
    const double c = 0.5 * (1.0 - sn);
    const double h2 = h * h;
    const double c2 = c * c;
    const double w = h2 + c2;
    const double rate = p.kappa * w;
    const double nbar = (h2 * p.n_hot + c2 * p.n_cold) / w;

    ClassicalState out;
    out.phi = s.phi + s.lz / p.inertia * dt;
    out.lz = s.lz + s.n * sn * dt;
    if (backaction) {
        out.lz -= std::cos(s.phi) * std::sqrt(0.5 * p.kappa * s.n * (p.n_hot + p.n_cold)) * dU;
    }
    out.n = intensity_step(s.n, rate, nbar, dt, dW, scheme);
    return out;
}

} // namespace detail

/// Draws increments and advances; the stepping kernel used by trajectories.
class Stepper {
public:
    Stepper(const EngineParams& p, const ModulationProfile& profile, const IntegratorSpec& integ);

    ClassicalState step(const ClassicalState& s, RandomStream& rng) const {
        const double dW = rng.normal(sqrt_dt_);
        const double dU = backaction_ ? rng.normal(sqrt_dt_) : 0.0;
        if (standard_) {
            return detail::advance_standard(s, integ_.dt, dW, dU, params_, integ_.scheme,
                                            backaction_);
        }
        return step_general(s, integ_.dt, dW, dU, params_, profile_, integ_);
    }

    double dt() const { return integ_.dt; }

private:
    EngineParams params_;
    ModulationProfile profile_;
    IntegratorSpec integ_;
    double sqrt_dt_;
    bool standard_;
    bool backaction_;
};

/// Largest admissible step: 0.01 * min(1/kappa, sqrt(I)).
double max_stable_dt(const EngineParams& p);

struct Calibration {
    double dt;
    int halvings;
    double relative_bias; ///< |<n> / nbar - 1| at the accepted dt
};

/// Starts from min(dt_start, max_stable_dt) and halves until the stationary
/// mean of the frozen-angle intensity process at the stiffest angle matches
/// nbar within `tolerance`.
Calibration calibrate_dt(const EngineParams& p, const ModulationProfile& profile, Scheme scheme,
                         double dt_start = 1e-3, double tolerance = 5e-3);

struct Trajectory {
    std::vector<double> times;
    std::vector<ClassicalState> states;
    std::uint64_t seed = 0;
};

/// Uniform time grid derived from (t_max, dt, stride).
struct TimeGrid {
    std::uint64_t steps;  ///< integration steps to t_max
    std::uint64_t stride; ///< steps between outputs
    double dt;

    std::size_t outputs() const { return static_cast<std::size_t>(steps / stride) + 1; }
    double time(std::size_t output) const { return static_cast<double>(output * stride) * dt; }

    /// Throws std::invalid_argument when t_max is not a whole number of strides.
    static TimeGrid make(double t_max, double dt, std::uint64_t stride);
};

/// Integrates one trajectory; bit-identical for identical arguments.
/// Throws DivergenceError on a non-finite state.
Trajectory simulate_trajectory(const EngineParams& p, const ModulationProfile& profile,
                               const InitSpec& init, double t_max, const IntegratorSpec& integ,
                               std::uint64_t output_stride, std::uint64_t seed);

} // namespace rotor::classical
