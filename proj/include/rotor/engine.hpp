#pragma once

// Engine parameterization, bath modulation profiles and the closed-form
// predictions of the rotor heat engine.
//
// Units: hbar = g = 1. Time is measured in 1/g, angular momentum in hbar,
// energy in hbar*g; kappa and omega0 are multiples of g.

#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace rotor {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// All dimensionless physical parameters of one engine configuration.
struct EngineParams {
    double inertia = 1.0;  ///< I g / hbar
    double kappa = 1.0;    ///< bath thermalization rate
    double n_hot = 1.0;    ///< mean occupation of the hot bath
    double n_cold = 0.0;   ///< mean occupation of the cold bath
    double omega0 = 100.0; ///< bare mode frequency, enters heat and efficiency only

    /// Throws std::invalid_argument listing every violated constraint.
    void validate() const;

    /// Non-fatal advisories (e.g. omega0 not much larger than g).
    std::vector<std::string> advisories() const;

    friend bool operator==(const EngineParams&, const EngineParams&) = default;
};

struct ModWeights {
    double hot;
    double cold;
};

/// Angle-dependent coupling weights f_H, f_C and their derivatives.
///
/// The standard profile is f_H = (1 + sin phi)/2, f_C = (1 - sin phi)/2. Custom
/// profiles must be 2pi-periodic with values in [0, 1]; closed-form
/// free-rotation constants only exist for the standard profile, everything
/// else falls back to quadrature.
class ModulationProfile {
public:
    using Fn = std::function<double(double)>;

    static ModulationProfile standard();
    static ModulationProfile custom(std::string name, Fn hot, Fn cold, Fn hot_slope,
                                    Fn cold_slope);

    bool is_standard() const { return standard_; }
    const std::string& name() const { return name_; }

    ModWeights weights(double phi) const;
    ModWeights slopes(double phi) const;

private:
    ModulationProfile() = default;

    std::string name_;
    bool standard_ = false;
    Fn hot_, cold_, hot_slope_, cold_slope_;
};

/// Local bath seen by the mode at a fixed rotor angle.
struct LocalBath {
    double rate;       ///< kappa(phi) = kappa (f_H^2 + f_C^2)
    double occupation; ///< nbar(phi)
    double backaction; ///< kappa (nbar_H f_H'^2 + nbar_C f_C'^2); L_z noise is sqrt(2 n * this)
};

LocalBath local_bath(double phi, const EngineParams& p, const ModulationProfile& profile);

/// Standard-profile weights; phi is any real number.
ModWeights mod_weights(double phi);
double kappa_eff(double phi, const EngineParams& p);
double nbar_eff(double phi, const EngineParams& p);

// Free-rotation (cycle-averaged, fast-thermalization) limits.
double fr_momentum_rate(const EngineParams& p);
double fr_variance_rate(const EngineParams& p);
double fr_momentum_rate(const EngineParams& p, const ModulationProfile& profile);
double fr_variance_rate(const EngineParams& p, const ModulationProfile& profile);

/// Maximal mean work per cycle, pi (2 - sqrt 2)(nbar_H - nbar_C).
double work_per_cycle(const EngineParams& p);
double fr_output_power(const EngineParams& p, double mean_lz);
double fr_input_power(const EngineParams& p);

struct Efficiency {
    double raw;
    double in_carnot_units; ///< raw / (2 g / omega0)
};

/// Throws std::domain_error when nbar_H == nbar_C.
Efficiency fr_efficiency(const EngineParams& p, double mean_lz);

/// 2g/(omega0 + g): the work condition forces eta_Carnot above this value.
/// Throws std::domain_error when omega0 <= g.
double carnot_floor(const EngineParams& p);
/// Leading order 2g/omega0 of carnot_floor.
double carnot_floor_leading(const EngineParams& p);

/// (2 - sqrt 2) / (sqrt 2 - 5/4), slope of efficiency vs <L_z>/(I kappa) in 2g/omega0 units.
double efficiency_slope();

} // namespace rotor
