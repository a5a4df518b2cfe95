#include "rotor/engine.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rotor/quadrature.hpp"

namespace rotor {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

} // namespace

void EngineParams::validate() const {
    std::vector<std::string> errors;
    auto require = [&](bool ok, const char* what) {
        if (!ok) errors.emplace_back(what);
    };
    require(std::isfinite(inertia) && inertia > 0.0, "inertia must be > 0");
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(std::isfinite(omega0) && omega0 > 0.0, "omega0 must be > 0");
    require(std::isfinite(n_cold) && n_cold >= 0.0, "n_cold must be >= 0");
    require(std::isfinite(n_hot) && n_hot >= n_cold,
            "n_hot must be >= n_cold (reversed bias is not an engine configuration)");
    if (!errors.empty()) {
        std::ostringstream msg;
        msg << "invalid engine parameters:";
        for (const auto& e : errors) msg << "\n  - " << e;
        throw std::invalid_argument(msg.str());
    }
}

std::vector<std::string> EngineParams::advisories() const {
    std::vector<std::string> out;
    if (omega0 < 10.0) {
        out.emplace_back("omega0 < 10 g: the weak radiation-pressure modulation assumption is poor");
    }
    return out;
}

ModulationProfile ModulationProfile::standard() {
    ModulationProfile p;
    p.name_ = "standard";
    p.standard_ = true;
    p.hot_ = [](double phi) { return 0.5 * (1.0 + std::sin(phi)); };
    p.cold_ = [](double phi) { return 0.5 * (1.0 - std::sin(phi)); };
    p.hot_slope_ = [](double phi) { return 0.5 * std::cos(phi); };
    p.cold_slope_ = [](double phi) { return -0.5 * std::cos(phi); };
    return p;
}

ModulationProfile ModulationProfile::custom(std::string name, Fn hot, Fn cold, Fn hot_slope,
                                            Fn cold_slope) {
    if (!hot || !cold || !hot_slope || !cold_slope) {
        throw std::invalid_argument("ModulationProfile::custom: all four functions are required");
    }
    ModulationProfile p;
    p.name_ = std::move(name);
    p.hot_ = std::move(hot);
    p.cold_ = std::move(cold);
    p.hot_slope_ = std::move(hot_slope);
    p.cold_slope_ = std::move(cold_slope);
    return p;
}

ModWeights ModulationProfile::weights(double phi) const {
    if (standard_) return mod_weights(phi);
    return {hot_(phi), cold_(phi)};
}

ModWeights ModulationProfile::slopes(double phi) const {
    return {hot_slope_(phi), cold_slope_(phi)};
}

ModWeights mod_weights(double phi) {
    const double s = std::sin(std::remainder(phi, kTwoPi));
    return {0.5 * (1.0 + s), 0.5 * (1.0 - s)};
}

LocalBath local_bath(double phi, const EngineParams& p, const ModulationProfile& profile) {
    const auto [fh, fc] = profile.weights(phi);
    const auto [dh, dc] = profile.slopes(phi);
    const double h2 = fh * fh;
    const double c2 = fc * fc;
    const double sum = h2 + c2;
    return {p.kappa * sum, (h2 * p.n_hot + c2 * p.n_cold) / sum,
            p.kappa * (p.n_hot * dh * dh + p.n_cold * dc * dc)};
}

double kappa_eff(double phi, const EngineParams& p) {
    const auto [fh, fc] = mod_weights(phi);
    return p.kappa * (fh * fh + fc * fc);
}

double nbar_eff(double phi, const EngineParams& p) {
    const auto [fh, fc] = mod_weights(phi);
    const double h2 = fh * fh;
    const double c2 = fc * fc;
    return (h2 * p.n_hot + c2 * p.n_cold) / (h2 + c2);
}

double fr_momentum_rate(const EngineParams& p) {
    return (1.0 - 1.0 / kSqrt2) * (p.n_hot - p.n_cold);
}

double fr_variance_rate(const EngineParams& p) {
    const double sum = p.n_hot + p.n_cold;
    const double diff = p.n_hot - p.n_cold;
    return ((1.0 - 1.0 / kSqrt2) * sum * sum + 3.0 / (8.0 * kSqrt2) * diff * diff) / p.kappa;
}

double fr_momentum_rate(const EngineParams& p, const ModulationProfile& profile) {
    if (profile.is_standard()) return fr_momentum_rate(p);
    return cycle_average([&](double phi) {
        return std::sin(phi) * local_bath(phi, p, profile).occupation;
    });
}

double fr_variance_rate(const EngineParams& p, const ModulationProfile& profile) {
    if (profile.is_standard()) return fr_variance_rate(p);
    // Intensity fluctuations have variance nbar^2 and correlation time 1/kappa(phi).
    return cycle_average([&](double phi) {
        const auto bath = local_bath(phi, p, profile);
        const double s = std::sin(phi);
        return 2.0 * s * s * bath.occupation * bath.occupation / bath.rate;
    });
}

double work_per_cycle(const EngineParams& p) {
    return std::numbers::pi * (2.0 - kSqrt2) * (p.n_hot - p.n_cold);
}

double fr_output_power(const EngineParams& p, double mean_lz) {
    return work_per_cycle(p) / kTwoPi * mean_lz / p.inertia;
}

double fr_input_power(const EngineParams& p) {
    return p.omega0 * p.kappa * (kSqrt2 - 1.25) / 4.0 * (p.n_hot - p.n_cold);
}

double efficiency_slope() { return (2.0 - kSqrt2) / (kSqrt2 - 1.25); }

Efficiency fr_efficiency(const EngineParams& p, double mean_lz) {
    if (p.n_hot == p.n_cold) {
        throw std::domain_error("fr_efficiency: undefined without occupation bias");
    }
    const double scaled = mean_lz / (p.inertia * p.kappa) * efficiency_slope();
    return {2.0 / p.omega0 * scaled, scaled};
}

double carnot_floor(const EngineParams& p) {
    if (!(p.omega0 > 1.0)) {
        throw std::domain_error("carnot_floor: requires omega0 > g");
    }
    return 2.0 / (p.omega0 + 1.0);
}

double carnot_floor_leading(const EngineParams& p) { return 2.0 / p.omega0; }

} // namespace rotor
