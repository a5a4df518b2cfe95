#pragma once

// Measured quantities from classical ensembles: circular statistics, two-time
// angle correlations, work/heat powers, efficiency and PV cycles.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rotor/engine.hpp"
#include "rotor/ensemble.hpp"

namespace rotor::obs {

/// R = <cos>^2 + <sin>^2.
double circular_R(double cos_mean, double sin_mean);

/// Mean resultant R of the angles in `phi`.
double circular_R(std::span<const double> phi);

/// Thrown when 1 - R[2 phi(t)] is too small to normalize the correlation,
/// i.e. the angle at t is (almost) a point mass or an antipodal pair.
class DegenerateCorrelation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kDegenerateThreshold = 1e-9;

/// Circular two-time correlation of paired angle samples, clipped to [-1, 1].
double two_time_S(std::span<const double> phi1, std::span<const double> phi2);

/// Same, from the kept angles of an ensemble (indices into kept_times).
double two_time_S(const classical::EnsembleSummary& ens, std::size_t i1, std::size_t i2);

struct CorrelationGrid {
    std::vector<double> times;
    std::vector<double> values; ///< row-major; NaN where degenerate

    double at(std::size_t i, std::size_t j) const { return values[i * times.size() + j]; }
};

CorrelationGrid correlation_grid(const classical::EnsembleSummary& ens);

/// P_W = <n sin(phi) L_z> / I.
double work_power(const classical::MomentRecord& r, const EngineParams& p);
/// P_H = kappa <(omega0 + cos phi) f_H^2 (nbar_H - n)>.
double heat_power(const classical::MomentRecord& r, const EngineParams& p);
/// P_C, defined like P_H with the cold bath.
double cold_power(const classical::MomentRecord& r, const EngineParams& p);

/// P_W / P_H; empty when P_H <= 0.
std::optional<double> efficiency(const classical::MomentRecord& r, const EngineParams& p);
std::optional<double> efficiency(double work_power, double heat_power);

/// Pressure (mean intensity) against piston position x = -cos(phi), binned in phi mod 2pi.
struct PVDiagram {
    std::vector<double> phi_center;
    std::vector<double> volume;   ///< -cos(phi_center)
    std::vector<double> pressure; ///< mean n in bin; NaN when empty
    std::vector<double> ideal;    ///< nbar(phi_center)
    std::vector<std::size_t> count;

    std::size_t bins() const { return phi_center.size(); }
    std::size_t empty_bins() const;
    std::size_t samples() const;
};

PVDiagram pv_accumulate(std::span<const double> phi, std::span<const double> n,
                        const EngineParams& p, std::size_t bins = 100);

/// Bin layout with pressure equal to the fast-thermalization curve nbar(phi).
PVDiagram pv_ideal(const EngineParams& p, std::size_t bins = 100);

enum class Orientation { clockwise, counterclockwise };

/// Signed loop integral of p dx, trapezoidal in phi over populated bins
/// (dx = sin(phi) dphi). Throws std::domain_error if more than 5% of bins are empty.
double cycle_work(const PVDiagram& pv, Orientation orientation = Orientation::clockwise);

/// Centered least-squares slope over `window` points (odd), shrinking
/// symmetrically near the ends.
std::vector<double> smoothed_derivative(std::span<const double> y, double h,
                                        std::size_t window = 11);

/// Ordinary least-squares slope and intercept of y against x.
struct LineFit {
    double slope;
    double intercept;
    double slope_se;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

} // namespace rotor::obs
