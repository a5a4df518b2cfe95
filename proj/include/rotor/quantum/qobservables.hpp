#pragma once

#include <vector>

#include "rotor/quantum/liouvillian.hpp"

namespace rotor::quantum {

/// tr(B X) for a banded rotor operator and one M x M block.
cd band_trace(const Band& b, const Eigen::Ref<const Matrix>& x);

/// Sum over Fock levels of the rotor blocks (the reduced rotor state).
Matrix rotor_marginal(const Matrix& blocks, const BlockLayout& lay);

struct QPowers {
    double hot = 0.0;   ///< P_H = tr(omega n L_H rho), heat drawn from the hot bath
    double cold = 0.0;  ///< P_C
    double work = 0.0;  ///< P_W = <n {sin, L_z}> / 2I
    double backaction = 0.0;
    double residual = 0.0;     ///< d<omega n>/dt - (P_H + P_C - P_W)
    double hot_closed = 0.0;   ///< kappa <omega f_H^2 (nbar_H - n)>
    double cold_closed = 0.0;
};

/// Powers from rho; the derivative is evaluated internally, split by bath.
QPowers q_powers(const Liouvillian& lv, const Matrix& rho);

/// 1 / (k_B T) for a bath of occupation nbar at the bare frequency omega0.
double inverse_temperature(double nbar, double omega0);

struct QEntropy {
    double s = 0.0;          ///< von Neumann entropy
    double ds_dt = 0.0;
    double s_int_rate = 0.0; ///< intrinsic production rate in units of k_B kappa
    double s_rotor = 0.0;    ///< reduced rotor state
    double s_mode = 0.0;     ///< reduced mode state (diagonal in Fock)
    double min_eigenvalue = 0.0;
    double purity = 0.0;
};

/// Entropy and its production. Throws std::domain_error when either bath
/// occupation is zero (temperature undefined); `entropy_only` skips that
/// and returns NaN rates.
QEntropy q_entropy(const Liouvillian& lv, const Matrix& rho, const Matrix& drho,
                   const QPowers& powers, bool entropy_only = false);

/// <e^{i j phi}> of the reduced rotor state.
cd angle_moment(const Matrix& rotor_state, int j);

struct AngleDistribution {
    std::vector<double> phi;
    std::vector<double> density; ///< clipped at 0
    double raw_min = 0.0;        ///< before clipping
};

/// Truncated Fourier series (|j| <= harmonics) on `points` grid angles in [0, 2 pi).
AngleDistribution angle_distribution(const Matrix& rotor_state, int points, int harmonics = 64);

struct TruncationReport {
    double low = 0.0;       ///< population of the 3 lowest momentum rows
    double high = 0.0;      ///< population of the 3 highest momentum rows
    double top_fock = 0.0;  ///< population of Fock level n_max
    double threshold = 1e-6;
    bool pass() const { return low < threshold && high < threshold && top_fock < threshold; }
};

TruncationReport truncation_check(const Matrix& rho, const QuantumSpace& space);

/// One output time of a master-equation run.
struct QRecord {
    double t = 0.0;
    double trace = 0.0;
    double hermiticity = 0.0; ///< max |rho - rho^dag|
    double mean_lz = 0.0;
    double var_lz = 0.0;
    double mean_cos = 0.0;
    double mean_sin = 0.0;
    double mean_cos2 = 0.0;
    double mean_sin2 = 0.0;
    double mean_n = 0.0;
    double var_n = 0.0;
    QPowers powers;
    QEntropy entropy;
    TruncationReport truncation;
    double angle_raw_min = 0.0;
};

/// All single-time observables; `angles` (if non-null) receives p(phi).
QRecord q_record(const Liouvillian& lv, double t, const Matrix& rho, int angle_points = 0,
                 AngleDistribution* angles = nullptr);

} // namespace rotor::quantum
