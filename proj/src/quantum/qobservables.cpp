#include "rotor/quantum/qobservables.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace rotor::quantum {

cd band_trace(const Band& b, const Eigen::Ref<const Matrix>& x) {
    const auto n = static_cast<std::ptrdiff_t>(b.size);
    cd sum = 0.0;
    for (int o = -Band::kHalf; o <= Band::kHalf; ++o) {
        const Vector& d = b.diag[o + Band::kHalf];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -o);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - o);
        for (std::ptrdiff_t i = lo; i < hi; ++i) sum += d[i] * x(i + o, i);
    }
    return sum;
}

Matrix rotor_marginal(const Matrix& blocks, const BlockLayout& lay) {
    Matrix r = Matrix::Zero(lay.m, lay.m);
    for (Eigen::Index n = 0; n < lay.levels; ++n) r += lay.block(blocks, n);
    return r;
}

namespace {

// sum_n n tr((omega0 + cos) X_n)
double omega_n(const Liouvillian& lv, const Matrix& x) {
    const BlockLayout& lay = lv.layout();
    const double w0 = lv.params().omega0;
    double sum = 0.0;
    for (Eigen::Index n = 1; n < lay.levels; ++n) {
        const auto b = lay.block(x, n);
        sum += static_cast<double>(n) * (w0 * b.trace() + band_trace(lv.rotor().cos, b)).real();
    }
    return sum;
}

double closed_heat(const Liouvillian& lv, const Matrix& rho, const Band& f2, double nbar) {
    const BlockLayout& lay = lv.layout();
    const double w0 = lv.params().omega0;
    // cos f^2 spans offsets up to 3, so go through f^2 X.
    Matrix f2x(lay.m, lay.m);
    double sum = 0.0;
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        f2x.setZero();
        f2.left_add(lay.block(rho, n), f2x, 1.0);
        sum += (nbar - static_cast<double>(n)) *
               (w0 * f2x.trace() + band_trace(lv.rotor().cos, f2x)).real();
    }
    return lv.params().kappa * sum;
}

double entropy_of(const Eigen::VectorXd& w) {
    double s = 0.0;
    for (double l : w)
        if (l > 1e-14) s -= l * std::log(l);
    return s;
}

} // namespace

QPowers q_powers(const Liouvillian& lv, const Matrix& rho) {
    const EngineParams& p = lv.params();
    const BlockLayout& lay = lv.layout();
    const RotorOps& r = lv.rotor();
    QPowers out;
    out.hot = omega_n(lv, lv(rho, Part::hot));
    out.cold = omega_n(lv, lv(rho, Part::cold));
    const double d_ham = omega_n(lv, lv(rho, Part::hamiltonian));

    double work = 0.0, back = 0.0;
    const double nsum = p.n_hot + p.n_cold;
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        const auto b = lay.block(rho, n);
        const double dn = static_cast<double>(n);
        work += dn * band_trace(r.sin_lz_sym, b).real();
        back += (0.5 * nsum * (2.0 * dn + 1.0) + dn) * band_trace(r.cos2, b).real();
    }
    out.work = work / (2.0 * p.inertia);
    out.backaction = p.kappa / (4.0 * p.inertia) * back;
    // d<omega n>/dt = d_ham + P_H + P_C, so the first-law balance reduces to
    // the Hamiltonian part against P_W.
    out.residual = d_ham + out.work;
    out.hot_closed = closed_heat(lv, rho, r.f_hot2, p.n_hot);
    out.cold_closed = closed_heat(lv, rho, r.f_cold2, p.n_cold);
    return out;
}

double inverse_temperature(double nbar, double omega0) {
    if (!(nbar > 0.0)) throw std::domain_error("temperature undefined for zero occupation");
    return std::log1p(1.0 / nbar) / omega0;
}

QEntropy q_entropy(const Liouvillian& lv, const Matrix& rho, const Matrix& drho,
                   const QPowers& powers, bool entropy_only) {
    const EngineParams& p = lv.params();
    const BlockLayout& lay = lv.layout();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double beta_h = nan, beta_c = nan;
    if (!entropy_only) {
        beta_h = inverse_temperature(p.n_hot, p.omega0);
        beta_c = inverse_temperature(p.n_cold, p.omega0);
    }
    QEntropy e;
    e.min_eigenvalue = std::numeric_limits<double>::infinity();
    Eigen::VectorXd mode(lay.levels);
    std::vector<double> block_s(static_cast<std::size_t>(lay.levels));
    std::vector<double> block_ds(static_cast<std::size_t>(lay.levels));
    std::vector<double> block_min(static_cast<std::size_t>(lay.levels));
    std::vector<double> block_pur(static_cast<std::size_t>(lay.levels));
#pragma omp parallel for schedule(dynamic, 1)
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        const Matrix b = lay.block(rho, n);
        Eigen::SelfAdjointEigenSolver<Matrix> es(b);
        const Eigen::VectorXd& w = es.eigenvalues();
        const Matrix& v = es.eigenvectors();
        const Matrix dv = lay.block(drho, n) * v;
        double ds = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            if (w[i] > 1e-14) ds -= (v.col(i).adjoint() * dv.col(i))(0).real() * std::log(w[i]);
        }
        const auto sn = static_cast<std::size_t>(n);
        block_s[sn] = entropy_of(w);
        block_ds[sn] = ds;
        block_min[sn] = w.minCoeff();
        block_pur[sn] = w.squaredNorm();
        mode[n] = b.trace().real();
    }
    for (std::size_t n = 0; n < block_s.size(); ++n) {
        e.s += block_s[n];
        e.ds_dt += block_ds[n];
        e.min_eigenvalue = std::min(e.min_eigenvalue, block_min[n]);
        e.purity += block_pur[n];
    }
    e.s_int_rate = entropy_only ? nan
                                : (e.ds_dt - beta_h * powers.hot - beta_c * powers.cold) / p.kappa;
    Eigen::SelfAdjointEigenSolver<Matrix> er(rotor_marginal(rho, lay), Eigen::EigenvaluesOnly);
    e.s_rotor = entropy_of(er.eigenvalues());
    e.s_mode = entropy_of(mode);
    return e;
}

cd angle_moment(const Matrix& rho, int j) {
    // tr(E^j rho) = sum_i rho(i - j, i)
    const Eigen::Index m = rho.rows();
    if (j < 0) return std::conj(angle_moment(rho, -j));
    cd sum = 0.0;
    for (Eigen::Index i = j; i < m; ++i) sum += rho(i - j, i);
    return sum;
}

AngleDistribution angle_distribution(const Matrix& rho, int points, int harmonics) {
    AngleDistribution out;
    std::vector<cd> c(static_cast<std::size_t>(harmonics) + 1);
    for (int j = 1; j <= harmonics; ++j) c[static_cast<std::size_t>(j)] = angle_moment(rho, j);
    const double two_pi = 2.0 * std::numbers::pi;
    out.raw_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
        const double phi = two_pi * k / points;
        double s = 1.0;
        for (int j = 1; j <= harmonics; ++j)
            s += 2.0 * (c[static_cast<std::size_t>(j)] * std::polar(1.0, -j * phi)).real();
        s /= two_pi;
        out.phi.push_back(phi);
        out.raw_min = std::min(out.raw_min, s);
        out.density.push_back(std::max(s, 0.0));
    }
    return out;
}

TruncationReport truncation_check(const Matrix& rho, const QuantumSpace& space) {
    const BlockLayout lay(space);
    TruncationReport t;
    const Eigen::Index rows = std::min<Eigen::Index>(3, lay.m);
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        const auto b = lay.block(rho, n);
        for (Eigen::Index i = 0; i < rows; ++i) {
            t.low += b(i, i).real();
            t.high += b(lay.m - 1 - i, lay.m - 1 - i).real();
        }
    }
    t.top_fock = lay.block(rho, lay.levels - 1).trace().real();
    return t;
}

QRecord q_record(const Liouvillian& lv, double t, const Matrix& rho, int angle_points,
                 AngleDistribution* angles) {
    const BlockLayout& lay = lv.layout();
    const RotorOps& r = lv.rotor();
    QRecord rec;
    rec.t = t;
    double lz = 0.0, lz2 = 0.0, n1 = 0.0, n2 = 0.0, tr = 0.0, herm = 0.0;
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        const auto b = lay.block(rho, n);
        const Eigen::VectorXd d = b.diagonal().real();
        const double pn = d.sum();
        const double dn = static_cast<double>(n);
        tr += pn;
        lz += d.dot(r.lz);
        lz2 += d.dot(r.lz.cwiseProduct(r.lz));
        n1 += dn * pn;
        n2 += dn * dn * pn;
        herm = std::max(herm, (b - b.adjoint()).cwiseAbs().maxCoeff());
    }
    rec.trace = tr;
    rec.hermiticity = herm;
    rec.mean_lz = lz;
    rec.var_lz = lz2 - lz * lz;
    rec.mean_n = n1;
    rec.var_n = n2 - n1 * n1;
    const Matrix rot = rotor_marginal(rho, lay);
    const cd c1 = angle_moment(rot, 1), c2 = angle_moment(rot, 2);
    rec.mean_cos = c1.real();
    rec.mean_sin = c1.imag();
    rec.mean_cos2 = c2.real();
    rec.mean_sin2 = c2.imag();
    rec.powers = q_powers(lv, rho);
    const EngineParams& p = lv.params();
    const bool rates = p.n_hot > 0.0 && p.n_cold > 0.0 && t > 0.0;
    rec.entropy = q_entropy(lv, rho, lv(rho), rec.powers, !rates);
    rec.truncation = truncation_check(rho, lv.space());
    if (angle_points > 0) {
        AngleDistribution a = angle_distribution(rot, angle_points);
        rec.angle_raw_min = a.raw_min;
        if (angles) *angles = std::move(a);
    } else {
        rec.angle_raw_min = std::numeric_limits<double>::quiet_NaN();
    }
    return rec;
}

} // namespace rotor::quantum
