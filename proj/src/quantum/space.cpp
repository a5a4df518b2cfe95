#include "rotor/quantum/space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace rotor::quantum {

void QuantumSpace::validate() const {
    std::ostringstream msg;
    if (!(m_min < 0 && 0 < m_max)) {
        msg << "momentum window [" << m_min << ", " << m_max << "] must straddle 0; ";
    }
    if (n_max < 1) msg << "n_max must be >= 1; ";
    if (!msg.str().empty()) throw std::invalid_argument("QuantumSpace: " + msg.str());
}

int auto_fock_cutoff(double n_hot, double population) {
    if (n_hot <= 0.0) return 2;
    const double ratio = n_hot / (n_hot + 1.0);
    int n = 2;
    while (std::pow(ratio, n) / (n_hot + 1.0) > population) ++n;
    return n;
}

double master_memory_bytes(const QuantumSpace& space) {
    // Block storage (levels x M x M complex), ~10 copies across integrator
    // stages and scratch.
    const double m = static_cast<double>(space.momenta());
    return 10.0 * static_cast<double>(space.levels()) * m * m * sizeof(cd);
}

double momentum_diffusion_bound(const EngineParams& p) {
    // Backaction heating 2I P_B with n -> max(nbar) and cos^2 at its
    // bound 1, on top of the free-rotation variance rate.
    const double n = std::max(p.n_hot, p.n_cold);
    const double back = 0.5 * p.kappa * (0.5 * (p.n_hot + p.n_cold) * (2.0 * n + 1.0) + n);
    // Before the rotor turns, the torque n sin(phi) carries the thermal
    // intensity noise: variance n(n+1), correlation time 1/kappa(phi), and
    // sin^2(phi) / kappa(phi) <= 1/kappa.
    const double torque = 2.0 * n * (n + 1.0) / p.kappa;
    return fr_variance_rate(p) + back + torque;
}

double momentum_drift_bound(const EngineParams& p) {
    // The mean torque <n sin phi> stays below the hottest occupation; the
    // free-rotation rate only applies once the rotor turns.
    return std::max(fr_momentum_rate(p), std::max(p.n_hot, p.n_cold));
}

QuantumSpace build_space(const EngineParams& p, const SpaceRequest& r) {
    if (!(r.k >= 1.0)) throw std::invalid_argument("build_space: k must be >= 1");
    if (!(r.t_max >= 0.0)) throw std::invalid_argument("build_space: t_max must be >= 0");
    QuantumSpace s;
    const double var = r.k / 2.0 + momentum_diffusion_bound(p) * r.t_max;
    const double spread = r.spread_sigmas * std::sqrt(var);
    s.m_min = r.m_min ? *r.m_min : -static_cast<int>(std::ceil(spread)) - 5;
    s.m_max = r.m_max ? *r.m_max
                      : static_cast<int>(std::ceil(momentum_drift_bound(p) * r.t_max + spread));
    s.n_max = r.n_max ? *r.n_max : auto_fock_cutoff(p.n_hot);
    s.validate();

    std::ostringstream advice;
    if (s.dim() > r.max_rows) {
        advice << "dimension " << s.dim() << " (" << s.momenta() << " momenta x " << s.levels()
               << " Fock levels) exceeds the cap of " << r.max_rows
               << " rows; reduce t_max or n_max, or raise the cap";
    } else if (master_memory_bytes(s) > r.memory_budget_bytes) {
        advice << "estimated working set " << master_memory_bytes(s) / 1e9
               << " GB exceeds the budget of " << r.memory_budget_bytes / 1e9
               << " GB; reduce t_max (momentum window) or n_max";
    }
    if (!advice.str().empty()) throw SpaceTooLarge(advice.str());
    return s;
}

Vector von_mises_coefficients(int m_min, int m_max, double k, double mu) {
    if (!(k >= 1.0)) throw std::invalid_argument("von Mises state needs k >= 1");
    const double norm = std::cyl_bessel_i(0.0, 2.0 * k);
    Vector c(m_max - m_min + 1);
    double mass = 0.0;
    for (int m = m_min; m <= m_max; ++m) {
        const double b = std::cyl_bessel_i(static_cast<double>(std::abs(m)), k);
        c[m - m_min] = b * std::polar(1.0, -m * mu);
        mass += b * b;
    }
    const double dropped = 1.0 - mass / norm;
    if (dropped > 1e-10) {
        std::ostringstream msg;
        msg << "momentum window [" << m_min << ", " << m_max << "] drops " << dropped
            << " of the von Mises state (k = " << k << "); widen the window";
        throw WindowTooSmall(msg.str());
    }
    return c / std::sqrt(mass);
}

Band::Band(std::size_t m) : size(m) {
    for (auto& d : diag) d = Vector::Zero(static_cast<Eigen::Index>(m));
}

cd Band::at(std::size_t i, int offset) const {
    const auto j = static_cast<std::ptrdiff_t>(i) + offset;
    if (std::abs(offset) > kHalf || j < 0 || j >= static_cast<std::ptrdiff_t>(size)) return 0.0;
    return diag[offset + kHalf][static_cast<Eigen::Index>(i)];
}

Band Band::adjoint() const {
    Band b(size);
    for (int o = -kHalf; o <= kHalf; ++o) {
        for (std::size_t i = 0; i < size; ++i) {
            const auto src = static_cast<std::ptrdiff_t>(i) + o;
            if (src < 0 || src >= static_cast<std::ptrdiff_t>(size)) continue;
            // B^dag(src, src - o) = conj(B(i, i + o)) with src = i + o.
            b.diag[-o + kHalf][src] = std::conj(at(i, o));
        }
    }
    return b;
}

Band Band::operator*(const Band& other) const {
    Band c(size);
    for (std::size_t i = 0; i < size; ++i) {
        for (int o1 = -kHalf; o1 <= kHalf; ++o1) {
            const cd a = at(i, o1);
            if (a == 0.0) continue;
            const std::size_t mid = i + o1;
            for (int o2 = -kHalf; o2 <= kHalf; ++o2) {
                const cd b = other.at(mid, o2);
                if (b == 0.0) continue;
                const int o = o1 + o2;
                if (std::abs(o) > kHalf) throw std::logic_error("Band product leaves the band");
                c.diag[o + kHalf][static_cast<Eigen::Index>(i)] += a * b;
            }
        }
    }
    return c;
}

Band Band::operator+(const Band& other) const {
    Band c(size);
    for (std::size_t d = 0; d < diag.size(); ++d) c.diag[d] = diag[d] + other.diag[d];
    return c;
}

Band Band::scaled(cd factor) const {
    Band c(size);
    for (std::size_t d = 0; d < diag.size(); ++d) c.diag[d] = diag[d] * factor;
    return c;
}

Matrix Band::dense() const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
    for (std::size_t i = 0; i < size; ++i) {
        for (int o = -kHalf; o <= kHalf; ++o) {
            const auto j = static_cast<std::ptrdiff_t>(i) + o;
            if (j >= 0 && j < static_cast<std::ptrdiff_t>(size)) m(i, j) = at(i, o);
        }
    }
    return m;
}

Sparse Band::sparse() const { return dense().sparseView(); }

void Band::apply(const Vector& x, Vector& y) const {
    const auto n = static_cast<std::ptrdiff_t>(size);
    y.setZero(n);
    for (int o = -kHalf; o <= kHalf; ++o) {
        const Vector& d = diag[o + kHalf];
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -o);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - o);
        for (std::ptrdiff_t i = lo; i < hi; ++i) y[i] += d[i] * x[i + o];
    }
}

void Band::left_add(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y, cd alpha) const {
    const auto n = static_cast<std::ptrdiff_t>(size);
    for (int o = -kHalf; o <= kHalf; ++o) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -o);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - o);
        if (hi <= lo) continue;
        const Vector coef = alpha * diag[o + kHalf].segment(lo, hi - lo);
        if (coef.cwiseAbs().maxCoeff() == 0.0) continue;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            y.col(j).segment(lo, hi - lo).array() +=
                coef.array() * x.col(j).segment(lo + o, hi - lo).array();
        }
    }
}

void Band::right_add(const Eigen::Ref<const Matrix>& x, Eigen::Ref<Matrix> y, cd alpha) const {
    const auto n = static_cast<std::ptrdiff_t>(size);
    for (int o = -kHalf; o <= kHalf; ++o) {
        const Vector& d = diag[o + kHalf];
        // (X B)(:, j) += X(:, i) B(i, j) with j = i + o.
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -o);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - o);
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
            const cd b = alpha * d[i];
            if (b == 0.0) continue;
            y.col(i + o) += b * x.col(i);
        }
    }
}

namespace {

Band diagonal(const Eigen::VectorXd& v) {
    Band b(static_cast<std::size_t>(v.size()));
    b.diag[Band::kHalf] = v.cast<cd>();
    return b;
}

Band identity(std::size_t m) { return diagonal(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m))); }

} // namespace

RotorOps::RotorOps(const QuantumSpace& space)
    : m(space.momenta()), shift(m), cos(m), sin(m), f_hot(m), f_cold(m), f_hot2(m), f_cold2(m),
      cos2(m), sin_lz_sym(m) {
    lz.resize(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) lz[i] = space.m_min + static_cast<int>(i);
    for (std::size_t i = 1; i < m; ++i) shift.diag[Band::kHalf - 1][i] = 1.0;
    const Band down = shift.adjoint();
    cos = (shift + down).scaled(0.5);
    sin = (shift + down.scaled(-1.0)).scaled(cd(0.0, -0.5));
    const Band half = identity(m).scaled(0.5);
    f_hot = half + sin.scaled(0.5);
    f_cold = half + sin.scaled(-0.5);
    f_hot2 = f_hot * f_hot;
    f_cold2 = f_cold * f_cold;
    cos2 = cos * cos;
    const Band l = diagonal(lz);
    sin_lz_sym = sin * l + l * sin;
}

namespace {

// Kronecker product rotor (x) mode in the momentum-major basis.
Sparse kron(const Matrix& rotor, const Eigen::MatrixXd& mode) {
    const Eigen::Index m = rotor.rows();
    const Eigen::Index l = mode.rows();
    std::vector<Eigen::Triplet<cd>> t;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (rotor(i, j) == 0.0) continue;
            for (Eigen::Index a = 0; a < l; ++a) {
                for (Eigen::Index b = 0; b < l; ++b) {
                    if (mode(a, b) != 0.0) t.emplace_back(i * l + a, j * l + b, rotor(i, j) * mode(a, b));
                }
            }
        }
    }
    Sparse s(m * l, m * l);
    s.setFromTriplets(t.begin(), t.end());
    return s;
}

} // namespace

OperatorSet::OperatorSet(const QuantumSpace& s, const EngineParams& p) : space(s) {
    const RotorOps r(s);
    const auto m = static_cast<Eigen::Index>(s.momenta());
    const auto l = static_cast<Eigen::Index>(s.levels());
    const Eigen::MatrixXd one_mode = Eigen::MatrixXd::Identity(l, l);
    const Matrix one_rotor = Matrix::Identity(m, m);
    Eigen::MatrixXd lower = Eigen::MatrixXd::Zero(l, l);
    for (Eigen::Index n = 1; n < l; ++n) lower(n - 1, n) = std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd number = lower.transpose() * lower;

    shift_up = kron(r.shift.dense(), one_mode);
    lz = kron(Matrix(r.lz.cast<cd>().asDiagonal()), one_mode);
    cos = kron(r.cos.dense(), one_mode);
    sin = kron(r.sin.dense(), one_mode);
    f_hot = kron(r.f_hot.dense(), one_mode);
    f_cold = kron(r.f_cold.dense(), one_mode);
    a = kron(one_rotor, lower);
    adag = kron(one_rotor, lower.transpose());
    num = kron(one_rotor, number);
    const Matrix kinetic = (r.lz.array().square() / (2.0 * p.inertia)).matrix().cast<cd>().asDiagonal();
    hamiltonian = kron(kinetic, one_mode) + kron(r.cos.dense(), number);

    const std::array<std::pair<const Sparse*, double>, 2> baths{
        std::pair{&f_hot, p.n_hot}, std::pair{&f_cold, p.n_cold}};
    for (const auto& [f, nbar] : baths) {
        const double down = p.kappa * (nbar + 1.0);
        const double up = p.kappa * nbar;
        if (down > 0.0) jumps.push_back(Sparse(std::sqrt(down) * (*f) * a));
        if (up > 0.0) jumps.push_back(Sparse(std::sqrt(up) * (*f) * adag));
    }
}

} // namespace rotor::quantum
