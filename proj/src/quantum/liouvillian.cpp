#include "rotor/quantum/liouvillian.hpp"

#include <cmath>

namespace rotor::quantum {

Matrix to_full(const Matrix& blocks, const QuantumSpace& space) {
    const BlockLayout lay(space);
    const Eigen::Index d = static_cast<Eigen::Index>(space.dim());
    Matrix full = Matrix::Zero(d, d);
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        const auto b = lay.block(blocks, n);
        for (Eigen::Index j = 0; j < lay.m; ++j) {
            for (Eigen::Index i = 0; i < lay.m; ++i) full(i * lay.levels + n, j * lay.levels + n) = b(i, j);
        }
    }
    return full;
}

Matrix to_blocks(const Matrix& full, const QuantumSpace& space, double tolerance) {
    const BlockLayout lay(space);
    Matrix blocks = lay.zeros();
    for (Eigen::Index c = 0; c < full.cols(); ++c) {
        for (Eigen::Index r = 0; r < full.rows(); ++r) {
            const Eigen::Index nr = r % lay.levels;
            const Eigen::Index nc = c % lay.levels;
            if (nr == nc) {
                blocks(r / lay.levels, nc * lay.m + c / lay.levels) = full(r, c);
            } else if (std::abs(full(r, c)) > tolerance) {
                throw std::invalid_argument(
                    "to_blocks: operator has coherences between different Fock levels");
            }
        }
    }
    return blocks;
}

Matrix product_state(const Vector& rotor, int fock, const QuantumSpace& space) {
    const BlockLayout lay(space);
    if (rotor.size() != lay.m) throw std::invalid_argument("product_state: rotor size mismatch");
    if (fock < 0 || fock > space.n_max) throw std::invalid_argument("product_state: Fock level out of range");
    Matrix rho = lay.zeros();
    lay.block(rho, fock) = rotor * rotor.adjoint() / rotor.squaredNorm();
    return rho;
}

Liouvillian::Liouvillian(const QuantumSpace& space, const EngineParams& p)
    : space_(space), params_(p), rotor_(space), layout_(space) {
    space.validate();
    rates_ = {p.kappa * (p.n_hot + 1.0), p.kappa * p.n_hot, p.kappa * (p.n_cold + 1.0),
              p.kappa * p.n_cold};
    Band kinetic(rotor_.m);
    kinetic.diag[Band::kHalf] = (rotor_.lz.array().square() / (2.0 * p.inertia)).matrix().cast<cd>();
    const int top = space.n_max;
    for (int n = 0; n <= top; ++n) {
        const double dn = n;
        const double up = n < top ? dn + 1.0 : 0.0; // a^dag annihilates the top level
        hamiltonian_.push_back(kinetic + rotor_.cos.scaled(dn));
        hot_loss_.push_back(rotor_.f_hot2.scaled(0.5 * (rates_.hot_down * dn + rates_.hot_up * up)));
        cold_loss_.push_back(
            rotor_.f_cold2.scaled(0.5 * (rates_.cold_down * dn + rates_.cold_up * up)));
        effective_.push_back(hamiltonian_.back() +
                             (hot_loss_.back() + cold_loss_.back()).scaled(cd(0.0, -1.0)));
        effective_adj_.push_back(effective_.back().adjoint());
    }
}

void Liouvillian::apply(const Matrix& x, Matrix& y, Part part) const {
    const BlockLayout& lay = layout_;
    if (x.rows() != lay.m || x.cols() != lay.m * lay.levels) {
        throw std::invalid_argument("Liouvillian: operand does not match the space");
    }
    y.setZero(lay.m, lay.m * lay.levels);
    const int top = space_.n_max;
    const cd mi(0.0, -1.0);
    const bool hot = part == Part::all || part == Part::hot;
    const bool cold = part == Part::all || part == Part::cold;

#pragma omp parallel
    {
        Matrix tmp(lay.m, lay.m);
#pragma omp for schedule(dynamic, 1)
        for (int n = 0; n <= top; ++n) {
            const auto xn = lay.block(x, n);
            auto yn = y.middleCols(n * lay.m, lay.m);
            const auto sn = static_cast<std::size_t>(n);
            switch (part) {
            case Part::all:
                effective_[sn].left_add(xn, yn, mi);
                effective_adj_[sn].right_add(xn, yn, -mi);
                break;
            case Part::hamiltonian:
                hamiltonian_[sn].left_add(xn, yn, mi);
                hamiltonian_[sn].right_add(xn, yn, -mi);
                break;
            case Part::hot:
                hot_loss_[sn].left_add(xn, yn, -1.0);
                hot_loss_[sn].right_add(xn, yn, -1.0);
                break;
            case Part::cold:
                cold_loss_[sn].left_add(xn, yn, -1.0);
                cold_loss_[sn].right_add(xn, yn, -1.0);
                break;
            }
            // Jumps feeding level n: f X_{n+1} f from above, f X_{n-1} f from below.
            auto feed = [&](const Band& f, int from, double rate) {
                if (rate == 0.0) return;
                tmp.setZero();
                f.left_add(lay.block(x, from), tmp, 1.0);
                f.right_add(tmp, yn, rate);
            };
            const double dn = n;
            if (n < top) {
                if (hot) feed(rotor_.f_hot, n + 1, rates_.hot_down * (dn + 1.0));
                if (cold) feed(rotor_.f_cold, n + 1, rates_.cold_down * (dn + 1.0));
            }
            if (n > 0) {
                if (hot) feed(rotor_.f_hot, n - 1, rates_.hot_up * dn);
                if (cold) feed(rotor_.f_cold, n - 1, rates_.cold_up * dn);
            }
        }
    }
}

Matrix reference_apply(const OperatorSet& ops, const Matrix& rho) {
    const cd i(0.0, 1.0);
    const Matrix h = Matrix(ops.hamiltonian);
    Matrix out = -i * (h * rho - rho * h);
    for (const auto& js : ops.jumps) {
        const Matrix l = Matrix(js);
        const Matrix ldl = l.adjoint() * l;
        out += l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl);
    }
    return out;
}

} // namespace rotor::quantum
