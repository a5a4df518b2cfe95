#pragma once

#include <vector>

#include "rotor/quantum/space.hpp"

namespace rotor::quantum {

/// Operator that is block diagonal in the Fock basis, stored as the
/// M x (M * levels) matrix [X_0 | X_1 | ... | X_nmax] of rotor blocks.
struct BlockLayout {
    Eigen::Index m = 0;
    Eigen::Index levels = 0;

    explicit BlockLayout(const QuantumSpace& s)
        : m(static_cast<Eigen::Index>(s.momenta())), levels(static_cast<Eigen::Index>(s.levels())) {}

    Matrix zeros() const { return Matrix::Zero(m, m * levels); }
    auto block(Matrix& x, Eigen::Index n) const { return x.middleCols(n * m, m); }
    auto block(const Matrix& x, Eigen::Index n) const { return x.middleCols(n * m, m); }
};

/// Full-space matrix of a block-diagonal operator, and back. to_blocks throws
/// if an element outside the Fock-diagonal blocks exceeds `tolerance`.
Matrix to_full(const Matrix& blocks, const QuantumSpace& space);
Matrix to_blocks(const Matrix& full, const QuantumSpace& space, double tolerance = 1e-12);

/// Product state |psi_rotor><psi_rotor| (x) |n><n|.
Matrix product_state(const Vector& rotor, int fock, const QuantumSpace& space);

/// Which terms of the generator to apply.
enum class Part { all, hamiltonian, hot, cold };

/// Lindblad generator on Fock-block-diagonal operators:
/// L X = -i[H, X] + sum_T kappa (nT + 1) D[f_T a] X + kappa nT D[f_T a^dag] X,
/// valid for any (not necessarily Hermitian) X, as needed by the regression
/// recipe. Blocks are processed in parallel.
class Liouvillian {
public:
    Liouvillian(const QuantumSpace& space, const EngineParams& p);

    void apply(const Matrix& x, Matrix& y, Part part = Part::all) const;
    Matrix operator()(const Matrix& x, Part part = Part::all) const {
        Matrix y;
        apply(x, y, part);
        return y;
    }

    const QuantumSpace& space() const { return space_; }
    const EngineParams& params() const { return params_; }
    const RotorOps& rotor() const { return rotor_; }
    const BlockLayout& layout() const { return layout_; }

    /// H_n - (i/2) G_n restricted to Fock level n: the generator of the
    /// no-jump evolution inside that level.
    const Band& effective(int n) const { return effective_[static_cast<std::size_t>(n)]; }
    /// Rates of the four channels: {hot down, hot up, cold down, cold up}.
    struct Rates {
        double hot_down, hot_up, cold_down, cold_up;
    };
    const Rates& rates() const { return rates_; }

private:
    QuantumSpace space_;
    EngineParams params_;
    RotorOps rotor_;
    BlockLayout layout_;
    Rates rates_;
    std::vector<Band> hamiltonian_; ///< H_n
    std::vector<Band> hot_loss_;    ///< (1/2) G_n^hot
    std::vector<Band> cold_loss_;
    std::vector<Band> effective_;   ///< H_n - (i/2) G_n
    std::vector<Band> effective_adj_;
};

/// Serial reference: the dense Lindblad formula on the full space.
Matrix reference_apply(const OperatorSet& ops, const Matrix& rho);

} // namespace rotor::quantum
