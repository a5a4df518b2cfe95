#include "rotor/quantum/master.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace rotor::quantum {

namespace {

void hermitize(Matrix& x, const BlockLayout& lay) {
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        auto b = lay.block(x, n);
        for (Eigen::Index j = 0; j < lay.m; ++j) {
            b(j, j) = b(j, j).real();
            for (Eigen::Index i = j + 1; i < lay.m; ++i) {
                const cd avg = 0.5 * (b(i, j) + std::conj(b(j, i)));
                b(i, j) = avg;
                b(j, i) = std::conj(avg);
            }
        }
    }
}

double block_trace(const Matrix& x, const BlockLayout& lay) {
    double tr = 0.0;
    for (Eigen::Index n = 0; n < lay.levels; ++n) tr += lay.block(x, n).trace().real();
    return tr;
}

void require_increasing(const std::vector<double>& times) {
    if (times.empty()) throw std::invalid_argument("evolve_master: empty output grid");
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) {
            throw std::invalid_argument("evolve_master: output times must increase");
        }
    }
}

Dopri5<Matrix> make_stepper(const Liouvillian& lv, double tol) {
    return Dopri5<Matrix>(
        [&lv](double, const Matrix& x, Matrix& y) { lv.apply(x, y); }, DopriOptions{.tol = tol});
}

} // namespace

Matrix von_mises_state(const QuantumSpace& space, double k, double mu) {
    return product_state(von_mises_coefficients(space.m_min, space.m_max, k, mu), 0, space);
}

MasterResult evolve_master(const Liouvillian& lv, const Matrix& rho0,
                           const std::vector<double>& times, const MasterOptions& opt) {
    require_increasing(times);
    const BlockLayout& lay = lv.layout();
    for (double tc : opt.checkpoint_times) {
        if (std::find(times.begin(), times.end(), tc) == times.end()) {
            throw std::invalid_argument("evolve_master: checkpoint time not on the output grid");
        }
    }
    MasterResult out;
    Matrix rho = rho0;
    double t = times.front();
    const double trace0 = block_trace(rho, lay);

    auto emit = [&]() {
        AngleDistribution a;
        out.records.push_back(q_record(lv, t, rho, opt.angle_points, &a));
        if (opt.angle_points > 0) out.angles.push_back(std::move(a));
        if (std::find(opt.checkpoint_times.begin(), opt.checkpoint_times.end(), t) !=
            opt.checkpoint_times.end()) {
            out.checkpoints.push_back({t, rho});
        }
        if (opt.on_record) opt.on_record(out.records.back());
    };

    Dopri5<Matrix> stepper = make_stepper(lv, opt.tol);
    auto hook = [&](double now, Matrix& x) {
        hermitize(x, lay);
        const double drift = std::abs(block_trace(x, lay) - trace0);
        if (!(drift <= opt.trace_drift_limit)) {
            std::ostringstream msg;
            msg << "trace drift " << drift << " at t = " << now << " exceeds "
                << opt.trace_drift_limit << " (step size " << stepper.step_size()
                << ", accepted steps " << stepper.accepted()
                << "); tighten tol or check the truncation";
            throw TraceDrift(msg.str());
        }
    };

    emit();
    for (std::size_t i = 1; i < times.size(); ++i) {
        stepper.advance(t, rho, times[i], hook);
        emit();
    }
    out.steps = stepper.accepted();
    out.attempts = stepper.attempts();
    return out;
}

namespace {

constexpr char kMagic[8] = {'R', 'T', 'R', 'C', 'H', 'K', '0', '1'};

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

} // namespace

void write_checkpoint(const std::string& path, const QuantumSpace& space, const Checkpoint& c) {
    static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os.write(kMagic, sizeof kMagic);
    put<std::int32_t>(os, space.m_min);
    put<std::int32_t>(os, space.m_max);
    put<std::int32_t>(os, space.n_max);
    put<double>(os, c.t);
    const BlockLayout lay(space);
    if (c.rho.rows() != lay.m || c.rho.cols() != lay.m * lay.levels) {
        throw std::invalid_argument("checkpoint: state does not match the space");
    }
    // Block storage is already [X_0 | X_1 | ...] column-major.
    os.write(reinterpret_cast<const char*>(c.rho.data()),
             static_cast<std::streamsize>(c.rho.size() * sizeof(cd)));
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint read_checkpoint(const std::string& path, QuantumSpace& space) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        throw std::runtime_error("checkpoint: bad magic in " + path);
    }
    space.m_min = get<std::int32_t>(is);
    space.m_max = get<std::int32_t>(is);
    space.n_max = get<std::int32_t>(is);
    space.validate();
    Checkpoint c;
    c.t = get<double>(is);
    const BlockLayout lay(space);
    c.rho.resize(lay.m, lay.m * lay.levels);
    is.read(reinterpret_cast<char*>(c.rho.data()),
            static_cast<std::streamsize>(c.rho.size() * sizeof(cd)));
    if (!is) throw std::runtime_error("checkpoint: truncated file " + path);
    return c;
}

namespace {

double two_time_denominator(const Matrix& rho, const BlockLayout& lay) {
    return 1.0 - std::norm(angle_moment(rotor_marginal(rho, lay), 2));
}

// Regression row from checkpoint c. The denominator factor at each t2 comes
// from `d2` when given, otherwise rho is propagated alongside X.
std::vector<double> regression_row(const Liouvillian& lv, const Checkpoint& c,
                                   const std::vector<double>& t2_grid, double tol,
                                   const std::vector<double>* d2) {
    const BlockLayout& lay = lv.layout();
    const Band& e = lv.rotor().shift;
    const Band ed = e.adjoint();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    Matrix x = lay.zeros();
    for (Eigen::Index n = 0; n < lay.levels; ++n) {
        e.left_add(lay.block(c.rho, n), lay.block(x, n), 0.5);
        e.right_add(lay.block(c.rho, n), lay.block(x, n), 0.5);
    }
    Matrix rho;
    if (!d2) rho = c.rho;
    const double d1 = two_time_denominator(c.rho, lay);

    Dopri5<Matrix> sx = make_stepper(lv, tol);
    Dopri5<Matrix> sr = make_stepper(lv, tol);
    double tx = c.t, tr = c.t;
    std::vector<double> row;
    for (std::size_t j = 0; j < t2_grid.size(); ++j) {
        const double t2 = t2_grid[j];
        if (t2 < c.t) throw std::invalid_argument("q_two_time_S: t2 must not precede t1");
        sx.advance(tx, x, t2);
        double dd = 0.0;
        if (d2) {
            dd = (*d2)[j];
        } else {
            sr.advance(tr, rho, t2);
            dd = two_time_denominator(rho, lay);
        }
        cd minus = 0.0, plus = 0.0;
        for (Eigen::Index n = 0; n < lay.levels; ++n) {
            minus += band_trace(ed, lay.block(x, n));
            plus += band_trace(e, lay.block(x, n));
        }
        row.push_back(d1 <= 1e-9 || dd <= 1e-9
                          ? nan
                          : (std::norm(minus) - std::norm(plus)) / std::sqrt(d1 * dd));
    }
    return row;
}

} // namespace

std::vector<double> q_two_time_S(const Liouvillian& lv, const Checkpoint& c,
                                 const std::vector<double>& t2_grid, double tol) {
    return regression_row(lv, c, t2_grid, tol, nullptr);
}

std::vector<std::vector<double>> q_correlation_grid(const Liouvillian& lv,
                                                    const std::vector<Checkpoint>& checkpoints,
                                                    double tol) {
    const std::size_t n = checkpoints.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = two_time_denominator(checkpoints[i].rho, lv.layout());
    std::vector<std::vector<double>> grid(n, std::vector<double>(n, 0.0));
    // Rows are independent; the later ones are cheaper, so hand them out dynamically.
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> later, dl;
        for (std::size_t j = i; j < n; ++j) {
            later.push_back(checkpoints[j].t);
            dl.push_back(d[j]);
        }
        const std::vector<double> row = regression_row(lv, checkpoints[i], later, tol, &dl);
        for (std::size_t j = i; j < n; ++j) grid[i][j] = row[j - i];
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) grid[i][j] = grid[j][i];
    return grid;
}

} // namespace rotor::quantum
