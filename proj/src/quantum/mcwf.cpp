#include "rotor/quantum/mcwf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rotor/quantum/dopri.hpp"
#include "rotor/rng.hpp"

namespace rotor::quantum {

namespace {

QSample sample(const Liouvillian& lv, const Vector& psi, int n) {
    const RotorOps& r = lv.rotor();
    const double norm2 = psi.squaredNorm();
    QSample s;
    const Eigen::VectorXd p = psi.cwiseAbs2() / norm2;
    s.lz = p.dot(r.lz);
    s.lz2 = p.dot(r.lz.cwiseProduct(r.lz));
    s.n = n;
    Vector y;
    r.sin_lz_sym.apply(psi, y);
    s.work = n * psi.dot(y).real() / norm2 / (2.0 * lv.params().inertia);
    return s;
}

// Uniform threshold in (0, 1].
double threshold(RandomStream& rng) { return 1.0 - rng.uniform(); }

} // namespace

McwfTrajectory mcwf_trajectory(const Liouvillian& lv, const Vector& psi0, int level0,
                               const std::vector<double>& times, std::uint64_t seed,
                               const McwfOptions& opt) {
    const int top = lv.space().n_max;
    if (psi0.size() != lv.layout().m) throw std::invalid_argument("mcwf: state size mismatch");
    if (level0 < 0 || level0 > top) throw std::invalid_argument("mcwf: Fock level out of range");
    if (times.empty()) throw std::invalid_argument("mcwf: empty output grid");
    const double n0 = psi0.norm();
    if (!(n0 > 0.0)) throw std::invalid_argument("mcwf: zero initial state");

    RandomStream rng(seed);
    McwfTrajectory out;
    Vector psi = psi0 / n0;
    int n = level0;
    double t = times.front();
    const cd mi(0.0, -1.0);
    Dopri5<Vector> stepper(
        [&](double, const Vector& x, Vector& y) {
            lv.effective(n).apply(x, y);
            y *= mi;
        },
        DopriOptions{.tol = opt.tol});

    const auto& rates = lv.rates();
    const RotorOps& r = lv.rotor();
    double r_jump = threshold(rng);
    Vector trial, fh, fc;

    auto jump = [&]() {
        psi.normalize();
        r.f_hot.apply(psi, fh);
        r.f_cold.apply(psi, fc);
        const double h2 = fh.squaredNorm(), c2 = fc.squaredNorm();
        const double up = n < top ? n + 1.0 : 0.0;
        const double w[4] = {rates.hot_down * n * h2, rates.hot_up * up * h2,
                             rates.cold_down * n * c2, rates.cold_up * up * c2};
        const double total = w[0] + w[1] + w[2] + w[3];
        if (!(total > 0.0)) throw std::logic_error("mcwf: norm decayed with no open channel");
        const double u = rng.uniform() * total;
        int k = 3;
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) {
            acc += w[j];
            if (w[j] > 0.0 && u < acc) {
                k = j;
                break;
            }
        }
        while (w[k] == 0.0) --k; // rounding at the top end
        psi = (k < 2 ? fh : fc).normalized();
        n += (k % 2 == 0) ? -1 : 1;
        out.jumps.push_back({t, static_cast<Channel>(k), n});
        r_jump = threshold(rng);
        stepper.reset();
    };

    out.samples.push_back(sample(lv, psi, n));
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (!(times[i] > times[i - 1])) throw std::invalid_argument("mcwf: times must increase");
        while (t < times[i]) {
            stepper.step(t, psi, times[i]);
            if (psi.squaredNorm() > r_jump) continue;
            // Bisect the crossing inside the last step.
            const double t0 = stepper.previous_time();
            double lo = 0.0, hi = t - t0;
            while (hi - lo > opt.jump_time_tol) {
                const double mid = 0.5 * (lo + hi);
                stepper.redo_last(mid, trial);
                (trial.squaredNorm() > r_jump ? lo : hi) = mid;
            }
            stepper.redo_last(hi, trial);
            psi = trial;
            t = std::min(t0 + hi, times[i]);
            jump();
        }
        out.samples.push_back(sample(lv, psi, n));
    }
    out.final_level = n;
    out.final_state = psi.normalized();
    return out;
}

McwfEnsemble mcwf_ensemble(const Liouvillian& lv, const Vector& psi0, int level0,
                           const std::vector<double>& times, std::size_t trajectories,
                           std::uint64_t base_seed, const McwfOptions& opt) {
    if (trajectories < 2) throw std::invalid_argument("mcwf_ensemble: need >= 2 trajectories");
    std::vector<McwfTrajectory> runs(trajectories);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < trajectories; ++i) {
        runs[i] = mcwf_trajectory(lv, psi0, level0, times, derive_seed(base_seed, i), opt);
        runs[i].final_state.resize(0);
    }

    McwfEnsemble e;
    e.times = times;
    e.trajectories = trajectories;
    const double n = static_cast<double>(trajectories);
    auto stat = [&](std::size_t k, double QSample::*field) {
        double mean = 0.0;
        for (const auto& run : runs) mean += run.samples[k].*field;
        mean /= n;
        double ss = 0.0;
        for (const auto& run : runs) ss += std::pow(run.samples[k].*field - mean, 2);
        return McwfStat{mean, std::sqrt(ss / (n - 1.0) / n)};
    };
    for (std::size_t k = 0; k < times.size(); ++k) {
        e.lz.push_back(stat(k, &QSample::lz));
        e.lz2.push_back(stat(k, &QSample::lz2));
        e.n.push_back(stat(k, &QSample::n));
        e.work.push_back(stat(k, &QSample::work));
    }
    for (const auto& run : runs) e.jumps += run.jumps.size();
    return e;
}

} // namespace rotor::quantum
