#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rotor/classical.hpp"
#include "rotor/ensemble.hpp"

using namespace rotor;
using namespace rotor::classical;
using doctest::Approx;

namespace {

constexpr double pi = std::numbers::pi;

EngineParams make(double n_hot, double n_cold, double kappa = 1.0, double inertia = 1.0) {
    EngineParams p;
    p.n_hot = n_hot;
    p.n_cold = n_cold;
    p.kappa = kappa;
    p.inertia = inertia;
    return p;
}

double sample_sd(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

} // namespace

TEST_CASE("initial states") {
    RandomStream rng(7);
    InitSpec det;
    det.intensity = IntensityInit::mean;
    const auto s = sample_initial(det, make(1, 0), rng);
    CHECK(s.phi == Approx(pi / 2));
    CHECK(s.lz == 0.0);
    CHECK(s.n == Approx(1.0));

    InitSpec g;
    g.deterministic = false;
    g.k = 10.0;
    std::vector<double> phi, lz;
    for (int i = 0; i < 100000; ++i) {
        const auto x = sample_initial(g, make(1, 0), rng);
        phi.push_back(x.phi);
        lz.push_back(x.lz);
        CHECK_FALSE(x.n < 0.0);
    }
    CHECK(sample_sd(phi) == Approx(1.0 / std::sqrt(20.0)).epsilon(0.03));
    CHECK(sample_sd(lz) == Approx(std::sqrt(5.0)).epsilon(0.03));

    g.k = 0.5;
    CHECK_THROWS_AS(sample_initial(g, make(1, 0), rng), std::invalid_argument);
}

TEST_CASE("stationary initial intensity is exponential with the local mean") {
    RandomStream rng(11);
    InitSpec det;
    double sum = 0.0;
    double sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double x = sample_initial(det, make(2, 0), rng).n;
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    CHECK(mean == Approx(2.0).epsilon(0.01));
    // Exponential: second moment is twice the squared mean.
    CHECK(sum2 / n == Approx(8.0).epsilon(0.03));
}

TEST_CASE("single steps") {
    const ClassicalState s{0.3, 1.7, 0.0};
    const auto vac = make(0, 0, 5.0, 2.0);
    const auto e = step_euler(s, 1e-3, 0.02, vac);
    CHECK(e.phi == Approx(0.3 + 1.7 / 2.0 * 1e-3));
    CHECK(e.lz == 1.7);
    CHECK(e.n == 0.0);

    auto closed = make(1, 0, 1.0);
    closed.kappa = 0.0; // bypasses validate on purpose: closed pendulum
    const ClassicalState q{0.8, 0.4, 1.3};
    const auto c = step_euler(q, 1e-2, 0.0, closed);
    CHECK(c.lz == Approx(0.4 + 1.3 * std::sin(0.8) * 1e-2));
    CHECK(c.n == Approx(1.3));

    const auto p = make(1, 0.2, 3.0);
    const double dt = 1e-3;
    const double dW = std::sqrt(dt);
    const auto eu = step_euler(q, dt, dW, p);
    const auto mi = step_milstein(q, dt, dW, p);
    CHECK(mi.n == Approx(eu.n).epsilon(1e-15));
    CHECK(mi.phi == eu.phi);
    CHECK(mi.lz == eu.lz);

    const auto mi2 = step_milstein(q, dt, 2.0 * dW, p);
    const auto eu2 = step_euler(q, dt, 2.0 * dW, p);
    const double rate = kappa_eff(q.phi, p);
    const double nbar = nbar_eff(q.phi, p);
    CHECK(mi2.n - eu2.n == Approx(0.5 * rate * nbar * (4.0 * dt - dt)));
}

TEST_CASE("backaction step") {
    const auto p = make(1, 0, 1.0);
    const double dt = 1e-3;
    const ClassicalState empty{0.2, 0.5, 0.0};
    CHECK(step_backaction(empty, dt, 0.01, 0.03, p).lz == step_euler(empty, dt, 0.01, p).lz);
    const ClassicalState top{pi / 2, 0.5, 1.0};
    CHECK(step_backaction(top, dt, 0.01, 0.03, p).lz ==
          Approx(step_euler(top, dt, 0.01, p).lz).epsilon(1e-15));
    // phi = 0, n = 1: diffusion coefficient kappa n (nH + nC)/2 cos^2 = 0.5.
    const ClassicalState zero{0.0, 0.0, 1.0};
    const double dU = 0.05;
    const double kick = step_backaction(zero, dt, 0.0, dU, p).lz - step_euler(zero, dt, 0.0, p).lz;
    CHECK(kick * kick / (dU * dU) == Approx(0.5));
}

TEST_CASE("general profile step agrees with the standard kernel") {
    auto copy = ModulationProfile::custom(
        "sine-copy", [](double x) { return 0.5 * (1 + std::sin(x)); },
        [](double x) { return 0.5 * (1 - std::sin(x)); },
        [](double x) { return 0.5 * std::cos(x); }, [](double x) { return -0.5 * std::cos(x); });
    const auto p = make(1.5, 0.5, 2.0);
    const ClassicalState s{0.7, -0.3, 0.9};
    for (auto noise : {NoiseModel::backaction_free, NoiseModel::backaction}) {
        for (auto scheme : {Scheme::euler, Scheme::milstein}) {
            const IntegratorSpec integ{scheme, noise, 1e-3};
            const auto a = step_general(s, 1e-3, 0.02, -0.01, p, copy, integ);
            const auto b =
                step_general(s, 1e-3, 0.02, -0.01, p, ModulationProfile::standard(), integ);
            CHECK(a.phi == Approx(b.phi).epsilon(1e-14));
            CHECK(a.lz == Approx(b.lz).epsilon(1e-14));
            CHECK(a.n == Approx(b.n).epsilon(1e-14));
        }
    }
}

TEST_CASE("frozen-angle intensity relaxes to the local occupation") {
    RandomStream rng(3);
    const double dt = 1e-3;
    const double sd = std::sqrt(dt);
    double n = 1.0;
    double sum = 0.0;
    const long steps = 10'000'000;
    for (long i = 0; i < 10000; ++i) {
        n = detail::intensity_step(n, 1.0, 1.0, dt, rng.normal(sd), Scheme::euler);
    }
    for (long i = 0; i < steps; ++i) {
        n = detail::intensity_step(n, 1.0, 1.0, dt, rng.normal(sd), Scheme::euler);
        sum += n;
    }
    CHECK(sum / static_cast<double>(steps) == Approx(1.0).epsilon(0.02));
}

TEST_CASE("closed pendulum conserves energy to first order in dt") {
    auto drift = [](double dt) {
        auto p = make(1, 0, 1.0);
        p.kappa = 0.0;
        ClassicalState s{0.4, 0.9, 1.2};
        const double e0 = s.lz * s.lz / 2.0 + s.n * std::cos(s.phi);
        const long steps = std::lround(5.0 / dt);
        for (long i = 0; i < steps; ++i) s = step_euler(s, dt, 0.0, p);
        return std::abs(s.lz * s.lz / 2.0 + s.n * std::cos(s.phi) - e0);
    };
    const double d1 = drift(1e-3);
    const double d2 = drift(5e-4);
    CHECK(d1 < 1e-2);
    CHECK(d1 / d2 == Approx(2.0).epsilon(0.1));
}

TEST_CASE("trajectory determinism, guard and divergence") {
    const auto p = make(1, 0, 10.0);
    InitSpec init;
    IntegratorSpec integ{Scheme::milstein, NoiseModel::backaction, 1e-3};
    const auto a = simulate_trajectory(p, ModulationProfile::standard(), init, 2.0, integ, 10, 42);
    const auto b = simulate_trajectory(p, ModulationProfile::standard(), init, 2.0, integ, 10, 42);
    REQUIRE(a.states.size() == 201);
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(a.states[i].phi == b.states[i].phi);
        CHECK(a.states[i].lz == b.states[i].lz);
        CHECK(a.states[i].n == b.states[i].n);
        CHECK(a.states[i].n >= 0.0);
    }
    for (std::size_t i = 1; i < a.times.size(); ++i) CHECK(a.times[i] > a.times[i - 1]);

    IntegratorSpec coarse = integ;
    coarse.dt = 2e-3;
    CHECK_THROWS_AS(simulate_trajectory(p, ModulationProfile::standard(), init, 2.0, coarse, 10, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(simulate_trajectory(p, ModulationProfile::standard(), init, 2.0005, integ, 10,
                                        1),
                    std::invalid_argument);

    InitSpec bad;
    bad.mu = std::numeric_limits<double>::quiet_NaN();
    try {
        simulate_trajectory(p, ModulationProfile::standard(), bad, 1.0, integ, 10, 1);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.step() == 1);
    }
}

TEST_CASE("vacuum rotor conserves angular momentum") {
    InitSpec init;
    init.deterministic = false;
    init.k = 4.0;
    init.intensity = IntensityInit::zero;
    IntegratorSpec integ{Scheme::euler, NoiseModel::backaction, 1e-3};
    const auto tr =
        simulate_trajectory(make(0, 0, 1.0), ModulationProfile::standard(), init, 3.0, integ, 100, 5);
    for (const auto& s : tr.states) CHECK(s.lz == tr.states.front().lz);
}

TEST_CASE("dt calibration") {
    const auto fast = calibrate_dt(make(1, 0, 100.0), ModulationProfile::standard(), Scheme::euler);
    CHECK(fast.dt <= max_stable_dt(make(1, 0, 100.0)));
    CHECK(fast.relative_bias <= 5e-3);
    const auto cold = calibrate_dt(make(0, 0, 1.0), ModulationProfile::standard(), Scheme::euler);
    CHECK(cold.halvings == 0);
}

TEST_CASE("ensemble of one trajectory") {
    EnsembleConfig c;
    c.params = make(1, 0, 5.0);
    c.integ.dt = 1e-3;
    c.t_max = 1.0;
    c.output_stride = 100;
    c.trajectories = 1;
    c.base_seed = 9;
    const auto ens = run_ensemble(c);
    const auto tr = simulate_trajectory(c.params, c.profile, c.init, c.t_max, c.integ,
                                        c.output_stride, derive_seed(9, 0));
    REQUIRE(ens.records.size() == tr.states.size());
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
        CHECK(ens.records[i].mean_lz == tr.states[i].lz);
        CHECK(ens.records[i].mean_n == tr.states[i].n);
        CHECK(ens.records[i].var_lz == 0.0);
        CHECK(ens.records[i].var_n == 0.0);
    }
}

TEST_CASE("parallel ensemble matches the serial reference") {
    EnsembleConfig c;
    c.params = make(1, 0.1, 4.0);
    c.init.deterministic = false;
    c.integ = {Scheme::milstein, NoiseModel::backaction, 1e-3};
    c.t_max = 2.0;
    c.output_stride = 50;
    c.trajectories = 300;
    c.base_seed = 1234;
    c.keep_every = 4;
    c.snapshot_times = {1.0, 2.0};
    const auto par = run_ensemble(c);
    const auto ser = run_ensemble_serial(c);
    const auto again = run_ensemble(c);
    REQUIRE(par.records.size() == ser.records.size());
    CHECK(par.count == ser.count);
    for (std::size_t i = 0; i < par.records.size(); ++i) {
        const auto& a = par.records[i];
        const auto& b = ser.records[i];
        CHECK(a.mean_lz == Approx(b.mean_lz).epsilon(1e-12));
        CHECK(a.var_lz == Approx(b.var_lz).epsilon(1e-10));
        CHECK(a.mean_n == Approx(b.mean_n).epsilon(1e-12));
        CHECK(a.var_n == Approx(b.var_n).epsilon(1e-10));
        CHECK(a.n_sin_lz == Approx(b.n_sin_lz).epsilon(1e-10));
        CHECK(a.hot_deficit_cos == Approx(b.hot_deficit_cos).epsilon(1e-10));
        CHECK(a.mean_cos2 == Approx(b.mean_cos2).epsilon(1e-12));
        CHECK(again.records[i].var_lz == a.var_lz);
        CHECK(std::abs(a.mean_cos) <= 1.0);
        CHECK(a.var_lz >= 0.0);
    }
    CHECK(par.kept_phi == ser.kept_phi);
    CHECK(par.kept_times == ser.kept_times);
    REQUIRE(par.snapshots.size() == 2);
    CHECK(par.snapshots[1].n == ser.snapshots[1].n);
}

TEST_CASE("backaction noise has zero mean per step") {
    const auto p = make(1, 0.3, 2.0);
    const ClassicalState s{0.4, 0.7, 1.1};
    const double dt = 1e-3;
    for (double dU : {0.01, 0.05, 0.2}) {
        const double up = step_backaction(s, dt, 0.02, dU, p).lz;
        const double down = step_backaction(s, dt, 0.02, -dU, p).lz;
        CHECK(0.5 * (up + down) == Approx(step_euler(s, dt, 0.02, p).lz).epsilon(1e-14));
    }
}

TEST_CASE("backaction widens the momentum spread") {
    EnsembleConfig c;
    c.params = make(1, 0, 1.0);
    c.integ = {Scheme::euler, NoiseModel::backaction_free, 1e-3};
    c.t_max = 10.0;
    c.output_stride = 1000;
    c.trajectories = 4000;
    const auto free = run_ensemble(c);
    c.integ.noise = NoiseModel::backaction;
    c.base_seed = 2;
    const auto back = run_ensemble(c);
    const double n = static_cast<double>(c.trajectories);
    for (std::size_t i = 1; i < free.records.size(); ++i) {
        const auto& a = free.records[i];
        const auto& b = back.records[i];
        // Var of a sample variance is about 2 sigma^4 / n for near-Gaussian data.
        const double se = std::sqrt(2.0 * (a.var_lz * a.var_lz + b.var_lz * b.var_lz) / n);
        CHECK(b.var_lz - a.var_lz > 3.0 * se);
    }
}
