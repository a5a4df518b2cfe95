#include "rotor/classical.hpp"

#include <algorithm>
#include <sstream>

namespace rotor::classical {

ClassicalState sample_initial(const InitSpec& init, const EngineParams& p,
                              const ModulationProfile& profile, RandomStream& rng) {
    ClassicalState s;
    if (init.deterministic) {
        s.phi = init.mu;
        s.lz = 0.0;
    } else {
        if (!(init.k >= 1.0)) {
            throw std::invalid_argument("sample_initial: concentration k must be >= 1");
        }
        s.phi = init.mu + rng.normal(1.0 / std::sqrt(2.0 * init.k));
        s.lz = rng.normal(std::sqrt(init.k / 2.0));
    }
    const double nbar = local_bath(s.phi, p, profile).occupation;
    switch (init.intensity) {
    case IntensityInit::stationary:
        s.n = nbar > 0.0 ? rng.exponential(nbar) : 0.0;
        break;
    case IntensityInit::mean:
        s.n = nbar;
        break;
    case IntensityInit::zero:
        s.n = 0.0;
        break;
    }
    return s;
}

ClassicalState sample_initial(const InitSpec& init, const EngineParams& p, RandomStream& rng) {
    return sample_initial(init, p, ModulationProfile::standard(), rng);
}

ClassicalState step_euler(const ClassicalState& s, double dt, double dW, const EngineParams& p) {
    return detail::advance_standard(s, dt, dW, 0.0, p, Scheme::euler, false);
}

ClassicalState step_milstein(const ClassicalState& s, double dt, double dW,
                             const EngineParams& p) {
    return detail::advance_standard(s, dt, dW, 0.0, p, Scheme::milstein, false);
}

ClassicalState step_backaction(const ClassicalState& s, double dt, double dW, double dU,
                               const EngineParams& p, Scheme scheme) {
    return detail::advance_standard(s, dt, dW, dU, p, scheme, true);
}

ClassicalState step_general(const ClassicalState& s, double dt, double dW, double dU,
                            const EngineParams& p, const ModulationProfile& profile,
                            const IntegratorSpec& integ) {
    if (profile.is_standard()) {
        return detail::advance_standard(s, dt, dW, dU, p, integ.scheme,
                                        integ.noise == NoiseModel::backaction);
    }
    const auto bath = local_bath(s.phi, p, profile);
    ClassicalState out;
    out.phi = s.phi + s.lz / p.inertia * dt;
    out.lz = s.lz + s.n * std::sin(s.phi) * dt;
    if (integ.noise == NoiseModel::backaction) {
        out.lz -= std::sqrt(2.0 * s.n * bath.backaction) * dU;
    }
    out.n = detail::intensity_step(s.n, bath.rate, bath.occupation, dt, dW, integ.scheme);
    return out;
}

Stepper::Stepper(const EngineParams& p, const ModulationProfile& profile,
                 const IntegratorSpec& integ)
    : params_(p),
      profile_(profile),
      integ_(integ),
      sqrt_dt_(std::sqrt(integ.dt)),
      standard_(profile.is_standard()),
      backaction_(integ.noise == NoiseModel::backaction) {
    if (!(integ.dt > 0.0)) throw std::invalid_argument("Stepper: dt must be > 0");
}

double max_stable_dt(const EngineParams& p) {
    return 0.01 * std::min(1.0 / p.kappa, std::sqrt(p.inertia));
}

namespace {

double stiffest_angle(const EngineParams& p, const ModulationProfile& profile) {
    if (profile.is_standard()) return std::numbers::pi / 2.0;
    double best = 0.0;
    double best_rate = -1.0;
    for (int i = 0; i < 720; ++i) {
        const double phi = kTwoPi * i / 720.0;
        const double rate = local_bath(phi, p, profile).rate;
        if (rate > best_rate) {
            best_rate = rate;
            best = phi;
        }
    }
    return best;
}

// Relative bias of the stationary mean of the scaled process x = n / nbar,
// dx = -r (x - 1) dt + sqrt(2 r x) dW, whose law does not depend on nbar.
// Clamping is the only source of mean bias in the discretized drift, so
// <x> - 1 = <clamp excess per step> / (r dt); this has far less variance
// than a plain time average of x.
double clamp_bias(double rate, double dt, Scheme scheme, std::uint64_t steps) {
    RandomStream rng(derive_seed(0x5eed'ca11'b4a7'e000ULL, 0));
    const double sqrt_dt = std::sqrt(dt);
    double x = 1.0;
    const std::uint64_t burn = static_cast<std::uint64_t>(10.0 / (rate * dt)) + 1;
    double excess = 0.0;
    for (std::uint64_t i = 0; i < burn + steps; ++i) {
        const double dW = rng.normal(sqrt_dt);
        double next = x - rate * (x - 1.0) * dt + std::sqrt(2.0 * x * rate) * dW;
        if (scheme == Scheme::milstein) next += 0.5 * rate * (dW * dW - dt);
        if (next < 0.0) {
            if (i >= burn) excess -= next;
            next = 0.0;
        }
        x = next;
    }
    return excess / static_cast<double>(steps) / (rate * dt);
}

} // namespace

Calibration calibrate_dt(const EngineParams& p, const ModulationProfile& profile, Scheme scheme,
                         double dt_start, double tolerance) {
    Calibration cal{std::min(dt_start, max_stable_dt(p)), 0, 0.0};
    const double phi = stiffest_angle(p, profile);
    const auto bath = local_bath(phi, p, profile);
    if (bath.occupation <= 0.0) return cal;
    constexpr int kMaxHalvings = 20;
    for (;;) {
        cal.relative_bias = std::abs(clamp_bias(bath.rate, cal.dt, scheme, 1'000'000));
        if (cal.relative_bias <= tolerance) return cal;
        if (cal.halvings == kMaxHalvings) {
            throw std::runtime_error("calibrate_dt: no admissible step after 20 halvings");
        }
        cal.dt *= 0.5;
        ++cal.halvings;
    }
}

TimeGrid TimeGrid::make(double t_max, double dt, std::uint64_t stride) {
    if (!(t_max > 0.0)) throw std::invalid_argument("t_max must be > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (stride == 0) throw std::invalid_argument("output stride must be >= 1");
    const double ratio = t_max / (dt * static_cast<double>(stride));
    const double outputs = std::round(ratio);
    if (outputs < 1.0 || std::abs(ratio - outputs) > 1e-6) {
        std::ostringstream msg;
        msg << "t_max = " << t_max << " is not a whole number of output intervals (dt * stride = "
            << dt * static_cast<double>(stride) << ")";
        throw std::invalid_argument(msg.str());
    }
    return {static_cast<std::uint64_t>(outputs) * stride, stride, dt};
}

Trajectory simulate_trajectory(const EngineParams& p, const ModulationProfile& profile,
                               const InitSpec& init, double t_max, const IntegratorSpec& integ,
                               std::uint64_t output_stride, std::uint64_t seed) {
    if (integ.dt > max_stable_dt(p) * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "dt = " << integ.dt << " exceeds the stability guard " << max_stable_dt(p);
        throw std::invalid_argument(msg.str());
    }
    const auto grid = TimeGrid::make(t_max, integ.dt, output_stride);
    const Stepper stepper(p, profile, integ);
    RandomStream rng(seed);

    Trajectory traj;
    traj.seed = seed;
    traj.times.reserve(grid.outputs());
    traj.states.reserve(grid.outputs());

    ClassicalState s = sample_initial(init, p, profile, rng);
    traj.times.push_back(0.0);
    traj.states.push_back(s);
    for (std::uint64_t step = 1; step <= grid.steps; ++step) {
        s = stepper.step(s, rng);
        if (!std::isfinite(s.phi) || !std::isfinite(s.lz) || !std::isfinite(s.n)) {
            throw DivergenceError(step, "non-finite classical state at step " +
                                            std::to_string(step));
        }
        if (step % grid.stride == 0) {
            traj.times.push_back(grid.time(step / grid.stride));
            traj.states.push_back(s);
        }
    }
    return traj;
}

} // namespace rotor::classical
