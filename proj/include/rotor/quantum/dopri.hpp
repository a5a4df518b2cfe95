#pragma once

// Dormand-Prince 5(4) with absolute max-norm error control, FSAL, and exact
// landing on requested times. State is any Eigen dense type.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rotor::quantum {

class StepUnderflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DopriOptions {
    double tol = 1e-8;
    double h_initial = 0.0; ///< 0: estimated from the first derivative
    double h_min = 1e-12;
    double h_max = std::numeric_limits<double>::infinity();
};

template <class State>
class Dopri5 {
public:
    /// rhs(t, x, dxdt) fills dxdt.
    using Rhs = std::function<void(double, const State&, State&)>;
    /// Called on each accepted state; may modify it (e.g. re-symmetrize).
    using Hook = std::function<void(double, State&)>;

    Dopri5(Rhs rhs, DopriOptions opt = {}) : rhs_(std::move(rhs)), opt_(opt) {}

    /// Single trial step of size h from (t, x) using the supplied derivative
    /// k1 = f(t, x). Writes the 5th-order result and returns the error norm.
    double attempt(double t, const State& x, const State& k1, double h, State& out) {
        constexpr double a21 = 1.0 / 5;
        constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                         a54 = -212.0 / 729;
        constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                         a64 = 49.0 / 176, a65 = -5103.0 / 18656;
        constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                         b5 = -2187.0 / 6784, b6 = 11.0 / 84;
        constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                         e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

        tmp_ = x + h * a21 * k1;
        rhs_(t + h / 5, tmp_, k2_);
        tmp_ = x + h * (a31 * k1 + a32 * k2_);
        rhs_(t + 3 * h / 10, tmp_, k3_);
        tmp_ = x + h * (a41 * k1 + a42 * k2_ + a43 * k3_);
        rhs_(t + 4 * h / 5, tmp_, k4_);
        tmp_ = x + h * (a51 * k1 + a52 * k2_ + a53 * k3_ + a54 * k4_);
        rhs_(t + 8 * h / 9, tmp_, k5_);
        tmp_ = x + h * (a61 * k1 + a62 * k2_ + a63 * k3_ + a64 * k4_ + a65 * k5_);
        rhs_(t + h, tmp_, k6_);
        out = x + h * (b1 * k1 + b3 * k3_ + b4 * k4_ + b5 * k5_ + b6 * k6_);
        rhs_(t + h, out, k7_);
        tmp_ = h * (e1 * k1 + e3 * k3_ + e4 * k4_ + e5 * k5_ + e6 * k6_ + e7 * k7_);
        return tmp_.cwiseAbs().maxCoeff();
    }

    /// Derivative at the end of the last attempt (FSAL).
    const State& last_derivative() const { return k7_; }

    /// Integrate (t, x) forward to exactly t_end. Step proposals persist across
    /// calls so output times do not shrink the natural step.
    void advance(double& t, State& x, double t_end, const Hook& hook = {}) {
        if (t_end < t) throw std::invalid_argument("Dopri5: cannot integrate backwards");
        while (t < t_end) step(t, x, t_end, hook);
    }

    /// One accepted step from (t, x), landing on t_end if it is within reach.
    /// The state before the step stays available as previous_state().
    void step(double& t, State& x, double t_end, const Hook& hook = {}) {
        if (!have_k1_ || k1_t_ != t) {
            k1_.resizeLike(x);
            rhs_(t, x, k1_);
            have_k1_ = true;
            k1_t_ = t;
        }
        if (h_ <= 0.0) h_ = opt_.h_initial > 0.0 ? opt_.h_initial : initial_step(x);
        for (;;) {
            const double remaining = t_end - t;
            // Land exactly on t_end; a near-miss would leave a sliver step.
            const bool clipped = h_ >= remaining * (1.0 - 1e-12);
            const double h = clipped ? remaining : h_;
            const double err = attempt(t, x, k1_, h, next_);
            ++attempts_;
            if (std::isfinite(err) && err <= opt_.tol) {
                prev_ = x;
                prev_k1_ = k1_;
                prev_t_ = t;
                t = clipped ? t_end : t + h;
                x.swap(next_);
                if (hook) {
                    hook(t, x);
                    rhs_(t, x, k1_);
                } else {
                    k1_.swap(k7_);
                }
                k1_t_ = t;
                ++accepted_;
                const double grow = grow_factor(err);
                if (!clipped || h * grow > h_) h_ = std::min(h * grow, opt_.h_max);
                return;
            }
            h_ = std::isfinite(err) ? h * std::max(0.2, 0.9 * std::pow(err / opt_.tol, -0.2))
                                    : h / 5;
            if (h_ < opt_.h_min) {
                std::ostringstream msg;
                msg << "step size underflow at t = " << t << " (h = " << h_ << ", error "
                    << err << " vs tol " << opt_.tol << ")";
                throw StepUnderflow(msg.str());
            }
        }
    }

    /// Re-evaluate the last accepted step with a shorter length h from its
    /// starting point; accurate to the same tolerance since h is smaller.
    void redo_last(double h, State& out) { attempt(prev_t_, prev_, prev_k1_, h, out); }
    double previous_time() const { return prev_t_; }
    const State& previous_state() const { return prev_; }

    /// Forget the cached derivative (state was changed externally).
    void reset() { have_k1_ = false; }
    double step_size() const { return h_; }
    std::size_t accepted() const { return accepted_; }
    std::size_t attempts() const { return attempts_; }

private:
    double grow_factor(double err) const {
        if (err == 0.0) return 5.0;
        return std::clamp(0.9 * std::pow(err / opt_.tol, -0.2), 0.2, 5.0);
    }

    double initial_step(const State& x) const {
        const double d0 = x.cwiseAbs().maxCoeff();
        const double d1 = k1_.cwiseAbs().maxCoeff();
        double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        return std::clamp(h * std::pow(opt_.tol, 0.2), opt_.h_min * 10, opt_.h_max);
    }

    Rhs rhs_;
    DopriOptions opt_;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, next_, prev_, prev_k1_;
    double prev_t_ = 0.0;
    bool have_k1_ = false;
    double k1_t_ = 0.0;
    double h_ = 0.0;
    std::size_t accepted_ = 0, attempts_ = 0;
};

} // namespace rotor::quantum
