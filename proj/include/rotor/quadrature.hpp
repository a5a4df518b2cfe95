#pragma once

#include <functional>

namespace rotor {

/// Adaptive Gauss-Kronrod integral of f over [a, b]. Throws std::runtime_error
/// if the error estimate exceeds abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-10);

/// (1/2pi) times the integral of f over one period.
double cycle_average(const std::function<double(double)>& f, double abs_tol = 1e-10);

} // namespace rotor
