#include "rotor/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

#include "rotor/engine.hpp"

namespace rotor {

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
    double error = 0.0;
    // Relative target well below abs_tol for O(1) integrands; the absolute
    // contract is checked on the returned estimate.
    const double value = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a, b, 20, 1e-13, &error);
    if (!std::isfinite(value) || error > abs_tol) {
        throw std::runtime_error("integrate: error estimate " + std::to_string(error) +
                                 " exceeds tolerance " + std::to_string(abs_tol));
    }
    return value;
}

double cycle_average(const std::function<double(double)>& f, double abs_tol) {
    return integrate(f, 0.0, kTwoPi, abs_tol * kTwoPi) / kTwoPi;
}

} // namespace rotor
