#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <utility>

namespace gf::quad {

// Adaptive Gauss-Kronrod on a finite interval with a smooth integrand.
template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10) {
    if (a == b) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        std::forward<F>(f), a, b, 12, rel_tol);
}

// Quadrature on (0,1) tolerating integrable endpoint singularities
// (y^{mu0} near 0, (1-y)^{mu1} near 1 with mu0, mu1 > -1). tanh_sinh applies
// a double-exponential change of variable clustering nodes at the endpoints,
// which is the substitution y = e^{-s} / 1-y = e^{-s} in disguise.
template <typename F>
double integrate_unit_singular(F&& f, double rel_tol = 1e-11) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    return integrator.integrate(std::forward<F>(f), 0.0, 1.0, rel_tol);
}

}  // namespace gf::quad
