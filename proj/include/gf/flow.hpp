#pragma once

#include "gf/rates.hpp"
#include "gf/rng.hpp"

#include <optional>

namespace gf {

// Deterministic growth flow phi_z(t) solving y' = tau(y), y(0) = z, together
// with the integrated jump hazard along it. Closed forms are used when tau is
// a pure power (covers the constant case); otherwise an adaptive
// Dormand-Prince integrator is used.
class FlowMap {
public:
    explicit FlowMap(RateModel model, double rel_tol = 1e-10, double abs_tol = 1e-12);

    const RateModel& model() const { return model_; }

    // phi_z(t). Throws FlowExplosion (with the explosion-time estimate) when t
    // reaches the finite explosion time, which exists iff the integral of
    // 1/tau diverges slowly enough at infinity (nu_inf > 1).
    double flow(double z, double t) const;

    // t with phi_z(t) = x, computed as the integral of 1/tau over [z, x].
    double flow_inverse(double z, double x) const;

    // Lambda_z(t): integrated jump intensity along the flow; the first jump
    // time from z has survival exp(-Lambda_z(t)).
    double hazard(double z, double t) const;

    // Finite explosion time of the flow from z, or nullopt when the flow is
    // global.
    std::optional<double> explosion_time(double z) const;

    // First jump time by hazard inversion: draw E ~ Exp(1) and solve
    // Lambda_z(T) = E with a geometrically grown bracket refined by
    // bisection/secant steps. Throws ModelInconsistency when the total hazard
    // stays below E (violated balance assumption).
    double sample_jump_time(double z, Rng& rng) const;

    // Same law, conditioned on the horizon: returns nullopt when the first
    // jump falls beyond cap. One hazard evaluation decides the common
    // no-jump-before-horizon case.
    std::optional<double> sample_jump_time_before(double z, double cap, Rng& rng) const;

    // Thinning sampler on doubling windows with a grid-estimated local
    // majorant of s -> beta(phi_z(s)); must agree in law with the inversion
    // sampler.
    double sample_jump_time_thinning(double z, Rng& rng) const;

private:
    double flow_ode(double z, double t) const;
    double hazard_at_position(double z, double x) const;
    double invert_hazard(double z, double target, double lo, double flo, double hi,
                         double fhi) const;

    RateModel model_;
    double rel_tol_;
    double abs_tol_;
};

}  // namespace gf
