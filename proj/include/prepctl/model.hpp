#pragma once

#include "errors.hpp"
#include "params.hpp"
#include "state.hpp"

namespace prepctl {

namespace detail {
inline double weighted_infectives(double I, double C, double A, const ModelParams& p) {
    return I + p.eta_C * C + p.eta_A * A;
}
inline void require_positive_population(double N) {
    if (!(N > 0.0)) throw DegeneratePopulationError();
}
}  // namespace detail

// Per-susceptible infection rate: beta times the weighted infective
// prevalence. Both state families share the expression; the protected class
// counts in N but contributes no infectivity.
inline double force_of_infection(const SicaState& x, const ModelParams& p) {
    const double N = x.total();
    detail::require_positive_population(N);
    return p.beta * detail::weighted_infectives(x.I, x.C, x.A, p) / N;
}

inline double force_of_infection(const SicaeState& x, const ModelParams& p) {
    const double N = x.total();
    detail::require_positive_population(N);
    return p.beta * detail::weighted_infectives(x.I, x.C, x.A, p) / N;
}

// Four-compartment flow. Component sum is Lambda - mu*N - d*A identically.
inline SicaState rhs_sica(const SicaState& x, const ModelParams& p) {
    const double lam = force_of_infection(x, p);
    SicaState dx;
    dx.S = p.Lambda - lam * x.S - p.mu * x.S;
    dx.I = lam * x.S - (p.rho + p.phi + p.mu) * x.I + p.alpha * x.A + p.omega * x.C;
    dx.C = p.phi * x.I - (p.omega + p.mu) * x.C;
    dx.A = p.rho * x.I - (p.alpha + p.mu + p.d) * x.A;
    return dx;
}

// Constant-population limit of the four-compartment flow: valid only at
// d = 0, with incidence beta1 * (I + eta_C C + eta_A A), beta1 = beta*mu/Lambda.
inline SicaState rhs_sica_mass_action(const SicaState& x, const ModelParams& p) {
    if (p.d != 0.0)
        throw InvalidConfigurationError("rhs_sica_mass_action requires d = 0");
    const AuxRates a = aux_rates(p);
    const double lam = a.beta1 * detail::weighted_infectives(x.I, x.C, x.A, p);
    SicaState dx;
    dx.S = p.Lambda - lam * x.S - p.mu * x.S;
    dx.I = lam * x.S - a.xi3 * x.I + p.alpha * x.A + p.omega * x.C;
    dx.C = p.phi * x.I - a.xi2 * x.C;
    dx.A = p.rho * x.I - a.xi1_d0 * x.A;
    return dx;
}

// Five-compartment flow with PrEP uptake psi and default theta.
inline SicaeState rhs_sicae(const SicaeState& x, const ModelParams& p) {
    const double lam = force_of_infection(x, p);
    SicaeState dx;
    dx.S = p.Lambda - lam * x.S - p.mu * x.S - p.psi * x.S + p.theta * x.E;
    dx.I = lam * x.S - (p.rho + p.phi + p.mu) * x.I + p.alpha * x.A + p.omega * x.C;
    dx.C = p.phi * x.I - (p.omega + p.mu) * x.C;
    dx.A = p.rho * x.I - (p.alpha + p.mu + p.d) * x.A;
    dx.E = p.psi * x.S - (p.mu + p.theta) * x.E;
    return dx;
}

// Constant-population limit of the five-compartment flow: d = 0, theta = 0,
// mass-action incidence, protected class drains only through natural death.
inline SicaeState rhs_sicae_mass_action(const SicaeState& x, const ModelParams& p) {
    if (p.d != 0.0 || p.theta != 0.0)
        throw InvalidConfigurationError("rhs_sicae_mass_action requires d = 0 and theta = 0");
    const AuxRates a = aux_rates(p);
    const double lam = a.beta1 * detail::weighted_infectives(x.I, x.C, x.A, p);
    SicaeState dx;
    dx.S = p.Lambda - lam * x.S - (p.mu + p.psi) * x.S;
    dx.I = lam * x.S - a.xi3 * x.I + p.alpha * x.A + p.omega * x.C;
    dx.C = p.phi * x.I - a.xi2 * x.C;
    dx.A = p.rho * x.I - a.xi1_d0 * x.A;
    dx.E = p.psi * x.S - p.mu * x.E;
    return dx;
}

// Controlled five-compartment flow: the uptake rate is the control u, the
// total population is the constant N0 = Lambda/mu (recruitment mu*N0 and the
// incidence denominator both use N0, so the flow is exactly
// population-conserving and its state-derivatives match the adjoint system
// everywhere, not only on the invariant manifold).
inline SicaeState rhs_controlled(const SicaeState& x, double u, const ModelParams& p) {
    if (p.d != 0.0)
        throw InvalidConfigurationError("rhs_controlled requires d = 0");
    const double N0 = p.Lambda / p.mu;
    detail::require_positive_population(N0);
    const double lam = p.beta * detail::weighted_infectives(x.I, x.C, x.A, p) / N0;
    SicaeState dx;
    dx.S = p.Lambda - lam * x.S - p.mu * x.S - x.S * u + p.theta * x.E;
    dx.I = lam * x.S - (p.rho + p.phi + p.mu) * x.I + p.alpha * x.A + p.omega * x.C;
    dx.C = p.phi * x.I - (p.omega + p.mu) * x.C;
    dx.A = p.rho * x.I - (p.alpha + p.mu) * x.A;
    dx.E = x.S * u - (p.mu + p.theta) * x.E;
    return dx;
}

// Array-valued adapters for the generic integrator.

inline auto sica_flow(const ModelParams& p) {
    return [p](double, const Vec4& x) {
        return rhs_sica(SicaState::from_array(x), p).to_array();
    };
}

inline auto sica_mass_action_flow(const ModelParams& p) {
    return [p](double, const Vec4& x) {
        return rhs_sica_mass_action(SicaState::from_array(x), p).to_array();
    };
}

inline auto sicae_flow(const ModelParams& p) {
    return [p](double, const Vec5& x) {
        return rhs_sicae(SicaeState::from_array(x), p).to_array();
    };
}

inline auto sicae_mass_action_flow(const ModelParams& p) {
    return [p](double, const Vec5& x) {
        return rhs_sicae_mass_action(SicaeState::from_array(x), p).to_array();
    };
}

}  // namespace prepctl
