#pragma once

#include <cmath>
#include <cstddef>

#include "errors.hpp"
#include "model.hpp"
#include "params.hpp"
#include "state.hpp"

namespace prepctl {

enum class EquilibriumKind { DiseaseFree, Endemic };

// Which flow the equilibrium annihilates; the residual check and the
// stability analysis both dispatch on it.
enum class ModelFamily { Sica, SicaMassAction, Sicae, SicaeMassAction };

// A steady state together with its bookkeeping. `state` holds `dim` leading
// components (4 for the S-I-C-A families, 5 with the protected class).
struct Equilibrium {
    Vec5 state{};
    std::size_t dim = 4;
    EquilibriumKind kind = EquilibriumKind::DiseaseFree;
    ModelFamily family = ModelFamily::Sica;
    double r0_at_params = 0.0;
    double residual_norm = 0.0;  // ||rhs(state)||_2, filled at construction

    SicaState as_sica() const { return {state[0], state[1], state[2], state[3]}; }
    SicaeState as_sicae() const { return {state[0], state[1], state[2], state[3], state[4]}; }
};

namespace detail {

inline double rhs_norm(const Equilibrium& eq, const ModelParams& p) {
    auto norm4 = [](const SicaState& v) {
        return std::sqrt(v.S * v.S + v.I * v.I + v.C * v.C + v.A * v.A);
    };
    auto norm5 = [](const SicaeState& v) {
        return std::sqrt(v.S * v.S + v.I * v.I + v.C * v.C + v.A * v.A + v.E * v.E);
    };
    switch (eq.family) {
        case ModelFamily::Sica: return norm4(rhs_sica(eq.as_sica(), p));
        case ModelFamily::SicaMassAction: return norm4(rhs_sica_mass_action(eq.as_sica(), p));
        case ModelFamily::Sicae: return norm5(rhs_sicae(eq.as_sicae(), p));
        case ModelFamily::SicaeMassAction:
            return norm5(rhs_sicae_mass_action(eq.as_sicae(), p));
    }
    return 0.0;
}

}  // namespace detail

// Residual of the matching flow at the stored state, refreshed on demand.
inline double equilibrium_residual(const Equilibrium& eq, const ModelParams& p) {
    return detail::rhs_norm(eq, p);
}

inline Equilibrium dfe_sica(const ModelParams& p) {
    Equilibrium eq;
    eq.state = {p.Lambda / p.mu, 0.0, 0.0, 0.0, 0.0};
    eq.dim = 4;
    eq.kind = EquilibriumKind::DiseaseFree;
    eq.family = ModelFamily::Sica;
    eq.r0_at_params = r0(p);
    eq.residual_norm = equilibrium_residual(eq, p);
    return eq;
}

// Disease-free steady state with the protected class populated: PrEP shifts
// susceptibles into E but total remains Lambda/mu.
inline Equilibrium dfe_sicae(const ModelParams& p) {
    const double denom = p.mu * (p.theta + p.psi + p.mu);
    Equilibrium eq;
    eq.state = {(p.theta + p.mu) * p.Lambda / denom, 0.0, 0.0, 0.0,
                p.psi * p.Lambda / denom};
    eq.dim = 5;
    eq.kind = EquilibriumKind::DiseaseFree;
    eq.family = ModelFamily::Sicae;
    eq.r0_at_params = r0(p);
    eq.residual_norm = equilibrium_residual(eq, p);
    return eq;
}

// Endemic steady state of the four-compartment flow, valid for general d.
inline Equilibrium endemic_sica(const ModelParams& p) {
    const double R0 = r0(p);
    if (!(R0 > 1.0))
        throw NoEndemicEquilibriumError(
            "no endemic equilibrium: R0 = " + std::to_string(R0) + " <= 1");
    const AuxRates a = aux_rates(p);
    const double rdx2 = p.rho * p.d * a.xi2;
    // rdx2 - calN < 0 whenever R0 > 1 (calN > calD > rho*d*xi2), so every
    // component below is positive.
    const double denom = rdx2 - a.calN;
    Equilibrium eq;
    eq.state = {p.Lambda * (rdx2 - a.calD) / (p.mu * denom),
                p.Lambda * a.xi1 * a.xi2 * (a.calD - a.calN) / (a.calD * denom),
                p.Lambda * p.phi * a.xi1 * (a.calD - a.calN) / (a.calD * denom),
                p.Lambda * p.rho * a.xi2 * (a.calD - a.calN) / (a.calD * denom),
                0.0};
    eq.dim = 4;
    eq.kind = EquilibriumKind::Endemic;
    eq.family = ModelFamily::Sica;
    eq.r0_at_params = R0;
    eq.residual_norm = equilibrium_residual(eq, p);
    return eq;
}

// Endemic steady state of the five-compartment flow, general d. Existence
// needs the PrEP-adjusted threshold xi4*(calN - calD) - psi*calD > 0
// (equivalently R0 * (theta+mu)/(theta+psi+mu) > 1): uptake at rate psi
// shelters part of the susceptible pool, so R0 > 1 alone is not enough.
inline Equilibrium endemic_sicae(const ModelParams& p) {
    const double R0 = r0(p);
    const AuxRates a = aux_rates(p);
    const double numerator = a.xi4 * (a.calN - a.calD) - p.psi * a.calD;
    if (!(numerator > 0.0))
        throw NoEndemicEquilibriumError(
            "no endemic equilibrium: PrEP-adjusted reproduction number "
            + std::to_string(R0 * a.xi4 / (p.theta + p.psi + p.mu)) + " <= 1");
    const double P = a.xi1 * (p.phi + a.xi2) + p.rho * a.xi2;
    const double F = a.xi4 * a.calN - p.rho * p.d * a.xi2 * (p.theta + p.psi + p.mu);
    const double S = p.Lambda * a.xi4 * P / F;
    const double I = p.Lambda * a.xi1 * a.xi2 * numerator / (a.calD * F);
    Equilibrium eq;
    eq.state = {S, I, p.phi / a.xi2 * I, p.rho / a.xi1 * I, p.psi * S / a.xi4};
    eq.dim = 5;
    eq.kind = EquilibriumKind::Endemic;
    eq.family = ModelFamily::Sicae;
    eq.r0_at_params = R0;
    eq.residual_norm = equilibrium_residual(eq, p);
    return eq;
}

// Endemic steady state of the reduced (d = 0, theta = 0, mass-action) flow.
inline Equilibrium endemic_reduced(const ModelParams& p) {
    if (p.d != 0.0 || p.theta != 0.0)
        throw InvalidConfigurationError("endemic_reduced requires d = 0 and theta = 0");
    const double R0r = r0_reduced(p);
    if (!(R0r > 1.0))
        throw NoEndemicEquilibriumError(
            "no endemic equilibrium of the reduced model: reproduction number "
            + std::to_string(R0r) + " <= 1");
    const AuxRates a = aux_rates(p);
    const double P = a.xi1_d0 * (p.phi + a.xi2) + p.rho * a.xi2;
    const double Q = a.xi1_d0 * (a.xi2 + p.eta_C * p.phi) + p.eta_A * p.rho * a.xi2;
    const double n1 = a.beta1 * Q;  // per-individual analogue of calN
    const double numerator = p.Lambda * n1 - (p.mu + p.psi) * a.calD;
    const double S = p.mu * P / (a.beta1 * Q);
    const double I = a.xi1_d0 * a.xi2 * numerator / (a.calD * n1);
    Equilibrium eq;
    eq.state = {S, I, p.phi / a.xi2 * I, p.rho / a.xi1_d0 * I, p.psi * S / p.mu};
    eq.dim = 5;
    eq.kind = EquilibriumKind::Endemic;
    eq.family = ModelFamily::SicaeMassAction;
    eq.r0_at_params = R0r;
    eq.residual_norm = equilibrium_residual(eq, p);
    return eq;
}

// Endemic steady state of the d = 0 mass-action four-compartment flow: the
// reduced flow with no uptake, restricted to its first four components.
inline Equilibrium endemic_sica_mass_action(const ModelParams& p) {
    ModelParams q = p;
    q.psi = 0.0;
    q.theta = 0.0;
    Equilibrium eq = endemic_reduced(q);
    eq.state[4] = 0.0;
    eq.dim = 4;
    eq.family = ModelFamily::SicaMassAction;
    eq.residual_norm = equilibrium_residual(eq, p);
    return eq;
}

}  // namespace prepctl
