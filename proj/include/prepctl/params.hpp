#pragma once

#include <string>

#include "errors.hpp"

namespace prepctl {

// Epidemiological rates shared by the SICA and SICAE families. Units are
// 1/year except Lambda (individuals/year) and the dimensionless eta factors.
struct ModelParams {
    double Lambda = 0.0;  // recruitment rate into the susceptible class
    double mu = 0.0;      // natural death rate
    double beta = 0.0;    // HIV transmission rate
    double eta_C = 0.0;   // infectiousness modifier of the treated class (<= 1)
    double eta_A = 1.0;   // infectiousness modifier of the AIDS class (>= 1)
    double phi = 0.0;     // treatment rate I -> C
    double rho = 0.0;     // progression rate I -> A
    double alpha = 0.0;   // AIDS treatment rate A -> I
    double omega = 0.0;   // treatment default rate C -> I
    double d = 0.0;       // AIDS-induced death rate
    double psi = 0.0;     // PrEP uptake rate S -> E
    double theta = 0.0;   // PrEP default rate E -> S

    // Throws InvalidConfigurationError on a parameter outside its domain.
    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw InvalidConfigurationError("invalid parameters: " + what);
        };
        require(mu > 0.0, "mu must be positive");
        require(Lambda >= 0.0, "Lambda must be nonnegative");
        require(beta >= 0.0, "beta must be nonnegative");
        require(eta_C >= 0.0 && eta_C <= 1.0, "eta_C must lie in [0, 1]");
        require(eta_A >= 1.0, "eta_A must be >= 1");
        require(phi >= 0.0 && rho >= 0.0 && alpha >= 0.0 && omega >= 0.0,
                "transition rates must be nonnegative");
        require(d >= 0.0 && psi >= 0.0 && theta >= 0.0,
                "d, psi, theta must be nonnegative");
    }
};

// Frequently reused aggregate rates. xi1 carries the AIDS death rate; xi1_d0
// is its d = 0 variant — the two are distinct on purpose because several
// closed forms are only valid in the d = 0 limit and silently mixing them is
// the classic mistake with this model family.
struct AuxRates {
    double xi1;     // alpha + mu + d
    double xi1_d0;  // alpha + mu
    double xi2;     // omega + mu
    double xi3;     // rho + phi + mu
    double xi4;     // theta + mu
    double beta1;   // beta * mu / Lambda, per-individual transmission rate
    double calN;    // numerator of the basic reproduction number
    double calD;    // denominator of the basic reproduction number
};

inline AuxRates aux_rates(const ModelParams& p) {
    AuxRates a{};
    a.xi1 = p.alpha + p.mu + p.d;
    a.xi1_d0 = p.alpha + p.mu;
    a.xi2 = p.omega + p.mu;
    a.xi3 = p.rho + p.phi + p.mu;
    a.xi4 = p.theta + p.mu;
    a.beta1 = p.Lambda > 0.0 ? p.beta * p.mu / p.Lambda : 0.0;
    a.calN = p.beta * (a.xi2 * (a.xi1 + p.rho * p.eta_A) + p.eta_C * p.phi * a.xi1);
    a.calD = p.mu * (a.xi2 * (p.rho + a.xi1) + p.phi * a.xi1 + p.rho * p.d)
             + p.rho * p.omega * p.d;
    return a;
}

// Basic reproduction number of the uncontrolled model; the same expression
// applies with or without the protected class.
inline double r0(const ModelParams& p) {
    const AuxRates a = aux_rates(p);
    return a.calN / a.calD;
}

// Reproduction number of the constant-population reduced model (d = 0,
// theta = 0), where sustained PrEP at rate psi shrinks the susceptible pool.
inline double r0_reduced(const ModelParams& p) {
    if (p.d != 0.0 || p.theta != 0.0)
        throw InvalidConfigurationError(
            "r0_reduced requires d = 0 and theta = 0 (reduced model regime)");
    const AuxRates a = aux_rates(p);
    const double n1 = a.beta1 * (a.xi2 * (a.xi1_d0 + p.rho * p.eta_A)
                                 + p.eta_C * p.phi * a.xi1_d0);
    return p.Lambda * n1 / ((p.mu + p.psi) * a.calD);
}

}  // namespace prepctl
