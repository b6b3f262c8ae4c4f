#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "prepctl/equilibria.hpp"
#include "prepctl/model.hpp"
#include "prepctl/params.hpp"
#include "prepctl/presets.hpp"

using namespace prepctl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Independent basic-reproduction-number computation via the next-generation
// matrix at the disease-free state: spectral radius of F V^{-1} over the
// infected block (I, C, A).
double r0_next_generation(const ModelParams& p) {
    const AuxRates a = aux_rates(p);
    Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
    F(0, 0) = p.beta;
    F(0, 1) = p.beta * p.eta_C;
    F(0, 2) = p.beta * p.eta_A;
    Eigen::Matrix3d V;
    V << a.xi3, -p.omega, -p.alpha,
        -p.phi, a.xi2, 0.0,
        -p.rho, 0.0, a.xi1;
    Eigen::Matrix3d K = F * V.inverse();
    const auto eig = K.eigenvalues();
    double radius = 0.0;
    for (int i = 0; i < 3; ++i) radius = std::max(radius, std::abs(eig[i]));
    return radius;
}

}  // namespace

TEST_CASE("parameter validation rejects out-of-range values") {
    ModelParams p = preset("cape-verde-015").params;
    REQUIRE_NOTHROW(p.validate());
    SECTION("negative transmission") {
        p.beta = -0.1;
        REQUIRE_THROWS_AS(p.validate(), InvalidConfigurationError);
    }
    SECTION("zero natural death rate") {
        p.mu = 0.0;
        REQUIRE_THROWS_AS(p.validate(), InvalidConfigurationError);
    }
    SECTION("negative recruitment") {
        p.Lambda = -1.0;
        REQUIRE_THROWS_AS(p.validate(), InvalidConfigurationError);
    }
    SECTION("negative treatment modifier") {
        p.eta_C = -0.01;
        REQUIRE_THROWS_AS(p.validate(), InvalidConfigurationError);
    }
}

TEST_CASE("auxiliary rates compose the elementary parameters") {
    const ModelParams p = preset("cape-verde-015").params;
    const AuxRates a = aux_rates(p);
    REQUIRE_THAT(a.xi1, WithinRel(p.alpha + p.mu + p.d, 1e-15));
    REQUIRE_THAT(a.xi1_d0, WithinRel(p.alpha + p.mu, 1e-15));
    REQUIRE_THAT(a.xi2, WithinRel(p.omega + p.mu, 1e-15));
    REQUIRE_THAT(a.xi3, WithinRel(p.rho + p.phi + p.mu, 1e-15));
    REQUIRE_THAT(a.xi4, WithinRel(p.theta + p.mu, 1e-15));
    REQUIRE_THAT(a.beta1, WithinRel(p.beta * p.mu / p.Lambda, 1e-15));
}

TEST_CASE("basic reproduction number matches the published fits") {
    REQUIRE_THAT(r0(preset("cape-verde-015").params),
                 WithinAbs(4.0983, 1e-3));
    REQUIRE_THAT(r0(preset("cape-verde-040").params),
                 WithinAbs(4.5304, 1e-3));
    // Frozen full-precision values guard against silent formula drift.
    REQUIRE_THAT(r0(preset("cape-verde-015").params),
                 WithinRel(4.098326310772624, 1e-12));
    REQUIRE_THAT(r0(preset("cape-verde-040").params),
                 WithinRel(4.530400244184328, 1e-12));
}

TEST_CASE("closed-form reproduction number agrees with next-generation matrix") {
    for (const char* name : {"cape-verde-015", "cape-verde-040", "sicae-baseline"}) {
        const ModelParams p = preset(name).params;
        REQUIRE_THAT(r0(p), WithinRel(r0_next_generation(p), 1e-8));
    }
}

TEST_CASE("reduced reproduction number is gated on model restrictions") {
    ModelParams p = preset("sicae-baseline").params;
    REQUIRE_THROWS_AS(r0_reduced(p), InvalidConfigurationError);  // theta != 0
    p.theta = 0.0;
    REQUIRE_THAT(r0_reduced(p), WithinRel(0.830933031073281, 1e-12));
    p.d = 1.0;
    REQUIRE_THROWS_AS(r0_reduced(p), InvalidConfigurationError);
}

TEST_CASE("unprotected-limit reproduction number at the protected baseline") {
    const ModelParams p = preset("sicae-baseline").params;
    REQUIRE_THAT(r0(p), WithinRel(6.6092413291568795, 1e-12));
}

TEST_CASE("force of infection weights the infectious classes") {
    const ModelParams p = preset("cape-verde-015").params;
    const SicaState x{1000.0, 50.0, 20.0, 10.0};
    const double n = 1080.0;
    const double expected =
        p.beta * (50.0 + p.eta_C * 20.0 + p.eta_A * 10.0) / n;
    REQUIRE_THAT(force_of_infection(x, p), WithinRel(expected, 1e-14));

    const SicaState zero{0.0, 0.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(force_of_infection(zero, p), DegeneratePopulationError);
}

TEST_CASE("component sums respect conservation of people") {
    const ModelParams p = preset("cape-verde-015").params;
    const SicaState x{2000.0, 120.0, 80.0, 30.0};
    const SicaState dx = rhs_sica(x, p);
    const double sum = dx.S + dx.I + dx.C + dx.A;
    REQUIRE_THAT(sum, WithinRel(p.Lambda - p.mu * x.total() - p.d * x.A, 1e-12));
}

TEST_CASE("protected-class model adds a PrEP in/out flow") {
    ModelParams p = preset("sicae-baseline").params;
    const SicaeState x{4000.0, 100.0, 60.0, 25.0, 900.0};
    const SicaeState dx = rhs_sicae(x, p);
    const double sum = dx.S + dx.I + dx.C + dx.A + dx.E;
    REQUIRE_THAT(sum, WithinRel(p.Lambda - p.mu * x.total() - p.d * x.A, 1e-12));
    // The E inflow is psi*S and the outflow theta+mu per capita.
    REQUIRE_THAT(dx.E, WithinRel(p.psi * x.S - (p.mu + p.theta) * x.E, 1e-12));
}

TEST_CASE("mass-action variants demand their parameter restrictions") {
    ModelParams p = preset("cape-verde-015").params;  // d = 1
    const SicaState x{2000.0, 120.0, 80.0, 30.0};
    REQUIRE_THROWS_AS(rhs_sica_mass_action(x, p), InvalidConfigurationError);
    p.d = 0.0;
    REQUIRE_NOTHROW(rhs_sica_mass_action(x, p));

    ModelParams q = preset("sicae-baseline").params;  // theta = 0.001
    q.d = 0.0;
    const SicaeState y{4000.0, 100.0, 60.0, 25.0, 900.0};
    REQUIRE_THROWS_AS(rhs_sicae_mass_action(y, q), InvalidConfigurationError);
    q.theta = 0.0;
    REQUIRE_NOTHROW(rhs_sicae_mass_action(y, q));
}

TEST_CASE("mass-action incidence replaces the per-capita contact rate") {
    ModelParams p = preset("cape-verde-015").params;
    p.d = 0.0;
    const SicaState x{2000.0, 120.0, 80.0, 30.0};
    const AuxRates a = aux_rates(p);
    const SicaState dx = rhs_sica_mass_action(x, p);
    const double lam = a.beta1 * (x.I + p.eta_C * x.C + p.eta_A * x.A);
    REQUIRE_THAT(dx.S, WithinRel(p.Lambda - lam * x.S - p.mu * x.S, 1e-12));
}

TEST_CASE("controlled flow reduces to the fixed-uptake model on the invariant total") {
    ModelParams p = preset("ocp-baseline").params;
    p.psi = 0.07;
    // rhs_controlled uses the incidence normalization Lambda/mu, so the two
    // right-hand sides coincide exactly on states with that total.
    const double n0 = p.Lambda / p.mu;
    SicaeState x{0.55 * n0, 0.2 * n0, 0.1 * n0, 0.05 * n0, 0.1 * n0};
    const SicaeState via_control = rhs_controlled(x, p.psi, p);
    const SicaeState via_fixed = rhs_sicae(x, p);
    REQUIRE_THAT(via_control.S, WithinRel(via_fixed.S, 1e-12));
    REQUIRE_THAT(via_control.I, WithinRel(via_fixed.I, 1e-12));
    REQUIRE_THAT(via_control.C, WithinRel(via_fixed.C, 1e-12));
    REQUIRE_THAT(via_control.A, WithinRel(via_fixed.A, 1e-12));
    REQUIRE_THAT(via_control.E, WithinRel(via_fixed.E, 1e-12));
}

TEST_CASE("controlled flow conserves population toward the nominal total") {
    const ModelParams p = preset("ocp-baseline").params;
    const SicaeState x{9000.0, 300.0, 100.0, 40.0, 500.0};
    const SicaeState dx = rhs_controlled(x, 0.4, p);
    const double sum = dx.S + dx.I + dx.C + dx.A + dx.E;
    REQUIRE_THAT(sum, WithinRel(p.mu * (p.Lambda / p.mu - x.total()), 1e-12));
    ModelParams bad = p;
    bad.d = 1.0;
    REQUIRE_THROWS_AS(rhs_controlled(x, 0.4, bad), InvalidConfigurationError);
}

TEST_CASE("disease-free states annihilate the dynamics") {
    const ModelParams p = preset("cape-verde-015").params;
    const Equilibrium dfe = dfe_sica(p);
    REQUIRE(dfe.kind == EquilibriumKind::DiseaseFree);
    REQUIRE_THAT(dfe.state[0], WithinRel(p.Lambda / p.mu, 1e-14));
    REQUIRE(equilibrium_residual(dfe, p) <= 1e-10 * p.Lambda);

    const ModelParams q = preset("sicae-baseline").params;
    const Equilibrium dfe5 = dfe_sicae(q);
    const double denom = q.mu * (q.theta + q.psi + q.mu);
    REQUIRE_THAT(dfe5.state[0],
                 WithinRel((q.theta + q.mu) * q.Lambda / denom, 1e-13));
    REQUIRE_THAT(dfe5.state[4], WithinRel(q.psi * q.Lambda / denom, 1e-13));
    REQUIRE_THAT(dfe5.state[0] + dfe5.state[4],
                 WithinRel(q.Lambda / q.mu, 1e-12));
    REQUIRE(equilibrium_residual(dfe5, q) <= 1e-10 * q.Lambda);
}

TEST_CASE("endemic state of the unprotected model satisfies the flow balance") {
    const ModelParams p = preset("cape-verde-015").params;
    const Equilibrium eq = endemic_sica(p);
    const AuxRates a = aux_rates(p);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(eq.state[i] > 0.0);
    REQUIRE(equilibrium_residual(eq, p) <= 1e-8 * p.Lambda);
    // Interior proportions follow the I-chain structure.
    REQUIRE_THAT(eq.state[2], WithinRel(p.phi * eq.state[1] / a.xi2, 1e-10));
    REQUIRE_THAT(eq.state[3], WithinRel(p.rho * eq.state[1] / a.xi1, 1e-10));
}

TEST_CASE("endemic state is refused below the epidemic threshold") {
    ModelParams p = preset("cape-verde-015").params;
    p.beta = 0.05;  // pushes the reproduction number under one
    REQUIRE(r0(p) < 1.0);
    REQUIRE_THROWS_AS(endemic_sica(p), NoEndemicEquilibriumError);
}

TEST_CASE("protected-model endemic state balances when uptake is mild") {
    ModelParams p = preset("cape-verde-015").params;
    p.psi = 0.05;
    p.theta = 0.01;
    const Equilibrium eq = endemic_sicae(p);
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(eq.state[i] > 0.0);
    REQUIRE(equilibrium_residual(eq, p) <= 1e-8 * p.Lambda);
}

TEST_CASE("strong uptake removes the protected-model endemic state") {
    // The raw reproduction number stays above one, but the effective
    // threshold that accounts for the protected-class drain does not.
    ModelParams p = preset("cape-verde-015").params;
    p.psi = 5.0;
    p.theta = 0.0;
    REQUIRE(r0(p) > 1.0);
    REQUIRE(r0(p) * (p.theta + p.mu) / (p.theta + p.psi + p.mu) < 1.0);
    REQUIRE_THROWS_AS(endemic_sicae(p), NoEndemicEquilibriumError);
}

TEST_CASE("reduced-model endemic state under mild uptake") {
    ModelParams p = preset("sicae-baseline").params;
    p.theta = 0.0;
    p.psi = 0.002;  // small enough to keep the reduced number above one
    REQUIRE(r0_reduced(p) > 1.0);
    const Equilibrium eq = endemic_reduced(p);
    for (std::size_t i = 0; i < 5; ++i) REQUIRE(eq.state[i] > 0.0);
    REQUIRE(equilibrium_residual(eq, p) <= 1e-8 * p.Lambda);

    p.psi = 0.1;  // reduced number 0.83: no endemic state
    REQUIRE_THROWS_AS(endemic_reduced(p), NoEndemicEquilibriumError);
    p.psi = 0.002;
    p.theta = 0.01;
    REQUIRE_THROWS_AS(endemic_reduced(p), InvalidConfigurationError);
}

TEST_CASE("mass-action endemic state is the uptake-free reduction") {
    ModelParams p = preset("cape-verde-015").params;
    p.d = 0.0;
    p.psi = 0.0;
    p.theta = 0.0;
    const Equilibrium eq = endemic_sica_mass_action(p);
    REQUIRE(eq.dim == 4);
    REQUIRE(equilibrium_residual(eq, p) <= 1e-8 * p.Lambda);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(eq.state[i] > 0.0);
}
