#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "prepctl/ocp.hpp"
#include "prepctl/presets.hpp"

using namespace prepctl;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

OcpConfig baseline() { return ocp_config_from(preset("ocp-baseline")); }

double mean_control(const OcpSolution& sol) {
    double sum = 0.0;
    for (double u : sol.control.values) sum += u;
    return sum / static_cast<double>(sol.control.values.size());
}

// First and last times where the control sits essentially at its upper box
// bound.
std::pair<double, double> saturated_interval(const OcpSolution& sol, double tol) {
    double lo = -1.0, hi = -1.0;
    for (std::size_t i = 0; i < sol.control.values.size(); ++i)
        if (sol.control.values[i] >= 1.0 - tol) {
            const double t = sol.control.grid.time_at(i);
            if (lo < 0.0) lo = t;
            hi = t;
        }
    return {lo, hi};
}

}  // namespace

TEST_CASE("problem configuration is validated up front") {
    OcpConfig cfg = baseline();
    REQUIRE_NOTHROW(cfg.validate());
    SECTION("disease-induced mortality is outside this problem class") {
        cfg.params.d = 1.0;
        REQUIRE_THROWS_AS(cfg.validate(), InvalidConfigurationError);
    }
    SECTION("weights must be positive") {
        cfg.w2 = 0.0;
        REQUIRE_THROWS_AS(cfg.validate(), InvalidConfigurationError);
    }
    SECTION("relaxation must mix something in") {
        cfg.relaxation = 0.0;
        REQUIRE_THROWS_AS(cfg.validate(), InvalidConfigurationError);
    }
    SECTION("capacity must be positive when present") {
        cfg.vartheta = -5.0;
        REQUIRE_THROWS_AS(cfg.validate(), InvalidConfigurationError);
    }
}

TEST_CASE("pointwise control update follows the switching structure") {
    OcpConfig cfg = baseline();
    const SicaeState x{10000.0, 200.0, 0.0, 0.0, 0.0};

    SECTION("negative gradient pins the control at zero") {
        StateVec<5> l{-1.0, 0.0, 0.0, 0.0, 0.0};
        const ControlUpdate cu = control_update(x, l, cfg);
        REQUIRE(cu.u == 0.0);
        REQUIRE(cu.nu == 0.0);
    }
    SECTION("small gradient gives the interior stationary value") {
        // u0 = (l1 - l5) S / (2 w2); choose it inside the capacity.
        StateVec<5> l{2.0e-5, 0.0, 0.0, 0.0, 0.0};
        const ControlUpdate cu = control_update(x, l, cfg);
        REQUIRE_THAT(cu.u, WithinRel(0.1, 1e-12));
        REQUIRE(cu.nu == 0.0);
    }
    SECTION("a large gradient is capped by the capacity with a positive multiplier") {
        StateVec<5> l{1.0, 0.0, 0.0, 0.0, 0.0};
        const ControlUpdate cu = control_update(x, l, cfg);
        REQUIRE_THAT(cu.u, WithinRel(0.2, 1e-12));  // vartheta / S
        REQUIRE(cu.nu > 0.0);
        REQUIRE_THAT(cu.nu, WithinRel(1.0 - 2.0 * cfg.w2 * 0.2 / x.S, 1e-12));
    }
    SECTION("without a capacity the box alone binds") {
        cfg.vartheta.reset();
        StateVec<5> l{1.0, 0.0, 0.0, 0.0, 0.0};
        const ControlUpdate cu = control_update(x, l, cfg);
        REQUIRE(cu.u == 1.0);
        REQUIRE(cu.nu == 0.0);
    }
    SECTION("degenerate susceptible pool is rejected") {
        const SicaeState empty{0.0, 200.0, 0.0, 0.0, 0.0};
        StateVec<5> l{};
        REQUIRE_THROWS_AS(control_update(empty, l, cfg), DegeneratePopulationError);
    }
}

TEST_CASE("multiplier sign errors carry the offending value") {
    const MultiplierSignError e(-3.5e-9);
    REQUIRE_THAT(e.nu, WithinAbs(-3.5e-9, 1e-20));
}

TEST_CASE("capacity-bound solve reproduces the frozen baseline") {
    const OcpSolution sol = fbsm_solve(baseline());
    REQUIRE(sol.converged);
    REQUIRE(sol.sweeps > 5);
    REQUIRE(sol.sweeps < 100);

    // Frozen from an independent implementation of the same sweep scheme.
    REQUIRE_THAT(sol.prep_person_time, WithinRel(12744.8, 5e-3));
    REQUIRE_THAT(sol.cost, WithinRel(995.24, 1e-2));
    REQUIRE_THAT(mean_control(sol), WithinAbs(0.6237, 5e-3));

    // The capacity is respected everywhere and active at the start:
    // u(0) = vartheta / S(0) = 0.2.
    REQUIRE(sol.constraint_max <= 1e-6 * 2000.0);
    REQUIRE_THAT(sol.control.values.front(), WithinAbs(0.2, 1e-3));
    for (double u : sol.control.values) {
        REQUIRE(u >= 0.0);
        REQUIRE(u <= 1.0);
    }

    // Saturated stretch of full uptake in the interior of the horizon.
    const auto [lo, hi] = saturated_interval(sol, 1e-6);
    REQUIRE_THAT(lo, WithinAbs(4.04, 0.15));
    REQUIRE_THAT(hi, WithinAbs(6.94, 0.15));

    // Transversality: the adjoint vanishes at the final time.
    for (double l : sol.adjoint.lambdas.back()) REQUIRE_THAT(l, WithinAbs(0.0, 1e-14));

    // Multiplier sign and complementary slackness.
    for (std::size_t i = 0; i < sol.adjoint.nu.size(); ++i) {
        REQUIRE(sol.adjoint.nu[i] >= -1e-12);
        const double slack = sol.state.states[i][0] * sol.control.values[i] - 2000.0;
        if (sol.adjoint.nu[i] > 1e-9) REQUIRE(std::abs(slack) <= 1e-4 * 2000.0);
    }
}

TEST_CASE("the adjoint flow is the negative state gradient of the Hamiltonian") {
    const OcpConfig cfg = baseline();
    const OcpSolution sol = fbsm_solve(cfg);
    const std::size_t n = sol.state.states.size();
    for (std::size_t i : {n / 10, n / 3, n / 2, (4 * n) / 5}) {
        const SicaeState x = SicaeState::from_array(sol.state.states[i]);
        const StateVec<5>& l = sol.adjoint.lambdas[i];
        const double u = sol.control.values[i];
        const double nu = sol.adjoint.nu[i];
        const StateVec<5> dl = adjoint_rhs(l, x, u, nu, cfg);
        Vec5 xv = x.to_array();
        for (std::size_t j = 0; j < 5; ++j) {
            const double h = 1e-6 * std::max(1.0, std::abs(xv[j]));
            Vec5 xp = xv, xm = xv;
            xp[j] += h;
            xm[j] -= h;
            const double grad = (hamiltonian(SicaeState::from_array(xp), u, l, nu, cfg)
                                 - hamiltonian(SicaeState::from_array(xm), u, l, nu, cfg))
                                / (2.0 * h);
            REQUIRE_THAT(dl[j], WithinAbs(-grad, 1e-6 * std::max(1.0, std::abs(grad))));
        }
    }
}

TEST_CASE("the held control minimizes the Hamiltonian over admissible competitors") {
    const OcpConfig cfg = baseline();
    const OcpSolution sol = fbsm_solve(cfg);
    const std::size_t n = sol.state.states.size();
    for (std::size_t i : {std::size_t(0), n / 5, n / 2, (9 * n) / 10}) {
        const SicaeState x = SicaeState::from_array(sol.state.states[i]);
        const StateVec<5>& l = sol.adjoint.lambdas[i];
        const double u = sol.control.values[i];
        const double nu = sol.adjoint.nu[i];
        const double h_star = hamiltonian(x, u, l, nu, cfg);
        for (int k = 0; k <= 10; ++k) {
            const double v = 0.1 * k;
            // With the multiplier term included, optimality holds over the
            // whole box. The quadratic-in-u structure gives the sharper bound
            // gap >= w2 (v - u)^2, with equality where the control is
            // stationary (interior or capacity-capped) and slack where a box
            // bound binds.
            const double gap = hamiltonian(x, v, l, nu, cfg) - h_star;
            REQUIRE(gap >= cfg.w2 * (v - u) * (v - u)
                               - 1e-7 * std::max(1.0, std::abs(h_star)));
            // Without it, optimality holds over the capacity-feasible set.
            if (!cfg.vartheta || x.S * v <= *cfg.vartheta) {
                const double plain_gap = hamiltonian(x, v, l, 0.0, cfg)
                                         - hamiltonian(x, u, l, 0.0, cfg);
                REQUIRE(plain_gap >= -1e-9 * std::max(1.0, std::abs(h_star)));
            }
        }
    }
}

TEST_CASE("removing the capacity raises uptake and person-time") {
    OcpConfig cfg = baseline();
    cfg.vartheta.reset();
    const OcpSolution sol = fbsm_solve(cfg);
    REQUIRE(sol.converged);
    REQUIRE_THAT(sol.prep_person_time, WithinRel(13043.6, 5e-3));
    REQUIRE_THAT(sol.cost, WithinRel(722.28, 1e-2));
    REQUIRE(sol.constraint_max == -std::numeric_limits<double>::infinity());
    for (double nu : sol.adjoint.nu) REQUIRE(nu == 0.0);
    // Early on the optimizer asks for full coverage, which the capacity case
    // cannot afford.
    REQUIRE(sol.control.values.front() > 0.9);
}

TEST_CASE("constant moderate uptake without capacity matches its frozen outcome") {
    OcpConfig cfg = baseline();
    cfg.vartheta.reset();
    const OcpSolution sol = run_constant_control(cfg, 0.61);
    REQUIRE_THAT(sol.prep_person_time, WithinRel(13201.26, 2e-3));
    for (double u : sol.control.values) REQUIRE(u == 0.61);
    REQUIRE_THAT(sol.state.back()[1], WithinRel(19.3, 0.02));
}

TEST_CASE("constant uptake honors the capacity pointwise") {
    OcpConfig cfg = baseline();
    const OcpSolution sol = run_constant_control(cfg, 0.61);
    REQUIRE(sol.constraint_max <= 1e-6 * 2000.0);
    REQUIRE_THAT(sol.control.values.front(), WithinAbs(0.2, 1e-9));
    REQUIRE_THROWS_AS(run_constant_control(cfg, 1.5), InvalidConfigurationError);
}

TEST_CASE("an expensive control budget flattens the policy") {
    OcpConfig cfg = baseline();
    cfg.w2 = 1e4;
    const OcpSolution sol = fbsm_solve(cfg);
    REQUIRE(sol.converged);
    const double max_u =
        *std::max_element(sol.control.values.begin(), sol.control.values.end());
    REQUIRE_THAT(max_u, WithinAbs(0.17, 0.005));
    REQUIRE_THAT(sol.prep_person_time, WithinRel(6691.2, 5e-3));
    const Vec5 end = sol.state.back();
    REQUIRE_THAT(end[1], WithinRel(111.84, 5e-3));
    REQUIRE_THAT(end[2], WithinRel(819.24, 5e-3));
    REQUIRE_THAT(end[3], WithinRel(29.63, 5e-3));
}

TEST_CASE("cost and person-time integrate their defining quantities") {
    OcpConfig cfg = baseline();
    cfg.grid = TimeGrid::make(0.0, 0.2, 0.1);
    Trajectory<5> traj;
    traj.grid = cfg.grid;
    traj.states = {{100.0, 10.0, 0.0, 0.0, 0.0},
                   {90.0, 12.0, 0.0, 0.0, 0.0},
                   {80.0, 14.0, 0.0, 0.0, 0.0}};
    const ControlSignal ctrl{cfg.grid, {0.0, 0.5, 1.0}};
    // Trapezoid of w1*I + w2*u^2: 0.1*[(10+0)/2*0 ...] computed directly.
    const double j0 = 10.0 + 0.0, j1 = 12.0 + 0.25, j2 = 14.0 + 1.0;
    REQUIRE_THAT(cost_J(traj, ctrl, cfg),
                 WithinRel(0.1 * (0.5 * j0 + j1 + 0.5 * j2), 1e-12));
    REQUIRE_THAT(prep_person_time(traj, ctrl),
                 WithinRel(0.1 * (0.5 * 0.0 + 45.0 + 0.5 * 80.0), 1e-12));
    ControlSignal wrong{cfg.grid, {0.0, 0.5}};
    REQUIRE_THROWS_AS(cost_J(traj, wrong, cfg), InvalidConfigurationError);
}

TEST_CASE("sweeps surrender honestly when the budget is too small") {
    OcpConfig cfg = baseline();
    cfg.max_sweeps = 2;
    const OcpSolution sol = fbsm_solve(cfg);
    REQUIRE_FALSE(sol.converged);
    REQUIRE(sol.sweeps == 2);
    // The partial answer still ships a full, consistent state/adjoint pair.
    REQUIRE(sol.state.states.size() == cfg.grid.n_points);
    REQUIRE(sol.adjoint.lambdas.size() == cfg.grid.n_points);
}

TEST_CASE("halving the sweep step leaves the solution essentially unchanged") {
    OcpConfig cfg = baseline();
    const OcpSolution coarse = fbsm_solve(cfg);
    cfg.grid = TimeGrid::make(0.0, 25.0, 5e-3);
    const OcpSolution fine = fbsm_solve(cfg);
    REQUIRE_THAT(coarse.prep_person_time, WithinRel(fine.prep_person_time, 5e-3));
    REQUIRE_THAT(coarse.cost, WithinRel(fine.cost, 5e-3));
}
