#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "equilibria.hpp"
#include "errors.hpp"
#include "integrate.hpp"
#include "model.hpp"
#include "params.hpp"
#include "state.hpp"

namespace prepctl {

// Central-difference Jacobian of an autonomous array-valued flow at x, with
// per-component step h * max(1, |x_i|).
template <std::size_t N, class Rhs>
Eigen::Matrix<double, static_cast<int>(N), static_cast<int>(N)>
jacobian(Rhs&& rhs, const StateVec<N>& x, double h = 1e-6) {
    Eigen::Matrix<double, static_cast<int>(N), static_cast<int>(N)> J;
    for (std::size_t j = 0; j < N; ++j) {
        const double step = h * std::max(1.0, std::abs(x[j]));
        StateVec<N> xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        const StateVec<N> fp = rhs(0.0, xp);
        const StateVec<N> fm = rhs(0.0, xm);
        for (std::size_t i = 0; i < N; ++i) {
            const double v = (fp[i] - fm[i]) / (2.0 * step);
            if (!std::isfinite(v))
                throw DivergenceError(0.0, "non-finite Jacobian entry");
            J(static_cast<int>(i), static_cast<int>(j)) = v;
        }
    }
    return J;
}

// Eigenvalues of the linearization at a point. `stable` requires every real
// part below -1e-9; a spectrum whose largest real part sits within +/-1e-9 of
// zero is flagged `marginal` instead (finite-difference noise floor).
struct SpectrumReport {
    std::vector<std::complex<double>> eigenvalues;
    double max_real_part = 0.0;
    bool stable = false;
    bool marginal = false;
};

namespace detail {
inline SpectrumReport spectrum_of(const Eigen::MatrixXd& J) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(J);
    SpectrumReport rep;
    rep.max_real_part = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < J.rows(); ++i) {
        const std::complex<double> ev = solver.eigenvalues()(i);
        rep.eigenvalues.push_back(ev);
        rep.max_real_part = std::max(rep.max_real_part, ev.real());
    }
    rep.stable = rep.max_real_part < -1e-9;
    rep.marginal = std::abs(rep.max_real_part) <= 1e-9;
    return rep;
}
}  // namespace detail

template <std::size_t N, class Rhs>
SpectrumReport local_stability_at(Rhs&& rhs, const StateVec<N>& x, double h = 1e-6) {
    const auto J = jacobian<N>(rhs, x, h);
    return detail::spectrum_of(Eigen::MatrixXd(J));
}

// Spectrum of the flow the equilibrium belongs to, at the equilibrium.
inline SpectrumReport local_stability(const Equilibrium& eq, const ModelParams& p,
                                      double h = 1e-6) {
    switch (eq.family) {
        case ModelFamily::Sica: {
            Vec4 x{eq.state[0], eq.state[1], eq.state[2], eq.state[3]};
            return local_stability_at<4>(sica_flow(p), x, h);
        }
        case ModelFamily::SicaMassAction: {
            Vec4 x{eq.state[0], eq.state[1], eq.state[2], eq.state[3]};
            return local_stability_at<4>(sica_mass_action_flow(p), x, h);
        }
        case ModelFamily::Sicae:
            return local_stability_at<5>(sicae_flow(p), eq.state, h);
        case ModelFamily::SicaeMassAction:
            return local_stability_at<5>(sicae_mass_action_flow(p), eq.state, h);
    }
    throw InvalidConfigurationError("unknown equilibrium family");
}

// Volterra-type function certifying endemic stability of the constant-
// population flows: V = (S - S*ln S) + (I - I*ln I) + (omega/xi2)(C - C*ln C)
// + (alpha/xi1)(A - A*ln A) with xi1 = alpha + mu. Defined for strictly
// positive states.
inline double lyapunov_endemic(const SicaState& x, const SicaState& eq,
                               const ModelParams& p) {
    if (!(x.S > 0.0 && x.I > 0.0 && x.C > 0.0 && x.A > 0.0))
        throw InvalidConfigurationError(
            "lyapunov_endemic needs strictly positive components");
    const AuxRates a = aux_rates(p);
    return (x.S - eq.S * std::log(x.S)) + (x.I - eq.I * std::log(x.I))
           + p.omega / a.xi2 * (x.C - eq.C * std::log(x.C))
           + p.alpha / a.xi1_d0 * (x.A - eq.A * std::log(x.A));
}

// Coefficients of the linear disease-free certificate c_I*I + c_C*C + c_A*A;
// all three are positive across the parameter ranges used here.
struct DfeLyapunovCoefficients {
    double c_I, c_C, c_A;
};

inline DfeLyapunovCoefficients lyapunov_dfe_coefficients(const ModelParams& p) {
    const AuxRates a = aux_rates(p);
    DfeLyapunovCoefficients c{};
    c.c_I = a.xi1 * a.xi2 + a.xi1 * p.phi * p.eta_C + a.xi2 * p.rho * p.eta_A;
    c.c_C = a.xi1 * p.omega + a.xi1 * a.xi3 * p.eta_C + p.rho * p.eta_A * p.omega
            - p.eta_C * p.rho * p.alpha;
    c.c_A = p.alpha * a.xi2 + a.xi2 * a.xi3 * p.eta_A + p.phi * p.eta_C * p.alpha
            - p.phi * p.eta_A * p.omega;
    return c;
}

inline double lyapunov_dfe(const SicaState& x, const ModelParams& p) {
    const auto c = lyapunov_dfe_coefficients(p);
    return c.c_I * x.I + c.c_C * x.C + c.c_A * x.A;
}

// Lyapunov values along a trajectory plus the largest forward difference.
struct DescentReport {
    std::vector<double> v_series;
    double max_increase = 0.0;
    bool monotone = false;
};

template <class ValueFn, std::size_t N>
DescentReport descent_report(const Trajectory<N>& traj, ValueFn&& value, double tol) {
    DescentReport rep;
    rep.v_series.reserve(traj.states.size());
    for (const auto& x : traj.states) rep.v_series.push_back(value(x));
    rep.max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < rep.v_series.size(); ++i)
        rep.max_increase = std::max(rep.max_increase,
                                    rep.v_series[i] - rep.v_series[i - 1]);
    rep.monotone = rep.max_increase <= tol;
    return rep;
}

// Convergence of a trajectory toward an equilibrium in relative 2-norm.
struct ConvergenceReport {
    bool converged = false;
    double terminal_relative_distance = 0.0;
    double first_passage_time = -1.0;  // first grid time under tolerance, -1 if never
    std::vector<double> distance_series;
};

template <std::size_t N>
ConvergenceReport converged_to(const Trajectory<N>& traj, const Equilibrium& eq,
                               double tol) {
    if (eq.dim != N)
        throw InvalidConfigurationError("trajectory and equilibrium dimensions differ");
    double eq_norm = 0.0;
    for (std::size_t j = 0; j < N; ++j) eq_norm += eq.state[j] * eq.state[j];
    eq_norm = std::sqrt(eq_norm);
    if (!(eq_norm > 0.0)) eq_norm = 1.0;
    ConvergenceReport rep;
    rep.distance_series.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        double dist = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            const double dj = traj.states[i][j] - eq.state[j];
            dist += dj * dj;
        }
        dist = std::sqrt(dist) / eq_norm;
        rep.distance_series.push_back(dist);
        if (dist < tol && rep.first_passage_time < 0.0)
            rep.first_passage_time = traj.grid.time_at(i);
    }
    rep.terminal_relative_distance = rep.distance_series.back();
    rep.converged = rep.terminal_relative_distance < tol;
    return rep;
}

}  // namespace prepctl
