#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "params.hpp"
#include "state.hpp"

namespace prepctl {

// Uniform time grid. The horizon must be an integer number of steps.
struct TimeGrid {
    double t0 = 0.0;
    double tf = 0.0;
    double step = 0.0;
    std::size_t n_points = 0;

    static TimeGrid make(double t0, double tf, double step) {
        if (!(step > 0.0))
            throw InvalidConfigurationError("grid step must be positive");
        if (!(tf > t0))
            throw InvalidConfigurationError("grid needs tf > t0");
        const double ratio = (tf - t0) / step;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
            throw InvalidConfigurationError(
                "grid horizon is not an integer number of steps");
        TimeGrid g;
        g.t0 = t0;
        g.tf = tf;
        g.step = step;
        g.n_points = static_cast<std::size_t>(rounded) + 1;
        return g;
    }

    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * step; }
};

template <std::size_t N>
struct Trajectory {
    TimeGrid grid;
    std::vector<StateVec<N>> states;

    static constexpr std::size_t dimension = N;
    const StateVec<N>& front() const { return states.front(); }
    const StateVec<N>& back() const { return states.back(); }
};

struct IntegrateOptions {
    // When >= 0: components in [-nonneg_floor, 0) are clamped to zero after
    // each step and anything below -nonneg_floor is treated as divergence.
    // Negative disables the floor (adjoint sweeps need signed components).
    double nonneg_floor = -1.0;
};

// Floor matching the model scale: a billionth of the carrying capacity.
inline double default_nonneg_floor(const ModelParams& p) {
    return 1e-9 * p.Lambda / p.mu;
}

// Classical fixed-step fourth-order Runge-Kutta. Deterministic: identical
// inputs give bit-identical trajectories.
template <std::size_t N, class Rhs>
Trajectory<N> integrate(Rhs&& rhs, const StateVec<N>& x0, const TimeGrid& grid,
                        const IntegrateOptions& opt = {}) {
    Trajectory<N> traj;
    traj.grid = grid;
    traj.states.reserve(grid.n_points);
    StateVec<N> x = x0;
    traj.states.push_back(x);
    const double h = grid.step;
    StateVec<N> k1, k2, k3, k4, tmp;
    for (std::size_t i = 0; i + 1 < grid.n_points; ++i) {
        const double t = grid.time_at(i);
        k1 = rhs(t, x);
        for (std::size_t j = 0; j < N; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
        k2 = rhs(t + 0.5 * h, tmp);
        for (std::size_t j = 0; j < N; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
        k3 = rhs(t + 0.5 * h, tmp);
        for (std::size_t j = 0; j < N; ++j) tmp[j] = x[j] + h * k3[j];
        k4 = rhs(t + h, tmp);
        for (std::size_t j = 0; j < N; ++j)
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        const double t_next = grid.time_at(i + 1);
        for (std::size_t j = 0; j < N; ++j) {
            if (!std::isfinite(x[j]))
                throw DivergenceError(t_next, "non-finite state component");
            if (opt.nonneg_floor >= 0.0 && x[j] < 0.0) {
                if (x[j] >= -opt.nonneg_floor)
                    x[j] = 0.0;
                else
                    throw DivergenceError(t_next, "negative state component beyond floor");
            }
        }
        traj.states.push_back(x);
    }
    return traj;
}

template <std::size_t N>
std::vector<double> total_population(const Trajectory<N>& traj) {
    std::vector<double> out;
    out.reserve(traj.states.size());
    for (const auto& x : traj.states) {
        double s = 0.0;
        for (double v : x) s += v;
        out.push_back(s);
    }
    return out;
}

// Trapezoid quadrature of uniformly sampled values.
inline double trapezoid(const std::vector<double>& values, double step) {
    if (values.size() < 2) return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i) sum += values[i];
    return sum * step;
}

namespace detail {
inline double incidence_flux(const StateVec<4>& x, const ModelParams& p) {
    return force_of_infection(SicaState::from_array(x), p) * x[0];
}
inline double incidence_flux(const StateVec<5>& x, const ModelParams& p) {
    return force_of_infection(SicaeState::from_array(x), p) * x[0];
}
}  // namespace detail

// Running count of entries into the infected class: initial cases plus the
// accumulated new-infection flux lambda(t) * S(t), trapezoid rule per step.
template <std::size_t N>
std::vector<double> cumulative_incidence(const Trajectory<N>& traj, const ModelParams& p,
                                         double initial_cases) {
    std::vector<double> out;
    out.reserve(traj.states.size());
    double acc = initial_cases;
    out.push_back(acc);
    double prev = detail::incidence_flux(traj.states.front(), p);
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const double cur = detail::incidence_flux(traj.states[i], p);
        acc += 0.5 * traj.grid.step * (prev + cur);
        out.push_back(acc);
        prev = cur;
    }
    return out;
}

// Linear interpolation between bracketing grid points.
template <std::size_t N>
StateVec<N> sample(const Trajectory<N>& traj, double t) {
    const TimeGrid& g = traj.grid;
    if (t < g.t0 - 1e-12 || t > g.tf + 1e-12)
        throw InvalidConfigurationError("sample time outside the trajectory horizon");
    const double s = std::clamp((t - g.t0) / g.step, 0.0,
                                static_cast<double>(traj.states.size() - 1));
    const std::size_t lo = std::min(static_cast<std::size_t>(s), traj.states.size() - 2);
    const double w = s - static_cast<double>(lo);
    StateVec<N> out;
    for (std::size_t j = 0; j < N; ++j)
        out[j] = (1.0 - w) * traj.states[lo][j] + w * traj.states[lo + 1][j];
    return out;
}

}  // namespace prepctl
