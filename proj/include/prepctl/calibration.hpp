#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "integrate.hpp"
#include "model.hpp"
#include "params.hpp"
#include "state.hpp"

namespace prepctl {

// Yearly surveillance record: cumulative diagnosed cases and census total.
struct CalibrationDataset {
    struct Record {
        int year;
        double cases;
        double population;
    };
    std::vector<Record> records;

    std::vector<double> case_series() const {
        std::vector<double> out;
        for (const auto& r : records) out.push_back(r.cases);
        return out;
    }
    std::vector<double> population_series() const {
        std::vector<double> out;
        for (const auto& r : records) out.push_back(r.population);
        return out;
    }
};

// Reads `year,cases,population` CSV. Enforces strictly increasing years,
// nondecreasing cumulative cases, positive counts.
inline CalibrationDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open file");
    CalibrationDataset ds;
    std::string line;
    int row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (row == 1) {
            if (line != "year,cases,population")
                throw ParseError(path, row, "expected header 'year,cases,population'");
            continue;
        }
        std::istringstream ss(line);
        std::string field;
        CalibrationDataset::Record rec{};
        try {
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("year");
            rec.year = std::stoi(field);
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("cases");
            rec.cases = std::stod(field);
            if (!std::getline(ss, field, ',')) throw std::invalid_argument("population");
            rec.population = std::stod(field);
        } catch (const std::exception&) {
            throw ParseError(path, row, "malformed record '" + line + "'");
        }
        if (rec.cases <= 0.0 || rec.population <= 0.0)
            throw ParseError(path, row, "counts must be positive");
        if (!ds.records.empty()) {
            if (rec.year <= ds.records.back().year)
                throw ParseError(path, row, "years must be strictly increasing");
            if (rec.cases < ds.records.back().cases)
                throw ParseError(path, row, "cumulative cases must be nondecreasing");
        }
        ds.records.push_back(rec);
    }
    if (ds.records.empty()) throw ParseError(path, row, "no records");
    return ds;
}

// Root-mean-square deviation over the series, as a percentage of a fixed
// reference count (the terminal census).
inline double error_percent(const std::vector<double>& model,
                            const std::vector<double>& data, double reference) {
    if (model.size() != data.size())
        throw InvalidConfigurationError("error_percent: series length mismatch");
    double ss = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double d = model[i] - data[i];
        ss += d * d;
    }
    const double rms = std::sqrt(ss / static_cast<double>(model.size()));
    return 100.0 * rms / reference;
}

// Same deviation without the 1/sqrt(n) averaging — the raw l2 norm of the
// residual as a percentage of the reference. Reported alongside for
// comparison; error_percent is the default metric everywhere.
inline double error_percent_total(const std::vector<double>& model,
                                  const std::vector<double>& data, double reference) {
    if (model.size() != data.size())
        throw InvalidConfigurationError("error_percent_total: series length mismatch");
    double ss = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const double d = model[i] - data[i];
        ss += d * d;
    }
    return 100.0 * std::sqrt(ss) / reference;
}

struct YearlySeries {
    std::vector<double> population;
    std::vector<double> cumulative_cases;
};

// Integrates the four-compartment model from the epidemic's first recorded
// year and samples totals and cumulative incidence at the year marks.
inline YearlySeries simulate_yearly(const ModelParams& p, const SicaState& initials,
                                    std::size_t n_years, double step = 1e-3,
                                    double initial_cases = -1.0) {
    if (n_years < 2) throw InvalidConfigurationError("need at least two year marks");
    const TimeGrid grid = TimeGrid::make(0.0, static_cast<double>(n_years - 1), step);
    IntegrateOptions opt;
    opt.nonneg_floor = default_nonneg_floor(p);
    const auto traj = integrate<4>(sica_flow(p), initials.to_array(), grid, opt);
    const auto pop = total_population(traj);
    const auto cases =
        cumulative_incidence(traj, p, initial_cases < 0.0 ? initials.I : initial_cases);
    const std::size_t per_year = static_cast<std::size_t>(std::round(1.0 / step));
    YearlySeries out;
    for (std::size_t y = 0; y < n_years; ++y) {
        out.population.push_back(pop[y * per_year]);
        out.cumulative_cases.push_back(cases[y * per_year]);
    }
    return out;
}

struct FitOptions {
    double rel_tol = 1e-6;   // simplex diameter convergence threshold
    int max_iterations = 500;
    double step = 1e-2;      // integration step during objective evaluations
    double final_step = 1e-3;  // step for the reported objective at the optimum
};

struct FitResult {
    ModelParams fitted_params;
    double objective = 0.0;  // error_percent at the optimum, final_step integration
    std::vector<std::string> free_names;
    int iterations = 0;
    bool converged = false;
};

// Deterministic Nelder-Mead over a box. Candidates are projected into the
// bounds before evaluation; standard reflection/expansion/contraction/shrink
// coefficients 1, 2, 0.5, 0.5. Stops when the relative simplex diameter falls
// under rel_tol or after max_iterations.
inline std::pair<std::vector<double>, int> nelder_mead(
    const std::function<double(const std::vector<double>&)>& objective,
    std::vector<double> start, const std::vector<double>& lower,
    const std::vector<double>& upper, double rel_tol, int max_iterations) {
    const std::size_t n = start.size();
    if (lower.size() != n || upper.size() != n)
        throw InvalidConfigurationError("nelder_mead: bounds dimension mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] >= upper[i])
            throw InvalidConfigurationError("nelder_mead: bounds must be finite with lo < hi");
        start[i] = std::clamp(start[i], lower[i], upper[i]);
    }
    auto project = [&](std::vector<double> x) {
        for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
        return x;
    };
    auto eval = [&](const std::vector<double>& x) {
        const double v = objective(x);
        if (!std::isfinite(v))
            throw DivergenceError(0.0, "non-finite calibration objective");
        return v;
    };

    std::vector<std::vector<double>> simplex{start};
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v = start;
        const double span = 0.05 * (upper[i] - lower[i]);
        v[i] = (v[i] + span <= upper[i]) ? v[i] + span : v[i] - span;
        simplex.push_back(v);
    }
    std::vector<double> f;
    for (const auto& v : simplex) f.push_back(eval(v));

    int iter = 0;
    for (; iter < max_iterations; ++iter) {
        std::vector<std::size_t> order(simplex.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        std::vector<std::vector<double>> sx;
        std::vector<double> sf;
        for (std::size_t idx : order) {
            sx.push_back(simplex[idx]);
            sf.push_back(f[idx]);
        }
        simplex = std::move(sx);
        f = std::move(sf);

        double diameter = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(simplex[0][i]));
        for (std::size_t k = 1; k < simplex.size(); ++k)
            for (std::size_t i = 0; i < n; ++i)
                diameter = std::max(diameter, std::abs(simplex[k][i] - simplex[0][i]));
        if (diameter <= rel_tol * std::max(1.0, scale)) break;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k + 1 < simplex.size(); ++k)
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[k][i];
        for (std::size_t i = 0; i < n; ++i) centroid[i] /= static_cast<double>(n);

        auto blend = [&](double coef) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i)
                v[i] = centroid[i] + coef * (centroid[i] - simplex.back()[i]);
            return project(std::move(v));
        };

        const auto reflected = blend(1.0);
        const double fr = eval(reflected);
        if (fr < f.front()) {
            const auto expanded = blend(2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex.back() = expanded;
                f.back() = fe;
            } else {
                simplex.back() = reflected;
                f.back() = fr;
            }
        } else if (fr < f[f.size() - 2]) {
            simplex.back() = reflected;
            f.back() = fr;
        } else {
            const auto contracted = blend(fr < f.back() ? 0.5 : -0.5);
            const double fc = eval(contracted);
            if (fc < std::min(fr, f.back())) {
                simplex.back() = contracted;
                f.back() = fc;
            } else {
                for (std::size_t k = 1; k < simplex.size(); ++k) {
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[k][i] = simplex[0][i] + 0.5 * (simplex[k][i] - simplex[0][i]);
                    f[k] = eval(simplex[k]);
                }
            }
        }
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < simplex.size(); ++k)
        if (f[k] < f[best]) best = k;
    return {simplex[best], iter};
}

struct ParameterBounds {
    double lambda_lo = 5000.0, lambda_hi = 30000.0;
    double beta_lo = 0.3, beta_hi = 1.2;
};

// Sequential derivative-free fit: recruitment against the census series
// first (the epidemic barely feeds back into totals), then transmission
// against cumulative cases with recruitment frozen. The dataset's first year
// pins the initial state: S = population - cases, I = cases.
inline FitResult fit(const CalibrationDataset& ds, const std::vector<std::string>& free,
                     const ParameterBounds& bounds, const ModelParams& start,
                     const FitOptions& opt = {}) {
    if (free.empty())
        throw InvalidConfigurationError("fit: no free parameters named");
    for (const auto& name : free)
        if (name != "Lambda" && name != "beta")
            throw InvalidConfigurationError("fit: unsupported free parameter '" + name + "'");
    const std::size_t n_years = ds.records.size();
    const double reference = ds.records.back().population;
    const SicaState initials{ds.records.front().population - ds.records.front().cases,
                             ds.records.front().cases, 0.0, 0.0};
    const double initial_cases = ds.records.front().cases;

    FitResult result;
    result.fitted_params = start;
    result.free_names = free;
    result.converged = true;

    auto objective_for = [&](const std::string& name, double step) {
        return [&, name, step](const std::vector<double>& v) {
            ModelParams p = result.fitted_params;
            (name == "Lambda" ? p.Lambda : p.beta) = v[0];
            const YearlySeries sim =
                simulate_yearly(p, initials, n_years, step, initial_cases);
            const auto& series =
                name == "Lambda" ? sim.population : sim.cumulative_cases;
            const auto data =
                name == "Lambda" ? ds.population_series() : ds.case_series();
            return error_percent(series, data, reference);
        };
    };

    // Fit order is fixed: recruitment first when both are free.
    std::vector<std::string> ordered;
    for (const auto& want : {std::string("Lambda"), std::string("beta")})
        if (std::find(free.begin(), free.end(), want) != free.end())
            ordered.push_back(want);

    double last_objective = -1.0;
    for (const auto& name : ordered) {
        const double lo = name == "Lambda" ? bounds.lambda_lo : bounds.beta_lo;
        const double hi = name == "Lambda" ? bounds.lambda_hi : bounds.beta_hi;
        const double start_value =
            name == "Lambda" ? result.fitted_params.Lambda : result.fitted_params.beta;
        auto [best, iters] = nelder_mead(objective_for(name, opt.step), {start_value},
                                         {lo}, {hi}, opt.rel_tol, opt.max_iterations);
        result.iterations += iters;
        if (iters >= opt.max_iterations) result.converged = false;
        (name == "Lambda" ? result.fitted_params.Lambda : result.fitted_params.beta) =
            best[0];
        last_objective = objective_for(name, opt.final_step)(best);
    }
    result.objective = last_objective;
    return result;
}

}  // namespace prepctl
