// Command-line front end: scenario simulation, equilibrium and stability
// reports, data calibration, PrEP allocation solving, and a randomized
// stability probe. Every command prints a JSON summary on stdout and writes
// its artifacts under --out as <scenario>-<kind>.csv|json.
//
// Exit codes: 0 success, 1 numerical/domain failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "prepctl/analysis.hpp"
#include "prepctl/calibration.hpp"
#include "prepctl/equilibria.hpp"
#include "prepctl/integrate.hpp"
#include "prepctl/io.hpp"
#include "prepctl/model.hpp"
#include "prepctl/ocp.hpp"
#include "prepctl/params.hpp"
#include "prepctl/presets.hpp"

namespace {

using namespace prepctl;

#ifndef PREPCTL_DATA_CSV
#define PREPCTL_DATA_CSV "data/cape_verde_1987_2014.csv"
#endif

struct CommonOptions {
    std::string preset_name;
    std::string out_dir = ".";
    std::string config_path;
    std::size_t stride = 1;
    std::optional<double> beta, eta_c, eta_a, psi, theta, w1, w2, vartheta, step;
};

void register_common(CLI::App* cmd, CommonOptions& opt, const std::string& default_preset) {
    opt.preset_name = default_preset;
    cmd->add_option("--preset", opt.preset_name,
                    "Scenario preset (cape-verde-015, cape-verde-040, "
                    "sicae-baseline, ocp-baseline)");
    cmd->add_option("--out", opt.out_dir, "Directory for output artifacts");
    cmd->add_option("--config", opt.config_path,
                    "Flat JSON file of scalar overrides (flags win over it)");
    cmd->add_option("--stride", opt.stride, "Keep every k-th CSV row");
    cmd->add_option("--beta", opt.beta, "Transmission rate");
    cmd->add_option("--eta-c", opt.eta_c, "Chronic-stage infectiousness modifier");
    cmd->add_option("--eta-a", opt.eta_a, "AIDS-stage infectiousness modifier");
    cmd->add_option("--psi", opt.psi, "PrEP uptake rate");
    cmd->add_option("--theta", opt.theta, "PrEP discontinuation rate");
    cmd->add_option("--w1", opt.w1, "Infection weight in the objective");
    cmd->add_option("--w2", opt.w2, "Control-effort weight in the objective");
    cmd->add_option("--vartheta", opt.vartheta,
                    "PrEP capacity bound on S*u (nonpositive or inf disables it)");
    cmd->add_option("--step", opt.step, "Integration step (beats PREPCTL_STEP)");
}

double parse_env_step() {
    const char* raw = std::getenv("PREPCTL_STEP");
    if (raw == nullptr) return -1.0;
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        if (used != std::string(raw).size() || !(v > 0.0))
            throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("PREPCTL_STEP is not a positive number: '") + raw
                         + "'");
    }
}

// Resolve a scenario: preset, then config-file values, then environment step,
// then explicit flags.
ScenarioPreset resolve_scenario(const CommonOptions& opt) {
    ScenarioPreset s = preset(opt.preset_name);
    double step = s.grid.step;

    if (!opt.config_path.empty()) {
        const Json cfg = load_flat_config(opt.config_path);
        auto grab = [&](const char* a, const char* b, double& target) {
            if (cfg.contains(a)) target = cfg.at(a).get<double>();
            else if (cfg.contains(b)) target = cfg.at(b).get<double>();
        };
        grab("beta", "beta", s.params.beta);
        grab("eta_c", "eta-c", s.params.eta_C);
        grab("eta_a", "eta-a", s.params.eta_A);
        grab("psi", "psi", s.params.psi);
        grab("theta", "theta", s.params.theta);
        grab("w1", "w1", s.w1);
        grab("w2", "w2", s.w2);
        grab("step", "step", step);
        double cap = s.vartheta ? *s.vartheta : -1.0;
        grab("vartheta", "vartheta", cap);
        if (cfg.contains("vartheta"))
            s.vartheta = (cap > 0.0 && std::isfinite(cap)) ? std::optional<double>(cap)
                                                           : std::nullopt;
    }

    const double env_step = parse_env_step();
    if (env_step > 0.0) step = env_step;

    if (opt.beta) s.params.beta = *opt.beta;
    if (opt.eta_c) s.params.eta_C = *opt.eta_c;
    if (opt.eta_a) s.params.eta_A = *opt.eta_a;
    if (opt.psi) s.params.psi = *opt.psi;
    if (opt.theta) s.params.theta = *opt.theta;
    if (opt.w1) s.w1 = *opt.w1;
    if (opt.w2) s.w2 = *opt.w2;
    if (opt.vartheta)
        s.vartheta = (*opt.vartheta > 0.0 && std::isfinite(*opt.vartheta))
                         ? std::optional<double>(*opt.vartheta)
                         : std::nullopt;
    if (opt.step) step = *opt.step;

    s.grid = TimeGrid::make(s.grid.t0, s.grid.tf, step);
    s.params.validate();
    return s;
}

std::string artifact_path(const CommonOptions& opt, const std::string& scenario,
                          const std::string& kind) {
    std::filesystem::create_directories(opt.out_dir);
    return (std::filesystem::path(opt.out_dir) / (scenario + "-" + kind)).string();
}

Json state_json(const Vec5& x, std::size_t dim) {
    Json j{{"S", x[0]}, {"I", x[1]}, {"C", x[2]}, {"A", x[3]}};
    if (dim == 5) j["E"] = x[4];
    return j;
}

Json equilibrium_json(const Equilibrium& eq, const ModelParams& p) {
    Json j = state_json(eq.state, eq.dim);
    return Json{{"state", j},
                {"kind", eq.kind == EquilibriumKind::DiseaseFree ? "disease-free"
                                                                 : "endemic"},
                {"residual", equilibrium_residual(eq, p)}};
}

Json spectrum_json(const SpectrumReport& rep) {
    Json eig = Json::array();
    for (const auto& ev : rep.eigenvalues)
        eig.push_back(Json::array({ev.real(), ev.imag()}));
    return Json{{"eigenvalues", eig},
                {"max_real_part", rep.max_real_part},
                {"stable", rep.stable},
                {"marginal", rep.marginal}};
}

int cmd_simulate(const CommonOptions& opt) {
    const ScenarioPreset s = resolve_scenario(opt);
    Json summary{{"command", "simulate"},
                 {"preset", s.name},
                 {"r0", r0(s.params)},
                 {"step", s.grid.step},
                 {"horizon", s.grid.tf}};
    const std::string csv = artifact_path(opt, s.name, "trajectory.csv");
    IntegrateOptions iopt;
    iopt.nonneg_floor = default_nonneg_floor(s.params);
    if (s.dimension == 4) {
        const Vec4 x0{s.initials.S, s.initials.I, s.initials.C, s.initials.A};
        const auto traj = integrate<4>(sica_flow(s.params), x0, s.grid, iopt);
        write_trajectory_csv(csv, traj, opt.stride);
        summary["terminal"] = state_json(
            {traj.back()[0], traj.back()[1], traj.back()[2], traj.back()[3], 0.0}, 4);
        summary["terminal_population"] = total_population(traj).back();
    } else {
        const auto traj =
            integrate<5>(sicae_flow(s.params), s.initials.to_array(), s.grid, iopt);
        write_trajectory_csv(csv, traj, opt.stride);
        summary["terminal"] = state_json(traj.back(), 5);
        summary["terminal_population"] = total_population(traj).back();
    }
    summary["trajectory_csv"] = csv;
    std::cout << summary.dump(2) << '\n';
    return 0;
}

int cmd_equilibria(const CommonOptions& opt) {
    const ScenarioPreset s = resolve_scenario(opt);
    Json out{{"command", "equilibria"}, {"preset", s.name}, {"r0", r0(s.params)}};
    if (s.dimension == 4) {
        out["disease_free"] = equilibrium_json(dfe_sica(s.params), s.params);
        try {
            out["endemic"] = equilibrium_json(endemic_sica(s.params), s.params);
        } catch (const NoEndemicEquilibriumError& e) {
            out["endemic"] = nullptr;
            out["endemic_note"] = e.what();
        }
    } else {
        out["disease_free"] = equilibrium_json(dfe_sicae(s.params), s.params);
        try {
            out["endemic"] = equilibrium_json(endemic_sicae(s.params), s.params);
        } catch (const NoEndemicEquilibriumError& e) {
            out["endemic"] = nullptr;
            out["endemic_note"] = e.what();
        }
    }
    write_json_file(artifact_path(opt, s.name, "equilibria.json"), out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_stability(const CommonOptions& opt) {
    const ScenarioPreset s = resolve_scenario(opt);
    Json out{{"command", "stability"}, {"preset", s.name}, {"r0", r0(s.params)}};
    const Equilibrium dfe =
        s.dimension == 4 ? dfe_sica(s.params) : dfe_sicae(s.params);
    out["disease_free"] = spectrum_json(local_stability(dfe, s.params));
    try {
        const Equilibrium endemic =
            s.dimension == 4 ? endemic_sica(s.params) : endemic_sicae(s.params);
        out["endemic"] = spectrum_json(local_stability(endemic, s.params));
    } catch (const NoEndemicEquilibriumError& e) {
        out["endemic"] = nullptr;
        out["endemic_note"] = e.what();
    }
    write_json_file(artifact_path(opt, s.name, "stability.json"), out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_calibrate(const CommonOptions& opt, const std::string& data_path,
                  const std::string& free_spec) {
    const ScenarioPreset s = resolve_scenario(opt);
    const CalibrationDataset ds = load_dataset(data_path);
    std::vector<std::string> free;
    std::string token;
    for (char c : free_spec + ",") {
        if (c == ',') {
            if (!token.empty()) free.push_back(token);
            token.clear();
        } else {
            token += c;
        }
    }
    FitOptions fopt;
    fopt.step = 1e-2;
    fopt.final_step = s.grid.step <= 1e-2 ? s.grid.step : 1e-3;
    const FitResult res = fit(ds, free, ParameterBounds{}, s.params, fopt);
    Json out{{"command", "calibrate"},
             {"preset", s.name},
             {"data", data_path},
             {"records", ds.records.size()},
             {"free", res.free_names},
             {"fitted", {{"Lambda", res.fitted_params.Lambda},
                         {"beta", res.fitted_params.beta}}},
             {"objective_percent", res.objective},
             {"iterations", res.iterations},
             {"converged", res.converged},
             {"r0_at_fit", r0(res.fitted_params)}};
    write_json_file(artifact_path(opt, s.name, "calibration.json"), out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_ocp(const CommonOptions& opt, std::optional<double> constant_psi) {
    ScenarioPreset s = resolve_scenario(opt);
    OcpConfig cfg = ocp_config_from(s);
    const OcpSolution sol =
        constant_psi ? run_constant_control(cfg, *constant_psi) : fbsm_solve(cfg);
    write_ocp_csv(artifact_path(opt, s.name, "ocp.csv"), sol, opt.stride);
    Json diag = diagnostics_json(sol);
    diag["command"] = "ocp";
    diag["preset"] = s.name;
    diag["mode"] = constant_psi ? "constant" : "optimal";
    if (constant_psi) diag["constant_psi"] = *constant_psi;
    diag["max_Su"] = sol.max_Su;
    diag["capacity"] = cfg.vartheta ? Json(*cfg.vartheta) : Json(nullptr);
    write_json_file(artifact_path(opt, s.name, "diagnostics.json"), diag);
    std::cout << diag.dump(2) << '\n';
    if (!sol.converged) {
        std::cerr << "sweeps exhausted before the tolerance was met\n";
        return 1;
    }
    return 0;
}

// Randomized exploration of a question the fixed test suite leaves open:
// does the endemic certificate also descend under the saturating-incidence
// flow with AIDS mortality, where only the bilinear case carries a proof?
// Reported, never asserted.
int cmd_conjecture_probe(const CommonOptions& opt, int trials, std::uint64_t seed,
                         double horizon) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto in_range = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    const double step = opt.step ? *opt.step : 1e-2;
    int descents = 0, violations = 0, attempts = 0;
    Json cases = Json::array();
    for (int k = 0; k < trials; ++k) {
        ModelParams p;
        // Rejection-sample a supercritical parameter set.
        for (;;) {
            ++attempts;
            p.Lambda = in_range(1e3, 5e4);
            p.mu = in_range(0.005, 0.05);
            p.beta = in_range(0.1, 1.5);
            p.eta_C = in_range(0.0, 1.0);
            p.eta_A = in_range(1.0, 2.0);
            p.phi = in_range(0.1, 2.0);
            p.rho = in_range(0.01, 0.5);
            p.alpha = in_range(0.01, 1.0);
            p.omega = in_range(0.01, 0.5);
            p.d = in_range(0.0, 1.5);
            p.psi = 0.0;
            p.theta = 0.0;
            if (r0(p) > 1.02) break;
        }
        const Equilibrium eq = endemic_sica(p);
        const SicaState star = eq.as_sica();
        Vec4 x0;
        for (std::size_t j = 0; j < 4; ++j)
            x0[j] = eq.state[j] * in_range(0.5, 1.8);
        const TimeGrid g = TimeGrid::make(0.0, horizon, step);
        IntegrateOptions iopt;
        iopt.nonneg_floor = default_nonneg_floor(p);
        const auto traj = integrate<4>(sica_flow(p), x0, g, iopt);
        auto value = [&](const Vec4& x) {
            return lyapunov_endemic(SicaState::from_array(x), star, p);
        };
        const double v0 = value(x0);
        const DescentReport rep =
            descent_report(traj, value, 1e-9 * std::max(1.0, std::abs(v0)));
        (rep.monotone ? descents : violations) += 1;
        cases.push_back(Json{{"r0", r0(p)},
                             {"monotone", rep.monotone},
                             {"max_increase", rep.max_increase}});
    }
    Json out{{"command", "conjecture-probe"},
             {"seed", seed},
             {"trials", trials},
             {"attempts", attempts},
             {"horizon", horizon},
             {"step", step},
             {"descents", descents},
             {"violations", violations},
             {"cases", cases},
             {"note", "exploratory evidence only; no claim is asserted"}};
    std::filesystem::create_directories(opt.out_dir);
    write_json_file(
        (std::filesystem::path(opt.out_dir) / "conjecture-probe-report.json").string(),
        out);
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HIV/AIDS compartment-model toolkit: simulation, equilibria, "
                 "stability, calibration, and PrEP allocation"};
    app.require_subcommand(1);

    CommonOptions sim_opt, eq_opt, st_opt, cal_opt, ocp_opt, probe_opt;

    CLI::App* sim = app.add_subcommand("simulate", "Integrate a scenario and export the trajectory");
    register_common(sim, sim_opt, "cape-verde-015");

    CLI::App* eq = app.add_subcommand("equilibria", "Report disease-free and endemic states");
    register_common(eq, eq_opt, "cape-verde-015");

    CLI::App* st = app.add_subcommand("stability", "Eigenvalue report at the equilibria");
    register_common(st, st_opt, "cape-verde-015");

    CLI::App* cal = app.add_subcommand("calibrate", "Fit recruitment and transmission to surveillance data");
    register_common(cal, cal_opt, "cape-verde-015");
    std::string data_path = PREPCTL_DATA_CSV;
    std::string free_spec = "Lambda,beta";
    cal->add_option("--data", data_path, "Surveillance CSV (year,cases,population)");
    cal->add_option("--free", free_spec, "Comma list of parameters to fit");

    CLI::App* ocp = app.add_subcommand("ocp", "Solve the PrEP allocation problem");
    register_common(ocp, ocp_opt, "ocp-baseline");
    std::optional<double> constant_psi;
    ocp->add_option("--constant-psi", constant_psi,
                    "Skip optimization; hold this uptake (capacity-capped)");

    CLI::App* probe = app.add_subcommand(
        "conjecture-probe", "Randomized endemic-certificate descent experiment");
    register_common(probe, probe_opt, "cape-verde-015");
    int trials = 25;
    std::uint64_t seed = 12345;
    double horizon = 60.0;
    probe->add_option("--trials", trials, "Number of sampled parameter sets");
    probe->add_option("--seed", seed, "Random seed");
    probe->add_option("--horizon", horizon, "Years to integrate each trial");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_opt);
        if (eq->parsed()) return cmd_equilibria(eq_opt);
        if (st->parsed()) return cmd_stability(st_opt);
        if (cal->parsed()) return cmd_calibrate(cal_opt, data_path, free_spec);
        if (ocp->parsed()) return cmd_ocp(ocp_opt, constant_psi);
        if (probe->parsed())
            return cmd_conjecture_probe(probe_opt, trials, seed, horizon);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
