#pragma once

#include <optional>
#include <string>
#include <vector>

#include "equilibria.hpp"
#include "errors.hpp"
#include "integrate.hpp"
#include "ocp.hpp"
#include "params.hpp"
#include "state.hpp"

namespace prepctl {

// A named, fully specified scenario: parameters, initial compartments, time
// grid, and (where meaningful) objective weights and the capacity bound.
struct ScenarioPreset {
    std::string name;
    ModelFamily family = ModelFamily::Sica;
    std::size_t dimension = 4;
    ModelParams params;
    SicaeState initials{};  // E ignored for four-compartment scenarios
    TimeGrid grid = TimeGrid::make(0.0, 1.0, 1e-3);
    double w1 = 1.0;
    double w2 = 1.0;
    std::optional<double> vartheta;  // engaged only by the allocation scenario
};

inline std::vector<std::string> preset_names() {
    return {"cape-verde-015", "cape-verde-040", "sicae-baseline", "ocp-baseline"};
}

namespace detail {

inline ModelParams cape_verde_params(double beta, double eta_C, double eta_A) {
    ModelParams p;
    p.Lambda = 13045.0;
    p.mu = 1.0 / 69.54;
    p.beta = beta;
    p.eta_C = eta_C;
    p.eta_A = eta_A;
    p.phi = 1.0;
    p.rho = 0.1;
    p.alpha = 0.33;
    p.omega = 0.09;
    p.d = 1.0;
    p.psi = 0.0;
    p.theta = 0.0;
    return p;
}

inline ModelParams protected_baseline_params() {
    ModelParams p;
    p.mu = 1.0 / 69.54;
    p.Lambda = 10200.0 * p.mu;  // recruitment balancing the initial population
    p.beta = 0.582;
    p.eta_C = 0.04;
    p.eta_A = 1.35;
    p.phi = 1.0;
    p.rho = 0.1;
    p.alpha = 0.33;
    p.omega = 0.09;
    p.d = 0.0;
    p.psi = 0.1;
    p.theta = 0.001;
    return p;
}

}  // namespace detail

// Look up a preset by name. "cape-verde" is accepted as an alias for the
// default 0.015 contact-weight fit.
inline ScenarioPreset preset(const std::string& name) {
    ScenarioPreset s;
    if (name == "cape-verde-015" || name == "cape-verde") {
        s.name = "cape-verde-015";
        s.family = ModelFamily::Sica;
        s.dimension = 4;
        s.params = detail::cape_verde_params(0.752, 0.015, 1.3);
        s.initials = SicaeState{323911.0, 61.0, 0.0, 0.0, 0.0};
        s.grid = TimeGrid::make(0.0, 27.0, 1e-3);
        return s;
    }
    if (name == "cape-verde-040") {
        s.name = "cape-verde-040";
        s.family = ModelFamily::Sica;
        s.dimension = 4;
        s.params = detail::cape_verde_params(0.695, 0.04, 1.35);
        s.initials = SicaeState{323911.0, 61.0, 0.0, 0.0, 0.0};
        s.grid = TimeGrid::make(0.0, 27.0, 1e-3);
        return s;
    }
    if (name == "sicae-baseline") {
        s.name = "sicae-baseline";
        s.family = ModelFamily::Sicae;
        s.dimension = 5;
        s.params = detail::protected_baseline_params();
        s.initials = SicaeState{10000.0, 200.0, 0.0, 0.0, 0.0};
        s.grid = TimeGrid::make(0.0, 25.0, 1e-3);
        return s;
    }
    if (name == "ocp-baseline") {
        s.name = "ocp-baseline";
        s.family = ModelFamily::Sicae;
        s.dimension = 5;
        s.params = detail::protected_baseline_params();
        s.params.psi = 0.0;  // uptake becomes the decision variable
        s.initials = SicaeState{10000.0, 200.0, 0.0, 0.0, 0.0};
        s.grid = TimeGrid::make(0.0, 25.0, 1e-2);
        s.w1 = 1.0;
        s.w2 = 1.0;
        s.vartheta = 2000.0;
        return s;
    }
    throw UsageError("unknown preset '" + name + "'");
}

inline OcpConfig ocp_config_from(const ScenarioPreset& s) {
    OcpConfig cfg;
    cfg.params = s.params;
    cfg.w1 = s.w1;
    cfg.w2 = s.w2;
    cfg.vartheta = s.vartheta;
    cfg.grid = s.grid;
    cfg.initials = s.initials;
    return cfg;
}

}  // namespace prepctl
