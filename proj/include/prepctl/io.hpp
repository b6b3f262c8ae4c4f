#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "json.hpp"

#include "errors.hpp"
#include "integrate.hpp"
#include "ocp.hpp"

namespace prepctl {

using Json = nlohmann::json;

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    out << std::setprecision(12);
    return out;
}

}  // namespace detail

// Compartment time series as CSV. Columns: t,S,I,C,A for four-compartment
// runs, plus E for five. `stride` keeps every k-th row (the final row is
// always written).
template <std::size_t N>
void write_trajectory_csv(std::ostream& out, const Trajectory<N>& traj,
                          std::size_t stride = 1) {
    static_assert(N == 4 || N == 5);
    if (stride == 0) stride = 1;
    out << (N == 4 ? "t,S,I,C,A" : "t,S,I,C,A,E") << '\n';
    const std::size_t last = traj.states.size() - 1;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        if (i % stride != 0 && i != last) continue;
        out << traj.grid.time_at(i);
        for (std::size_t j = 0; j < N; ++j) out << ',' << traj.states[i][j];
        out << '\n';
    }
}

template <std::size_t N>
void write_trajectory_csv(const std::string& path, const Trajectory<N>& traj,
                          std::size_t stride = 1) {
    std::ofstream out = detail::open_out(path);
    write_trajectory_csv(out, traj, stride);
}

// Full allocation solution as CSV: control, compartments, adjoint vector,
// and the capacity multiplier at every kept grid point.
inline void write_ocp_csv(std::ostream& out, const OcpSolution& sol,
                          std::size_t stride = 1) {
    if (stride == 0) stride = 1;
    out << "t,u,S,I,C,A,E,l1,l2,l3,l4,l5,nu\n";
    const std::size_t last = sol.state.states.size() - 1;
    for (std::size_t i = 0; i < sol.state.states.size(); ++i) {
        if (i % stride != 0 && i != last) continue;
        out << sol.state.grid.time_at(i) << ',' << sol.control.values[i];
        for (std::size_t j = 0; j < 5; ++j) out << ',' << sol.state.states[i][j];
        for (std::size_t j = 0; j < 5; ++j) out << ',' << sol.adjoint.lambdas[i][j];
        out << ',' << sol.adjoint.nu[i] << '\n';
    }
}

inline void write_ocp_csv(const std::string& path, const OcpSolution& sol,
                          std::size_t stride = 1) {
    std::ofstream out = detail::open_out(path);
    write_ocp_csv(out, sol, stride);
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out = detail::open_out(path);
    out << j.dump(2) << '\n';
}

// Read a flat JSON object of scalar overrides (numbers, booleans, strings).
// Nested structure is rejected so typos fail loudly rather than silently
// configuring nothing.
inline Json load_flat_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError(path, 0, e.what());
    }
    if (!j.is_object()) throw ParseError(path, 0, "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (value.is_object() || value.is_array())
            throw ParseError(path, 0, "config key '" + key + "' must be scalar");
    }
    return j;
}

inline Json diagnostics_json(const OcpSolution& sol) {
    return Json{{"sweeps", sol.sweeps},
                {"converged", sol.converged},
                {"cost", sol.cost},
                {"prep_person_time", sol.prep_person_time},
                {"constraint_max", sol.constraint_max}};
}

}  // namespace prepctl
