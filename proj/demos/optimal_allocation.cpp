// Solve the capacity-limited preventive-uptake allocation problem and compare
// it against the best constant-uptake policy on the same horizon.
#include <cstdio>

#include "prepctl/ocp.hpp"
#include "prepctl/presets.hpp"

int main() {
    using namespace prepctl;

    OcpConfig cfg = ocp_config_from(preset("ocp-baseline"));

    const OcpSolution opt = fbsm_solve(cfg);
    std::printf("optimal policy: %d sweeps%s, objective %.2f\n", opt.sweeps,
                opt.converged ? "" : " (not converged)", opt.cost);
    std::printf("  protected person-time %.1f, max S*u %.3f (capacity %.1f)\n",
                opt.prep_person_time, opt.max_Su, *cfg.vartheta);

    double u_sum = 0.0;
    for (double u : opt.control.values) u_sum += u;
    std::printf("  mean uptake %.4f, u(0) = %.4f\n",
                u_sum / static_cast<double>(opt.control.values.size()),
                opt.control.values.front());

    const OcpSolution flat = run_constant_control(cfg, 0.61);
    std::printf("constant 0.61 policy: objective %.2f, person-time %.1f\n", flat.cost,
                flat.prep_person_time);
    std::printf("objective ratio constant/optimal: %.3f\n", flat.cost / opt.cost);
    return 0;
}
