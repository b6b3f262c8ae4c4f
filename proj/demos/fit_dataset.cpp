// Fit recruitment and transmission against the bundled 1987-2014 case and
// census series, then report the per-series errors at the optimum.
#include <cstdio>

#include "prepctl/calibration.hpp"
#include "prepctl/presets.hpp"

#ifndef PREPCTL_DATA_CSV
#define PREPCTL_DATA_CSV "data/cape_verde_1987_2014.csv"
#endif

int main() {
    using namespace prepctl;

    const CalibrationDataset ds = load_dataset(PREPCTL_DATA_CSV);
    std::printf("%zu yearly records, %d-%d\n", ds.records.size(),
                ds.records.front().year, ds.records.back().year);

    const ModelParams start = preset("cape-verde-015").params;
    const FitResult fit_result = fit(ds, {"Lambda", "beta"}, ParameterBounds{}, start);

    std::printf("fitted recruitment %.2f, transmission %.5f (objective %.4f%%)\n",
                fit_result.fitted_params.Lambda, fit_result.fitted_params.beta,
                fit_result.objective);

    const SicaState initials{ds.records.front().population - ds.records.front().cases,
                             ds.records.front().cases, 0.0, 0.0};
    const YearlySeries sim =
        simulate_yearly(fit_result.fitted_params, initials, ds.records.size());
    const double reference = ds.records.back().population;
    std::printf("population error %.4f%%, cumulative-case error %.4f%%\n",
                error_percent(sim.population, ds.population_series(), reference),
                error_percent(sim.cumulative_cases, ds.case_series(), reference));
    std::printf("R0 at the fitted point: %.4f\n", r0(fit_result.fitted_params));
    return 0;
}
