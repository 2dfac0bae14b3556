// Measure how the survival time grows with system size at fixed perturbation
// strength, and fit the logarithmic law t* = a + b ln N.
#include <cstdio>
#include <vector>

#include "tcmem/model.hpp"
#include "tcmem/survival.hpp"

int main() {
    using namespace tcmem;

    std::vector<std::pair<double, double>> points;
    std::printf("%6s %12s %12s\n", "N", "threshold", "t*");
    for (int n : {16, 24, 32, 48, 64}) {
        SurvivalSearchOptions so;
        so.initial_t_max = 16.0;
        const SurvivalSearchResult r = survival_search(build_uniform(n, 1.0, 0.9), so);
        if (!r.result.reached()) continue;
        points.push_back({static_cast<double>(n), *r.result.crossing_time});
        std::printf("%6d %12.4f %12.4f\n", n, r.result.threshold, *r.result.crossing_time);
    }

    const ScalingFit fit = fit_scaling(points, ScalingForm::logarithmic);
    std::printf("\nfit t* = a + b ln N:  a = %.4f +- %.4f,  b = %.4f +- %.4f,  R^2 = %.5f\n",
                fit.intercept, fit.intercept_err, fit.slope, fit.slope_err, fit.r_squared);
    return 0;
}
