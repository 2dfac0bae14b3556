// Tests for survival-time extraction: time grids, threshold crossing with
// linear interpolation, the doubling horizon search, disorder ensembles, and
// least-squares scaling fits, plus the module's physical monotonicity
// properties at parameters where crossings provably occur.
#include <catch2/catch_amalgamated.hpp>

#include <tcmem/survival.hpp>

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace {

tcmem::BoundCurve synthetic_curve(std::vector<double> times, std::vector<double> det) {
    tcmem::BoundCurve c;
    c.times = std::move(times);
    c.det_bound = std::move(det);
    c.model_descriptor = {{"synthetic", true}};
    return c;
}

}  // namespace

TEST_CASE("linear grid construction") {
    const std::vector<double> g = tcmem::linear_grid(10.0, 5);
    REQUIRE(g == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
    const std::vector<double> d = tcmem::linear_grid(3.0);
    REQUIRE(d.size() == 200);
    REQUIRE(d.front() == 0.0);
    REQUIRE(d.back() == 3.0);
    REQUIRE_THROWS_AS(tcmem::linear_grid(0.0, 5), tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::linear_grid(1.0, 1), tcmem::invalid_config);
}

TEST_CASE("geometric grid construction") {
    const std::vector<double> g = tcmem::geometric_grid(0.01, 10.0, 4);
    REQUIRE(g.size() == 5);  // origin is prepended
    REQUIRE(g[0] == 0.0);
    REQUIRE(g[1] == Catch::Approx(0.01).epsilon(1e-12));
    REQUIRE(g[2] == Catch::Approx(0.1).epsilon(1e-12));
    REQUIRE(g[3] == Catch::Approx(1.0).epsilon(1e-12));
    REQUIRE(g[4] == 10.0);  // snapped exactly to t_max
    REQUIRE(std::is_sorted(g.begin(), g.end()));
    REQUIRE_NOTHROW(tcmem::validate_time_grid(g));
    REQUIRE_THROWS_AS(tcmem::geometric_grid(0.0, 10.0, 5), tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::geometric_grid(5.0, 5.0, 5), tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::geometric_grid(0.1, 10.0, 1), tcmem::invalid_config);
}

TEST_CASE("survival time by linear interpolation") {
    const tcmem::BoundCurve c = synthetic_curve({0.0, 10.0}, {1.0, 0.05});
    const tcmem::SurvivalResult r = tcmem::survival_time(c, 7, 0.1);
    REQUIRE(r.reached());
    // Crossing of the segment (0,1) -> (10,0.05) with the 0.1 threshold.
    REQUIRE(*r.crossing_time == Catch::Approx(0.9 / 0.95 * 10.0).margin(1e-12));
    REQUIRE(r.threshold == 0.1);
    REQUIRE(r.threshold_overridden);
    REQUIRE(r.n_rows == 7);
    REQUIRE(r.grid.points == 2);
    REQUIRE(r.grid.t_max == 10.0);
    REQUIRE(r.grid.max_step == 10.0);

    // Default threshold is 1/sqrt(n_rows).
    const tcmem::SurvivalResult d = tcmem::survival_time(c, 100);
    REQUIRE_FALSE(d.threshold_overridden);
    REQUIRE(d.threshold == Catch::Approx(0.1).margin(1e-15));
    REQUIRE(*d.crossing_time == Catch::Approx(*r.crossing_time).margin(1e-9));

    // Later segment crossing.
    const tcmem::BoundCurve m = synthetic_curve({0.0, 1.0, 2.0, 3.0}, {1.0, 0.8, 0.3, 0.1});
    REQUIRE(*tcmem::survival_time(m, 4, 0.5).crossing_time ==
            Catch::Approx(1.0 + (0.8 - 0.5) / (0.8 - 0.3)).margin(1e-12));

    // Already below threshold at the first sample.
    const tcmem::BoundCurve low = synthetic_curve({0.0, 1.0}, {0.05, 0.04});
    REQUIRE(*tcmem::survival_time(low, 4, 0.1).crossing_time == 0.0);
}

TEST_CASE("survival time: not-reached and validation") {
    const tcmem::BoundCurve c = synthetic_curve({0.0, 5.0, 10.0}, {1.0, 0.8, 0.6});
    const tcmem::SurvivalResult r = tcmem::survival_time(c, 100);
    REQUIRE_FALSE(r.reached());
    REQUIRE_FALSE(r.crossing_time.has_value());

    REQUIRE_THROWS_AS(tcmem::survival_time(synthetic_curve({}, {}), 4), tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::survival_time(synthetic_curve({0.0, 1.0}, {1.0}), 4),
                      tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::survival_time(c, 0), tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::survival_time(c, 4, 0.0), tcmem::invalid_config);
    REQUIRE_THROWS_AS(tcmem::survival_time(c, 4, -0.5), tcmem::invalid_config);
}

TEST_CASE("survival result JSON shape") {
    const tcmem::BoundCurve c = synthetic_curve({0.0, 10.0}, {1.0, 0.05});
    const nlohmann::json reached = tcmem::survival_time(c, 7, 0.1);
    REQUIRE(reached["reached"].get<bool>());
    REQUIRE(reached["survival_time"].get<double>() ==
            Catch::Approx(0.9 / 0.95 * 10.0).margin(1e-12));
    REQUIRE(reached["threshold"].get<double>() == 0.1);
    REQUIRE(reached["threshold_overridden"].get<bool>());
    REQUIRE(reached["n_rows"].get<int>() == 7);
    REQUIRE(reached["grid"]["points"].get<int>() == 2);
    REQUIRE(reached["grid"]["t_max"].get<double>() == 10.0);
    REQUIRE(reached["model"]["synthetic"].get<bool>());

    const nlohmann::json missed =
        tcmem::survival_time(synthetic_curve({0.0, 1.0}, {1.0, 0.9}), 100);
    REQUIRE_FALSE(missed["reached"].get<bool>());
    REQUIRE(missed["survival_time"].is_null());
    REQUIRE_FALSE(missed["threshold_overridden"].get<bool>());
}

TEST_CASE("horizon search agrees with a fixed fine grid") {
    const tcmem::CouplingModel m = tcmem::build_uniform(12, 1.0, 0.9);

    tcmem::SurvivalSearchOptions so;
    so.initial_t_max = 8.0;
    so.points_per_segment = 64;
    const tcmem::SurvivalSearchResult search = tcmem::survival_search(m, so);
    REQUIRE(search.result.reached());
    REQUIRE(search.result.threshold == Catch::Approx(1.0 / std::sqrt(12.0)).margin(1e-15));

    const tcmem::BoundCurve fine = tcmem::bound_curve(m, tcmem::linear_grid(8.0, 513));
    const tcmem::SurvivalResult fixed = tcmem::survival_time(fine, 12);
    REQUIRE(fixed.reached());
    REQUIRE(*search.result.crossing_time == Catch::Approx(*fixed.crossing_time).margin(0.05));

    // The returned curve is a valid sampled curve containing the crossing.
    REQUIRE(search.curve.det_bound.front() == 1.0);
    REQUIRE(search.curve.times.back() >= *search.result.crossing_time);
    REQUIRE_NOTHROW(tcmem::validate_time_grid(search.curve.times));
}

TEST_CASE("horizon search doubles until the crossing is found") {
    const tcmem::CouplingModel m = tcmem::build_uniform(32, 1.0, 0.9);
    tcmem::SurvivalSearchOptions small_start;
    small_start.initial_t_max = 1.0;  // crossing lies beyond the first segment
    small_start.points_per_segment = 128;
    const tcmem::SurvivalSearchResult a = tcmem::survival_search(m, small_start);

    tcmem::SurvivalSearchOptions big_start;
    big_start.initial_t_max = 8.0;
    big_start.points_per_segment = 256;
    const tcmem::SurvivalSearchResult b = tcmem::survival_search(m, big_start);

    REQUIRE(a.result.reached());
    REQUIRE(b.result.reached());
    REQUIRE(*a.result.crossing_time == Catch::Approx(*b.result.crossing_time).margin(0.05));
    REQUIRE(a.curve.times.back() > 1.0);  // horizon actually grew
}

TEST_CASE("horizon search stops at max_time when no crossing exists") {
    // This chain's bound never falls to 1/sqrt(12) (its floor is ~0.88).
    const tcmem::CouplingModel m = tcmem::build_uniform(12, 1.0, 0.3);
    tcmem::SurvivalSearchOptions so;
    so.initial_t_max = 4.0;
    so.points_per_segment = 32;
    so.max_time = 32.0;
    const tcmem::SurvivalSearchResult r = tcmem::survival_search(m, so);
    REQUIRE_FALSE(r.result.reached());
    REQUIRE(r.curve.times.back() >= 16.0);

    // With an overridden threshold above the floor the same chain crosses.
    so.threshold_override = 0.95;
    const tcmem::SurvivalSearchResult hit = tcmem::survival_search(m, so);
    REQUIRE(hit.result.reached());
    REQUIRE(hit.result.threshold == 0.95);
    REQUIRE(hit.result.threshold_overridden);

    tcmem::SurvivalSearchOptions bad;
    bad.initial_t_max = 0.0;
    REQUIRE_THROWS_AS(tcmem::survival_search(m, bad), tcmem::invalid_config);
    bad.initial_t_max = 1.0;
    bad.points_per_segment = 1;
    REQUIRE_THROWS_AS(tcmem::survival_search(m, bad), tcmem::invalid_config);
}

TEST_CASE("context caching policy does not change search results") {
    tcmem::Rng rng(2024);
    std::vector<double> couplings(16), fields(16);
    for (double& c : couplings) c = 0.6 + 0.8 * rng.uniform01();
    for (double& f : fields) f = 0.8 + 0.2 * rng.uniform01();
    const tcmem::CouplingModel m{16, couplings, fields};

    tcmem::SurvivalSearchOptions cached;
    cached.initial_t_max = 2.0;
    cached.points_per_segment = 48;
    tcmem::SurvivalSearchOptions uncached = cached;
    uncached.context_cache_bytes = 0;  // force per-segment context rebuilds

    const tcmem::SurvivalSearchResult a = tcmem::survival_search(m, cached);
    const tcmem::SurvivalSearchResult b = tcmem::survival_search(m, uncached);
    REQUIRE(a.result.reached());
    REQUIRE(b.result.reached());
    REQUIRE(*a.result.crossing_time == *b.result.crossing_time);
    REQUIRE(a.curve.det_bound == b.curve.det_bound);
}

TEST_CASE("ensemble curves: means, errors, and instance bookkeeping") {
    tcmem::EnsembleSpec spec;
    spec.n_sites = 10;
    spec.coupling_dist = tcmem::DistributionSpec::fixed(1.0);
    spec.field_dist = tcmem::DistributionSpec::uniform(-0.3, 0.3);
    spec.n_instances = 25;
    spec.master_seed = 7;
    const std::vector<double> times = tcmem::linear_grid(4.0, 9);

    const tcmem::EnsembleCurve e = tcmem::ensemble_curve(spec, times, {}, 0, true);
    REQUIRE(e.times == times);
    REQUIRE(e.mean.front() == 1.0);
    REQUIRE(e.std_error.front() == 0.0);
    REQUIRE(e.instance_curves.size() == 25);
    REQUIRE(e.spec_descriptor.contains("spec"));

    // Instance rows reproduce standalone curve evaluations of the same draws.
    for (std::size_t k : {std::size_t{0}, std::size_t{13}}) {
        const tcmem::CouplingModel mk = tcmem::sample_instance(spec, static_cast<int>(k));
        REQUIRE(e.instance_curves[k] == tcmem::bound_curve(mk, times).det_bound);
    }
    // The reported mean is the pairwise mean over instances.
    std::vector<double> col(e.instance_curves.size());
    for (std::size_t k = 0; k < col.size(); ++k) col[k] = e.instance_curves[k].back();
    REQUIRE(e.mean.back() == tcmem::detail::pairwise_mean(col));

    // Dropping the instances leaves the summary untouched.
    const tcmem::EnsembleCurve lean = tcmem::ensemble_curve(spec, times);
    REQUIRE(lean.instance_curves.empty());
    REQUIRE(lean.mean == e.mean);
    REQUIRE(lean.std_error == e.std_error);
}

TEST_CASE("ensemble standard error shrinks like one over sqrt(instances)") {
    tcmem::EnsembleSpec spec;
    spec.n_sites = 10;
    spec.coupling_dist = tcmem::DistributionSpec::fixed(1.0);
    spec.field_dist = tcmem::DistributionSpec::uniform(-0.4, 0.4);
    spec.n_instances = 25;
    spec.master_seed = 11;
    const std::vector<double> times = tcmem::linear_grid(4.0, 5);

    const tcmem::EnsembleCurve small = tcmem::ensemble_curve(spec, times);
    spec.n_instances = 100;
    const tcmem::EnsembleCurve large = tcmem::ensemble_curve(spec, times);

    REQUIRE(small.std_error.back() > 0.0);
    const double ratio = large.std_error.back() / small.std_error.back();
    REQUIRE(ratio > 0.3);
    REQUIRE(ratio < 0.75);  // ideal value 0.5 up to sampling fluctuations

    spec.n_instances = 1;
    const tcmem::EnsembleCurve single = tcmem::ensemble_curve(spec, times);
    for (double se : single.std_error) REQUIRE(se == 0.0);
}

TEST_CASE("scaling fits recover exact synthetic laws") {
    std::vector<std::pair<double, double>> log_pts;
    for (double n : {8.0, 16.0, 32.0, 64.0}) log_pts.push_back({n, 2.0 + 3.0 * std::log(n)});
    const tcmem::ScalingFit lf = tcmem::fit_scaling(log_pts, tcmem::ScalingForm::logarithmic);
    REQUIRE(lf.intercept == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(lf.slope == Catch::Approx(3.0).margin(1e-9));
    REQUIRE(lf.amplitude() == Catch::Approx(2.0).margin(1e-9));
    REQUIRE(lf.r_squared == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(lf.slope_err < 1e-9);

    std::vector<std::pair<double, double>> pow_pts;
    for (double n : {10.0, 20.0, 40.0, 80.0}) pow_pts.push_back({n, 1.7 * std::pow(n, 2.5)});
    const tcmem::ScalingFit pf = tcmem::fit_scaling(pow_pts, tcmem::ScalingForm::power);
    REQUIRE(pf.amplitude() == Catch::Approx(1.7).epsilon(1e-9));
    REQUIRE(pf.exponent() == Catch::Approx(2.5).margin(1e-9));
    REQUIRE(pf.r_squared == Catch::Approx(1.0).margin(1e-12));

    // Mild noise: fit degrades gracefully and reports positive errors.
    tcmem::Rng rng(5);
    std::vector<std::pair<double, double>> noisy = log_pts;
    for (auto& [n, t] : noisy) t += 0.02 * (2.0 * rng.uniform01() - 1.0);
    const tcmem::ScalingFit nf = tcmem::fit_scaling(noisy, tcmem::ScalingForm::logarithmic);
    REQUIRE(nf.slope == Catch::Approx(3.0).margin(0.1));
    REQUIRE(nf.slope_err > 0.0);
    REQUIRE(nf.r_squared > 0.99);
    REQUIRE(nf.residuals.size() == noisy.size());
}

TEST_CASE("scaling fit input handling") {
    using tcmem::ScalingForm;
    // Non-finite survival times (unreached sizes) are skipped.
    std::vector<std::pair<double, double>> pts = {
        {8.0, 5.0},
        {16.0, std::numeric_limits<double>::quiet_NaN()},
        {32.0, 7.0},
        {64.0, 8.0},
        {128.0, 9.0}};
    const tcmem::ScalingFit f = tcmem::fit_scaling(pts, ScalingForm::logarithmic);
    REQUIRE(f.residuals.size() == 4);

    REQUIRE_THROWS_AS(tcmem::fit_scaling({{8.0, 1.0}, {16.0, 2.0}}, ScalingForm::logarithmic),
                      tcmem::invalid_config);
    REQUIRE_THROWS_AS(
        tcmem::fit_scaling({{8.0, 1.0}, {8.0, 2.0}, {8.0, 3.0}}, ScalingForm::logarithmic),
        tcmem::invalid_config);
    REQUIRE_THROWS_AS(
        tcmem::fit_scaling({{-8.0, 1.0}, {16.0, 2.0}, {32.0, 3.0}}, ScalingForm::logarithmic),
        tcmem::invalid_config);
    REQUIRE_THROWS_AS(
        tcmem::fit_scaling({{8.0, -1.0}, {16.0, 2.0}, {32.0, 3.0}}, ScalingForm::power),
        tcmem::invalid_config);
    REQUIRE_NOTHROW(
        tcmem::fit_scaling({{8.0, -1.0}, {16.0, 2.0}, {32.0, 3.0}}, ScalingForm::logarithmic));
}

TEST_CASE("survival time shrinks with stronger fields at a fixed threshold") {
    // At threshold 0.97 every field strength in the set crosses quickly, and
    // stronger fields must cross sooner.
    std::optional<double> prev;
    for (double delta : {0.10, 0.15, 0.20, 0.25, 0.30}) {
        tcmem::SurvivalSearchOptions so;
        so.initial_t_max = 16.0;
        so.points_per_segment = 256;
        so.threshold_override = 0.97;
        const tcmem::SurvivalSearchResult r =
            tcmem::survival_search(tcmem::build_uniform(64, 1.0, delta), so);
        REQUIRE(r.result.reached());
        if (prev) REQUIRE(*r.result.crossing_time < *prev);
        prev = r.result.crossing_time;
    }
}

TEST_CASE("survival time grows with system size at the row threshold") {
    std::optional<double> prev;
    for (int n : {32, 48, 64}) {
        tcmem::SurvivalSearchOptions so;
        so.initial_t_max = 16.0;
        so.points_per_segment = 256;
        const tcmem::SurvivalSearchResult r =
            tcmem::survival_search(tcmem::build_uniform(n, 1.0, 0.9), so);
        REQUIRE(r.result.reached());
        REQUIRE(r.result.threshold == Catch::Approx(1.0 / std::sqrt(n)).margin(1e-15));
        if (prev) REQUIRE(*r.result.crossing_time > *prev);
        prev = r.result.crossing_time;
    }
}
