#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcmem/bound.hpp"
#include "tcmem/errors.hpp"
#include "tcmem/model.hpp"
#include "tcmem/parallel.hpp"

namespace tcmem {

// Linear grid 0 .. t_max inclusive.
inline std::vector<double> linear_grid(double t_max, int points = 200) {
    if (!(t_max > 0.0) || points < 2) throw invalid_config("linear grid needs t_max > 0, points >= 2");
    std::vector<double> t(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        t[static_cast<std::size_t>(i)] = t_max * static_cast<double>(i) / (points - 1);
    return t;
}

// {0} followed by a geometric progression t_min .. t_max, for decade-spanning
// scans; the origin is prepended because every curve is anchored at t = 0.
inline std::vector<double> geometric_grid(double t_min, double t_max, int points = 200) {
    if (!(t_min > 0.0) || !(t_max > t_min) || points < 2)
        throw invalid_config("geometric grid needs 0 < t_min < t_max, points >= 2");
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(points) + 1);
    t.push_back(0.0);
    const double ratio = std::log(t_max / t_min) / (points - 1);
    for (int i = 0; i < points; ++i) t.push_back(t_min * std::exp(ratio * i));
    t.back() = t_max;
    return t;
}

struct GridMetadata {
    std::size_t points = 0;
    double t_max = 0.0;
    double max_step = 0.0;
};

struct SurvivalResult {
    nlohmann::json model_descriptor;
    int n_rows = 0;
    double threshold = 0.0;
    bool threshold_overridden = false;
    std::optional<double> crossing_time;  // empty = never dropped below threshold
    GridMetadata grid;

    bool reached() const { return crossing_time.has_value(); }
};

inline void to_json(nlohmann::json& j, const SurvivalResult& r) {
    j = nlohmann::json{{"n_rows", r.n_rows},
                       {"threshold", r.threshold},
                       {"threshold_overridden", r.threshold_overridden},
                       {"reached", r.reached()},
                       {"survival_time", r.crossing_time.has_value()
                                             ? nlohmann::json(*r.crossing_time)
                                             : nlohmann::json(nullptr)},
                       {"grid", {{"points", r.grid.points},
                                 {"t_max", r.grid.t_max},
                                 {"max_step", r.grid.max_step}}},
                       {"model", r.model_descriptor}};
}

// First grid crossing of det_bound below the failure threshold 1/sqrt(n_rows)
// (or an explicit override), located by linear interpolation between the
// bracketing grid points.
inline SurvivalResult survival_time(const BoundCurve& curve, int n_rows,
                                    std::optional<double> threshold_override = {}) {
    if (curve.times.empty() || curve.det_bound.size() != curve.times.size())
        throw invalid_config("survival_time: empty or inconsistent curve");
    if (n_rows < 1) throw invalid_config("survival_time: n_rows must be positive");
    SurvivalResult r;
    r.model_descriptor = curve.model_descriptor;
    r.n_rows = n_rows;
    r.threshold_overridden = threshold_override.has_value();
    r.threshold = threshold_override.value_or(1.0 / std::sqrt(static_cast<double>(n_rows)));
    if (!(r.threshold > 0.0)) throw invalid_config("survival_time: threshold must be positive");
    r.grid.points = curve.times.size();
    r.grid.t_max = curve.times.back();
    for (std::size_t i = 1; i < curve.times.size(); ++i)
        r.grid.max_step = std::max(r.grid.max_step, curve.times[i] - curve.times[i - 1]);

    for (std::size_t i = 0; i < curve.det_bound.size(); ++i) {
        if (curve.det_bound[i] < r.threshold) {
            if (i == 0) {
                r.crossing_time = curve.times[0];
            } else {
                const double b0 = curve.det_bound[i - 1], b1 = curve.det_bound[i];
                const double t0 = curve.times[i - 1], t1 = curve.times[i];
                r.crossing_time = t0 + (b0 - r.threshold) / (b0 - b1) * (t1 - t0);
            }
            return r;
        }
    }
    return r;  // not reached
}

struct SurvivalSearchOptions {
    double initial_t_max = 256.0;
    int points_per_segment = 128;
    double max_time = 1.0e6;  // stop doubling here and report "not reached"
    std::optional<double> threshold_override;
    BoundEvaluator::Options bound;
    int workers = 0;
    // Site contexts are cached across segments while they fit this budget;
    // beyond it they are rebuilt per segment to bound memory.
    std::size_t context_cache_bytes = std::size_t{1200} << 20;
};

struct SurvivalSearchResult {
    BoundCurve curve;
    SurvivalResult result;
};

// Evaluates the bound on a linear grid and doubles the horizon until the
// curve drops below the threshold (or max_time is hit). One spectral setup
// serves all segments.
inline SurvivalSearchResult survival_search(const CouplingModel& model,
                                            SurvivalSearchOptions opts = {}) {
    if (!(opts.initial_t_max > 0.0) || opts.points_per_segment < 2)
        throw invalid_config("survival_search: bad segment options");
    const int workers = opts.workers > 0 ? opts.workers : default_workers();
    BoundEvaluator ev(model, opts.bound);
    const std::vector<int> sites = ev.chosen_sites();
    const std::size_t S = sites.size();
    const std::size_t ctx_bytes =
        S * 3 * sizeof(double) * static_cast<std::size_t>(model.n_sites) *
        static_cast<std::size_t>(model.n_sites);
    const bool cache_contexts = ctx_bytes <= opts.context_cache_bytes;
    std::vector<BoundEvaluator::SiteContext> cached;
    if (cache_contexts) {
        cached.reserve(S);
        for (int site : sites) cached.push_back(ev.make_site(site));
    }

    const double threshold =
        opts.threshold_override.value_or(1.0 / std::sqrt(static_cast<double>(model.n_sites)));

    std::vector<double> times, values;
    double seg_lo = 0.0, seg_hi = opts.initial_t_max;
    bool crossed = false;
    while (true) {
        // Segment grid: include t=0 only in the first segment.
        std::vector<double> seg;
        const int P = opts.points_per_segment;
        if (seg_lo == 0.0) {
            seg = linear_grid(seg_hi, P);
        } else {
            seg.reserve(static_cast<std::size_t>(P));
            const double step = (seg_hi - seg_lo) / P;
            for (int i = 1; i <= P; ++i) seg.push_back(seg_lo + step * i);
        }

        std::vector<std::vector<double>> rows(S, std::vector<double>(seg.size()));
        for (std::size_t s = 0; s < S; ++s) {
            BoundEvaluator::SiteContext fresh;
            if (!cache_contexts) fresh = ev.make_site(sites[s]);
            const BoundEvaluator::SiteContext& ctx = cache_contexts ? cached[s] : fresh;
            parallel_for(seg.size(), workers,
                         [&](std::size_t ti) { rows[s][ti] = ev.site_term(ctx, seg[ti]); });
        }
        std::vector<double> col(S);
        for (std::size_t ti = 0; ti < seg.size(); ++ti) {
            for (std::size_t s = 0; s < S; ++s) col[s] = rows[s][ti];
            const double mean = detail::pairwise_mean(col);
            times.push_back(seg[ti]);
            values.push_back(mean);
            if (mean < threshold) crossed = true;
        }
        if (crossed || seg_hi >= opts.max_time) break;
        seg_lo = seg_hi;
        seg_hi = std::min(2.0 * seg_hi, opts.max_time);
    }

    SurvivalSearchResult out;
    out.curve.times = std::move(times);
    out.curve.det_bound = std::move(values);
    out.curve.model_descriptor = model;
    out.result = survival_time(out.curve, model.n_sites, opts.threshold_override);
    return out;
}

// Mean and standard error over ensemble instances, per grid time.
struct EnsembleCurve {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<std::vector<double>> instance_curves;  // filled on request
    nlohmann::json spec_descriptor;
};

inline EnsembleCurve ensemble_curve(const EnsembleSpec& spec, const std::vector<double>& times,
                                    BoundEvaluator::Options opts = {}, int workers = 0,
                                    bool keep_instances = false) {
    spec.validate();
    validate_time_grid(times);
    const std::size_t K = static_cast<std::size_t>(spec.n_instances);
    const std::size_t T = times.size();
    std::vector<std::vector<double>> rows(K);
    for (std::size_t k = 0; k < K; ++k) {
        const CouplingModel m = sample_instance(spec, static_cast<int>(k));
        rows[k] = bound_curve(m, times, opts, workers).det_bound;
    }
    EnsembleCurve out;
    out.times = times;
    out.mean.resize(T);
    out.std_error.resize(T);
    std::vector<double> col(K);
    for (std::size_t ti = 0; ti < T; ++ti) {
        for (std::size_t k = 0; k < K; ++k) col[k] = rows[k][ti];
        const double mean = detail::pairwise_mean(col);
        out.mean[ti] = mean;
        double ss = 0.0;
        for (double v : col) ss += (v - mean) * (v - mean);
        out.std_error[ti] =
            K > 1 ? std::sqrt(ss / (static_cast<double>(K) * (static_cast<double>(K) - 1)))
                  : 0.0;
    }
    if (keep_instances) out.instance_curves = std::move(rows);
    out.spec_descriptor = spec;
    return out;
}

enum class ScalingForm { logarithmic, power };

// Least-squares fit of survival times against system size. The logarithmic
// form regresses t = intercept + slope * ln N; the power form regresses
// ln t = intercept + slope * ln N (so amplitude() = exp(intercept)).
struct ScalingFit {
    ScalingForm form = ScalingForm::logarithmic;
    double intercept = 0.0, slope = 0.0;
    double intercept_err = 0.0, slope_err = 0.0;
    double r_squared = 0.0;
    std::vector<double> residuals;  // regression-space, per accepted point

    double amplitude() const {
        return form == ScalingForm::power ? std::exp(intercept) : intercept;
    }
    double exponent() const { return slope; }
};

inline ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points,
                              ScalingForm form) {
    std::vector<double> xs, ys;
    for (const auto& [n, t] : points) {
        if (!std::isfinite(n) || !std::isfinite(t)) continue;
        if (!(n > 0.0)) throw invalid_config("fit_scaling: system sizes must be positive");
        if (form == ScalingForm::power && !(t > 0.0))
            throw invalid_config("fit_scaling: power-law fit needs positive times");
        xs.push_back(std::log(n));
        ys.push_back(form == ScalingForm::power ? std::log(t) : t);
    }
    const std::size_t n = xs.size();
    if (n < 3) throw invalid_config("fit_scaling: need at least 3 finite points");
    double xb = 0.0, yb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        xb += xs[i];
        yb += ys[i];
    }
    xb /= static_cast<double>(n);
    yb /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - xb) * (xs[i] - xb);
        sxy += (xs[i] - xb) * (ys[i] - yb);
        syy += (ys[i] - yb) * (ys[i] - yb);
    }
    if (!(sxx > 0.0)) throw invalid_config("fit_scaling: all system sizes identical");
    ScalingFit fit;
    fit.form = form;
    fit.slope = sxy / sxx;
    fit.intercept = yb - fit.slope * xb;
    double ssr = 0.0;
    fit.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        fit.residuals[i] = e;
        ssr += e * e;
    }
    const double sigma2 = ssr / static_cast<double>(n - 2);
    fit.slope_err = std::sqrt(sigma2 / sxx);
    fit.intercept_err =
        std::sqrt(sigma2 * (1.0 / static_cast<double>(n) + xb * xb / sxx));
    fit.r_squared = syy > 0.0 ? 1.0 - ssr / syy : (ssr > 0.0 ? 0.0 : 1.0);
    // Clamp tiny negative drift from cancellation.
    fit.r_squared = std::clamp(fit.r_squared, 0.0, 1.0);
    return fit;
}

}  // namespace tcmem
