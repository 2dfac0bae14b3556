// tcmem command-line tool: magnetization-bound curves, survival times,
// size-scaling fits, coupling ensembles, row-decoder simulations, light-cone
// diagnostics, and a small-system validation suite.
//
// Every output file gets a `<name>.provenance.json` sidecar whose "config"
// object, fed back via --config, regenerates the file byte-identically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "tcmem/bound.hpp"
#include "tcmem/decoder.hpp"
#include "tcmem/errors.hpp"
#include "tcmem/fermion.hpp"
#include "tcmem/io.hpp"
#include "tcmem/model.hpp"
#include "tcmem/oracle.hpp"
#include "tcmem/parallel.hpp"
#include "tcmem/rng.hpp"
#include "tcmem/survival.hpp"

namespace {

using nlohmann::json;
using namespace tcmem;

struct CommonFlags {
    std::string config_path;
    std::string out;
    int workers = 0;
};

struct ModelFlags {
    int n = 0;
    double coupling = 1.0;
    double field = 0.0;
    std::string model_file;
};

struct GridFlags {
    std::string kind = "linear";
    double t_max = 0.0;
    double t_min = 0.0;
    int points = 200;
};

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_config("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw invalid_config("JSON parse error in " + path + ": " + e.what());
    }
    return j;
}

json load_config(const CLI::App* cmd, const CommonFlags& co) {
    if (cmd->count("--config") == 0) return json::object();
    json j = load_json_file(co.config_path);
    if (!j.is_object()) throw invalid_config("config root must be a JSON object");
    return j;
}

int resolve_workers(const CLI::App* cmd, const json& cfg, const CommonFlags& co) {
    const int w = cmd->count("--workers") ? co.workers : cfg.value("workers", 0);
    if (cmd->count("--workers") && w < 1) throw invalid_config("--workers must be >= 1");
    return w;
}

CouplingModel resolve_model(const CLI::App* cmd, const json& cfg, const ModelFlags& mf) {
    if (cmd->count("--model-file")) {
        CouplingModel m = load_json_file(mf.model_file).get<CouplingModel>();
        m.validate();
        return m;
    }
    const double coupling = cmd->count("--coupling") ? mf.coupling : cfg.value("coupling", 1.0);
    const double field = cmd->count("--field") ? mf.field : cfg.value("field", 0.0);
    if (cmd->count("--n")) return build_uniform(mf.n, coupling, field);
    if (cfg.contains("model")) {
        CouplingModel m = cfg.at("model").get<CouplingModel>();
        m.validate();
        return m;
    }
    if (cfg.contains("n_sites"))
        return build_uniform(cfg.at("n_sites").get<int>(), coupling, field);
    throw invalid_config(
        "no model specified: use --n [--coupling --field], --model-file, or config keys");
}

// Returns ({}, null) when no grid was requested and `required` is false.
std::pair<std::vector<double>, json> resolve_grid(const CLI::App* cmd, const json& cfg,
                                                  const GridFlags& gf, bool required) {
    const json g = cfg.value("grid", json::object());
    const bool any_flag = cmd->count("--t-max") || cmd->count("--points") ||
                          cmd->count("--grid-kind") || cmd->count("--t-min");
    if (!any_flag && g.empty()) {
        if (!required) return {{}, json()};
        throw invalid_config("time grid required: use --t-max [--points --grid-kind]");
    }
    const std::string kind =
        cmd->count("--grid-kind") ? gf.kind : g.value("kind", std::string("linear"));
    const double t_max = cmd->count("--t-max") ? gf.t_max : g.value("t_max", 0.0);
    const int points = cmd->count("--points") ? gf.points : g.value("points", 200);
    double t_min = cmd->count("--t-min") ? gf.t_min : g.value("t_min", 0.0);
    if (!(t_max > 0.0)) throw invalid_config("time grid needs t_max > 0");
    json eff{{"kind", kind}, {"t_max", t_max}, {"points", points}};
    std::vector<double> times;
    if (kind == "linear") {
        times = linear_grid(t_max, points);
    } else if (kind == "geometric") {
        if (!(t_min > 0.0)) t_min = t_max * 1e-3;
        times = geometric_grid(t_min, t_max, points);
        eff["t_min"] = t_min;
    } else {
        throw invalid_config("grid kind must be 'linear' or 'geometric'");
    }
    return {times, eff};
}

std::optional<double> resolve_threshold(const CLI::App* cmd, const json& cfg,
                                        double threshold_flag) {
    if (cmd->count("--threshold")) return threshold_flag;
    if (cfg.contains("threshold") && !cfg.at("threshold").is_null())
        return cfg.at("threshold").get<double>();
    return std::nullopt;
}

json effective_base(const std::string& command, int workers) {
    json eff{{"command", command}};
    if (workers > 0) eff["workers"] = workers;
    return eff;
}

std::string curve_csv(const BoundCurve& curve) {
    CsvWriter w({"time", "det_bound", "trace_bound", "stderr"});
    const bool has_trace = !curve.trace_bound.empty();
    const bool has_err = !curve.site_stderr.empty();
    for (std::size_t i = 0; i < curve.times.size(); ++i)
        w.add_row({format_double(curve.times[i]), format_double(curve.det_bound[i]),
                   has_trace ? format_double(curve.trace_bound[i]) : std::string(),
                   has_err ? format_double(curve.site_stderr[i]) : std::string()});
    return w.str();
}

// --- bound-curve ---------------------------------------------------------

int run_bound_curve(const CLI::App* cmd, const CommonFlags& co, const ModelFlags& mf,
                    const GridFlags& gf, bool trace_flag, int subsample_flag) {
    const json cfg = load_config(cmd, co);
    const CouplingModel model = resolve_model(cmd, cfg, mf);
    auto [times, grid_cfg] = resolve_grid(cmd, cfg, gf, true);
    BoundEvaluator::Options opts;
    opts.trace_bound = cmd->count("--trace-bound") ? trace_flag : cfg.value("trace_bound", false);
    opts.site_subsample =
        cmd->count("--site-subsample") ? subsample_flag : cfg.value("site_subsample", 0);
    const int workers = resolve_workers(cmd, cfg, co);

    const BoundCurve curve = bound_curve(model, times, opts, workers);

    json eff = effective_base("bound-curve", workers);
    eff["model"] = model;
    eff["grid"] = grid_cfg;
    eff["trace_bound"] = opts.trace_bound;
    eff["site_subsample"] = opts.site_subsample;
    write_with_provenance(co.out, curve_csv(curve), json{{"config", eff}});
    std::printf("wrote %s (%zu grid points, N=%d)\n", co.out.c_str(), curve.times.size(),
                model.n_sites);
    return 0;
}

// --- survival ------------------------------------------------------------

int run_survival(const CLI::App* cmd, const CommonFlags& co, const ModelFlags& mf,
                 const GridFlags& gf, double threshold_flag, int subsample_flag,
                 double initial_t_max_flag, int pps_flag, double max_time_flag,
                 const std::string& curve_out) {
    const json cfg = load_config(cmd, co);
    const CouplingModel model = resolve_model(cmd, cfg, mf);
    const std::optional<double> thr = resolve_threshold(cmd, cfg, threshold_flag);
    const int workers = resolve_workers(cmd, cfg, co);
    BoundEvaluator::Options bopts;
    bopts.site_subsample =
        cmd->count("--site-subsample") ? subsample_flag : cfg.value("site_subsample", 0);
    auto [times, grid_cfg] = resolve_grid(cmd, cfg, gf, false);

    json eff = effective_base("survival", workers);
    eff["model"] = model;
    eff["site_subsample"] = bopts.site_subsample;
    if (thr) eff["threshold"] = *thr;

    BoundCurve curve;
    SurvivalResult result;
    if (!times.empty()) {
        curve = bound_curve(model, times, bopts, workers);
        result = survival_time(curve, model.n_sites, thr);
        eff["grid"] = grid_cfg;
    } else {
        const json s = cfg.value("search", json::object());
        SurvivalSearchOptions so;
        so.initial_t_max = cmd->count("--initial-t-max") ? initial_t_max_flag
                                                        : s.value("initial_t_max", 256.0);
        so.points_per_segment =
            cmd->count("--points-per-segment") ? pps_flag : s.value("points_per_segment", 128);
        so.max_time = cmd->count("--max-time") ? max_time_flag : s.value("max_time", 1.0e6);
        so.threshold_override = thr;
        so.bound = bopts;
        so.workers = workers;
        SurvivalSearchResult sr = survival_search(model, so);
        curve = std::move(sr.curve);
        result = sr.result;
        eff["search"] = {{"initial_t_max", so.initial_t_max},
                         {"points_per_segment", so.points_per_segment},
                         {"max_time", so.max_time}};
    }

    json out = result;
    out["curve_points"] = curve.times.size();
    write_with_provenance(co.out, out.dump(2) + "\n", json{{"config", eff}});
    if (!curve_out.empty())
        write_with_provenance(curve_out, curve_csv(curve), json{{"config", eff}});
    if (result.reached())
        std::printf("survival time %.17g (threshold %.17g), wrote %s\n", *result.crossing_time,
                    result.threshold, co.out.c_str());
    else
        std::printf("threshold %.17g not reached by t=%.17g, wrote %s\n", result.threshold,
                    result.grid.t_max, co.out.c_str());
    return 0;
}

// --- scaling -------------------------------------------------------------

int run_scaling(const CLI::App* cmd, const CommonFlags& co, std::vector<int> sizes_flag,
                double coupling_flag, double field_flag, const std::string& form_flag,
                double threshold_flag, double initial_t_max_flag, int pps_flag,
                double max_time_flag) {
    const json cfg = load_config(cmd, co);
    std::vector<int> sizes =
        cmd->count("--sizes") ? sizes_flag : cfg.value("sizes", std::vector<int>{});
    if (sizes.empty()) throw invalid_config("scaling needs --sizes (or config key \"sizes\")");
    const double coupling =
        cmd->count("--coupling") ? coupling_flag : cfg.value("coupling", 1.0);
    const double field = cmd->count("--field") ? field_flag : cfg.value("field", 0.0);
    const std::string form =
        cmd->count("--form") ? form_flag : cfg.value("form", std::string("logarithmic"));
    if (form != "logarithmic" && form != "power" && form != "none")
        throw invalid_config("--form must be logarithmic, power, or none");
    const std::optional<double> thr = resolve_threshold(cmd, cfg, threshold_flag);
    const int workers = resolve_workers(cmd, cfg, co);
    const json s = cfg.value("search", json::object());
    const double base_t_max = cmd->count("--initial-t-max") ? initial_t_max_flag
                                                            : s.value("initial_t_max", 256.0);
    const int pps =
        cmd->count("--points-per-segment") ? pps_flag : s.value("points_per_segment", 128);
    const double max_time = cmd->count("--max-time") ? max_time_flag : s.value("max_time", 1.0e6);

    CsvWriter w({"N", "delta", "survival_time", "threshold"});
    std::vector<std::pair<double, double>> points;
    double prev_crossing = 0.0;
    for (int n : sizes) {
        SurvivalSearchOptions so;
        // Seed each search with the previous size's crossing so the doubling
        // search starts near the answer; deterministic across reruns.
        so.initial_t_max =
            prev_crossing > 0.0 ? std::max(base_t_max, 1.25 * prev_crossing) : base_t_max;
        so.points_per_segment = pps;
        so.max_time = max_time;
        so.threshold_override = thr;
        so.workers = workers;
        const SurvivalSearchResult sr = survival_search(build_uniform(n, coupling, field), so);
        std::string cross_cell;
        if (sr.result.reached()) {
            cross_cell = format_double(*sr.result.crossing_time);
            points.push_back({static_cast<double>(n), *sr.result.crossing_time});
            prev_crossing = *sr.result.crossing_time;
            std::printf("N=%d: survival %.6g (threshold %.6g)\n", n, *sr.result.crossing_time,
                        sr.result.threshold);
        } else {
            std::printf("N=%d: threshold %.6g not reached by t=%.6g\n", n, sr.result.threshold,
                        sr.result.grid.t_max);
        }
        w.add_row({std::to_string(n), format_double(field), cross_cell,
                   format_double(sr.result.threshold)});
    }

    json eff = effective_base("scaling", workers);
    eff["sizes"] = sizes;
    eff["coupling"] = coupling;
    eff["field"] = field;
    eff["form"] = form;
    if (thr) eff["threshold"] = *thr;
    eff["search"] = {{"initial_t_max", base_t_max},
                     {"points_per_segment", pps},
                     {"max_time", max_time}};
    write_with_provenance(co.out, w.str(), json{{"config", eff}});
    std::printf("wrote %s\n", co.out.c_str());

    if (form != "none") {
        json fj;
        try {
            const ScalingFit fit = fit_scaling(
                points, form == "power" ? ScalingForm::power : ScalingForm::logarithmic);
            fj = json{{"fitted", true},
                      {"form", form},
                      {"intercept", fit.intercept},
                      {"slope", fit.slope},
                      {"intercept_err", fit.intercept_err},
                      {"slope_err", fit.slope_err},
                      {"r_squared", fit.r_squared},
                      {"amplitude", fit.amplitude()},
                      {"exponent", fit.exponent()},
                      {"residuals", fit.residuals}};
            std::printf("%s fit: intercept %.6g +- %.2g, slope %.6g +- %.2g, R^2 %.6f\n",
                        form.c_str(), fit.intercept, fit.intercept_err, fit.slope, fit.slope_err,
                        fit.r_squared);
        } catch (const error& e) {
            fj = json{{"fitted", false}, {"form", form}, {"reason", e.what()}};
            std::printf("fit skipped: %s\n", e.what());
        }
        write_with_provenance(co.out + ".fit.json", fj.dump(2) + "\n", json{{"config", eff}});
    }
    return 0;
}

// --- ensemble ------------------------------------------------------------

int run_ensemble(const CLI::App* cmd, const CommonFlags& co, const GridFlags& gf, int n_flag,
                 int instances_flag, std::uint64_t seed_flag, double coupling_flag,
                 std::vector<double> coupling_range, double field_flag,
                 std::vector<double> field_range, int subsample_flag) {
    const json cfg = load_config(cmd, co);
    EnsembleSpec spec;
    if (cfg.contains("ensemble") && !cmd->count("--n")) {
        spec = cfg.at("ensemble").get<EnsembleSpec>();
    } else {
        if (!cmd->count("--n")) throw invalid_config("ensemble needs --n or config key \"ensemble\"");
        spec.n_sites = n_flag;
        spec.coupling_dist = cmd->count("--coupling-range")
                                 ? DistributionSpec::uniform(coupling_range[0], coupling_range[1])
                                 : DistributionSpec::fixed(coupling_flag);
        spec.field_dist = cmd->count("--field-range")
                              ? DistributionSpec::uniform(field_range[0], field_range[1])
                              : DistributionSpec::fixed(field_flag);
        spec.n_instances = instances_flag;
        spec.master_seed = seed_flag;
    }
    spec.validate();
    auto [times, grid_cfg] = resolve_grid(cmd, cfg, gf, true);
    BoundEvaluator::Options bopts;
    bopts.site_subsample =
        cmd->count("--site-subsample") ? subsample_flag : cfg.value("site_subsample", 0);
    const int workers = resolve_workers(cmd, cfg, co);

    const EnsembleCurve ec = ensemble_curve(spec, times, bopts, workers);

    CsvWriter w({"time", "mean", "stderr"});
    for (std::size_t i = 0; i < ec.times.size(); ++i)
        w.add_row({format_double(ec.times[i]), format_double(ec.mean[i]),
                   format_double(ec.std_error[i])});
    json eff = effective_base("ensemble", workers);
    eff["ensemble"] = spec;
    eff["grid"] = grid_cfg;
    eff["site_subsample"] = bopts.site_subsample;
    write_with_provenance(co.out, w.str(), json{{"config", eff}});
    std::printf("wrote %s (%d instances, %zu grid points)\n", co.out.c_str(), spec.n_instances,
                ec.times.size());
    return 0;
}

// --- decode-sim ----------------------------------------------------------

int run_decode_sim(const CLI::App* cmd, const CommonFlags& co, std::vector<double> q_flag,
                   int n_flag, const std::string& method_flag, long long shots_flag,
                   std::uint64_t seed_flag, int rows_flag, const std::string& trace_out) {
    const json cfg = load_config(cmd, co);
    std::vector<double> qs = cmd->count("--q") ? q_flag : cfg.value("q", std::vector<double>{});
    if (qs.empty()) throw invalid_config("decode-sim needs --q (or config key \"q\")");
    const int n = cmd->count("--n") ? n_flag : cfg.value("n_sites", 0);
    if (n < 2) throw invalid_config("decode-sim needs --n >= 2");
    const std::string method =
        cmd->count("--method") ? method_flag : cfg.value("method", std::string("exact"));
    if (method != "exact" && method != "mc")
        throw invalid_config("--method must be exact or mc");
    const long long shots =
        cmd->count("--shots") ? shots_flag : cfg.value("shots", (long long)100000);
    const std::uint64_t seed = cmd->count("--seed") ? seed_flag : cfg.value("seed", (std::uint64_t)1);
    const int rows = cmd->count("--rows") ? rows_flag : cfg.value("rows", 1);
    if (rows < 1) throw invalid_config("--rows must be >= 1");

    std::string trace_text;
    CsvWriter w({"q", "N", "p", "stderr"});
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        const double q = qs[qi];
        ProbEstimate est;
        if (method == "exact") {
            est = row_logical_prob_exact(q, n);
        } else if (trace_out.empty()) {
            est = row_logical_prob_monte_carlo(q, n, shots, stream_seed(seed, qi));
        } else {
            // Traced variant: identical sampling stream to the library's
            // Monte Carlo estimator, with one JSON line per shot.
            Rng rng(stream_seed(seed, qi));
            long long errors = 0;
            for (long long s = 0; s < shots; ++s) {
                std::uint64_t bits = 0;
                for (int b = 0; b < n; ++b)
                    if (rng.uniform01() < q) bits |= std::uint64_t{1} << b;
                const DecodeOutcome oc = decode_row(bits, n, rng);
                if (oc.logical_error) ++errors;
                trace_text += json{{"q", q},
                                   {"shot", s},
                                   {"bits", to_bitstring(bits, n)},
                                   {"syndrome", syndrome(bits, n)},
                                   {"weight", oc.correction_weight},
                                   {"logical", oc.logical_error},
                                   {"tie", oc.tie}}
                                  .dump();
                trace_text += '\n';
            }
            const double p = static_cast<double>(errors) / static_cast<double>(shots);
            est = {p, std::sqrt(p * (1.0 - p) / static_cast<double>(shots))};
        }
        double p = est.p, se = est.std_error;
        if (rows > 1) {
            // Aggregate across independent rows; the Monte Carlo error is
            // propagated through the derivative of the aggregation map.
            const double dp = static_cast<double>(rows) *
                              std::pow(std::abs(1.0 - 2.0 * est.p), rows - 1);
            p = aggregate_logical(est.p, rows);
            se = dp * est.std_error;
        }
        w.add_row({format_double(q), std::to_string(n), format_double(p),
                   method == "exact" ? std::string() : format_double(se)});
    }

    json eff = effective_base("decode-sim", 0);
    eff["q"] = qs;
    eff["n_sites"] = n;
    eff["method"] = method;
    eff["rows"] = rows;
    if (method == "mc") {
        eff["shots"] = shots;
        eff["seed"] = seed;
    }
    write_with_provenance(co.out, w.str(), json{{"config", eff}});
    if (!trace_out.empty() && method == "mc")
        write_with_provenance(trace_out, trace_text, json{{"config", eff}});
    std::printf("wrote %s (%zu q values, N=%d, %s)\n", co.out.c_str(), qs.size(), n,
                method.c_str());
    return 0;
}

// --- lightcone -----------------------------------------------------------

int run_lightcone(const CLI::App* cmd, const CommonFlags& co, const ModelFlags& mf,
                  const GridFlags& gf) {
    const json cfg = load_config(cmd, co);
    const CouplingModel model = resolve_model(cmd, cfg, mf);
    auto [times, grid_cfg] = resolve_grid(cmd, cfg, gf, true);

    const SpectralData sd = spectral(build_h(model));
    CsvWriter w({"time", "distance", "amplitude"});
    for (double t : times) {
        const std::vector<double> profile = lightcone_profile(sd, model.n_sites, t);
        for (std::size_t d = 0; d < profile.size(); ++d)
            w.add_row({format_double(t), std::to_string(d), format_double(profile[d])});
    }
    json eff = effective_base("lightcone", 0);
    eff["model"] = model;
    eff["grid"] = grid_cfg;
    write_with_provenance(co.out, w.str(), json{{"config", eff}});
    std::printf("wrote %s (%zu times x %d distances, N=%d)\n", co.out.c_str(), times.size(),
                model.n_sites / 2 + 1, model.n_sites);
    return 0;
}

// --- oracle-check --------------------------------------------------------

struct CheckRecord {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

int run_oracle_check(const CLI::App* cmd, const CommonFlags& co, int n_max_flag) {
    const json cfg = load_config(cmd, co);
    int n_max = cmd->count("--n-max") ? n_max_flag : cfg.value("n_max", 8);
    if (n_max < 4 || n_max > 12) throw invalid_config("--n-max must be in [4, 12]");

    std::vector<CheckRecord> checks;
    auto record = [&checks](const std::string& name, double value, double tol) {
        checks.push_back({name, value, tol, value <= tol});
    };

    // Dominance of the bound over the brute-force magnetization, plus
    // det-term <= trace-term, across uniform and randomized small systems.
    double worst_dom = -1.0e300, worst_pair = -1.0e300, worst_t0 = 0.0;
    for (int N = 4; N <= n_max; N += 2) {
        std::vector<CouplingModel> models;
        for (double delta : {0.1, 0.3, 0.7}) models.push_back(build_uniform(N, 1.0, delta));
        {
            Rng rng(stream_seed(9000, static_cast<std::size_t>(N)));
            CouplingModel r;
            r.n_sites = N;
            for (int i = 0; i < N; ++i) {
                r.couplings.push_back(rng.uniform(0.5, 1.0));
                r.fields.push_back(rng.uniform(-0.3, 0.3));
            }
            models.push_back(r);
        }
        for (const CouplingModel& m : models) {
            DenseEvolution ev(m);
            BoundEvaluator be(m);
            std::vector<BoundEvaluator::SiteContext> ctxs;
            for (int site : be.chosen_sites()) ctxs.push_back(be.make_site(site));
            worst_t0 = std::max(worst_t0, std::abs(magnetization_bound(m, 0.0) - 1.0));
            for (int i = 1; i <= 25; ++i) {
                const double t = 15.0 * i / 25.0;
                std::vector<double> det_terms, trace_terms;
                for (const auto& ctx : ctxs) {
                    const auto [d, tr] = be.site_terms_with_trace(ctx, t);
                    det_terms.push_back(d);
                    trace_terms.push_back(tr);
                }
                const double bound = detail::pairwise_mean(det_terms);
                worst_dom = std::max(worst_dom, exact_magnetization(ev, t) - bound);
                for (std::size_t k = 0; k < det_terms.size(); ++k)
                    worst_pair = std::max(worst_pair, det_terms[k] - trace_terms[k]);
            }
        }
    }
    record("exact_magnetization_below_bound", worst_dom, 1e-8);
    record("det_term_below_trace_term", worst_pair, 1e-9);
    record("bound_at_t0_equals_1", worst_t0, 1e-12);

    {  // Unperturbed chains stay exactly at 1.
        const CouplingModel m = build_uniform(50, 1.0, 0.0);
        BoundEvaluator be(m);
        const auto ctx = be.make_site(1);
        double worst = 0.0;
        for (double t : {1.0, 10.0, 100.0, 1000.0})
            worst = std::max(worst, std::abs(be.site_term(ctx, t) - 1.0));
        record("unperturbed_bound_constant_1", worst, 1e-10);
    }

    {  // Quadratic-evolution conventions: orthogonality, group law, conjugation.
        Rng rng(stream_seed(9001, 0));
        CouplingModel m;
        m.n_sites = 40;
        for (int i = 0; i < m.n_sites; ++i) {
            m.couplings.push_back(rng.uniform(0.5, 1.0));
            m.fields.push_back(rng.uniform(-0.4, 0.4));
        }
        const SkewMatrix h = build_h(m);
        const SpectralData sd = spectral(h);
        const Eigen::MatrixXd p1 = propagator(sd, 0.6), p2 = propagator(sd, 2.3);
        const Eigen::MatrixXd p12 = propagator(sd, 2.9);
        const Eigen::Index d = h.m.rows();
        record("propagator_orthogonal",
               (p1.transpose() * p1 - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff(),
               1e-10);
        record("propagator_group_law", (p1 * p2 - p12).cwiseAbs().maxCoeff(), 1e-9);
        record("generator_conjugation_invariance",
               (p1 * h.m * p1.transpose() - h.m).cwiseAbs().maxCoeff(), 1e-10);
    }

    {  // Gaussian overlap conventions.
        Eigen::MatrixXd m1(2, 2), m2(2, 2);
        const double g = 0.73;
        m1 << 0, -1, 1, 0;        // x-polarized pure mode
        m2 << 0, -g, g, 0;        // partially polarized along x
        record("single_mode_overlap_identity",
               std::abs(gaussian_overlap(SkewMatrix(m1), SkewMatrix(m2)) - 0.5 * (1.0 + g)),
               1e-12);
        const SkewMatrix h0 = build_h0(6);
        record("reference_state_purity", std::abs(gaussian_overlap(h0, h0) - 1.0), 1e-12);
    }

    {  // Cross-sector phase conventions at oracle scale.
        DenseEvolution ev(build_uniform(6, 1.0, 0.3));
        record("sector_phase_zero_at_t0", std::abs(ghz_sector_phase(ev, 0.0, 0)), 1e-12);
    }

    bool all_pass = true;
    double max_dom = worst_dom;
    for (const auto& c : checks) {
        std::printf("%-36s %11.3e (tol %.1e)  %s\n", c.name.c_str(), c.value, c.tolerance,
                    c.pass ? "ok" : "VIOLATION");
        all_pass = all_pass && c.pass;
    }
    std::printf("max bound-violation margin: %.3e (negative = exact stays below bound)\n",
                max_dom);
    std::printf("oracle-check: %s\n", all_pass ? "all checks passed" : "VIOLATIONS FOUND");

    if (cmd->count("--out")) {
        json rep{{"max_dominance_margin", max_dom}, {"pass", all_pass}};
        rep["checks"] = json::array();
        for (const auto& c : checks)
            rep["checks"].push_back(json{{"name", c.name},
                                         {"value", c.value},
                                         {"tolerance", c.tolerance},
                                         {"pass", c.pass}});
        json eff = effective_base("oracle-check", 0);
        eff["n_max"] = n_max;
        write_with_provenance(co.out, rep.dump(2) + "\n", json{{"config", eff}});
        std::printf("wrote %s\n", co.out.c_str());
    }
    return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transverse-Ising quantum-memory survival toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tcmem::kVersion));

    CommonFlags co;
    ModelFlags mf;
    GridFlags gf;
    bool trace_bound_flag = false;
    int subsample_flag = 0;
    double threshold_flag = 0.0;
    double initial_t_max_flag = 256.0;
    int pps_flag = 128;
    double max_time_flag = 1.0e6;
    std::string curve_out, trace_out, form_flag = "logarithmic", method_flag = "exact";
    std::vector<int> sizes_flag;
    std::vector<double> q_flag, coupling_range, field_range;
    int instances_flag = 100, rows_flag = 1, n_max_flag = 8;
    long long shots_flag = 100000;
    std::uint64_t seed_flag = 1;

    auto add_common = [&](CLI::App* sub, bool out_required) {
        sub->add_option("--config", co.config_path, "JSON config file; flags override its values");
        auto* o = sub->add_option("--out", co.out, "output file path");
        if (out_required) o->required();
        sub->add_option("--workers", co.workers, "worker threads (default: hardware)");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--n", mf.n, "number of sites (uniform chain)");
        sub->add_option("--coupling", mf.coupling, "uniform coupling strength (default 1)");
        sub->add_option("--field", mf.field, "uniform transverse field (default 0)");
        sub->add_option("--model-file", mf.model_file, "JSON file with explicit couplings/fields");
    };
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--t-max", gf.t_max, "largest grid time");
        sub->add_option("--points", gf.points, "number of grid points (default 200)");
        sub->add_option("--grid-kind", gf.kind, "linear or geometric (default linear)")
            ->check(CLI::IsMember({"linear", "geometric"}));
        sub->add_option("--t-min", gf.t_min, "first nonzero time for geometric grids");
    };

    CLI::App* bc = app.add_subcommand("bound-curve",
                                      "evaluate the magnetization bound on a time grid (CSV)");
    add_common(bc, true);
    add_model(bc);
    add_grid(bc);
    bc->add_flag("--trace-bound", trace_bound_flag, "also emit the trace-based bound column");
    bc->add_option("--site-subsample", subsample_flag,
                   "evaluate this many sites instead of all (0 = automatic)");

    CLI::App* sv = app.add_subcommand("survival",
                                      "survival time at the 1/sqrt(N) threshold (JSON)");
    add_common(sv, true);
    add_model(sv);
    add_grid(sv);
    sv->add_option("--threshold", threshold_flag, "override the 1/sqrt(N) threshold");
    sv->add_option("--site-subsample", subsample_flag, "site subsample size (0 = automatic)");
    sv->add_option("--initial-t-max", initial_t_max_flag,
                   "first search horizon (doubles until crossing; default 256)");
    sv->add_option("--points-per-segment", pps_flag, "grid points per search segment");
    sv->add_option("--max-time", max_time_flag, "give up doubling past this time");
    sv->add_option("--curve-out", curve_out, "also write the evaluated curve as CSV");

    CLI::App* sc = app.add_subcommand("scaling",
                                      "survival times across system sizes + fit (CSV + JSON)");
    add_common(sc, true);
    sc->add_option("--sizes", sizes_flag, "comma-separated system sizes")->delimiter(',');
    sc->add_option("--coupling", mf.coupling, "uniform coupling strength (default 1)");
    sc->add_option("--field", mf.field, "uniform transverse field");
    sc->add_option("--form", form_flag, "fit form: logarithmic, power, or none")
        ->check(CLI::IsMember({"logarithmic", "power", "none"}));
    sc->add_option("--threshold", threshold_flag, "override the 1/sqrt(N) threshold");
    sc->add_option("--initial-t-max", initial_t_max_flag, "first search horizon");
    sc->add_option("--points-per-segment", pps_flag, "grid points per search segment");
    sc->add_option("--max-time", max_time_flag, "give up doubling past this time");

    CLI::App* en = app.add_subcommand("ensemble",
                                      "mean bound curve over a random coupling ensemble (CSV)");
    add_common(en, true);
    add_grid(en);
    en->add_option("--n", mf.n, "number of sites");
    en->add_option("--instances", instances_flag, "ensemble size (default 100)");
    en->add_option("--seed", seed_flag, "master seed (default 1)");
    en->add_option("--coupling", mf.coupling, "fixed coupling value");
    en->add_option("--coupling-range", coupling_range, "uniform coupling range: lo hi")
        ->expected(2);
    en->add_option("--field", mf.field, "fixed field value");
    en->add_option("--field-range", field_range, "uniform field range: lo hi")->expected(2);
    en->add_option("--site-subsample", subsample_flag, "site subsample size (0 = automatic)");

    CLI::App* ds = app.add_subcommand("decode-sim",
                                      "row decoder failure probabilities (CSV)");
    add_common(ds, true);
    ds->add_option("--q", q_flag, "comma-separated flip probabilities")->delimiter(',');
    ds->add_option("--n", mf.n, "row length");
    ds->add_option("--method", method_flag, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}));
    ds->add_option("--shots", shots_flag, "Monte Carlo shots per q (default 100000)");
    ds->add_option("--seed", seed_flag, "Monte Carlo seed (default 1)");
    ds->add_option("--rows", rows_flag, "aggregate over this many independent rows (default 1)");
    ds->add_option("--trace-out", trace_out, "write per-shot JSON lines (mc only)");

    CLI::App* lc = app.add_subcommand("lightcone",
                                      "operator spreading amplitude by ring distance (CSV)");
    add_common(lc, true);
    add_model(lc);
    add_grid(lc);

    CLI::App* oc = app.add_subcommand("oracle-check",
                                      "validate the bound against brute-force small systems");
    add_common(oc, false);
    oc->add_option("--n-max", n_max_flag, "largest brute-force size (even, default 8)");

    try {
        app.parse(argc, argv);
        if (app.got_subcommand(bc))
            return run_bound_curve(bc, co, mf, gf, trace_bound_flag, subsample_flag);
        if (app.got_subcommand(sv))
            return run_survival(sv, co, mf, gf, threshold_flag, subsample_flag,
                                initial_t_max_flag, pps_flag, max_time_flag, curve_out);
        if (app.got_subcommand(sc))
            return run_scaling(sc, co, sizes_flag, mf.coupling, mf.field, form_flag,
                               threshold_flag, initial_t_max_flag, pps_flag, max_time_flag);
        if (app.got_subcommand(en))
            return run_ensemble(en, co, gf, mf.n, instances_flag, seed_flag, mf.coupling,
                                coupling_range, mf.field, field_range, subsample_flag);
        if (app.got_subcommand(ds))
            return run_decode_sim(ds, co, q_flag, mf.n, method_flag, shots_flag, seed_flag,
                                  rows_flag, trace_out);
        if (app.got_subcommand(lc)) return run_lightcone(lc, co, mf, gf);
        if (app.got_subcommand(oc)) return run_oracle_check(oc, co, n_max_flag);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const tcmem::error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 3;
    }
}
