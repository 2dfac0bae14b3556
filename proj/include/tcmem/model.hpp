#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tcmem/errors.hpp"
#include "tcmem/rng.hpp"

namespace tcmem {

// One transverse Ising chain instance:
//   H = -sum_n couplings[n] Z_n Z_{n+1} + sum_n fields[n] X_n   (periodic)
// Site indices are 1-based in every public interface (n = 1..N).
struct CouplingModel {
    int n_sites = 0;
    std::vector<double> couplings;  // Delta_n > 0
    std::vector<double> fields;     // delta_n, any sign

    void validate() const {
        if (n_sites < 2) throw invalid_model("model requires n_sites >= 2");
        if (static_cast<int>(couplings.size()) != n_sites ||
            static_cast<int>(fields.size()) != n_sites)
            throw invalid_model("couplings/fields must have length n_sites");
        for (double d : couplings) {
            if (!(d > 0.0) || !std::isfinite(d))
                throw invalid_model("all couplings must be positive and finite");
        }
        for (double f : fields) {
            if (!std::isfinite(f)) throw invalid_model("all fields must be finite");
        }
    }

    double coupling_min() const {
        return *std::min_element(couplings.begin(), couplings.end());
    }

    double max_abs_field() const {
        double m = 0.0;
        for (double f : fields) m = std::max(m, std::abs(f));
        return m;
    }

    bool is_uniform() const {
        for (int n = 1; n < n_sites; ++n) {
            if (couplings[n] != couplings[0] || fields[n] != fields[0]) return false;
        }
        return true;
    }

    bool operator==(const CouplingModel&) const = default;
};

inline CouplingModel build_uniform(int n_sites, double coupling, double field) {
    CouplingModel m{n_sites, std::vector<double>(std::max(n_sites, 0), coupling),
                    std::vector<double>(std::max(n_sites, 0), field)};
    m.validate();
    return m;
}

// Negate the field at one site (1-based). Involution.
inline CouplingModel flip_site(const CouplingModel& model, int site) {
    model.validate();
    if (site < 1 || site > model.n_sites)
        throw invalid_model("flip_site: site index out of range [1, N]");
    CouplingModel out = model;
    out.fields[site - 1] = -out.fields[site - 1];
    return out;
}

// Fixed value (lo == hi) or uniform draw from [lo, hi).
struct DistributionSpec {
    double lo = 0.0;
    double hi = 0.0;

    static DistributionSpec fixed(double v) { return {v, v}; }
    static DistributionSpec uniform(double a, double b) { return {a, b}; }

    bool is_fixed() const { return lo == hi; }
    double sample(Rng& rng) const { return is_fixed() ? lo : rng.uniform(lo, hi); }

    void validate(const char* what) const {
        if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
            throw invalid_model(std::string(what) + ": invalid interval bounds");
    }

    bool operator==(const DistributionSpec&) const = default;
};

struct EnsembleSpec {
    int n_sites = 0;
    DistributionSpec coupling_dist;  // lower bound must stay positive
    DistributionSpec field_dist;
    int n_instances = 0;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (n_sites < 2) throw invalid_model("ensemble requires n_sites >= 2");
        coupling_dist.validate("coupling_dist");
        field_dist.validate("field_dist");
        if (!(coupling_dist.lo > 0.0))
            throw invalid_model("coupling interval lower bound must be positive");
        if (n_instances < 1) throw invalid_model("n_instances must be >= 1");
    }

    bool operator==(const EnsembleSpec&) const = default;
};

// Instance k is a function of (master_seed, k) only: draw order is all
// couplings then all fields, from the dedicated stream generator.
inline CouplingModel sample_instance(const EnsembleSpec& spec, int k) {
    spec.validate();
    if (k < 0 || k >= spec.n_instances)
        throw invalid_model("sample_instance: index out of range");
    Rng rng(stream_seed(spec.master_seed, static_cast<std::uint64_t>(k)));
    CouplingModel m;
    m.n_sites = spec.n_sites;
    m.couplings.reserve(spec.n_sites);
    m.fields.reserve(spec.n_sites);
    for (int n = 0; n < spec.n_sites; ++n) m.couplings.push_back(spec.coupling_dist.sample(rng));
    for (int n = 0; n < spec.n_sites; ++n) m.fields.push_back(spec.field_dist.sample(rng));
    m.validate();
    return m;
}

inline std::vector<CouplingModel> sample_ensemble(const EnsembleSpec& spec) {
    spec.validate();
    std::vector<CouplingModel> out;
    out.reserve(spec.n_instances);
    for (int k = 0; k < spec.n_instances; ++k) out.push_back(sample_instance(spec, k));
    return out;
}

// ---- JSON serialization ------------------------------------------------

inline void to_json(nlohmann::json& j, const CouplingModel& m) {
    j = nlohmann::json{{"n_sites", m.n_sites}, {"couplings", m.couplings}, {"fields", m.fields}};
}

inline void from_json(const nlohmann::json& j, CouplingModel& m) {
    j.at("n_sites").get_to(m.n_sites);
    j.at("couplings").get_to(m.couplings);
    j.at("fields").get_to(m.fields);
    m.validate();
}

inline void to_json(nlohmann::json& j, const DistributionSpec& d) {
    if (d.is_fixed())
        j = nlohmann::json{{"fixed", d.lo}};
    else
        j = nlohmann::json{{"uniform", {d.lo, d.hi}}};
}

inline void from_json(const nlohmann::json& j, DistributionSpec& d) {
    if (j.contains("fixed")) {
        d.lo = d.hi = j.at("fixed").get<double>();
    } else if (j.contains("uniform")) {
        auto v = j.at("uniform");
        if (!v.is_array() || v.size() != 2)
            throw invalid_config("distribution \"uniform\" must be a [lo, hi] pair");
        d.lo = v[0].get<double>();
        d.hi = v[1].get<double>();
    } else {
        throw invalid_config("distribution must have a \"fixed\" or \"uniform\" key");
    }
}

inline void to_json(nlohmann::json& j, const EnsembleSpec& s) {
    j = nlohmann::json{{"spec",
                        {{"n_sites", s.n_sites},
                         {"coupling_dist", s.coupling_dist},
                         {"field_dist", s.field_dist},
                         {"n_instances", s.n_instances},
                         {"master_seed", s.master_seed}}}};
}

inline void from_json(const nlohmann::json& j, EnsembleSpec& s) {
    const nlohmann::json& spec = j.contains("spec") ? j.at("spec") : j;
    spec.at("n_sites").get_to(s.n_sites);
    spec.at("coupling_dist").get_to(s.coupling_dist);
    spec.at("field_dist").get_to(s.field_dist);
    spec.at("n_instances").get_to(s.n_instances);
    spec.at("master_seed").get_to(s.master_seed);
    s.validate();
}

}  // namespace tcmem
