#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tcmem/errors.hpp"
#include "tcmem/model.hpp"
#include "tcmem/oracle.hpp"
#include "tcmem/rng.hpp"

namespace tcmem {

// Largest N for which the exact binomial route is offered; C(24,12) is still
// exactly representable in 64-bit and double arithmetic.
inline constexpr int kMaxExactDecodeSites = 24;

struct DecodeOutcome {
    int correction_weight = 0;  // min(w, N - w) flips applied
    bool logical_error = false;
    bool tie = false;  // exact half-weight case, resolved by a fair coin
};

// 1-based positions n where bits differ between site n and site n+1 (ring).
inline std::vector<int> syndrome(std::uint64_t bits, int n_sites) {
    if (n_sites < 2 || n_sites > 64) throw invalid_config("syndrome needs 2..64 sites");
    std::vector<int> walls;
    for (int n = 0; n < n_sites; ++n) {
        const int a = (bits >> n) & 1;
        const int b = (bits >> ((n + 1) % n_sites)) & 1;
        if (a != b) walls.push_back(n + 1);
    }
    return walls;
}

// Minimum-flip correction toward the {all-0, all-1} stabilizer space: strict
// minority weight is flipped back; a logical error is recorded when the
// majority was flipped; exact ties are decided by one fair coin from `rng`.
inline DecodeOutcome decode_row(std::uint64_t bits, int n_sites, Rng& rng) {
    if (n_sites < 2 || n_sites > 64) throw invalid_config("decode_row needs 2..64 sites");
    const int w = std::popcount(bits & ((n_sites == 64) ? ~std::uint64_t{0}
                                                        : ((std::uint64_t{1} << n_sites) - 1)));
    DecodeOutcome out;
    out.correction_weight = std::min(w, n_sites - w);
    if (2 * w < n_sites) {
        out.logical_error = false;
    } else if (2 * w > n_sites) {
        out.logical_error = true;
    } else {
        out.tie = true;
        out.logical_error = rng.coin();
    }
    return out;
}

struct ProbEstimate {
    double p = 0.0;
    double std_error = 0.0;  // 0 for exact evaluations
};

namespace detail {

// Pascal-triangle binomials, exact in uint64 for n <= 24 (max 2704156).
inline std::vector<std::uint64_t> binomial_row(int n) {
    std::vector<std::uint64_t> row(static_cast<std::size_t>(n) + 1, 1);
    for (int k = 1; k <= n; ++k)
        row[static_cast<std::size_t>(k)] =
            row[static_cast<std::size_t>(k - 1)] * static_cast<std::uint64_t>(n - k + 1) /
            static_cast<std::uint64_t>(k);
    return row;
}

}  // namespace detail

// P(logical error) for i.i.d. site flips with probability q: the binomial
// tail P(w > N/2) plus half the tie mass at w = N/2 when N is even.
inline ProbEstimate row_logical_prob_exact(double q, int n_sites) {
    if (!(q >= 0.0 && q <= 1.0)) throw invalid_config("flip probability must be in [0,1]");
    if (n_sites < 2) throw invalid_config("row needs at least 2 sites");
    if (n_sites > kMaxExactDecodeSites)
        throw resource_limit("exact row decoding capped at " +
                             std::to_string(kMaxExactDecodeSites) + " sites");
    const std::vector<std::uint64_t> binom = detail::binomial_row(n_sites);
    double p = 0.0;
    for (int k = 0; k <= n_sites; ++k) {
        if (2 * k < n_sites) continue;
        const double pmf = static_cast<double>(binom[static_cast<std::size_t>(k)]) *
                           std::pow(q, k) * std::pow(1.0 - q, n_sites - k);
        p += (2 * k == n_sites) ? 0.5 * pmf : pmf;
    }
    return {std::min(p, 1.0), 0.0};
}

inline ProbEstimate row_logical_prob_monte_carlo(double q, int n_sites, long long shots,
                                                 std::uint64_t seed) {
    if (!(q >= 0.0 && q <= 1.0)) throw invalid_config("flip probability must be in [0,1]");
    if (n_sites < 2 || n_sites > 64) throw invalid_config("row needs 2..64 sites");
    if (shots <= 0) throw invalid_config("shot count must be positive");
    Rng rng(seed);
    long long errors = 0;
    for (long long s = 0; s < shots; ++s) {
        std::uint64_t bits = 0;
        for (int n = 0; n < n_sites; ++n)
            if (rng.uniform01() < q) bits |= std::uint64_t{1} << n;
        if (decode_row(bits, n_sites, rng).logical_error) ++errors;
    }
    const double p = static_cast<double>(errors) / static_cast<double>(shots);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(shots))};
}

enum class ProbMethod { exact, monte_carlo };

inline ProbEstimate row_logical_prob(double q, int n_sites, ProbMethod method,
                                     long long shots = 0, std::uint64_t seed = 0) {
    return method == ProbMethod::exact ? row_logical_prob_exact(q, n_sites)
                                       : row_logical_prob_monte_carlo(q, n_sites, shots, seed);
}

// Probability that an odd number of the N independent rows fails:
// 1/2 (1 - (1-2p)^N).
inline double aggregate_logical(double p, int rows) {
    if (!(p >= 0.0 && p <= 1.0)) throw invalid_config("row probability must be in [0,1]");
    if (rows < 1) throw invalid_config("row count must be positive");
    return 0.5 * (1.0 - std::pow(1.0 - 2.0 * p, rows));
}

// Direct Monte Carlo of the same parity event, for cross-checking.
inline ProbEstimate aggregate_logical_monte_carlo(double p, int rows, long long trials,
                                                  std::uint64_t seed) {
    if (!(p >= 0.0 && p <= 1.0)) throw invalid_config("row probability must be in [0,1]");
    if (rows < 1 || trials <= 0) throw invalid_config("rows and trials must be positive");
    Rng rng(seed);
    long long odd = 0;
    for (long long t = 0; t < trials; ++t) {
        int parity = 0;
        for (int r = 0; r < rows; ++r)
            if (rng.uniform01() < p) parity ^= 1;
        odd += parity;
    }
    const double est = static_cast<double>(odd) / static_cast<double>(trials);
    return {est, std::sqrt(est * (1.0 - est) / static_cast<double>(trials))};
}

// Empirical per-row failure probability of the evolved memory at small N:
// sample Z-basis strings from the dense state and decode each one.
inline ProbEstimate memory_failure_small(const CouplingModel& model, double t, int shots,
                                         std::uint64_t seed) {
    if (shots <= 0) throw invalid_config("shot count must be positive");
    const std::vector<std::uint64_t> samples = exact_sample(model, t, shots, seed);
    Rng tie_rng(stream_seed(seed, 1));
    long long errors = 0;
    for (std::uint64_t bits : samples)
        if (decode_row(bits, model.n_sites, tie_rng).logical_error) ++errors;
    const double p = static_cast<double>(errors) / static_cast<double>(shots);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(shots))};
}

}  // namespace tcmem
