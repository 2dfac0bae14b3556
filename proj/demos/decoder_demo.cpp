// Walk through the row decoder: syndrome extraction, minimum-weight
// correction, and the exact logical-failure probability as the flip rate
// approaches the 50% threshold.
#include <cstdio>

#include "tcmem/decoder.hpp"
#include "tcmem/oracle.hpp"
#include "tcmem/rng.hpp"

int main() {
    using namespace tcmem;

    const int n = 11;
    const std::uint64_t bits = from_bitstring("01101000000");  // flips at sites 2,3,5
    std::printf("row        : %s\n", to_bitstring(bits, n).c_str());
    std::printf("syndrome   :");
    for (int wall : syndrome(bits, n)) std::printf(" %d", wall);
    std::printf("\n");

    Rng tie_breaker(7);
    const DecodeOutcome out = decode_row(bits, n, tie_breaker);
    std::printf("correction : weight %d, logical error: %s\n", out.correction_weight,
                out.logical_error ? "yes" : "no");

    std::printf("\n%6s %20s\n", "q", "P(logical error)");
    for (double q : {0.05, 0.15, 0.25, 0.35, 0.45, 0.50}) {
        const ProbEstimate est = row_logical_prob_exact(q, n);
        std::printf("%6.2f %20.6f\n", q, est.p);
    }
    std::printf("\naggregated over 100 independent rows at q = 0.05: %.6f\n",
                aggregate_logical(row_logical_prob_exact(0.05, n).p, 100));
    return 0;
}
