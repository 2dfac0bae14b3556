#pragma once

#include <cstdint>
#include <random>

namespace tcmem {

// splitmix64 step; used to derive independent stream seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic per-stream seed: a function of (master_seed, stream_index)
// only, so streams can be generated independently and in any order.
inline std::uint64_t stream_seed(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t s = master_seed ^ (0xD2B74407B1CE6E93ULL * (stream_index + 1));
    splitmix64(s);
    return splitmix64(s);
}

// Seeded generator with explicit, implementation-independent transforms.
// mt19937_64 output is fully specified by the standard; distributions are
// hand-rolled here because std::uniform_real_distribution is not.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform double in [0, 1) with 53 random bits
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform double in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // fair coin
    bool coin() { return (engine_() >> 63) != 0; }

    // uniform integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace tcmem
