#pragma once

#include <cstdint>

namespace hsie {

/// Counter-based generator: draw i of stream (seed) is splitmix64(seed + (i+1)*golden).
/// Any draw can be recomputed from (seed, counter) alone, so results do not depend on
/// how work is split across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t counter = 0) : seed_(seed), counter_(counter) {}

    /// Independent sub-stream, e.g. one per band or per epoch.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller (cosine branch only; no cached state).
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace hsie
