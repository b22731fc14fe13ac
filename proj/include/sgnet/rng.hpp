#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

namespace sgnet {

// Seeded random source. Distributions are computed here from raw engine bits
// rather than through <random> distribution objects, so the whole stream is
// captured by the engine state and survives a checkpoint round trip.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate is discarded.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n) without modulo bias.
    std::size_t uniform_index(std::size_t n);

    /// Independent child stream; advances this generator by one draw.
    Rng fork() { return Rng(engine_() ^ 0x9E3779B97F4A7C15ULL); }

    std::string serialize() const;
    void deserialize(const std::string& state);

    bool operator==(const Rng& other) const { return engine_ == other.engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace sgnet
