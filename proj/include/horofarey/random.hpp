#pragma once

// Reproducible random substreams. Every Monte Carlo draw belongs to a
// fixed-size chunk; chunk c is served by its own engine seeded from
// (seed, c). Results therefore do not depend on how chunks are scheduled
// across threads.

#include <cmath>
#include <cstdint>
#include <random>

namespace horofarey {

inline constexpr std::size_t kDrawsPerChunk = 4096;

class Substream {
public:
    Substream(std::uint64_t seed, std::uint64_t stream) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                          0x686f726fu};
        engine_.seed(seq);
    }

    std::uint64_t bits() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform on (0, 1].
    double uniform_open_low() { return 1.0 - uniform(); }

    double exponential(double rate) { return -std::log(uniform_open_low()) / rate; }

    double normal() { return normal_(engine_); }

    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

} // namespace horofarey
