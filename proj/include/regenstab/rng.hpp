#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace regenstab {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/**
 * Seedable random stream addressed by (seed, stream).
 *
 * The pair fully determines the sample sequence, so parallel workers draw
 * from disjoint streams without coordination: stream indices are assigned
 * per sample (Monte Carlo expectation) or per path (trajectory ensembles),
 * and results are independent of how streams are scheduled onto threads.
 */
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), engine_(mix(seed, stream)) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Exponential with the given rate (mean 1/rate). Always finite.
    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  private:
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t state = seed;
        std::uint64_t a = detail::splitmix64(state);
        state = a ^ (stream * 0xD1B54A32D192ED03ULL + 0x2545F4914F6CDD1DULL);
        return detail::splitmix64(state);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 engine_;
};

}  // namespace regenstab
