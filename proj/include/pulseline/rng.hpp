#pragma once

#include <cmath>
#include <cstdint>

namespace pulseline {

// splitmix64 finalizer; the workhorse for both the sequential stream and the
// counter-based draws below.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline double u64_to_unit(std::uint64_t v) {
    // 53 random bits -> [0, 1)
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

// Sequential deterministic stream (shuffles, weight init).
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return u64_to_unit(next()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // unbiased integer in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

private:
    std::uint64_t state_;
};

// Counter-based draws: value is a pure function of (seed, counter), no state.
// This is what the synthetic generator uses so that a frame is reproducible
// from its params alone.
inline double counter_uniform(std::uint64_t seed, std::uint64_t counter) {
    return u64_to_unit(mix64(seed ^ mix64(counter)));
}

inline double counter_gauss(std::uint64_t seed, std::uint64_t counter) {
    // Box-Muller on two counter-derived uniforms.
    const double u1 = counter_uniform(seed, 2 * counter);
    const double u2 = counter_uniform(seed, 2 * counter + 1);
    const double r = std::sqrt(-2.0 * std::log(u1 + 1e-300));
    return r * std::cos(2.0 * 3.141592653589793 * u2);
}

} // namespace pulseline
