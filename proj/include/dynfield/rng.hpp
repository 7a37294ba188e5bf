#pragma once

#include <cmath>
#include <cstdint>

namespace dynfield {

/// Deterministic, platform-independent pseudo-random primitives.
///
/// Every stochastic step in the pipeline (phantom jitter, network
/// initialization, batch sampling, measurement noise) draws from these
/// generators so that a single seed reproduces a run bit for bit.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Combine values into a single well-mixed 64-bit key.
constexpr std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + splitmix64(b)));
}

/// Sequential generator: splitmix64 stream with explicit state.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x853c49e6748fea9bULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (no state caching; two draws per call).
    double normal() {
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::uint64_t state_;
};

/// Counter-based standard normal keyed on (seed, frame, entry).
///
/// Evaluation order independent: the draw for a given key is a pure
/// function of the key, so noise can be generated frame by frame, entry
/// by entry, or all at once with identical results.
inline double counter_normal(std::uint64_t seed, std::uint64_t frame, std::uint64_t entry) {
    const std::uint64_t k = hash_combine(hash_combine(seed, frame), entry);
    const std::uint64_t a = splitmix64(k);
    const std::uint64_t b = splitmix64(k ^ 0xda3e39cb94b95bdbULL);
    double u1 = static_cast<double>(a >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

}  // namespace dynfield
