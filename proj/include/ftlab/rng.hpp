// rng.hpp — keyed counter RNG for reproducible ensembles
//
// Every random draw in the library goes through SplitMix64 keyed by
// (seed, stream). The same key always reproduces the identical bit
// sequence, independent of platform threading or call interleaving,
// which is what makes parallel ensemble runs byte-deterministic.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace ftlab {

// Identifies one independent random stream (stream = instance index).
struct RngSpec {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

class SplitMix64 {
public:
    explicit SplitMix64(RngSpec spec)
        : state_(mix(mix(spec.seed) ^ (spec.stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL))) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform in (0, 1]; never returns 0 so it is log-safe.
    double next_unit() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (second value cached).
    double next_gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(next_unit()));
        const double phi = 2.0 * std::numbers::pi * next_unit();
        cached_ = r * std::sin(phi);
        has_cached_ = true;
        return r * std::cos(phi);
    }

    // Re and Im independent N(0,1).
    std::complex<double> next_complex_gaussian() {
        const double re = next_gaussian();
        const double im = next_gaussian();
        return {re, im};
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace ftlab
