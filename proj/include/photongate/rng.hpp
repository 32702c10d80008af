#pragma once

#include <cstdint>

namespace photongate {

/// Stage identifiers mixed into per-event random streams so that each
/// pipeline stage draws from an independent sequence.
enum class Stream : std::uint64_t {
    Emission = 1,
    Gate = 2,
    Attenuation = 3,
    HbtRouting = 4,
    HomArm = 5,
    HomOutput = 6,
    HomPair = 7,
    Detection = 8,
    HomMatch = 9,
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent seed for sweep point `index` of a base seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    return base + index;
}

/// Counter-based generator: the sequence is a pure function of
/// (seed, stream, key), so every event (a pulse, a photon) owns its own
/// reproducible random numbers regardless of processing order or chunking.
///
/// Distributions are implemented here rather than taken from <random>,
/// whose distribution algorithms are unspecified and differ between
/// standard libraries.
class EventRng {
public:
    EventRng(std::uint64_t seed, Stream stream, std::uint64_t key) noexcept
        : state_(mix64(seed ^ mix64(static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL ^
                                    mix64(key + 0x632be59bd9b4e019ULL)))) {}

    std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return uniform() < p; }

    /// Exponential with the given mean (inverse CDF).
    double exponential(double mean) noexcept;

    /// Standard normal (Box-Muller, one value per call).
    double normal() noexcept;

private:
    std::uint64_t state_;
};

}  // namespace photongate
