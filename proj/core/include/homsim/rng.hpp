#pragma once

#include <cstdint>

namespace homsim {

// splitmix64 finalizer, a bijective 64-bit mixer with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent variate families drawn from one master seed. Keeping the
// purposes on separate stream keys lets a consumer redraw one family
// (for example the trial patterns) without touching the others.
enum class StreamPurpose : std::uint64_t {
    pattern = 1,
    dark = 2,
    pairing = 3,
    bootstrap = 4,
};

// Key for one variate stream. run_tag distinguishes runs that share a
// master seed, such as different sweep points or scenarios.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t run_tag,
                                   StreamPurpose purpose) {
    return mix64(mix64(seed) ^ mix64(run_tag * 17u + static_cast<std::uint64_t>(purpose)));
}

// Counter-based uniform stream. uniform(counter, slot) is a pure function
// of (key, counter, slot), so any thread partition of a trial loop draws
// identical variates and replay needs no generator state. Slots 0..7
// address up to eight variates per counter value.
struct CounterStream {
    std::uint64_t key = 0;

    CounterStream() = default;
    CounterStream(std::uint64_t seed, std::uint64_t run_tag, StreamPurpose purpose)
        : key(stream_key(seed, run_tag, purpose)) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter, unsigned slot = 0) const {
        const std::uint64_t v = mix64(key ^ mix64(counter * 8u + (slot & 7u)));
        return static_cast<double>(v >> 11) * 0x1.0p-53;
    }
};

} // namespace homsim
