#pragma once

#include <cstdint>
#include <string_view>

namespace ucbmo {

// Seeded, stream-addressed randomness. Every consumer owns an RngStream
// identified by (seed, stream_id); identical pairs reproduce identical draw
// sequences bit-for-bit, on any platform. The generator is splitmix64, fixed
// here (rather than <random> engines + distributions) because distribution
// implementations are not specified by the standard and differ across
// standard libraries.

/// splitmix64 output function (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// FNV-1a 64-bit hash. Used to derive stream ids from variant names; fixed
/// algorithm so ids are stable across platforms (std::hash is not).
constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : state_(derive_state(seed, stream_id)) {}

    std::uint64_t next_u64() { return splitmix64(state_); }

    /// Uniform double in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be >= 1. Uses the double path so the
    /// draw count per call is always exactly one, independent of n.
    int next_below(int n) {
        int i = static_cast<int>(next_double() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

  private:
    // Initial state = splitmix64 applied to the seed, perturbed by the stream
    // id, then run through the output function once more. Distinct
    // (seed, stream_id) pairs land in distinct, well-separated sequences.
    static constexpr std::uint64_t derive_state(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        std::uint64_t t = a ^ stream_id;
        return splitmix64(t);
    }

    std::uint64_t state_;
};

// Each run owns three independent streams so that, e.g., adding a tie-break
// draw never perturbs the transition sampling of the same run.
enum class StreamPurpose : std::uint64_t {
    InitState = 1,
    Transitions = 2,
    TieBreak = 3,
};

/// Stream id for one (run-level id, purpose) pair. Run-level ids come from
/// the harness (variant hash XOR run index).
constexpr std::uint64_t substream_id(std::uint64_t run_stream_id, StreamPurpose purpose) {
    return run_stream_id + static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL;
}

}  // namespace ucbmo
