#ifndef NETPRINT_RNG_HPP
#define NETPRINT_RNG_HPP

#include <cstdint>

namespace netprint {

// The project PRNG is pinned to splitmix64 (seeding/stream derivation) plus
// xoshiro256++ (draws). The exact generators are part of the reproducibility
// contract: a seed must produce the same artifacts on every platform.

/// splitmix64; used to expand one 64-bit seed into generator state and substreams.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ with splitmix64 state expansion.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        SplitMix64 sm(seed);
        for (auto& w : s_) w = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 bits of randomness.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift; fixed forever for cross-platform streams.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

    /// Derive an independent substream deterministically from this seed lineage.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream_id) {
        SplitMix64 sm(seed ^ (0xa5a5a5a5a5a5a5a5ULL + stream_id));
        sm.next();
        return sm.next();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace netprint

#endif  // NETPRINT_RNG_HPP
