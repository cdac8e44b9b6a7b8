#pragma once

#include <cstdint>

namespace costima {

// 64-bit finalizer (splitmix64). Full avalanche, cheap enough to call per edge
// per sample.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr std::uint64_t pack_pair(std::uint32_t src, std::uint32_t dst) noexcept {
    return (static_cast<std::uint64_t>(src) << 32) | dst;
}

// The coin for one edge in one simulation. Keyed by the edge identity
// (src, dst), not by its position in any edge list, so the same edge sees the
// same coin no matter which candidate set is being evaluated.
inline double edge_coin(std::uint64_t base_seed, std::uint64_t sample_index,
                        std::uint32_t src, std::uint32_t dst) noexcept {
    std::uint64_t h = mix64(base_seed);
    h = mix64(h ^ sample_index);
    h = mix64(h ^ pack_pair(src, dst));
    return to_unit(h);
}

// Sequential generator for instance generation, shuffles and baselines.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() noexcept { return mix64(state_++); }

    double next_unit() noexcept { return to_unit(next()); }

    // Uniform in [lo, hi].
    double next_real(double lo, double hi) noexcept {
        return lo + (hi - lo) * next_unit();
    }

    // Uniform in [0, bound). Rejection-free modulo is fine here; bias is
    // negligible for bound << 2^64 and determinism is all we need.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        return bound == 0 ? 0 : next() % bound;
    }

private:
    std::uint64_t state_;
};

}  // namespace costima
