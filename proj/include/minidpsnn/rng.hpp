#pragma once

#include <cstdint>
#include <cmath>

namespace minidpsnn {

// Counter-based random generator. Every stream is keyed by a tuple of
// 64-bit values, so any consumer can regenerate exactly the same draws
// from (seed, entity id, ...) without carrying generator state around.
// This is what makes synapse tables and Poisson drive independent of
// how neurons are partitioned across ranks.
class CounterRng {
public:
    // splitmix64 finalizer; bijective on 64-bit values.
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static constexpr std::uint64_t key_of(std::uint64_t seed) noexcept {
        return mix(seed);
    }
    template <typename... Rest>
    static constexpr std::uint64_t key_of(std::uint64_t seed, std::uint64_t head,
                                          Rest... rest) noexcept {
        return key_of(mix(seed ^ mix(head)), rest...);
    }

    template <typename... Parts>
    explicit CounterRng(std::uint64_t seed, Parts... parts) noexcept
        : key_(key_of(seed, static_cast<std::uint64_t>(parts)...)) {}

    std::uint64_t next_u64() noexcept { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    // Uniform integer in [0, n), n > 0. Multiply-shift; bias is below
    // 2^-32 for the range sizes used here.
    std::uint32_t uniform_below(std::uint32_t n) noexcept {
        return static_cast<std::uint32_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
        return lo + static_cast<std::int64_t>(
                        uniform_below(static_cast<std::uint32_t>(hi - lo + 1)));
    }

    // Uniform real in [0, 1).
    double uniform_real() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Poisson draw by CDF inversion; adequate for the small means used
    // by the external drive (a few events per step).
    std::uint32_t poisson(double mean) noexcept {
        return mean <= 0.0 ? 0 : poisson(mean, std::exp(-mean));
    }

    // Variant taking precomputed exp(-mean); hot loops draw millions of
    // times at a fixed mean.
    std::uint32_t poisson(double mean, double p0) noexcept {
        if (mean <= 0.0) return 0;
        double u = uniform_real();
        double p = p0;
        double cdf = p;
        std::uint32_t k = 0;
        while (u >= cdf && k < 1u << 20) {
            ++k;
            p *= mean / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Stream tags keep independent uses of the same (seed, id) apart.
namespace rng_stream {
inline constexpr std::uint64_t synapses = 0x53594e41ULL;       // "SYNA"
inline constexpr std::uint64_t external_drive = 0x45585420ULL; // "EXT "
} // namespace rng_stream

} // namespace minidpsnn
