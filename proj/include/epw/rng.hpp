#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace epw {

/// SplitMix64 stream used as a counter-based generator: output i is the
/// finalizer applied to seed + (i+1)*gamma, a pure function of (seed, counter).
/// Substreams hash a stream id into the seed, which is what makes parallel
/// batch generation reproducible: every work item owns stream
/// substream(master, item_index) and never shares draws with its neighbours,
/// so thread count and scheduling cannot change any result.
class SplitMixRng {
public:
    explicit SplitMixRng(std::uint64_t seed) : state_(seed) {}

    static SplitMixRng substream(std::uint64_t master_seed, std::uint64_t stream_id) {
        return SplitMixRng(mix(master_seed ^ mix(stream_id ^ 0xD2B74407B1CE6E93ULL)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Index in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n) {
        auto idx = static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
        return idx >= n ? n - 1 : idx;
    }

    /// Standard normal via Box-Muller; the second value of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace epw
