#pragma once

#include <cstdint>
#include <limits>

namespace revrank {

/// SplitMix64 (Steele, Lea, Flood 2014). Chosen because its output stream is
/// trivially reproducible in any language:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
///
/// Doubles are drawn as (next() >> 11) * 2^-53, integers in [0, k) by
/// rejection on the top bits. std:: distributions are deliberately not used
/// since their algorithms differ between standard libraries.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

    /// Independent stream for (seed, stream) pairs.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t stream_id) noexcept {
        SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (stream_id + 1)));
        return SplitMix64(mixer());
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) noexcept {
        // Reject the top partial block so every residue is equally likely.
        const std::uint64_t excess = (max() % bound + 1) % bound;
        std::uint64_t x;
        do {
            x = (*this)();
        } while (x > max() - excess);
        return x % bound;
    }

private:
    std::uint64_t state_;
};

} // namespace revrank
