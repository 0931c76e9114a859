#pragma once

#include <array>
#include <cstdint>

namespace ssd {

/// SplitMix64 (Steele, Lea, Flood 2014). Used to expand seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** 1.0 (Blackman & Vigna), state seeded by four SplitMix64 draws.
///
/// All derived draws (uniform doubles, bounded integers, normals) are defined
/// here rather than through <random> distributions, whose algorithms are
/// implementation-defined, so a seed reproduces the same stream everywhere.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) noexcept;

    std::uint64_t next() noexcept;
    std::uint64_t operator()() noexcept { return next(); }
    static constexpr std::uint64_t min() noexcept { return 0; }
    static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

    /// Uniform in [0, 1): top 53 bits of next() scaled by 2⁻⁵³.
    double uniform() noexcept;
    /// Uniform in [lo, hi].
    double uniform(double lo, double hi) noexcept;
    /// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Standard normal via Box–Muller on two uniform() draws (no caching).
    double normal() noexcept;

    /// Independent stream: seeds a new generator from one draw of this one.
    Rng split() noexcept { return Rng(next()); }

    const std::array<std::uint64_t, 4>& state() const noexcept { return s_; }
    friend bool operator==(const Rng&, const Rng&) = default;

private:
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace ssd
