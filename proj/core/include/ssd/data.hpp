#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ssd/dataset.hpp"

namespace ssd {

struct GaussianSpec {
    std::size_t k = 10;
    std::size_t per_class = 20;
    std::size_t d = 5;
    double sigma = 0.1;
    std::uint64_t seed = 0;
};

struct SkewedSpec {
    std::vector<std::size_t> counts;                  ///< one entry per class
    std::vector<std::pair<double, double>> alpha_ranges;  ///< (lo, hi) per class
    std::uint64_t seed = 0;

    std::size_t k() const noexcept { return counts.size(); }
};

/// Class means uniform on the unit sphere, x = μ_y + σ ε with ε ~ N(0, I),
/// samples ordered round-robin over classes. Regenerates from a derived seed
/// until an ew:2 max-margin probe gives γ > 1e−3; throws ConfigError once
/// max_retries regenerations fail.
Dataset gen_gaussian(const GaussianSpec& spec, std::size_t max_retries = 20);

/// x = α e_c with α ~ U[lo_c, hi_c]; d = k. Classes are interleaved row by
/// row until their counts are used up.
Dataset gen_skewed(const SkewedSpec& spec);

}  // namespace ssd
