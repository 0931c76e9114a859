#include "ssd/data.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ssd/error.hpp"
#include "ssd/reference.hpp"
#include "ssd/rng.hpp"

namespace ssd {

namespace {

constexpr double kProbeMargin = 1e-3;

Dataset draw_gaussian(const GaussianSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    Mat means(spec.k, spec.d);
    for (std::size_t c = 0; c < spec.k; ++c) {
        double len = 0.0;
        while (len == 0.0) {
            for (std::size_t j = 0; j < spec.d; ++j) {
                means(c, j) = rng.normal();
                len += means(c, j) * means(c, j);
            }
        }
        len = std::sqrt(len);
        for (std::size_t j = 0; j < spec.d; ++j) means(c, j) /= len;
    }
    const std::size_t n = spec.k * spec.per_class;
    Mat x(spec.d, n);
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % spec.k;
        y[i] = c;
        for (std::size_t j = 0; j < spec.d; ++j) x(j, i) = means(c, j) + spec.sigma * rng.normal();
    }
    return Dataset(std::move(x), std::move(y), spec.k);
}

}  // namespace

Dataset gen_gaussian(const GaussianSpec& spec, std::size_t max_retries) {
    if (spec.k < 2 || spec.per_class == 0 || spec.d == 0) {
        throw ConfigError("gaussian spec needs k >= 2, per_class >= 1, d >= 1");
    }
    if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma)) throw ConfigError("gaussian spec needs sigma >= 0");

    std::uint64_t state = spec.seed;
    std::uint64_t seed = spec.seed;
    MarginSolverOptions probe;
    probe.tol = kProbeMargin;
    probe.max_iters = 20000;
    for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
        Dataset ds = draw_gaussian(spec, seed);
        if (solve_max_margin(ds, NormSpec::entrywise(2.0), probe).gamma > kProbeMargin) return ds;
        seed = splitmix64(state);
    }
    throw ConfigError("gaussian data not separable after " + std::to_string(max_retries) + " retries");
}

Dataset gen_skewed(const SkewedSpec& spec) {
    const std::size_t k = spec.k();
    if (k < 2) throw ConfigError("skewed spec needs at least two classes");
    if (spec.alpha_ranges.size() != k) throw ConfigError("skewed spec needs one alpha range per class");
    std::size_t n = 0;
    for (std::size_t c = 0; c < k; ++c) {
        if (spec.counts[c] == 0) throw ConfigError("skewed spec counts must be positive");
        const auto [lo, hi] = spec.alpha_ranges[c];
        if (!(lo > 0.0 && lo <= hi) || !std::isfinite(hi)) {
            throw ConfigError("skewed spec alpha range " + std::to_string(c) + " must satisfy 0 < lo <= hi");
        }
        n += spec.counts[c];
    }

    Rng rng(spec.seed);
    Mat x(k, n);
    std::vector<std::size_t> y;
    y.reserve(n);
    std::vector<std::size_t> left = spec.counts;
    while (y.size() < n) {
        for (std::size_t c = 0; c < k; ++c) {
            if (left[c] == 0) continue;
            --left[c];
            const auto [lo, hi] = spec.alpha_ranges[c];
            x(c, y.size()) = lo == hi ? lo : rng.uniform(lo, hi);
            y.push_back(c);
        }
    }
    return Dataset(std::move(x), std::move(y), k);
}

}  // namespace ssd
