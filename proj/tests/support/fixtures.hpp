#pragma once

// Shared generators and brute-force reference computations for the tests.
// The reference computations are written independently of the library
// kernels (long double accumulation, no shared helpers).

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ssd/dataset.hpp"
#include "ssd/mat.hpp"
#include "ssd/norms.hpp"
#include "ssd/rng.hpp"

namespace fixtures {

inline ssd::Mat random_mat(ssd::Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    ssd::Mat m(rows, cols);
    for (double& v : m.data()) v = scale * rng.normal();
    return m;
}

/// Gaussian features, labels cycling through the classes then shuffled.
inline ssd::Dataset random_dataset(ssd::Rng& rng, std::size_t k, std::size_t d, std::size_t n) {
    std::vector<std::size_t> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = i % k;
    for (std::size_t i = n; i-- > 1;) std::swap(y[i], y[rng.below(i + 1)]);
    return ssd::Dataset(random_mat(rng, d, n), std::move(y), k);
}

/// Labels assigned by a planted linear classifier, so the data is separable.
/// With d = 1 only two classes can win, so k > 2 needs d >= 2.
inline ssd::Dataset separable_dataset(ssd::Rng& rng, std::size_t k, std::size_t d, std::size_t n) {
    if (d == 1 && k > 2) throw std::invalid_argument("separable_dataset: d = 1 supports only k = 2");
    for (int attempt = 0; attempt < 100000; ++attempt) {
        const ssd::Mat planted = random_mat(rng, k, d);
        const ssd::Mat x = random_mat(rng, d, n);
        std::vector<std::size_t> y(n);
        std::vector<int> seen(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double best_z = -1e300;
            for (std::size_t c = 0; c < k; ++c) {
                double z = 0.0;
                for (std::size_t j = 0; j < d; ++j) z += planted(c, j) * x(j, i);
                if (z > best_z) {
                    best_z = z;
                    best = c;
                }
            }
            y[i] = best;
            seen[best] = 1;
        }
        if (std::accumulate(seen.begin(), seen.end(), 0) == static_cast<int>(k)) {
            return ssd::Dataset(x, std::move(y), k);
        }
    }
    throw std::runtime_error("separable_dataset: no draw covered every class");
}

inline long double logit(const ssd::Mat& w, const ssd::Dataset& ds, std::size_t i, std::size_t c) {
    long double z = 0.0L;
    for (std::size_t j = 0; j < ds.d(); ++j) z += static_cast<long double>(w(c, j)) * ds.x()(j, i);
    return z;
}

inline double ce_loss_oracle(const ssd::Mat& w, const ssd::Dataset& ds) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        long double denom = 0.0L;
        for (std::size_t c = 0; c < ds.k(); ++c) denom += std::exp(logit(w, ds, i, c));
        total -= std::log(std::exp(logit(w, ds, i, ds.label(i))) / denom);
    }
    return static_cast<double>(total / ds.n());
}

inline double exp_loss_oracle(const ssd::Mat& w, const ssd::Dataset& ds) {
    long double total = 0.0L;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t c = 0; c < ds.k(); ++c) {
            if (c != ds.label(i)) total += std::exp(-(logit(w, ds, i, ds.label(i)) - logit(w, ds, i, c)));
        }
    }
    return static_cast<double>(total / ds.n());
}

inline double min_margin_oracle(const ssd::Mat& w, const ssd::Dataset& ds) {
    double best = 1e300;
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t c = 0; c < ds.k(); ++c)
            if (c != ds.label(i)) {
                double zy = 0.0, zc = 0.0;
                for (std::size_t j = 0; j < ds.d(); ++j) {
                    zy += w(ds.label(i), j) * ds.x()(j, i);
                    zc += w(c, j) * ds.x()(j, i);
                }
                best = std::min(best, zy - zc);
            }
    return best;
}

inline std::vector<ssd::NormSpec> all_specs() {
    using ssd::NormSpec;
    return {NormSpec::entrywise(1.0),       NormSpec::entrywise(1.5), NormSpec::entrywise(2.0),
            NormSpec::entrywise(3.0),       NormSpec::entrywise(ssd::kInf), NormSpec::schatten(1.0),
            NormSpec::schatten(2.0),        NormSpec::schatten(3.0),  NormSpec::schatten(ssd::kInf)};
}

/// Singular values of a 2×2 matrix from the closed form of AᵀA's eigenvalues.
inline std::pair<double, double> singular_values_2x2(const ssd::Mat& a) {
    const long double p = static_cast<long double>(a(0, 0)) * a(0, 0) + static_cast<long double>(a(1, 0)) * a(1, 0);
    const long double q = static_cast<long double>(a(0, 1)) * a(0, 1) + static_cast<long double>(a(1, 1)) * a(1, 1);
    const long double r = static_cast<long double>(a(0, 0)) * a(0, 1) + static_cast<long double>(a(1, 0)) * a(1, 1);
    const long double mid = 0.5L * (p + q);
    const long double rad = std::sqrt(0.25L * (p - q) * (p - q) + r * r);
    return {static_cast<double>(std::sqrt(mid + rad)), static_cast<double>(std::sqrt(std::max(0.0L, mid - rad)))};
}

}  // namespace fixtures
