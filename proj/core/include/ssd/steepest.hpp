#pragma once

#include <cstddef>
#include <utility>

#include "ssd/dataset.hpp"
#include "ssd/mat.hpp"
#include "ssd/model.hpp"
#include "ssd/norms.hpp"

namespace ssd {

struct SteepestOptions {
    /// Use Newton–Schulz instead of the exact SVD for the Schatten-∞ map.
    bool newton_schulz = false;
    int ns_iters = 100;
    double ns_tol = 1e-12;
};

/// φ(G) = argmax_{‖Δ‖≤1} ⟨G, Δ⟩ under `spec`.
///
/// Returns the zero matrix for G = 0. At p ∈ {1, ∞} the maximizer is not
/// unique; the representatives are sign(0) = 0 for ew:∞, the first row-major
/// max-magnitude entry for ew:1, and the leading SVD pair for sch:1.
Mat steepest_map(const Mat& g, const NormSpec& spec, const SteepestOptions& opts = {});

/// Schatten-∞ and Frobenius directions of −∇ℓ_i(W), for comparing the two
/// maps on a rank-one per-sample gradient. Throws if the gradient is zero.
std::pair<Mat, Mat> single_sample_spectral_equals_frobenius(const Mat& w, const Dataset& ds, std::size_t i,
                                                            LossKind kind = LossKind::cross_entropy);

}  // namespace ssd
