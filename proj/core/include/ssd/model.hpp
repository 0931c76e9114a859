#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "ssd/dataset.hpp"
#include "ssd/mat.hpp"
#include "ssd/norms.hpp"

namespace ssd {

enum class LossKind { cross_entropy, exponential };

/// Accepts "ce"/"cross_entropy" and "exp"/"exponential".
LossKind parse_loss(std::string_view text);
std::string to_string(LossKind kind);

/// Index subset of a shared Dataset. Summation follows the given order.
using Batch = std::span<const std::size_t>;

/// Exponents above this make the exponential loss throw NumericError.
inline constexpr double kExpGuard = 700.0;

/// Mean loss over the dataset for the linear model W ∈ R^{k×d}.
///
/// Cross-entropy uses a max-shifted log-sum-exp (log1p when the true class
/// is the top logit). Exponential loss is (1/n) Σ_i Σ_{c≠y_i} e^{-(z_{y_i} - z_c)}.
double loss(const Mat& w, const Dataset& ds, LossKind kind);

/// Full-data gradient. Bit-identical to grad() on the batch 0..n-1.
Mat grad(const Mat& w, const Dataset& ds, LossKind kind);
/// (1/|batch|) Σ_{i∈batch} ∇ℓ_i(W). Throws std::invalid_argument on an empty batch.
Mat grad(const Mat& w, const Dataset& ds, Batch batch, LossKind kind);
/// ∇ℓ_i(W), a rank-one matrix coef · x_iᵀ.
Mat sample_grad(const Mat& w, const Dataset& ds, std::size_t i, LossKind kind);

/// G(W): (1/n) Σ (1 − S_{y_i}(W x_i)) for cross-entropy, the loss itself for exponential.
/// The complement is summed over the non-target probabilities, so it stays
/// accurate when S_{y_i} rounds to 1.
double proxy_g(const Mat& w, const Dataset& ds, LossKind kind);

struct MarginReport {
    double unnormalized_min = 0.0;  ///< min_{i, c≠y_i} (e_{y_i} − e_c)ᵀ W x_i
    double weight_norm = 0.0;       ///< ‖W‖ under the requested spec
    double normalized = 0.0;        ///< unnormalized_min / weight_norm, −∞ when W = 0
    std::size_t argmin_sample = 0;
    std::size_t argmin_class = 0;
};

/// Exact minimum over all n(k−1) pairs; ties go to the smallest (sample, class).
MarginReport margin_report(const Mat& w, const Dataset& ds, const NormSpec& spec);

struct BoundCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds(double slack = 0.0) const noexcept { return lhs <= rhs + slack; }
};

/// ‖∇L_B(W) − ∇L(W)‖₁ against 2(m−1) R G(W), m = n/|batch|.
/// Throws std::invalid_argument when |batch| does not divide n.
BoundCheck gradient_noise_bound_check(const Mat& w, const Dataset& ds, Batch batch,
                                      LossKind kind = LossKind::cross_entropy);

}  // namespace ssd
