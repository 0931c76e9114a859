#pragma once

#include <cstddef>
#include <vector>

#include "ssd/mat.hpp"

namespace ssd {

/// Thin SVD A = U diag(sigma) Vᵀ with r = min(rows, cols).
struct Svd {
    Mat u;                      ///< rows × r, orthonormal columns
    std::vector<double> sigma;  ///< nonincreasing, ≥ 0
    Mat v;                      ///< cols × r, orthonormal columns

    std::size_t r() const noexcept { return sigma.size(); }
    /// Number of singular values above the rank cut (1e-12 · σ₁).
    std::size_t rank() const noexcept;
    Mat reconstruct() const;
};

/// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankCut = 1e-12;

inline constexpr int kMaxJacobiSweeps = 60;

/// One-sided (Hestenes) Jacobi SVD with cyclic pair ordering.
///
/// Deterministic: fixed sweep order, and each U column is sign-normalized so
/// its largest-magnitude entry is nonnegative. Singular values below the rank
/// cut are flushed to zero and their U columns completed to an orthonormal set.
/// Throws ConvergenceError (carrying the off-diagonal residual) after 60 sweeps.
Svd jacobi_svd(const Mat& a);

/// Polar factor U Vᵀ (over nonzero singular values) by the cubic Newton–Schulz
/// iteration X ← 1.5X − 0.5 X XᵀX from X₀ = A/‖A‖_F.
///
/// Stops after `iters` iterations or once ‖X XᵀX − X‖_F ≤ tol, i.e. every
/// nonzero singular value of X sits within O(tol) of 1.
Mat newton_schulz_polar(const Mat& a, int iters, double tol);

}  // namespace ssd
