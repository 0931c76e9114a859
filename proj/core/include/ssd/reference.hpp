#pragma once

#include <cstddef>
#include <vector>

#include "ssd/dataset.hpp"
#include "ssd/mat.hpp"
#include "ssd/norms.hpp"
#include "ssd/steepest.hpp"

namespace ssd {

enum class MarginMethod {
    /// Projected accelerated gradient; same as `projected`.
    automatic,
    frank_wolfe,
    projected,
};

enum class FwStep {
    line_search,  ///< exact maximization of the smoothed objective along the FW segment
    open_loop,    ///< γ_j = 2/(j+2), restarted every stage
};

struct MarginSolverOptions {
    double tol = 1e-4;
    std::size_t max_iters = 200000;  ///< per temperature stage
    double tau_start = 1.0;
    double tau_factor = 0.3;
    MarginMethod method = MarginMethod::automatic;
    FwStep step = FwStep::line_search;
    std::size_t gap_every = 10;  ///< certificate cadence of the projected method
    SteepestOptions lmo;
};

struct MaxMarginSolution {
    double gamma = 0.0;  ///< exact min margin of w_star
    Mat w_star;          ///< unit norm under spec (zero when the solver never moved)
    NormSpec spec;
    std::size_t iterations_used = 0;
    double certificate_gap = 0.0;  ///< FW duality gap of the last stage
    bool separable = false;        ///< gamma > tol
    bool converged = false;        ///< certificate_gap ≤ 10·tol
    std::vector<double> stage_tau;
    std::vector<double> stage_margin;  ///< normalized exact margin after each stage
};

/// Maximizes the softmin surrogate −τ log Σ_p exp(−m_p(W)/τ) over the unit
/// ball of `spec`, with τ annealed from tau_start by tau_factor until it drops
/// below tol. Each stage stops on the Frank–Wolfe duality gap
/// ‖∇f‖_* − ⟨∇f, W⟩, computed with steepest_map as the linear oracle.
/// Never throws for non-separable data or slow convergence; inspect
/// `separable` and `converged`.
MaxMarginSolution solve_max_margin(const Dataset& ds, const NormSpec& spec, const MarginSolverOptions& opts = {});

/// Euclidean projection onto the unit ball of `spec`. General p goes through
/// a scalar multiplier search on the entries or the singular values.
Mat project_unit_ball(const Mat& w, const NormSpec& spec);
bool has_projection(const NormSpec& spec) noexcept;

/// solve_max_margin, throwing ConvergenceError when the final gap exceeds 10·tol.
MaxMarginSolution max_margin(const Dataset& ds, const NormSpec& spec, double tol = 1e-4,
                             std::size_t max_iters = 200000);

enum class BiasKind { sign, normalized };

/// W̄ = Σ_i (2e_{y_i} − 𝟙) sign(x_i)ᵀ for sign,
/// W̄ = Σ_i ū_{y_i} x_iᵀ/‖x_i‖₂ with ū_c = (e_c − 𝟙/k)/‖e_c − 𝟙/k‖₂ for normalized.
/// Throws std::invalid_argument on a zero sample under normalized.
Mat bias_matrix(const Dataset& ds, BiasKind kind);

/// True iff every column j has equal entries off row j, within 1e−9(1 + ‖W‖_max).
bool check_column_symmetry(const Mat& w);

}  // namespace ssd
