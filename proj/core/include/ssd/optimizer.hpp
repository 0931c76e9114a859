#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ssd/dataset.hpp"
#include "ssd/mat.hpp"
#include "ssd/model.hpp"
#include "ssd/norms.hpp"
#include "ssd/rng.hpp"
#include "ssd/steepest.hpp"

namespace ssd {

/// η_t = c·t^{−a} for t ≥ 1, η₀ = eta0 ≤ c.
struct Schedule {
    double c = 1.0;
    double a = 0.5;
    double eta0 = 1.0;

    double eta(std::uint64_t t) const noexcept;
    /// Throws std::invalid_argument unless c > 0, a ∈ (0, 1], 0 ≤ eta0 ≤ c.
    void validate() const;
};

struct OptimizerConfig {
    std::size_t batch_size = 1;
    bool momentum = false;  ///< μ
    double beta1 = 0.0;
    bool vr = false;  ///< ν
    Schedule schedule;
    std::size_t epochs = 1;
    std::uint64_t seed = 0;
    NormSpec norm = NormSpec::entrywise(2.0);
    LossKind loss = LossKind::cross_entropy;
    SteepestOptions steepest;

    /// Throws std::invalid_argument when b does not divide n, β₁ ∉ [0,1), etc.
    void validate(std::size_t n) const;
    std::size_t steps_per_epoch(std::size_t n) const noexcept { return n / batch_size; }
};

struct TrainState {
    Mat w;
    /// Last signal H_t (H_{−1} = 0). Feeds the next step only when momentum is on.
    Mat momentum;
    Mat snapshot_w;          ///< W̃, empty unless VR is on
    Mat snapshot_full_grad;  ///< ∇L(W̃), empty unless VR is on
    std::uint64_t t = 0;
    std::uint64_t epoch = 0;
    Rng rng;

    static TrainState init(const OptimizerConfig& cfg, const Mat& w0);
};

/// Fisher–Yates permutation of 0..n−1 drawn from state.rng (i from n−1 down
/// to 1, j = rng.below(i+1)), cut into n/b consecutive batches. Indices inside
/// a batch are sorted ascending so batch sums follow a canonical order.
std::vector<std::vector<std::size_t>> reshuffle(TrainState& state, std::size_t n, std::size_t b);

/// β₁ H_{t−1} + (1−β₁) G_t
Mat momentum_signal(const Mat& previous, const Mat& gradient, double beta1);

/// Sets the epoch snapshot W̃ ← W and ∇L(W̃).
void take_snapshot(TrainState& state, const OptimizerConfig& cfg, const Dataset& ds);

struct StepInfo {
    double eta = 0.0;
    bool skipped = false;  ///< H_t = 0, weights unchanged
};

/// One update of the unified loop: G_t from the batch (or the SVRG estimator),
/// H_t = G_t or β₁H_{t−1} + (1−β₁)G_t, W ← W − η_t φ(H_t), t ← t+1.
StepInfo step(TrainState& state, const OptimizerConfig& cfg, const Dataset& ds, Batch batch);

struct StepEvent {
    std::uint64_t t;  ///< steps completed, i.e. the index of the weights below
    std::uint64_t epoch;
    const Mat& w;
    const Mat& signal;  ///< H used for this step
    double eta;
    bool skipped;
};

using MetricsHook = std::function<void(const StepEvent&)>;

/// K epochs of n/b steps. Snapshot (VR) is retaken before the first batch of
/// every epoch, momentum carries across epochs. Numeric failures are rethrown
/// as NumericError naming the step. On return state.epoch equals K.
TrainState run(const OptimizerConfig& cfg, const Dataset& ds, const Mat& w0, const MetricsHook& hook = {});

struct ScheduleConstants {
    double lambda = 0.0;
    std::uint64_t t_head = 0;
    std::uint64_t t_tail = 0;
    std::uint64_t t_poly = 0;
    std::uint64_t t_eta0 = 0;
    std::uint64_t t0 = 0;
    double c2 = 0.0;
};

/// Closed-form t₀ and c₂ such that, for η_t = c t^{−a},
/// Σ_{s=0}^{t} β^s (exp(c₁ Σ_{τ=1}^{s} η_{t−τ}) − 1) ≤ c₂ η_t for all t ≥ t₀.
ScheduleConstants schedule_constants(double c, double a, double eta0, double beta, double c1);

struct MarginThresholds {
    double rho_nomom = 0.0;  ///< γ − 4(m−1)R
    double rho_mom = 0.0;    ///< γ − 2(1−β₁) m (m²−1) R
    double b_min = 0.0;      ///< 4Rn/(γ+4R)
    double drift_d = 0.0;    ///< 4Rη₀/(1−√β₁)
};

MarginThresholds effective_margin_thresholds(double gamma, double r, std::size_t n, std::size_t b, double beta1,
                                             double eta0);

}  // namespace ssd
