#include "ssd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ssd/error.hpp"

namespace ssd {

double Schedule::eta(std::uint64_t t) const noexcept {
    if (t == 0) return eta0;
    return c * std::pow(static_cast<double>(t), -a);
}

void Schedule::validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("schedule: c must be positive");
    if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("schedule: a must lie in (0, 1]");
    if (!(eta0 >= 0.0 && eta0 <= c)) throw std::invalid_argument("schedule: eta0 must lie in [0, c]");
}

void OptimizerConfig::validate(std::size_t n) const {
    if (batch_size == 0 || n % batch_size != 0) {
        throw std::invalid_argument("batch_size " + std::to_string(batch_size) + " must divide n = " +
                                    std::to_string(n));
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 must lie in [0, 1)");
    if (epochs == 0) throw std::invalid_argument("epochs must be positive");
    schedule.validate();
}

TrainState TrainState::init(const OptimizerConfig& cfg, const Mat& w0) {
    TrainState state;
    state.w = w0;
    state.momentum = Mat(w0.rows(), w0.cols());
    state.rng = Rng(cfg.seed);
    return state;
}

std::vector<std::vector<std::size_t>> reshuffle(TrainState& state, std::size_t n, std::size_t b) {
    if (b == 0 || n % b != 0) throw std::invalid_argument("reshuffle: batch size must divide n");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i-- > 1;) {
        const auto j = static_cast<std::size_t>(state.rng.below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    std::vector<std::vector<std::size_t>> batches(n / b);
    for (std::size_t j = 0; j < batches.size(); ++j) {
        batches[j].assign(perm.begin() + static_cast<std::ptrdiff_t>(j * b),
                          perm.begin() + static_cast<std::ptrdiff_t>((j + 1) * b));
        std::sort(batches[j].begin(), batches[j].end());
    }
    return batches;
}

Mat momentum_signal(const Mat& previous, const Mat& gradient, double beta1) {
    Mat h = previous * beta1;
    h.axpy(1.0 - beta1, gradient);
    return h;
}

void take_snapshot(TrainState& state, const OptimizerConfig& cfg, const Dataset& ds) {
    state.snapshot_w = state.w;
    state.snapshot_full_grad = grad(state.w, ds, cfg.loss);
}

StepInfo step(TrainState& state, const OptimizerConfig& cfg, const Dataset& ds, Batch batch) {
    Mat signal = grad(state.w, ds, batch, cfg.loss);
    if (cfg.vr) {
        if (state.snapshot_w.empty()) throw std::logic_error("step: variance reduction without a snapshot");
        signal -= grad(state.snapshot_w, ds, batch, cfg.loss);
        signal += state.snapshot_full_grad;
    }
    if (cfg.momentum) signal = momentum_signal(state.momentum, signal, cfg.beta1);
    state.momentum = std::move(signal);

    StepInfo info;
    info.eta = cfg.schedule.eta(state.t);
    const Mat direction = steepest_map(state.momentum, cfg.norm, cfg.steepest);
    info.skipped = direction.is_zero();
    if (!info.skipped) state.w.axpy(-info.eta, direction);
    if (!state.w.all_finite() || !state.momentum.all_finite()) {
        throw NumericError("non-finite weights after step " + std::to_string(state.t));
    }
    ++state.t;
    return info;
}

TrainState run(const OptimizerConfig& cfg, const Dataset& ds, const Mat& w0, const MetricsHook& hook) {
    cfg.validate(ds.n());
    if (w0.rows() != ds.k() || w0.cols() != ds.d()) throw std::invalid_argument("run: w0 shape mismatch");
    TrainState state = TrainState::init(cfg, w0);
    for (std::size_t k = 0; k < cfg.epochs; ++k) {
        state.epoch = k;
        const auto batches = reshuffle(state, ds.n(), cfg.batch_size);
        try {
            if (cfg.vr) take_snapshot(state, cfg, ds);
            for (const auto& batch : batches) {
                const StepInfo info = step(state, cfg, ds, batch);
                if (hook) hook(StepEvent{state.t, state.epoch, state.w, state.momentum, info.eta, info.skipped});
            }
        } catch (const NumericError& e) {
            throw NumericError("step " + std::to_string(state.t) + ": " + e.what());
        }
    }
    state.epoch = cfg.epochs;
    return state;
}

namespace {

std::uint64_t ceil_time(double x, const char* name) {
    if (!std::isfinite(x) || x > 9.0e18) {
        throw std::invalid_argument(std::string("schedule_constants: ") + name + " is out of range");
    }
    // Components are times in N₊; formulas whose log goes negative clamp to 1.
    return std::max<std::uint64_t>(1, x <= 0.0 ? 1 : static_cast<std::uint64_t>(std::ceil(x)));
}

}  // namespace

ScheduleConstants schedule_constants(double c, double a, double eta0, double beta, double c1) {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("schedule_constants: beta must lie in (0, 1)");
    if (!(c1 > 0.0)) throw std::invalid_argument("schedule_constants: c1 must be positive");
    Schedule{c, a, eta0}.validate();

    ScheduleConstants out;
    out.lambda = std::log(1.0 / beta);
    const double lambda = out.lambda;
    out.t_head = ceil_time(std::pow(std::pow(2.0, a + 1.0) * c1 * c / lambda, 1.0 / a), "t_head");
    if (a < 1.0) {
        out.t_tail = ceil_time(std::pow(8.0 * c1 * c / ((1.0 - a) * lambda), 1.0 / a), "t_tail");
    } else {
        const double x = 32.0 * c1 * c / lambda;
        out.t_tail = ceil_time(x * std::log(x), "t_tail");
    }
    const double y = 16.0 * a / lambda;
    out.t_poly = ceil_time(y * std::log(y), "t_poly");
    out.t_eta0 = ceil_time(8.0 * c1 * eta0 / lambda, "t_eta0");
    out.t0 = std::max({out.t_head, out.t_tail, out.t_poly, out.t_eta0, std::uint64_t{3}});
    out.c2 = std::pow(2.0, a + 1.0) * c1 / ((1.0 - beta) * (1.0 - beta)) + 1.0 / (c * (1.0 - beta));
    return out;
}

MarginThresholds effective_margin_thresholds(double gamma, double r, std::size_t n, std::size_t b, double beta1,
                                             double eta0) {
    if (!(gamma > 0.0) || !(r > 0.0)) throw std::invalid_argument("effective_margin_thresholds: gamma, r must be > 0");
    if (b == 0 || n % b != 0) throw std::invalid_argument("effective_margin_thresholds: b must divide n");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("effective_margin_thresholds: beta1 in [0, 1)");
    const double m = static_cast<double>(n / b);
    MarginThresholds out;
    out.rho_nomom = gamma - 4.0 * (m - 1.0) * r;
    out.rho_mom = gamma - 2.0 * (1.0 - beta1) * m * (m * m - 1.0) * r;
    out.b_min = 4.0 * r * static_cast<double>(n) / (gamma + 4.0 * r);
    out.drift_d = 4.0 * r * eta0 / (1.0 - std::sqrt(beta1));
    return out;
}

}  // namespace ssd
