#include "ssd/reference.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>

#include "ssd/error.hpp"
#include "ssd/model.hpp"
#include "ssd/svd.hpp"

namespace ssd {

namespace {

/// All (sample, wrong class) pairs, margins evaluated in this order.
class PairMargins {
public:
    explicit PairMargins(const Dataset& ds) : ds_(ds) {}

    std::size_t size() const noexcept { return ds_.n() * (ds_.k() - 1); }

    void eval(const Mat& w, std::vector<double>& out) const {
        out.resize(size());
        const Mat z = matmul(w, ds_.x());  // k × n
        std::size_t p = 0;
        for (std::size_t i = 0; i < ds_.n(); ++i) {
            const std::size_t y = ds_.label(i);
            for (std::size_t c = 0; c < ds_.k(); ++c) {
                if (c != y) out[p++] = z(y, i) - z(c, i);
            }
        }
    }

    /// Σ_p weight_p (e_{y_i} − e_c) x_iᵀ
    Mat weighted_grad(const std::vector<double>& weight) const {
        Mat coef(ds_.k(), ds_.n());
        std::size_t p = 0;
        for (std::size_t i = 0; i < ds_.n(); ++i) {
            const std::size_t y = ds_.label(i);
            for (std::size_t c = 0; c < ds_.k(); ++c) {
                if (c == y) continue;
                coef(y, i) += weight[p];
                coef(c, i) -= weight[p];
                ++p;
            }
        }
        return matmul_nt(coef, ds_.x());
    }

private:
    const Dataset& ds_;
};

/// Softmin weights exp(−(m_p − min m)/τ)/Z; returns the smoothed value.
double softmin(const std::vector<double>& m, double tau, std::vector<double>& weight) {
    const double lo = *std::min_element(m.begin(), m.end());
    weight.resize(m.size());
    double z = 0.0;
    for (std::size_t p = 0; p < m.size(); ++p) {
        weight[p] = std::exp(-(m[p] - lo) / tau);
        z += weight[p];
    }
    for (double& v : weight) v /= z;
    return lo - tau * std::log(z);
}

/// Directional derivative of the surrogate at margins m + s·dm, and its second derivative.
std::pair<double, double> slope_at(const std::vector<double>& m, const std::vector<double>& dm, double s, double tau,
                                   std::vector<double>& scratch, std::vector<double>& weight) {
    scratch.resize(m.size());
    for (std::size_t p = 0; p < m.size(); ++p) scratch[p] = m[p] + s * dm[p];
    softmin(scratch, tau, weight);
    double mean = 0.0, second = 0.0;
    for (std::size_t p = 0; p < m.size(); ++p) {
        mean += weight[p] * dm[p];
        second += weight[p] * dm[p] * dm[p];
    }
    return {mean, -(second - mean * mean) / tau};
}

/// argmax over s ∈ [0, 1] of the concave surrogate along the segment.
double line_search(const std::vector<double>& m, const std::vector<double>& dm, double tau,
                   std::vector<double>& scratch, std::vector<double>& weight) {
    if (slope_at(m, dm, 1.0, tau, scratch, weight).first >= 0.0) return 1.0;
    double lo = 0.0, hi = 1.0, s = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-16; ++iter) {
        const auto [d1, d2] = slope_at(m, dm, s, tau, scratch, weight);
        if (d1 == 0.0) return s;
        (d1 > 0.0 ? lo : hi) = s;
        const double newton = d2 < 0.0 ? s - d1 / d2 : hi;
        s = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
        if (iter > 0 && std::abs(d1 / d2) < 1e-15) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

double normalized_min(const std::vector<double>& m, double weight_norm) {
    if (weight_norm == 0.0) return 0.0;
    return *std::min_element(m.begin(), m.end()) / weight_norm;
}

/// Euclidean projection of v onto {‖v‖₁ ≤ 1} (sort-based soft threshold).
void project_l1(std::span<double> v) {
    double total = 0.0;
    for (double x : v) total += std::abs(x);
    if (total <= 1.0) return;
    std::vector<double> mag(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);
    std::sort(mag.begin(), mag.end(), std::greater<>());
    double prefix = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        prefix += mag[i];
        const double cand = (prefix - 1.0) / static_cast<double>(i + 1);
        if (mag[i] > cand) theta = cand;
    }
    for (double& x : v) x = x > 0.0 ? std::max(0.0, x - theta) : std::min(0.0, x + theta);
}

// Root of u + lam p u^{p-1} = a on [0, a] for a > 0, p > 1.
double shrink_lp(double a, double lam, double p) {
    double lo = 0.0, hi = a, u = a / (1.0 + lam * p);
    for (int it = 0; it < 100; ++it) {
        const double pw = std::pow(u, p - 2.0);
        const double g = u + lam * p * pw * u - a;
        if (g > 0.0) hi = u; else lo = u;
        if (g == 0.0 || hi - lo <= 1e-16 * a) break;
        double next = u - g / (1.0 + lam * p * (p - 1.0) * pw);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    return u;
}

// Projection onto the unit lp ball for 1 < p < inf via the scalar multiplier of
// the constraint sum |x_i|^p <= 1.
void project_lp(std::span<double> v, double p) {
    double total = 0.0;
    for (double x : v) total += std::pow(std::abs(x), p);
    if (total <= 1.0) return;
    std::vector<double> u(v.size());
    auto excess = [&](double lam, double* slope) {
        double sum = -1.0, ds = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double a = std::abs(v[i]);
            u[i] = a > 0.0 ? shrink_lp(a, lam, p) : 0.0;
            if (u[i] > 0.0) {
                const double up1 = std::pow(u[i], p - 1.0);
                sum += up1 * u[i];
                const double du = -p * up1 / (1.0 + lam * p * (p - 1.0) * up1 / u[i]);
                ds += p * up1 * du;
            }
        }
        if (slope) *slope = ds;
        return sum;
    };
    double lo = 0.0, hi = 1.0;
    while (excess(hi, nullptr) > 0.0) {
        lo = hi;
        hi *= 2.0;
    }
    double lam = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        double slope = 0.0;
        const double phi = excess(lam, &slope);
        if (phi > 0.0) lo = lam; else hi = lam;
        if (phi == 0.0) { hi = lam; break; }
        double next = slope < 0.0 ? lam - phi / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        lam = next;
    }
    const double len = std::pow(std::max(excess(hi, nullptr) + 1.0, 0.0), 1.0 / p);
    const double fix = len > 1.0 ? 1.0 / len : 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::copysign(u[i] * fix, v[i]);
}

void project_vector(std::span<double> v, double p) {
    if (p == 1.0) {
        project_l1(v);
    } else if (p == kInf) {
        for (double& x : v) x = std::clamp(x, -1.0, 1.0);
    } else if (p == 2.0) {
        double sq = 0.0;
        for (double x : v) sq += x * x;
        if (sq > 1.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (double& x : v) x *= inv;
        }
    } else {
        project_lp(v, p);
    }
}

struct StageResult {
    double gap = kInf;
    std::size_t iters = 0;
};

StageResult frank_wolfe_stage(const PairMargins& pairs, const NormSpec& spec, const MarginSolverOptions& opts,
                              double tau, double stage_tol, Mat& w, std::vector<double>& m) {
    std::vector<double> ms, dm, weight, scratch;
    StageResult res;
    for (std::size_t j = 0; j < opts.max_iters; ++j) {
        softmin(m, tau, weight);
        const Mat g = pairs.weighted_grad(weight);
        const Mat s = steepest_map(g, spec, opts.lmo);
        res.gap = inner(g, s) - inner(g, w);
        if (res.gap <= stage_tol) return res;
        pairs.eval(s, ms);
        dm.resize(m.size());
        for (std::size_t p = 0; p < m.size(); ++p) dm[p] = ms[p] - m[p];
        const double step = opts.step == FwStep::line_search ? line_search(m, dm, tau, scratch, weight)
                                                             : 2.0 / (static_cast<double>(j) + 2.0);
        w *= 1.0 - step;
        w.axpy(step, s);
        pairs.eval(w, m);
        ++res.iters;
    }
    softmin(m, tau, weight);
    const Mat g = pairs.weighted_grad(weight);
    res.gap = inner(g, steepest_map(g, spec, opts.lmo)) - inner(g, w);
    return res;
}

/// FISTA with gradient-based restart, step 1/L for L = 2 max‖x_i‖₂²/τ.
StageResult projected_stage(const PairMargins& pairs, const NormSpec& spec, const MarginSolverOptions& opts,
                            double lipschitz_scale, double tau, double stage_tol, Mat& w, std::vector<double>& m) {
    std::vector<double> weight, my;
    const double inv_l = tau / lipschitz_scale;
    Mat y = w;
    double momentum = 1.0;
    StageResult res;
    for (std::size_t j = 0; j < opts.max_iters; ++j) {
        if (j % opts.gap_every == 0) {
            softmin(m, tau, weight);
            const Mat g = pairs.weighted_grad(weight);
            res.gap = inner(g, steepest_map(g, spec, opts.lmo)) - inner(g, w);
            if (res.gap <= stage_tol) return res;
        }
        pairs.eval(y, my);
        softmin(my, tau, weight);
        const Mat g = pairs.weighted_grad(weight);
        Mat next = y;
        next.axpy(inv_l, g);
        next = project_unit_ball(next, spec);
        Mat delta = next - w;
        if (inner(g, delta) < 0.0) momentum = 1.0;
        const double following = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        y = next;
        y.axpy((momentum - 1.0) / following, delta);
        momentum = following;
        w = std::move(next);
        pairs.eval(w, m);
        ++res.iters;
    }
    softmin(m, tau, weight);
    const Mat g = pairs.weighted_grad(weight);
    res.gap = inner(g, steepest_map(g, spec, opts.lmo)) - inner(g, w);
    return res;
}

}  // namespace

bool has_projection(const NormSpec& spec) noexcept { return spec.p >= 1.0; }

Mat project_unit_ball(const Mat& w, const NormSpec& spec) {
    if (!has_projection(spec)) throw std::invalid_argument("project_unit_ball: no projection for " + spec.to_string());
    if (spec.family == NormSpec::Family::entrywise || spec.p == 2.0) {
        Mat out = w;
        if (spec.p == 2.0) {
            const double len = frobenius(w);
            if (len > 1.0) out *= 1.0 / len;
        } else {
            project_vector(out.data(), spec.p);
        }
        return out;
    }
    if (w.is_zero()) return w;
    Svd svd = jacobi_svd(w);
    project_vector(svd.sigma, spec.p);
    return svd.reconstruct();
}

MaxMarginSolution solve_max_margin(const Dataset& ds, const NormSpec& spec, const MarginSolverOptions& opts) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("max_margin: tol must be positive");
    if (!(opts.tau_factor > 0.0 && opts.tau_factor < 1.0)) {
        throw std::invalid_argument("max_margin: tau_factor must lie in (0, 1)");
    }
    if (opts.max_iters == 0 || opts.gap_every == 0) {
        throw std::invalid_argument("max_margin: max_iters and gap_every must be positive");
    }
    const bool projected = opts.method == MarginMethod::projected ||
                           (opts.method == MarginMethod::automatic && has_projection(spec));
    if (projected && !has_projection(spec)) {
        throw std::invalid_argument("max_margin: no projection for " + spec.to_string());
    }
    double lipschitz_scale = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double sq = 0.0;
        for (double v : ds.sample(i)) sq += v * v;
        lipschitz_scale = std::max(lipschitz_scale, 2.0 * sq);
    }

    const PairMargins pairs(ds);
    MaxMarginSolution sol;
    sol.spec = spec;
    Mat w(ds.k(), ds.d());
    std::vector<double> m;
    pairs.eval(w, m);

    for (double tau = opts.tau_start;; tau *= opts.tau_factor) {
        const bool final_stage = tau < opts.tol;
        const double stage_tol = final_stage ? opts.tol : std::max(opts.tol, 0.01 * tau);
        const StageResult stage = projected ? projected_stage(pairs, spec, opts, lipschitz_scale, tau, stage_tol, w, m)
                                            : frank_wolfe_stage(pairs, spec, opts, tau, stage_tol, w, m);
        sol.iterations_used += stage.iters;
        sol.certificate_gap = stage.gap;
        sol.stage_tau.push_back(tau);
        sol.stage_margin.push_back(normalized_min(m, norm(w, spec)));
        if (final_stage) break;
    }

    const double scale = norm(w, spec);
    sol.w_star = scale > 0.0 ? w * (1.0 / scale) : w;
    sol.gamma = scale > 0.0 ? margin_report(sol.w_star, ds, spec).unnormalized_min : 0.0;
    sol.separable = sol.gamma > opts.tol;
    sol.converged = sol.certificate_gap <= 10.0 * opts.tol;
    return sol;
}

MaxMarginSolution max_margin(const Dataset& ds, const NormSpec& spec, double tol, std::size_t max_iters) {
    MarginSolverOptions opts;
    opts.tol = tol;
    opts.max_iters = max_iters;
    MaxMarginSolution sol = solve_max_margin(ds, spec, opts);
    if (!sol.converged) {
        throw ConvergenceError("max_margin: duality gap " + std::to_string(sol.certificate_gap) + " after " +
                                   std::to_string(sol.iterations_used) + " iterations",
                               sol.certificate_gap);
    }
    return sol;
}

Mat bias_matrix(const Dataset& ds, BiasKind kind) {
    const std::size_t k = ds.k();
    Mat out(k, ds.d());
    const double center = 1.0 / static_cast<double>(k);
    // ‖e_c − 𝟙/k‖₂ = sqrt((1 − 1/k)² + (k − 1)/k²) = sqrt((k − 1)/k)
    const double u_norm = std::sqrt((static_cast<double>(k) - 1.0) / static_cast<double>(k));
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto x = ds.sample(i);
        const std::size_t y = ds.label(i);
        if (kind == BiasKind::sign) {
            for (std::size_t r = 0; r < k; ++r) {
                const double u = r == y ? 1.0 : -1.0;
                for (std::size_t j = 0; j < x.size(); ++j) {
                    out(r, j) += u * (x[j] > 0.0 ? 1.0 : (x[j] < 0.0 ? -1.0 : 0.0));
                }
            }
        } else {
            double xn = 0.0;
            for (double v : x) xn += v * v;
            xn = std::sqrt(xn);
            if (xn == 0.0) throw std::invalid_argument("bias_matrix: zero sample " + std::to_string(i));
            for (std::size_t r = 0; r < k; ++r) {
                const double u = ((r == y ? 1.0 : 0.0) - center) / u_norm;
                for (std::size_t j = 0; j < x.size(); ++j) out(r, j) += u * x[j] / xn;
            }
        }
    }
    return out;
}

bool check_column_symmetry(const Mat& w) {
    const double tol = 1e-9 * (1.0 + max_abs(w));
    for (std::size_t j = 0; j < w.cols(); ++j) {
        double lo = kInf, hi = -kInf;
        for (std::size_t r = 0; r < w.rows(); ++r) {
            if (r == j) continue;
            lo = std::min(lo, w(r, j));
            hi = std::max(hi, w(r, j));
        }
        if (hi - lo > tol) return false;
    }
    return true;
}

}  // namespace ssd
