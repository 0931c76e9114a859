#include "ssd/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ssd/error.hpp"

namespace ssd {

namespace {

void check_shapes(const Mat& w, const Dataset& ds) {
    if (w.rows() != ds.k() || w.cols() != ds.d()) {
        throw std::invalid_argument("weight shape " + std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                                    " does not match dataset k x d = " + std::to_string(ds.k()) + "x" +
                                    std::to_string(ds.d()));
    }
}

void logits(const Mat& w, std::span<const double> x, std::vector<double>& z) {
    z.assign(w.rows(), 0.0);
    for (std::size_t c = 0; c < w.rows(); ++c) {
        const auto row = w.row(c);
        double s = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) s += row[j] * x[j];
        z[c] = s;
    }
}

/// Shifted exponentials e_c = exp(z_c − max z) and their sum.
double shifted_exp(const std::vector<double>& z, std::vector<double>& e, double* max_out = nullptr) {
    double top = z[0];
    for (double v : z) top = std::max(top, v);
    e.resize(z.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
        e[c] = std::exp(z[c] - top);
        sum += e[c];
    }
    if (max_out) *max_out = top;
    return sum;
}

double exp_term(double margin, std::size_t sample) {
    if (-margin > kExpGuard) {
        throw NumericError("exponential loss overflow at sample " + std::to_string(sample));
    }
    return std::exp(-margin);
}

/// Gradient coefficients: ∇ℓ_i = coef x_iᵀ.
void sample_coefficients(const std::vector<double>& z, std::size_t y, std::size_t sample, LossKind kind,
                         std::vector<double>& scratch, std::vector<double>& coef) {
    const std::size_t k = z.size();
    coef.assign(k, 0.0);
    double rest = 0.0;
    if (kind == LossKind::cross_entropy) {
        const double sum = shifted_exp(z, scratch);
        for (std::size_t c = 0; c < k; ++c) {
            if (c == y) continue;
            coef[c] = scratch[c] / sum;
            rest += coef[c];
        }
    } else {
        for (std::size_t c = 0; c < k; ++c) {
            if (c == y) continue;
            coef[c] = exp_term(z[y] - z[c], sample);
            rest += coef[c];
        }
    }
    coef[y] = -rest;
}

Mat batch_grad(const Mat& w, const Dataset& ds, Batch batch, LossKind kind) {
    check_shapes(w, ds);
    if (batch.empty()) throw std::invalid_argument("grad: empty batch");
    Mat g(ds.k(), ds.d());
    std::vector<double> z, scratch, coef;
    for (std::size_t i : batch) {
        if (i >= ds.n()) throw std::invalid_argument("grad: sample index out of range");
        const auto x = ds.sample(i);
        logits(w, x, z);
        sample_coefficients(z, ds.label(i), i, kind, scratch, coef);
        for (std::size_t c = 0; c < ds.k(); ++c) {
            if (coef[c] == 0.0) continue;
            auto row = g.row(c);
            for (std::size_t j = 0; j < x.size(); ++j) row[j] += coef[c] * x[j];
        }
    }
    g *= 1.0 / static_cast<double>(batch.size());
    return g;
}

std::vector<std::size_t> all_indices(const Dataset& ds) {
    std::vector<std::size_t> idx(ds.n());
    std::iota(idx.begin(), idx.end(), 0);
    return idx;
}

}  // namespace

LossKind parse_loss(std::string_view text) {
    if (text == "ce" || text == "cross_entropy") return LossKind::cross_entropy;
    if (text == "exp" || text == "exponential") return LossKind::exponential;
    throw ConfigError("unknown loss '" + std::string(text) + "' (expected ce or exp)");
}

std::string to_string(LossKind kind) { return kind == LossKind::cross_entropy ? "ce" : "exp"; }

double loss(const Mat& w, const Dataset& ds, LossKind kind) {
    check_shapes(w, ds);
    std::vector<double> z, e;
    double total = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        logits(w, ds.sample(i), z);
        const std::size_t y = ds.label(i);
        if (kind == LossKind::cross_entropy) {
            double top = 0.0;
            const double sum = shifted_exp(z, e, &top);
            if (e[y] == 1.0) {
                // True class holds the max: log(1 + Σ_{c≠y} e_c) without cancellation.
                double rest = 0.0;
                for (std::size_t c = 0; c < e.size(); ++c) {
                    if (c != y) rest += e[c];
                }
                total += std::log1p(rest);
            } else {
                total += std::log(sum) - (z[y] - top);
            }
        } else {
            for (std::size_t c = 0; c < ds.k(); ++c) {
                if (c != y) total += exp_term(z[y] - z[c], i);
            }
        }
    }
    return total / static_cast<double>(ds.n());
}

Mat grad(const Mat& w, const Dataset& ds, LossKind kind) {
    const auto idx = all_indices(ds);
    return batch_grad(w, ds, idx, kind);
}

Mat grad(const Mat& w, const Dataset& ds, Batch batch, LossKind kind) { return batch_grad(w, ds, batch, kind); }

Mat sample_grad(const Mat& w, const Dataset& ds, std::size_t i, LossKind kind) {
    const std::size_t one[] = {i};
    return batch_grad(w, ds, one, kind);
}

double proxy_g(const Mat& w, const Dataset& ds, LossKind kind) {
    if (kind == LossKind::exponential) return loss(w, ds, kind);
    check_shapes(w, ds);
    std::vector<double> z, e;
    double total = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        logits(w, ds.sample(i), z);
        const double sum = shifted_exp(z, e);
        double rest = 0.0;
        for (std::size_t c = 0; c < ds.k(); ++c) {
            if (c != ds.label(i)) rest += e[c];
        }
        total += rest / sum;
    }
    return total / static_cast<double>(ds.n());
}

MarginReport margin_report(const Mat& w, const Dataset& ds, const NormSpec& spec) {
    check_shapes(w, ds);
    MarginReport report;
    report.unnormalized_min = kInf;
    std::vector<double> z;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        logits(w, ds.sample(i), z);
        const std::size_t y = ds.label(i);
        for (std::size_t c = 0; c < ds.k(); ++c) {
            if (c == y) continue;
            const double m = z[y] - z[c];
            if (m < report.unnormalized_min) {
                report.unnormalized_min = m;
                report.argmin_sample = i;
                report.argmin_class = c;
            }
        }
    }
    report.weight_norm = norm(w, spec);
    report.normalized = report.weight_norm > 0.0 ? report.unnormalized_min / report.weight_norm : -kInf;
    return report;
}

BoundCheck gradient_noise_bound_check(const Mat& w, const Dataset& ds, Batch batch, LossKind kind) {
    if (batch.empty() || ds.n() % batch.size() != 0) {
        throw std::invalid_argument("gradient_noise_bound_check: batch size must divide n");
    }
    const double m = static_cast<double>(ds.n() / batch.size());
    const Mat noise = grad(w, ds, batch, kind) - grad(w, ds, kind);
    return {entrywise_norm(noise, 1.0), 2.0 * (m - 1.0) * ds.r_bound() * proxy_g(w, ds, kind)};
}

}  // namespace ssd
