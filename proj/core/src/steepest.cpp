#include "ssd/steepest.hpp"

#include <cmath>
#include <stdexcept>

#include "ssd/svd.hpp"

namespace ssd {

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Mat entrywise_map(const Mat& g, double p) {
    Mat out(g.rows(), g.cols());
    auto dst = out.data();
    const auto src = g.data();
    if (p == kInf) {
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sign(src[i]);
        return out;
    }
    if (p == 1.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < src.size(); ++i)
            if (std::abs(src[i]) > std::abs(src[best])) best = i;
        dst[best] = sign(src[best]);
        return out;
    }
    // Δ_ij = sign(g_ij) |g_ij|^{q−1} / ‖g‖_q^{q−1}, evaluated on g / max|g|.
    const double q = conjugate_exponent(p);
    const double scale = max_abs(g);
    double total = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double r = std::abs(src[i]) / scale;
        dst[i] = r == 0.0 ? 0.0 : std::pow(r, q - 1.0);
        total += dst[i] * r;  // |r|^q
    }
    const double denom = std::pow(total, (q - 1.0) / q);
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sign(src[i]) * dst[i] / denom;
    return out;
}

Mat weighted_polar(const Svd& svd, std::span<const double> weights) {
    Mat us(svd.u.rows(), weights.size());
    for (std::size_t i = 0; i < us.rows(); ++i)
        for (std::size_t j = 0; j < weights.size(); ++j) us(i, j) = svd.u(i, j) * weights[j];
    Mat v(svd.v.rows(), weights.size());
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < weights.size(); ++j) v(i, j) = svd.v(i, j);
    return matmul_nt(us, v);
}

Mat schatten_map(const Mat& g, double p, const SteepestOptions& opts) {
    if (p == kInf && opts.newton_schulz) return newton_schulz_polar(g, opts.ns_iters, opts.ns_tol);
    const Svd svd = jacobi_svd(g);
    const std::size_t rank = svd.rank();
    std::vector<double> weights(rank, 0.0);
    if (p == kInf) {
        weights.assign(rank, 1.0);
    } else if (p == 1.0) {
        weights.assign(1, 1.0);
    } else {
        const double q = conjugate_exponent(p);
        const double top = svd.sigma[0];
        double total = 0.0;
        for (std::size_t j = 0; j < rank; ++j) {
            const double r = svd.sigma[j] / top;
            weights[j] = std::pow(r, q - 1.0);
            total += weights[j] * r;
        }
        const double denom = std::pow(total, (q - 1.0) / q);
        for (double& wgt : weights) wgt /= denom;
    }
    return weighted_polar(svd, weights);
}

}  // namespace

Mat steepest_map(const Mat& g, const NormSpec& spec, const SteepestOptions& opts) {
    if (!g.all_finite()) throw std::invalid_argument("steepest_map: non-finite signal");
    if (g.is_zero()) return Mat(g.rows(), g.cols());
    return spec.family == NormSpec::Family::entrywise ? entrywise_map(g, spec.p) : schatten_map(g, spec.p, opts);
}

std::pair<Mat, Mat> single_sample_spectral_equals_frobenius(const Mat& w, const Dataset& ds, std::size_t i,
                                                            LossKind kind) {
    const Mat neg = -sample_grad(w, ds, i, kind);
    if (neg.is_zero()) throw std::invalid_argument("single_sample_spectral_equals_frobenius: zero gradient");
    return {steepest_map(neg, NormSpec::schatten(kInf)), steepest_map(neg, NormSpec::entrywise(2.0))};
}

}  // namespace ssd
