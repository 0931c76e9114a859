#include "ssd/svd.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ssd/error.hpp"

namespace ssd {

namespace {

using Column = std::vector<double>;

double dot(const Column& a, const Column& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

struct TallSvd {
    std::vector<Column> u;  // r columns of length rows
    std::vector<double> sigma;
    std::vector<Column> v;  // r columns of length cols
};

// Requires a.rows() >= a.cols().
TallSvd jacobi_tall(const Mat& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();

    // Power-of-two rescale so squared norms neither overflow nor underflow; undone exactly on sigma.
    int exponent = 0;
    if (const double big = max_abs(a); big > 0.0) std::frexp(big, &exponent);
    std::vector<Column> work(n, Column(m));
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) work[j][i] = std::ldexp(a(i, j), -exponent);
    std::vector<Column> v(n, Column(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) v[j][j] = 1.0;

    const double tol = std::max(1e-15, static_cast<double>(m) * DBL_EPSILON);
    // Columns at the rounding floor carry no direction; rotating them never settles.
    double total = 0.0;
    for (const Column& col : work) total += dot(col, col);
    const double floor_sq = total * std::pow(static_cast<double>(m + n) * DBL_EPSILON, 2);
    double residual = 0.0;
    bool converged = false;
    for (int sweep = 0; sweep < kMaxJacobiSweeps; ++sweep) {
        bool rotated = false;
        residual = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = dot(work[p], work[p]);
                const double beta = dot(work[q], work[q]);
                const double gamma = dot(work[p], work[q]);
                if (alpha <= floor_sq || beta <= floor_sq || gamma == 0.0) continue;
                const double rel = std::abs(gamma) / (std::sqrt(alpha) * std::sqrt(beta));
                residual = std::max(residual, rel);
                if (rel <= tol) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double x = work[p][i];
                    const double y = work[q][i];
                    work[p][i] = c * x - s * y;
                    work[q][i] = s * x + c * y;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = v[p][i];
                    const double y = v[q][i];
                    v[p][i] = c * x - s * y;
                    v[q][i] = s * x + c * y;
                }
            }
        }
        if (!rotated) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw ConvergenceError("jacobi_svd: no convergence after " + std::to_string(kMaxJacobiSweeps) +
                                   " sweeps, off-diagonal residual " + std::to_string(residual),
                               residual);
    }

    std::vector<double> norms(n);
    for (std::size_t j = 0; j < n; ++j) norms[j] = std::sqrt(dot(work[j], work[j]));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

    TallSvd out;
    out.sigma.resize(n);
    out.u.resize(n);
    out.v.resize(n);
    const double top = n == 0 ? 0.0 : norms[order[0]];
    std::vector<std::size_t> missing;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.v[k] = v[j];
        if (top > 0.0 && norms[j] > kRankCut * top) {
            out.sigma[k] = std::ldexp(norms[j], exponent);
            out.u[k] = work[j];
            for (double& x : out.u[k]) x /= norms[j];
        } else {
            out.sigma[k] = 0.0;
            missing.push_back(k);
        }
    }

    // Complete U greedily with the basis vector least covered by the existing columns.
    for (std::size_t k : missing) {
        Column best;
        double best_len = -1.0;
        for (std::size_t candidate = 0; candidate < m; ++candidate) {
            Column e(m, 0.0);
            e[candidate] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t j = 0; j < n; ++j) {
                    if (out.u[j].empty()) continue;
                    const double proj = dot(out.u[j], e);
                    for (std::size_t i = 0; i < m; ++i) e[i] -= proj * out.u[j][i];
                }
            }
            const double len = std::sqrt(dot(e, e));
            if (len > best_len) {
                best_len = len;
                best = std::move(e);
            }
        }
        for (double& x : best) x /= best_len;
        out.u[k] = std::move(best);
    }
    return out;
}

Mat columns_to_mat(const std::vector<Column>& cols, std::size_t rows) {
    Mat out(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < rows; ++i) out(i, j) = cols[j][i];
    return out;
}

}  // namespace

std::size_t Svd::rank() const noexcept {
    if (sigma.empty() || sigma[0] == 0.0) return 0;
    std::size_t k = 0;
    while (k < sigma.size() && sigma[k] > kRankCut * sigma[0]) ++k;
    return k;
}

Mat Svd::reconstruct() const {
    Mat us = u;
    for (std::size_t i = 0; i < us.rows(); ++i)
        for (std::size_t j = 0; j < us.cols(); ++j) us(i, j) *= sigma[j];
    return matmul_nt(us, v);
}

Svd jacobi_svd(const Mat& a) {
    if (a.empty()) throw std::invalid_argument("jacobi_svd: empty matrix");
    if (!a.all_finite()) throw std::invalid_argument("jacobi_svd: non-finite input");

    const bool wide = a.rows() < a.cols();
    const Mat tall = wide ? a.transpose() : a;
    TallSvd t = jacobi_tall(tall);

    Svd out;
    out.sigma = std::move(t.sigma);
    if (wide) {
        out.u = columns_to_mat(t.v, a.rows());
        out.v = columns_to_mat(t.u, a.cols());
    } else {
        out.u = columns_to_mat(t.u, a.rows());
        out.v = columns_to_mat(t.v, a.cols());
    }

    for (std::size_t j = 0; j < out.u.cols(); ++j) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < out.u.rows(); ++i)
            if (std::abs(out.u(i, j)) > std::abs(out.u(best, j))) best = i;
        if (out.u(best, j) < 0.0) {
            for (std::size_t i = 0; i < out.u.rows(); ++i) out.u(i, j) = -out.u(i, j);
            for (std::size_t i = 0; i < out.v.rows(); ++i) out.v(i, j) = -out.v(i, j);
        }
    }
    return out;
}

Mat newton_schulz_polar(const Mat& a, int iters, double tol) {
    if (iters <= 0) throw std::invalid_argument("newton_schulz_polar: iters must be positive");
    const double scale = frobenius(a);
    if (scale == 0.0) throw std::invalid_argument("newton_schulz_polar: zero input");

    Mat x = a * (1.0 / scale);
    const bool short_side_rows = x.rows() <= x.cols();
    for (int it = 0; it < iters; ++it) {
        const Mat cubic = short_side_rows ? matmul(matmul_nt(x, x), x) : matmul(x, matmul_tn(x, x));
        if (frobenius(cubic - x) <= tol) break;
        x *= 1.5;
        x.axpy(-0.5, cubic);
    }
    return x;
}

}  // namespace ssd
