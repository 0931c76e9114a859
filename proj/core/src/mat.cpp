#include "ssd/mat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssd {

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
    }
}

}  // namespace

Mat::Mat(std::size_t rows, std::size_t cols, double fill) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw std::invalid_argument("Mat: data length does not match rows*cols");
    }
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw std::invalid_argument("Mat: ragged initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Mat Mat::diag(std::span<const double> values) {
    Mat m(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Mat Mat::transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

bool Mat::is_zero() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
}

bool Mat::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Mat& Mat::operator+=(const Mat& rhs) {
    require_same_shape(*this, rhs, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
    return *this;
}

Mat& Mat::operator-=(const Mat& rhs) {
    require_same_shape(*this, rhs, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
    return *this;
}

Mat& Mat::operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
}

Mat& Mat::axpy(double s, const Mat& x) {
    require_same_shape(*this, x, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * x.data_[i];
    return *this;
}

Mat operator+(Mat lhs, const Mat& rhs) { return lhs += rhs; }
Mat operator-(Mat lhs, const Mat& rhs) { return lhs -= rhs; }
Mat operator-(Mat m) { return m *= -1.0; }
Mat operator*(double s, Mat m) { return m *= s; }
Mat operator*(Mat m, double s) { return m *= s; }

Mat matmul(const Mat& a, const Mat& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    Mat out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = 0; p < a.cols(); ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aip * b(p, j);
        }
    }
    return out;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
    Mat out(a.cols(), b.cols());
    for (std::size_t p = 0; p < a.rows(); ++p) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double api = a(p, i);
            if (api == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += api * b(p, j);
        }
    }
    return out;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
    Mat out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
            out(i, j) = s;
        }
    }
    return out;
}

double inner(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "inner");
    double s = 0.0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
    return s;
}

double max_abs(const Mat& a) noexcept {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::abs(v));
    return m;
}

double max_abs_diff(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double frobenius(const Mat& a) noexcept {
    // Scaled accumulation so huge iterates do not overflow the square.
    const double scale = max_abs(a);
    if (scale == 0.0 || !std::isfinite(scale)) return scale;
    double s = 0.0;
    for (double v : a.data()) {
        const double r = v / scale;
        s += r * r;
    }
    return scale * std::sqrt(s);
}

double frobenius_cosine(const Mat& a, const Mat& b) {
    require_same_shape(a, b, "frobenius_cosine");
    const double na = frobenius(a);
    const double nb = frobenius(b);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("frobenius_cosine: zero operand");
    // Normalize first: ⟨a,b⟩ can overflow for large weights.
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a.data()[i] / na) * (b.data()[i] / nb);
    return std::clamp(s, -1.0, 1.0);
}

}  // namespace ssd
