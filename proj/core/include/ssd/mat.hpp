#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ssd {

/// Dense row-major matrix of doubles.
class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
    Mat(std::size_t rows, std::size_t cols, std::vector<double> data);
    Mat(std::initializer_list<std::initializer_list<double>> rows);

    static Mat zeros(std::size_t rows, std::size_t cols) { return Mat(rows, cols); }
    static Mat identity(std::size_t n);
    static Mat diag(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    Mat transpose() const;
    bool is_zero() const noexcept;
    bool all_finite() const noexcept;
    bool same_shape(const Mat& other) const noexcept { return rows_ == other.rows_ && cols_ == other.cols_; }

    Mat& operator+=(const Mat& rhs);
    Mat& operator-=(const Mat& rhs);
    Mat& operator*=(double s) noexcept;

    /// this += s * x
    Mat& axpy(double s, const Mat& x);

    friend bool operator==(const Mat&, const Mat&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Mat operator+(Mat lhs, const Mat& rhs);
Mat operator-(Mat lhs, const Mat& rhs);
Mat operator-(Mat m);
Mat operator*(double s, Mat m);
Mat operator*(Mat m, double s);

Mat matmul(const Mat& a, const Mat& b);
/// aᵀ b without materializing the transpose.
Mat matmul_tn(const Mat& a, const Mat& b);
/// a bᵀ without materializing the transpose.
Mat matmul_nt(const Mat& a, const Mat& b);

/// Trace inner product ⟨a, b⟩ = Σ a_ij b_ij.
double inner(const Mat& a, const Mat& b);
double max_abs(const Mat& a) noexcept;
double max_abs_diff(const Mat& a, const Mat& b);
double frobenius(const Mat& a) noexcept;

/// ⟨a,b⟩ / (‖a‖_F ‖b‖_F); throws std::invalid_argument on a zero operand.
double frobenius_cosine(const Mat& a, const Mat& b);

}  // namespace ssd
