#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "ssd/mat.hpp"

namespace ssd {

/// Labeled samples for a k-class linear classifier. Immutable once built.
///
/// Features are kept as a d×n matrix (columns are samples) together with a
/// contiguous per-sample copy for the gradient kernels.
class Dataset {
public:
    /// Throws std::invalid_argument if a label is out of range, a class is
    /// missing, or a feature is non-finite.
    Dataset(Mat x, std::vector<std::size_t> y, std::size_t k);

    std::size_t n() const noexcept { return y_.size(); }
    std::size_t d() const noexcept { return x_.rows(); }
    std::size_t k() const noexcept { return k_; }
    /// max_i ‖x_i‖₁
    double r_bound() const noexcept { return r_bound_; }

    const Mat& x() const noexcept { return x_; }
    std::span<const std::size_t> labels() const noexcept { return y_; }
    std::size_t label(std::size_t i) const noexcept { return y_[i]; }
    std::span<const double> sample(std::size_t i) const noexcept { return samples_.row(i); }

    /// Same labels, every feature multiplied by `factor`.
    Dataset scaled(double factor) const;

private:
    Mat x_;
    Mat samples_;  // n × d
    std::vector<std::size_t> y_;
    std::size_t k_;
    double r_bound_ = 0.0;
};

double recompute_r_bound(const Dataset& ds);

/// Text format: first line "d n k", then n lines "label v1 ... vd" with
/// %.17g decimals. Round-trips bit-exactly.
void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

/// Text matrix: first line "rows cols", then one line per row (%.17g).
void write_matrix(const std::filesystem::path& path, const Mat& m);
Mat read_matrix(const std::filesystem::path& path);

}  // namespace ssd
