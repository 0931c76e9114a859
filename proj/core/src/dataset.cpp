#include "ssd/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ssd/error.hpp"

namespace ssd {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || end != token.c_str() + token.size()) {
        throw ConfigError(path.string() + ": bad number '" + token + "'");
    }
    return v;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + path.string());
    return out;
}

}  // namespace

Dataset::Dataset(Mat x, std::vector<std::size_t> y, std::size_t k) : x_(std::move(x)), y_(std::move(y)), k_(k) {
    if (k_ < 2) throw std::invalid_argument("Dataset: need at least two classes");
    if (x_.cols() != y_.size()) throw std::invalid_argument("Dataset: label count does not match sample count");
    if (y_.empty() || x_.rows() == 0) throw std::invalid_argument("Dataset: empty");
    if (!x_.all_finite()) throw std::invalid_argument("Dataset: non-finite feature");
    std::vector<bool> seen(k_, false);
    for (std::size_t label : y_) {
        if (label >= k_) throw std::invalid_argument("Dataset: label out of range");
        seen[label] = true;
    }
    for (std::size_t c = 0; c < k_; ++c) {
        if (!seen[c]) throw std::invalid_argument("Dataset: class " + std::to_string(c) + " has no samples");
    }
    samples_ = x_.transpose();
    r_bound_ = recompute_r_bound(*this);
}

Dataset Dataset::scaled(double factor) const { return Dataset(x_ * factor, y_, k_); }

double recompute_r_bound(const Dataset& ds) {
    double r = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double s = 0.0;
        for (double v : ds.sample(i)) s += std::abs(v);
        r = std::max(r, s);
    }
    return r;
}

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
    auto out = open_out(path);
    out << ds.d() << ' ' << ds.n() << ' ' << ds.k() << '\n';
    for (std::size_t i = 0; i < ds.n(); ++i) {
        out << ds.label(i);
        for (double v : ds.sample(i)) out << ' ' << format_double(v);
        out << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::size_t d = 0, n = 0, k = 0;
    if (!(in >> d >> n >> k) || d == 0 || n == 0) throw ConfigError(path.string() + ": bad header, expected 'd n k'");
    Mat x(d, n);
    std::vector<std::size_t> y(n);
    std::string token;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> token)) throw ConfigError(path.string() + ": truncated at sample " + std::to_string(i));
        const double label = parse_double(token, path);
        if (label < 0 || label != std::floor(label)) throw ConfigError(path.string() + ": bad label '" + token + "'");
        y[i] = static_cast<std::size_t>(label);
        for (std::size_t j = 0; j < d; ++j) {
            if (!(in >> token)) throw ConfigError(path.string() + ": truncated at sample " + std::to_string(i));
            x(j, i) = parse_double(token, path);
        }
    }
    if (in >> token) throw ConfigError(path.string() + ": trailing data");
    try {
        return Dataset(std::move(x), std::move(y), k);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void write_matrix(const std::filesystem::path& path, const Mat& m) {
    auto out = open_out(path);
    out << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_double(m(i, j));
        out << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

Mat read_matrix(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::size_t rows = 0, cols = 0;
    if (!(in >> rows >> cols) || rows == 0 || cols == 0) {
        throw ConfigError(path.string() + ": bad header, expected 'rows cols'");
    }
    Mat m(rows, cols);
    std::string token;
    for (std::size_t i = 0; i < rows * cols; ++i) {
        if (!(in >> token)) throw ConfigError(path.string() + ": truncated matrix");
        m.data()[i] = parse_double(token, path);
    }
    if (in >> token) throw ConfigError(path.string() + ": trailing data");
    return m;
}

}  // namespace ssd
