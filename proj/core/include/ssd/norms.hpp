#pragma once

#include <limits>
#include <string>
#include <string_view>

#include "ssd/mat.hpp"

namespace ssd {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Geometry selector: entry-wise or Schatten p-norm, p ∈ [1, ∞].
struct NormSpec {
    enum class Family { entrywise, schatten };

    Family family = Family::entrywise;
    double p = 2.0;

    static NormSpec entrywise(double p);
    static NormSpec schatten(double p);

    /// Parses "ew:<p>" or "sch:<p>", p a decimal or "inf".
    static NormSpec parse(std::string_view text);
    std::string to_string() const;

    /// Same family, Hölder-conjugate exponent.
    NormSpec dual() const;

    friend bool operator==(const NormSpec&, const NormSpec&) = default;
};

/// q with 1/p + 1/q = 1 (1 ↦ ∞, ∞ ↦ 1).
double conjugate_exponent(double p);

double entrywise_norm(const Mat& a, double p);
double schatten_norm(const Mat& a, double p);
double norm(const Mat& a, const NormSpec& spec);
double dual_norm(const Mat& a, const NormSpec& spec);

}  // namespace ssd
