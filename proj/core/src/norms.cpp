#include "ssd/norms.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

#include "ssd/error.hpp"
#include "ssd/svd.hpp"

namespace ssd {

namespace {

void require_exponent(double p, const char* who) {
    if (!(p >= 1.0)) throw std::invalid_argument(std::string(who) + ": exponent must be >= 1");
}

// (Σ |v_i|^p)^{1/p}, scaled by the max magnitude so large entries don't overflow.
template <typename Range>
double vector_p_norm(const Range& values, double p) {
    double scale = 0.0;
    for (double v : values) scale = std::max(scale, std::abs(v));
    if (p == kInf || scale == 0.0) return scale;
    double s = 0.0;
    if (p == 1.0) {
        for (double v : values) s += std::abs(v);
        return s;
    }
    for (double v : values) {
        if (v != 0.0) s += std::pow(std::abs(v) / scale, p);
    }
    return scale * std::pow(s, 1.0 / p);
}

}  // namespace

NormSpec NormSpec::entrywise(double p) {
    require_exponent(p, "NormSpec");
    return {Family::entrywise, p};
}

NormSpec NormSpec::schatten(double p) {
    require_exponent(p, "NormSpec");
    return {Family::schatten, p};
}

NormSpec NormSpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("norm spec '" + std::string(text) + "' must look like ew:<p> or sch:<p>");
    }
    const auto family = text.substr(0, colon);
    const auto exponent = text.substr(colon + 1);
    double p = 0.0;
    if (exponent == "inf") {
        p = kInf;
    } else {
        const auto [ptr, ec] = std::from_chars(exponent.data(), exponent.data() + exponent.size(), p);
        if (ec != std::errc{} || ptr != exponent.data() + exponent.size()) {
            throw ConfigError("norm spec '" + std::string(text) + "': bad exponent");
        }
    }
    if (!(p >= 1.0)) throw ConfigError("norm spec '" + std::string(text) + "': exponent must be >= 1");
    if (family == "ew") return {Family::entrywise, p};
    if (family == "sch") return {Family::schatten, p};
    throw ConfigError("norm spec '" + std::string(text) + "': family must be ew or sch");
}

std::string NormSpec::to_string() const {
    std::string out = family == Family::entrywise ? "ew:" : "sch:";
    if (p == kInf) return out + "inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
    return out + std::string(buf, ptr);
}

NormSpec NormSpec::dual() const { return {family, conjugate_exponent(p)}; }

double conjugate_exponent(double p) {
    require_exponent(p, "conjugate_exponent");
    if (p == 1.0) return kInf;
    if (p == kInf) return 1.0;
    return p / (p - 1.0);
}

double entrywise_norm(const Mat& a, double p) {
    require_exponent(p, "entrywise_norm");
    return vector_p_norm(a.data(), p);
}

double schatten_norm(const Mat& a, double p) {
    require_exponent(p, "schatten_norm");
    if (a.is_zero()) return 0.0;
    return vector_p_norm(jacobi_svd(a).sigma, p);
}

double norm(const Mat& a, const NormSpec& spec) {
    return spec.family == NormSpec::Family::entrywise ? entrywise_norm(a, spec.p) : schatten_norm(a, spec.p);
}

double dual_norm(const Mat& a, const NormSpec& spec) { return norm(a, spec.dual()); }

}  // namespace ssd
