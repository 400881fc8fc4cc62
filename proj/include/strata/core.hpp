#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace strata {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Bad user input: malformed config keys, unknown model names, invalid flags.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad data: unparseable files, domain violations in the input panel.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: singular systems, lost positive definiteness, non-convergence
/// where no best-effort result is representable.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

inline double mean(const Vector& x) { return x.mean(); }

/// Sample variance with divisor (n - ddof).
inline double variance(const Vector& x, int ddof = 1) {
    const auto n = static_cast<double>(x.size());
    if (n - ddof <= 0) throw NumericError("variance: need more than ddof observations");
    const double m = x.mean();
    return (x.array() - m).square().sum() / (n - ddof);
}

inline double stddev(const Vector& x, int ddof = 1) { return std::sqrt(variance(x, ddof)); }

/// Moment-based skewness g1 = m3 / m2^(3/2) (1/n central moments).
inline double skewness(const Vector& x) {
    const double m = x.mean();
    const auto c = x.array() - m;
    const double n = static_cast<double>(x.size());
    const double m2 = c.square().sum() / n;
    const double m3 = c.cube().sum() / n;
    if (m2 <= 0.0) throw NumericError("skewness: zero variance");
    return m3 / std::pow(m2, 1.5);
}

/// Moment-based excess kurtosis g2 = m4 / m2^2 - 3.
inline double excess_kurtosis(const Vector& x) {
    const double m = x.mean();
    const auto c = x.array() - m;
    const double n = static_cast<double>(x.size());
    const double m2 = c.square().sum() / n;
    const double m4 = c.pow(4).sum() / n;
    if (m2 <= 0.0) throw NumericError("kurtosis: zero variance");
    return m4 / (m2 * m2) - 3.0;
}

/// Shortest-round-trip decimal rendering; used everywhere byte-stable output matters.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    // trim to the shortest representation that still round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char cand[40];
        std::snprintf(cand, sizeof cand, "%.*g", prec, x);
        if (std::strtod(cand, nullptr) == x) return cand;
    }
    return buf;
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace strata
