#pragma once

#include "strata/core.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace strata {

/// Deterministic random stream. The engine is std::mt19937_64 (bit-exact by
/// standard); every variate is derived from uniform() through explicit
/// algorithms, so sequences are reproducible across platforms and toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for a named subsystem under one root seed.
    static Rng stream(std::uint64_t root_seed, std::string_view name) {
        std::uint64_t x = root_seed ^ fnv1a(name);
        // splitmix64 finalizer decorrelates nearby seeds
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        x = x ^ (x >> 31);
        return Rng(x);
    }

    /// Uniform on the open interval (0,1).
    double uniform() {
        const std::uint64_t r = engine_();
        return (static_cast<double>(r >> 12) + 0.5) * 0x1.0p-52;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t next_u64() { return engine_(); }

    double normal() { return std::sqrt(2.0) * boost::math::erf_inv(2.0 * uniform() - 1.0); }

    double exponential() { return -std::log(uniform()); }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 boosted through G(a+1)*U^(1/a).
    double gamma(double shape) {
        if (shape <= 0.0) throw NumericError("Rng::gamma: shape must be > 0");
        if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double chi_squared(double df) { return 2.0 * gamma(0.5 * df); }

    double student_t(double df) { return normal() / std::sqrt(chi_squared(df) / df); }

    /// Positive stable S(alpha, 1) with Laplace transform exp(-s^alpha), alpha in (0,1).
    /// Chambers-Mallows-Stuck construction.
    double positive_stable(double alpha) {
        if (alpha <= 0.0 || alpha >= 1.0) throw NumericError("Rng::positive_stable: alpha in (0,1)");
        const double u = uniform() * M_PI;
        const double e = exponential();
        const double s = std::pow(std::sin(alpha * u) / std::pow(std::sin(u), 1.0 / alpha), 1.0)
                       * std::pow(std::sin((1.0 - alpha) * u) / e, (1.0 - alpha) / alpha);
        return s;
    }

    /// Logarithmic-series variate, P(X=k) = -p^k / (k log(1-p)); Kemp's LK algorithm.
    double log_series(double p) {
        if (p <= 0.0 || p >= 1.0) throw NumericError("Rng::log_series: p in (0,1)");
        const double h = std::log1p(-p);
        const double u2 = uniform();
        if (u2 > p) return 1.0;
        const double u1 = uniform();
        const double q = -std::expm1(u1 * h);
        if (u2 < q * q) {
            const double k = std::floor(1.0 + std::log(u2) / std::log(q));
            return k < 1.0 ? 1.0 : k;
        }
        return (u2 > q) ? 1.0 : 2.0;
    }

    Vector normal_vector(Eigen::Index n) {
        Vector v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
        return m;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace strata
