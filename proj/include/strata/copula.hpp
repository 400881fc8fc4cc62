#pragma once

#include "strata/core.hpp"
#include "strata/optim.hpp"
#include "strata/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <variant>
#include <vector>

namespace strata {

enum class CopulaFamily { Clayton, Frank, Gumbel };

inline const char* family_name(CopulaFamily f) {
    switch (f) {
        case CopulaFamily::Clayton: return "clayton";
        case CopulaFamily::Frank: return "frank";
        case CopulaFamily::Gumbel: return "gumbel";
    }
    return "?";
}

/// Archimedean copula with its dependence parameter. Domains: Clayton theta > 0,
/// Gumbel theta >= 1, Frank theta != 0.
struct CopulaSpec {
    CopulaFamily family = CopulaFamily::Clayton;
    double theta = 1.0;

    void validate() const {
        switch (family) {
            case CopulaFamily::Clayton:
                if (!(theta > 0.0)) throw ConfigError("clayton: theta must be > 0");
                break;
            case CopulaFamily::Gumbel:
                if (!(theta >= 1.0)) throw ConfigError("gumbel: theta must be >= 1");
                break;
            case CopulaFamily::Frank:
                if (theta == 0.0) throw ConfigError("frank: theta must be nonzero");
                break;
        }
    }
};

/// Convex Clayton/Frank/Gumbel combination; weights live on the simplex.
struct MixtureParams {
    std::array<CopulaSpec, 3> components{
        CopulaSpec{CopulaFamily::Clayton, 1.0},
        CopulaSpec{CopulaFamily::Frank, 1.0},
        CopulaSpec{CopulaFamily::Gumbel, 1.5}};
    Eigen::Vector3d weights{1.0 / 3, 1.0 / 3, 1.0 / 3};

    void validate() const {
        if ((weights.array() < -1e-12).any()) throw ConfigError("mixture: negative weight");
        if (std::abs(weights.sum() - 1.0) > 1e-10) throw ConfigError("mixture: weights must sum to 1");
        for (const auto& c : components) c.validate();
    }
};

using CopulaModel = std::variant<CopulaSpec, MixtureParams>;

struct GofResult {
    double statistic_global = 0.0;  // Cramer-von Mises over all pseudo-observations
    double statistic_tail = 0.0;    // same sum restricted to the joint lower orthant
    double p_global = 1.0;
    double p_tail = 1.0;
    int replications = 0;
    std::uint64_t seed = 0;
    double tail_threshold = 0.25;
};

namespace copula_detail {

inline constexpr double kThetaEps = 1e-8;

inline void check_interior(const Vector& u) {
    for (Eigen::Index i = 0; i < u.size(); ++i)
        if (!(u[i] > 0.0 && u[i] < 1.0)) throw DataError("copula: point must be strictly inside (0,1)^K");
}

/// Coefficients of the Gumbel generator-derivative polynomial, computed by the
/// recurrence b[d+1][k] = alpha*b[d][k-1] + (d - k*alpha)*b[d][k]. All entries
/// are nonnegative for alpha in (0,1].
inline std::vector<double> gumbel_poly_coeffs(int dim, double alpha) {
    std::vector<double> b(static_cast<std::size_t>(dim) + 1, 0.0);
    b[1] = alpha;
    for (int d = 1; d < dim; ++d) {
        std::vector<double> nb(static_cast<std::size_t>(dim) + 1, 0.0);
        for (int k = 1; k <= d + 1; ++k) {
            double v = 0.0;
            if (k >= 1) v += alpha * b[static_cast<std::size_t>(k) - 1];
            if (k <= d) v += (static_cast<double>(d) - k * alpha) * b[static_cast<std::size_t>(k)];
            nb[static_cast<std::size_t>(k)] = v;
        }
        b.swap(nb);
    }
    return b;
}

inline double log_sum_exp(const std::vector<double>& terms) {
    const double m = *std::max_element(terms.begin(), terms.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

/// Debye function D1(x) for x > 0.
inline double debye1(double x) {
    const auto f = [](double t) { return t <= 1e-12 ? 1.0 - t / 2.0 : t / std::expm1(t); };
    // composite Simpson, fixed refinement is plenty for the (0, ~50] range used here
    const int n = 400;
    const double h = x / n;
    double s = f(0.0) + f(x);
    for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / (3.0 * x);
}

}  // namespace copula_detail

/// Kendall's tau with the tau-a convention (tied pairs count as neither);
/// exact integer concordance counts via Knight's O(n log n) algorithm.
inline double kendall_tau(const Matrix& xy) {
    const Eigen::Index n = xy.rows();
    if (n < 2 || xy.cols() != 2) throw DataError("kendall_tau: need an n x 2 sample, n >= 2");

    std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = {xy(i, 0), xy(i, 1)};
    std::sort(pts.begin(), pts.end());

    auto pairs2 = [](std::int64_t m) { return m * (m - 1) / 2; };
    const std::int64_t n0 = pairs2(n);

    std::int64_t ties_x = 0, ties_xy = 0;
    for (std::size_t i = 0; i < pts.size();) {
        std::size_t j = i;
        while (j < pts.size() && pts[j].first == pts[i].first) ++j;
        ties_x += pairs2(static_cast<std::int64_t>(j - i));
        for (std::size_t a = i; a < j;) {
            std::size_t b = a;
            while (b < j && pts[b].second == pts[a].second) ++b;
            ties_xy += pairs2(static_cast<std::int64_t>(b - a));
            a = b;
        }
        i = j;
    }

    // inversions in y once sorted by (x, y)
    std::vector<double> y(pts.size()), tmp(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) y[i] = pts[i].second;
    std::int64_t swaps = 0;
    const std::function<void(std::size_t, std::size_t)> merge_count = [&](std::size_t lo, std::size_t hi) {
        if (hi - lo < 2) return;
        const std::size_t mid = (lo + hi) / 2;
        merge_count(lo, mid);
        merge_count(mid, hi);
        std::size_t a = lo, b = mid, k = lo;
        while (a < mid && b < hi) {
            if (y[b] < y[a]) {
                swaps += static_cast<std::int64_t>(mid - a);
                tmp[k++] = y[b++];
            } else {
                tmp[k++] = y[a++];
            }
        }
        while (a < mid) tmp[k++] = y[a++];
        while (b < hi) tmp[k++] = y[b++];
        std::copy(tmp.begin() + static_cast<std::ptrdiff_t>(lo), tmp.begin() + static_cast<std::ptrdiff_t>(hi),
                  y.begin() + static_cast<std::ptrdiff_t>(lo));
    };
    merge_count(0, pts.size());

    std::int64_t ties_y = 0;
    {
        std::vector<double> ys(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) ys[i] = pts[i].second;
        std::sort(ys.begin(), ys.end());
        for (std::size_t i = 0; i < ys.size();) {
            std::size_t j = i;
            while (j < ys.size() && ys[j] == ys[i]) ++j;
            ties_y += pairs2(static_cast<std::int64_t>(j - i));
            i = j;
        }
    }

    const std::int64_t concordant_minus_discordant = n0 - ties_x - ties_y + ties_xy - 2 * swaps;
    return static_cast<double>(concordant_minus_discordant) / static_cast<double>(n0);
}

/// tau(theta) maps for the three families; Frank goes through the first Debye
/// function.
inline double tau_from_theta(CopulaFamily family, double theta) {
    switch (family) {
        case CopulaFamily::Clayton: return theta / (theta + 2.0);
        case CopulaFamily::Gumbel: return 1.0 - 1.0 / theta;
        case CopulaFamily::Frank: {
            if (std::abs(theta) < 1e-10) return 0.0;
            const double t = std::abs(theta);
            const double tau = 1.0 - 4.0 / t * (1.0 - copula_detail::debye1(t));
            return theta > 0 ? tau : -tau;
        }
    }
    return 0.0;
}

inline double theta_from_tau(CopulaFamily family, double tau) {
    switch (family) {
        case CopulaFamily::Clayton: {
            const double t = std::max(tau, 1e-4);
            return 2.0 * t / (1.0 - t);
        }
        case CopulaFamily::Gumbel:
            return 1.0 / (1.0 - std::clamp(tau, 0.0, 0.999));
        case CopulaFamily::Frank: {
            if (std::abs(tau) < 1e-6) return tau >= 0 ? 1e-4 : -1e-4;
            const double target = std::abs(tau);
            double lo = 1e-6, hi = 80.0;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (tau_from_theta(CopulaFamily::Frank, mid) < target ? lo : hi) = mid;
            }
            const double t = 0.5 * (lo + hi);
            return tau > 0 ? t : -t;
        }
    }
    return 1.0;
}

/// Closed-form CDF of a single Archimedean family at an interior point.
inline double copula_cdf(const CopulaSpec& spec, const Vector& u) {
    spec.validate();
    copula_detail::check_interior(u);
    const auto k = static_cast<int>(u.size());
    const double th = spec.theta;
    switch (spec.family) {
        case CopulaFamily::Clayton: {
            if (th < copula_detail::kThetaEps) return u.array().prod();
            double s = 1.0 - k;
            for (int i = 0; i < k; ++i) s += std::pow(u[i], -th);
            return std::pow(s, -1.0 / th);
        }
        case CopulaFamily::Gumbel: {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += std::pow(-std::log(u[i]), th);
            return std::exp(-std::pow(s, 1.0 / th));
        }
        case CopulaFamily::Frank: {
            if (std::abs(th) < copula_detail::kThetaEps) return u.array().prod();
            double log_num = 0.0;
            for (int i = 0; i < k; ++i) log_num += std::log(std::abs(std::expm1(-th * u[i])));
            const double log_den = (k - 1) * std::log(std::abs(std::expm1(-th)));
            // the K numerator factors and K-1 denominator factors share the sign
            // of -theta, leaving one surviving sign overall
            const double ratio = (th > 0.0 ? -1.0 : 1.0) * std::exp(log_num - log_den);
            return -std::log1p(ratio) / th;
        }
    }
    return 0.0;
}

inline double copula_cdf(const MixtureParams& mix, const Vector& u) {
    mix.validate();
    double c = 0.0;
    for (int j = 0; j < 3; ++j)
        if (mix.weights[j] > 0.0) c += mix.weights[j] * copula_cdf(mix.components[static_cast<std::size_t>(j)], u);
    return c;
}

inline double copula_cdf(const CopulaModel& model, const Vector& u) {
    return std::visit([&](const auto& m) { return copula_cdf(m, u); }, model);
}

/// Copula density. Clayton and Gumbel support any dimension; Frank is
/// restricted to the bivariate case.
inline double copula_density(const CopulaSpec& spec, const Vector& u) {
    spec.validate();
    copula_detail::check_interior(u);
    const auto k = static_cast<int>(u.size());
    const double th = spec.theta;
    switch (spec.family) {
        case CopulaFamily::Clayton: {
            if (th < copula_detail::kThetaEps) return 1.0;
            double log_c = 0.0;
            for (int j = 1; j <= k; ++j) log_c += std::log((j - 1) * th + 1.0);
            double s = 1.0 - k;
            double sum_log_u = 0.0;
            for (int i = 0; i < k; ++i) {
                s += std::pow(u[i], -th);
                sum_log_u += std::log(u[i]);
            }
            log_c += -(k + 1.0 / th) * std::log(s) - (th + 1.0) * sum_log_u;
            return std::exp(log_c);
        }
        case CopulaFamily::Gumbel: {
            if (th - 1.0 < copula_detail::kThetaEps) return 1.0;
            const double alpha = 1.0 / th;
            double s = 0.0, sum_log_phi_prime = 0.0;
            for (int i = 0; i < k; ++i) {
                const double x = -std::log(u[i]);
                s += std::pow(x, th);
                sum_log_phi_prime += std::log(th) + (th - 1.0) * std::log(x) - std::log(u[i]);
            }
            const double log_s = std::log(s);
            const auto coef = copula_detail::gumbel_poly_coeffs(k, alpha);
            std::vector<double> terms;
            for (int j = 1; j <= k; ++j)
                if (coef[static_cast<std::size_t>(j)] > 0.0)
                    terms.push_back(std::log(coef[static_cast<std::size_t>(j)]) + j * alpha * log_s);
            const double log_poly = copula_detail::log_sum_exp(terms);
            const double log_psi = -std::pow(s, alpha);
            return std::exp(log_psi - k * log_s + log_poly + sum_log_phi_prime);
        }
        case CopulaFamily::Frank: {
            if (k != 2) throw ConfigError("frank density: only the bivariate case is supported");
            if (std::abs(th) < copula_detail::kThetaEps) return 1.0;
            const double g = std::expm1(-th);
            const double gu = std::expm1(-th * u[0]);
            const double gv = std::expm1(-th * u[1]);
            const double denom = g + gu * gv;
            return -th * g * std::exp(-th * (u[0] + u[1])) / (denom * denom);
        }
    }
    return 0.0;
}

inline double copula_density(const MixtureParams& mix, const Vector& u) {
    mix.validate();
    double c = 0.0;
    for (int j = 0; j < 3; ++j)
        if (mix.weights[j] > 0.0) c += mix.weights[j] * copula_density(mix.components[static_cast<std::size_t>(j)], u);
    return c;
}

inline double copula_density(const CopulaModel& model, const Vector& u) {
    return std::visit([&](const auto& m) { return copula_density(m, u); }, model);
}

/// Marshall-Olkin frailty sampling; Frank with negative theta falls back to the
/// bivariate conditional-inverse construction.
inline Matrix copula_sample(const CopulaSpec& spec, Eigen::Index n, int dim, Rng& rng) {
    spec.validate();
    if (n < 1 || dim < 2) throw ConfigError("copula_sample: need n >= 1 and dim >= 2");
    Matrix out(n, dim);
    const double th = spec.theta;
    switch (spec.family) {
        case CopulaFamily::Clayton: {
            if (th < copula_detail::kThetaEps) {
                for (Eigen::Index i = 0; i < n; ++i)
                    for (int j = 0; j < dim; ++j) out(i, j) = rng.uniform();
                return out;
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = rng.gamma(1.0 / th);
                for (int j = 0; j < dim; ++j)
                    out(i, j) = std::pow(1.0 + rng.exponential() / v, -1.0 / th);
            }
            return out;
        }
        case CopulaFamily::Gumbel: {
            if (th - 1.0 < copula_detail::kThetaEps) {
                for (Eigen::Index i = 0; i < n; ++i)
                    for (int j = 0; j < dim; ++j) out(i, j) = rng.uniform();
                return out;
            }
            const double alpha = 1.0 / th;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double v = rng.positive_stable(alpha);
                for (int j = 0; j < dim; ++j)
                    out(i, j) = std::exp(-std::pow(rng.exponential() / v, alpha));
            }
            return out;
        }
        case CopulaFamily::Frank: {
            if (std::abs(th) < copula_detail::kThetaEps) {
                for (Eigen::Index i = 0; i < n; ++i)
                    for (int j = 0; j < dim; ++j) out(i, j) = rng.uniform();
                return out;
            }
            if (th > 0.0) {
                const double p = -std::expm1(-th);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double v = rng.log_series(p);
                    for (int j = 0; j < dim; ++j) {
                        const double e = rng.exponential();
                        double u = -std::log1p(-p * std::exp(-e / v)) / th;
                        out(i, j) = std::clamp(u, 1e-15, 1.0 - 1e-15);
                    }
                }
                return out;
            }
            if (dim != 2)
                throw ConfigError("frank sampling with theta < 0 is bivariate only");
            for (Eigen::Index i = 0; i < n; ++i) {
                const double u1 = rng.uniform();
                const double p = rng.uniform();
                const double a = std::exp(-th * u1);
                const double u2 = -std::log1p(p * std::expm1(-th) / (a - p * (a - 1.0))) / th;
                out(i, 0) = u1;
                out(i, 1) = std::clamp(u2, 1e-15, 1.0 - 1e-15);
            }
            return out;
        }
    }
    return out;
}

inline Matrix copula_sample(const MixtureParams& mix, Eigen::Index n, int dim, Rng& rng) {
    mix.validate();
    Matrix out(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = rng.uniform();
        int j = w < mix.weights[0] ? 0 : (w < mix.weights[0] + mix.weights[1] ? 1 : 2);
        out.row(i) = copula_sample(mix.components[static_cast<std::size_t>(j)], 1, dim, rng).row(0);
    }
    return out;
}

inline Matrix copula_sample(const CopulaModel& model, Eigen::Index n, int dim, Rng& rng) {
    return std::visit([&](const auto& m) { return copula_sample(m, n, dim, rng); }, model);
}

struct SingleFitResult {
    CopulaSpec spec;
    double log_likelihood = 0.0;
    bool boundary = false;  // gumbel pinned at theta = 1 under negative association
    double tau_init = 0.0;
};

namespace copula_detail {

inline double neg_loglik(const CopulaSpec& spec, const Matrix& u) {
    double nll = 0.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
        const double c = copula_density(spec, Vector(u.row(i)));
        if (!(c > 0.0) || !std::isfinite(c)) return 1e300;
        nll -= std::log(c);
    }
    return nll;
}

}  // namespace copula_detail

/// Single-family MLE: bounded 1-D likelihood search on a log/identity transform
/// of theta, seeded by the Kendall-tau inversion. `tau_init=false` skips the
/// tau computation (used inside bootstrap loops where speed matters).
inline SingleFitResult fit_single(const Matrix& u, CopulaFamily family, bool tau_init = true) {
    if (u.rows() < 50) throw DataError("fit_single: need at least 50 observations");
    const auto k = static_cast<int>(u.cols());
    if (family == CopulaFamily::Frank && k != 2)
        throw ConfigError("fit_single: frank likelihood supports K=2 only");

    double tau = 0.0;
    if (tau_init) {
        const Eigen::Index cap = std::min<Eigen::Index>(u.rows(), 2000);
        Matrix pair(cap, 2);
        pair.col(0) = u.col(0).head(cap);
        pair.col(1) = u.col(k - 1).head(cap);
        tau = kendall_tau(pair);
    }

    SingleFitResult res;
    res.tau_init = tau;

    if (family == CopulaFamily::Gumbel && tau_init && tau <= 0.0) {
        res.spec = {CopulaFamily::Gumbel, 1.0};
        res.log_likelihood = 0.0;  // independence copula
        res.boundary = true;
        return res;
    }

    auto spec_at = [&](double x) {
        switch (family) {
            case CopulaFamily::Clayton: return CopulaSpec{family, std::exp(x)};
            case CopulaFamily::Gumbel: return CopulaSpec{family, 1.0 + std::exp(x)};
            case CopulaFamily::Frank: return CopulaSpec{family, x};
        }
        return CopulaSpec{family, 1.0};
    };
    auto objective = [&](double x) { return copula_detail::neg_loglik(spec_at(x), u); };

    double lo, hi;
    switch (family) {
        case CopulaFamily::Clayton: lo = std::log(1e-4); hi = std::log(50.0); break;
        case CopulaFamily::Gumbel:  lo = std::log(1e-6); hi = std::log(50.0); break;
        case CopulaFamily::Frank:   lo = -35.0; hi = 35.0; break;
    }
    double xbest = golden_section(objective, lo, hi, 1e-7);
    double fbest = objective(xbest);

    if (tau_init) {
        // evaluate the tau-implied theta as an extra candidate
        const double th_tau = theta_from_tau(family, tau);
        double x_tau;
        switch (family) {
            case CopulaFamily::Clayton: x_tau = std::log(std::clamp(th_tau, 1e-4, 50.0)); break;
            case CopulaFamily::Gumbel:  x_tau = std::log(std::clamp(th_tau - 1.0, 1e-6, 50.0)); break;
            default:                    x_tau = std::clamp(th_tau, -35.0, 35.0); break;
        }
        const double f_tau = objective(x_tau);
        if (f_tau < fbest) { fbest = f_tau; xbest = x_tau; }
    }

    res.spec = spec_at(xbest);
    res.log_likelihood = -fbest;
    if (family == CopulaFamily::Gumbel && res.spec.theta - 1.0 < 1e-5) res.boundary = true;
    if (family == CopulaFamily::Frank && std::abs(res.spec.theta) < 1e-6)
        res.spec.theta = res.spec.theta >= 0 ? 1e-6 : -1e-6;
    return res;
}

struct MixtureFitResult {
    MixtureParams params;
    double log_likelihood = 0.0;
    bool converged = true;
};

/// Mixture MLE over (theta_1..3, softmax weights); multi-restart from the
/// tau-implied point, near-pure corners, and seeded perturbations.
inline MixtureFitResult fit_mixture(const Matrix& u, int restarts = 3, std::uint64_t seed = 1) {
    if (u.rows() < 100) throw DataError("fit_mixture: need at least 100 observations");
    if (u.cols() != 2) throw ConfigError("fit_mixture: mixture likelihood supports K=2 only");

    auto decode = [](const Vector& x) {
        MixtureParams m;
        m.components[0].theta = std::clamp(std::exp(x[0]), 1e-4, 50.0);
        m.components[1].theta = std::clamp(x[1], -35.0, 35.0);
        if (m.components[1].theta == 0.0) m.components[1].theta = 1e-6;
        m.components[2].theta = 1.0 + std::clamp(std::exp(x[2]), 1e-6, 50.0);
        const double e1 = std::exp(std::clamp(x[3], -30.0, 30.0));
        const double e2 = std::exp(std::clamp(x[4], -30.0, 30.0));
        const double denom = e1 + e2 + 1.0;
        m.weights << e1 / denom, e2 / denom, 1.0 / denom;
        return m;
    };

    auto objective = [&](const Vector& x) {
        const MixtureParams m = decode(x);
        double nll = 0.0;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const Vector row = u.row(i);
            double c = 0.0;
            for (int j = 0; j < 3; ++j)
                c += m.weights[j] * copula_density(m.components[static_cast<std::size_t>(j)], row);
            if (!(c > 0.0) || !std::isfinite(c)) return 1e300;
            nll -= std::log(c);
        }
        return nll;
    };

    const double tau = kendall_tau(Matrix(u.leftCols(2)));
    Vector x0(5);
    x0[0] = std::log(std::clamp(theta_from_tau(CopulaFamily::Clayton, tau), 1e-4, 50.0));
    x0[1] = std::clamp(theta_from_tau(CopulaFamily::Frank, tau), -35.0, 35.0);
    x0[2] = std::log(std::clamp(theta_from_tau(CopulaFamily::Gumbel, tau) - 1.0, 1e-6, 50.0));
    x0[3] = 0.0;
    x0[4] = 0.0;

    NelderMeadOptions opt;
    opt.max_evals = 4000;
    opt.diameter_tol = 1e-7;

    std::vector<Vector> starts{x0};
    for (int corner = 0; corner < 3; ++corner) {
        Vector xc = x0;
        xc[3] = corner == 0 ? 6.0 : -3.0;
        xc[4] = corner == 1 ? 6.0 : -3.0;
        starts.push_back(xc);
    }
    Rng rng = Rng::stream(seed, "copula.mixture.restarts");
    for (int r = 1; r < restarts; ++r) {
        Vector xp = x0;
        for (int i = 0; i < 5; ++i) xp[i] += 0.6 * rng.normal();
        starts.push_back(xp);
    }

    NelderMeadResult best;
    best.fmin = std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        NelderMeadResult r = nelder_mead(objective, s, opt);
        if (r.fmin < best.fmin) best = r;
    }

    MixtureFitResult res;
    res.params = decode(best.x);
    res.log_likelihood = -best.fmin;
    res.converged = best.converged;
    return res;
}

namespace copula_detail {

/// Empirical copula values C_n(u_t) at every sample point. Bivariate inputs use
/// a Fenwick-tree dominance count; higher dimensions fall back to O(n^2).
inline Vector empirical_copula_at_points(const Matrix& u) {
    const Eigen::Index n = u.rows();
    const auto k = static_cast<int>(u.cols());
    Vector out(n);
    if (k == 2) {
        std::vector<int> rank1(static_cast<std::size_t>(n)), rank2(static_cast<std::size_t>(n));
        std::vector<int> order(static_cast<std::size_t>(n));
        auto ranks_of = [&](int col, std::vector<int>& r) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(),
                      [&](int a, int b) { return u(a, col) < u(b, col); });
            bool ties = false;
            for (std::size_t i = 0; i + 1 < order.size(); ++i)
                if (u(order[i], col) == u(order[i + 1], col)) ties = true;
            for (std::size_t i = 0; i < order.size(); ++i) r[static_cast<std::size_t>(order[i])] = static_cast<int>(i) + 1;
            return ties;
        };
        const bool t1 = ranks_of(0, rank1);
        const bool t2 = ranks_of(1, rank2);
        if (!t1 && !t2) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int a, int b) {
                return rank1[static_cast<std::size_t>(a)] < rank1[static_cast<std::size_t>(b)];
            });
            std::vector<int> bit(static_cast<std::size_t>(n) + 1, 0);
            auto bit_add = [&](int pos) { for (; pos <= n; pos += pos & -pos) ++bit[static_cast<std::size_t>(pos)]; };
            auto bit_query = [&](int pos) {
                int s = 0;
                for (; pos > 0; pos -= pos & -pos) s += bit[static_cast<std::size_t>(pos)];
                return s;
            };
            for (int idx : order) {
                const int below = bit_query(rank2[static_cast<std::size_t>(idx)]);
                out[idx] = static_cast<double>(below + 1) / static_cast<double>(n);
                bit_add(rank2[static_cast<std::size_t>(idx)]);
            }
            return out;
        }
    }
    for (Eigen::Index t = 0; t < n; ++t) {
        int count = 0;
        for (Eigen::Index s = 0; s < n; ++s) {
            bool dom = true;
            for (int j = 0; j < k; ++j)
                if (u(s, j) > u(t, j)) { dom = false; break; }
            if (dom) ++count;
        }
        out[t] = static_cast<double>(count) / static_cast<double>(n);
    }
    return out;
}

inline Matrix pseudo_observations(const Matrix& x) {
    const Eigen::Index n = x.rows();
    Matrix u(n, x.cols());
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return x(a, j) < x(b, j); });
        for (std::size_t r = 0; r < order.size(); ++r)
            u(order[r], j) = static_cast<double>(r + 1) / static_cast<double>(n + 1);
    }
    return u;
}

struct CvmPair {
    double global = 0.0;
    double tail = 0.0;
};

inline CvmPair cvm_statistics(const Matrix& u, const CopulaModel& model, double tail_threshold) {
    const Vector emp = empirical_copula_at_points(u);
    CvmPair s;
    for (Eigen::Index t = 0; t < u.rows(); ++t) {
        const Vector row = u.row(t);
        const double diff = emp[t] - copula_cdf(model, row);
        s.global += diff * diff;
        if ((row.array() <= tail_threshold).all()) s.tail += diff * diff;
    }
    return s;
}

inline CopulaModel refit_like(const CopulaModel& model, const Matrix& u, std::uint64_t seed) {
    if (std::holds_alternative<CopulaSpec>(model)) {
        const auto family = std::get<CopulaSpec>(model).family;
        return fit_single(u, family, /*tau_init=*/false).spec;
    }
    return fit_mixture(u, /*restarts=*/1, seed).params;
}

}  // namespace copula_detail

/// Parametric-bootstrap Cramer-von Mises goodness of fit: global statistic over
/// all pseudo-observations plus a joint-lower-orthant version for tail focus.
/// Each replication samples from the fitted model, rank-transforms, refits the
/// same model class, and recomputes both statistics.
inline GofResult gof_bootstrap(const Matrix& u_input, const CopulaModel& model, int replications,
                               std::uint64_t seed, double tail_threshold = 0.25) {
    if (replications < 99) throw ConfigError("gof_bootstrap: need at least 99 replications");
    const Eigen::Index n = u_input.rows();
    const auto dim = static_cast<int>(u_input.cols());

    const Matrix u = copula_detail::pseudo_observations(u_input);
    const auto base = copula_detail::cvm_statistics(u, model, tail_threshold);

    int count_global = 0, count_tail = 0;
    for (int b = 1; b <= replications; ++b) {
        Rng rng = Rng::stream(seed + static_cast<std::uint64_t>(b), "copula.gof.bootstrap");
        const Matrix sample = copula_sample(model, n, dim, rng);
        const Matrix us = copula_detail::pseudo_observations(sample);
        const CopulaModel refit = copula_detail::refit_like(model, us, seed + static_cast<std::uint64_t>(b));
        const auto stat = copula_detail::cvm_statistics(us, refit, tail_threshold);
        if (stat.global >= base.global) ++count_global;
        if (stat.tail >= base.tail) ++count_tail;
    }

    GofResult r;
    r.statistic_global = base.global;
    r.statistic_tail = base.tail;
    r.p_global = (1.0 + count_global) / (replications + 1.0);
    r.p_tail = (1.0 + count_tail) / (replications + 1.0);
    r.replications = replications;
    r.seed = seed;
    r.tail_threshold = tail_threshold;
    return r;
}

}  // namespace strata
