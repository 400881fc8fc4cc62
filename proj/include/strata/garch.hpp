#pragma once

#include "strata/core.hpp"
#include "strata/dist.hpp"
#include "strata/optim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace strata {

inline constexpr double kNuLower = 2.1;
inline constexpr double kNuUpper = 100.0;

/// GARCH(1,1) parameters with Student-t innovations. nu at the upper bound is a
/// reportable outcome (effectively Gaussian tails), not an error.
struct GarchParams {
    double omega = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double nu = 8.0;

    double unconditional_variance() const { return omega / (1.0 - alpha - beta); }

    void validate() const {
        if (!(omega > 0.0) || alpha < 0.0 || beta < 0.0 || alpha + beta >= 1.0)
            throw NumericError("garch: parameters violate positivity/stationarity");
        if (!(nu > 2.0)) throw NumericError("garch: nu must exceed 2");
    }
};

struct GarchFit {
    GarchParams params;
    Vector variance_path;  // h_t, same length as the input series
    double log_likelihood = 0.0;
    bool converged = true;
};

/// Conditional variance recursion h_t = omega + alpha e_{t-1}^2 + beta h_{t-1},
/// seeded with h_0. Matches the model equation step for step.
inline Vector garch_variance_path(const Vector& eps, const GarchParams& p, double h0) {
    Vector h(eps.size());
    h[0] = h0;
    for (Eigen::Index t = 1; t < eps.size(); ++t)
        h[t] = p.omega + p.alpha * eps[t - 1] * eps[t - 1] + p.beta * h[t - 1];
    return h;
}

namespace detail {

struct GarchTransform {
    // u = (log omega, logit total persistence, logit alpha share, scaled-logit nu)
    static GarchParams decode(const Vector& u) {
        GarchParams p;
        p.omega = std::exp(std::clamp(u[0], -40.0, 40.0));
        const double s = logistic(u[1]) * (1.0 - 1e-6);
        const double share = logistic(u[2]);
        p.alpha = s * share;
        p.beta = s * (1.0 - share);
        p.nu = to_interval(u[3], kNuLower, kNuUpper);
        return p;
    }

    static Vector encode(const GarchParams& p) {
        Vector u(4);
        u[0] = std::log(p.omega);
        const double s = std::clamp(p.alpha + p.beta, 1e-8, 1.0 - 1e-8);
        u[1] = logit(s);
        u[2] = logit(std::clamp(p.alpha / s, 1e-8, 1.0 - 1e-8));
        u[3] = from_interval(p.nu, kNuLower, kNuUpper);
        return u;
    }
};

inline double garch_neg_loglik(const Vector& eps, const GarchParams& p, double h0) {
    double h = h0;
    double nll = 0.0;
    const double c = std::lgamma(0.5 * (p.nu + 1.0)) - std::lgamma(0.5 * p.nu)
                   - 0.5 * std::log(M_PI * (p.nu - 2.0));
    for (Eigen::Index t = 0; t < eps.size(); ++t) {
        if (t > 0) h = p.omega + p.alpha * eps[t - 1] * eps[t - 1] + p.beta * h;
        if (!(h > 0.0) || !std::isfinite(h)) return 1e300;
        const double z2 = eps[t] * eps[t] / h;
        nll -= c - 0.5 * std::log(h) - 0.5 * (p.nu + 1.0) * std::log1p(z2 / (p.nu - 2.0));
    }
    return nll;
}

}  // namespace detail

/// Student-t GARCH(1,1) maximum likelihood through a bounded derivative-free
/// simplex search; h_0 is pinned at the sample variance. Restarts from
/// deterministic perturbations of the initial point; best likelihood wins.
inline GarchFit fit_garch_t(const Vector& eps, std::optional<GarchParams> init = {}) {
    if (eps.size() < 100) throw DataError("fit_garch_t: need at least 100 observations");
    const double var = variance(eps, 0);
    if (!(var > 0.0)) throw NumericError("fit_garch_t: zero-variance series");

    GarchParams start;
    if (init) {
        start = *init;
    } else {
        start.alpha = 0.05;
        start.beta = 0.90;
        start.omega = var * (1.0 - start.alpha - start.beta);
        start.nu = 8.0;
    }

    auto objective = [&](const Vector& u) {
        return detail::garch_neg_loglik(eps, detail::GarchTransform::decode(u), var);
    };

    NelderMeadOptions opt;
    opt.max_evals = 4000;
    opt.diameter_tol = 1e-8;

    const Vector u0 = detail::GarchTransform::encode(start);
    NelderMeadResult best;
    best.fmin = std::numeric_limits<double>::infinity();
    const double offsets[3][4] = {{0, 0, 0, 0}, {0.8, -0.7, 0.9, 1.1}, {-0.9, 0.6, -1.0, -1.2}};
    for (const auto& off : offsets) {
        Vector u = u0;
        for (int i = 0; i < 4; ++i) u[i] += off[i];
        NelderMeadResult r = nelder_mead(objective, u, opt);
        if (r.fmin < best.fmin) best = r;
    }

    GarchFit fit;
    fit.params = detail::GarchTransform::decode(best.x);
    fit.variance_path = garch_variance_path(eps, fit.params, var);
    fit.log_likelihood = -best.fmin;
    fit.converged = best.converged;
    return fit;
}

enum class PitMethod { ParametricT, Empirical };

/// Probability integral transform of residuals into (0,1). Parametric mode uses
/// the fitted standardized-t CDF on z_t = e_t / sqrt(h_t); empirical mode uses
/// ranks / (T + 1). Outputs are clamped away from {0,1}.
inline Vector pit(const Vector& eps, const GarchFit& fit, PitMethod method = PitMethod::ParametricT) {
    const Eigen::Index t = eps.size();
    Vector u(t);
    if (method == PitMethod::ParametricT) {
        for (Eigen::Index i = 0; i < t; ++i) {
            const double z = eps[i] / std::sqrt(fit.variance_path[i]);
            u[i] = dist::std_t_cdf(z, fit.params.nu);
        }
    } else {
        std::vector<Eigen::Index> order(static_cast<std::size_t>(t));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](Eigen::Index a, Eigen::Index b) { return eps[a] < eps[b]; });
        for (Eigen::Index r = 0; r < t; ++r)
            u[order[static_cast<std::size_t>(r)]] =
                static_cast<double>(r + 1) / static_cast<double>(t + 1);
    }
    for (Eigen::Index i = 0; i < t; ++i) u[i] = std::clamp(u[i], 1e-10, 1.0 - 1e-10);
    return u;
}

/// Variance forecast: first step uses the realized last shock, later steps
/// iterate with E[e^2] = h.
inline Vector garch_variance_forecast(const GarchParams& p, double last_eps, double last_h, int steps) {
    Vector out(steps);
    double h = p.omega + p.alpha * last_eps * last_eps + p.beta * last_h;
    out[0] = h;
    for (int s = 1; s < steps; ++s) {
        h = p.omega + (p.alpha + p.beta) * h;
        out[s] = h;
    }
    return out;
}

}  // namespace strata
