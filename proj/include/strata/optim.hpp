#pragma once

#include "strata/core.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace strata {

struct NelderMeadOptions {
    int max_evals = 20000;
    double diameter_tol = 1e-8;  // simplex diameter in parameter space
    double fvalue_tol = 0.0;     // optional extra stop on f-spread, 0 disables
    double initial_step = 0.25;
};

struct NelderMeadResult {
    Vector x;
    double fmin = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Nelder-Mead downhill simplex minimizer. Works in unconstrained coordinates;
/// callers encode bounds through smooth transforms.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                                    const NelderMeadOptions& opt = {}) {
    const int n = static_cast<int>(x0.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<Vector> x(n + 1, x0);
    for (int i = 0; i < n; ++i) x[i + 1][i] += opt.initial_step;

    std::vector<double> fx(n + 1);
    int evals = 0;
    auto eval = [&](const Vector& p) {
        ++evals;
        const double v = f(p);
        return std::isfinite(v) ? v : 1e300;
    };
    for (int i = 0; i <= n; ++i) fx[i] = eval(x[i]);

    std::vector<int> idx(n + 1);
    NelderMeadResult res;
    while (evals < opt.max_evals) {
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        {
            std::vector<Vector> xs(n + 1);
            std::vector<double> fs(n + 1);
            for (int k = 0; k <= n; ++k) { xs[k] = x[idx[k]]; fs[k] = fx[idx[k]]; }
            x.swap(xs);
            fx.swap(fs);
        }

        double diam = 0.0;
        for (int i = 1; i <= n; ++i) diam = std::max(diam, (x[i] - x[0]).norm());
        if (diam < opt.diameter_tol ||
            (opt.fvalue_tol > 0.0 && std::abs(fx[n] - fx[0]) < opt.fvalue_tol)) {
            res.converged = true;
            break;
        }

        Vector centroid = Vector::Zero(n);
        for (int i = 0; i < n; ++i) centroid += x[i];
        centroid /= static_cast<double>(n);

        Vector xr = centroid + alpha * (centroid - x[n]);
        const double fr = eval(xr);
        if (fr < fx[0]) {
            Vector xe = centroid + gamma * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) { x[n] = xe; fx[n] = fe; }
            else         { x[n] = xr; fx[n] = fr; }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            const bool outside = fr < fx[n];
            Vector xc = outside ? centroid + rho * (xr - centroid)
                                : centroid + rho * (x[n] - centroid);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    x[i] = x[0] + sigma * (x[i] - x[0]);
                    fx[i] = eval(x[i]);
                }
            }
        }
    }

    const auto best = static_cast<int>(std::min_element(fx.begin(), fx.end()) - fx.begin());
    res.x = x[best];
    res.fmin = fx[best];
    res.evals = evals;
    return res;
}

/// Golden-section minimizer for unimodal 1-D objectives on [lo, hi].
inline double golden_section(const std::function<double(double)>& f, double lo, double hi,
                             double tol = 1e-9, int max_iter = 200) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Map an unconstrained value into (lo, hi).
inline double to_interval(double x, double lo, double hi) { return lo + (hi - lo) * logistic(x); }
inline double from_interval(double y, double lo, double hi) {
    const double p = std::clamp((y - lo) / (hi - lo), 1e-12, 1.0 - 1e-12);
    return logit(p);
}

}  // namespace strata
