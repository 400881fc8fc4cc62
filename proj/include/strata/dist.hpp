#pragma once

#include "strata/core.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <cmath>

namespace strata::dist {

inline double norm_pdf(double x) { return boost::math::pdf(boost::math::normal_distribution<>(), x); }
inline double norm_cdf(double x) { return boost::math::cdf(boost::math::normal_distribution<>(), x); }
inline double norm_quantile(double p) { return boost::math::quantile(boost::math::normal_distribution<>(), p); }

inline double t_pdf(double x, double df) { return boost::math::pdf(boost::math::students_t_distribution<>(df), x); }
inline double t_cdf(double x, double df) { return boost::math::cdf(boost::math::students_t_distribution<>(df), x); }
inline double t_quantile(double p, double df) {
    return boost::math::quantile(boost::math::students_t_distribution<>(df), p);
}

inline double chi2_cdf(double x, double df) {
    return boost::math::cdf(boost::math::chi_squared_distribution<>(df), x);
}
/// Upper tail P(X > x) of chi-squared.
inline double chi2_sf(double x, double df) {
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<>(df), x));
}

// --- variance-standardized Student-t (unit variance for any df > 2) ---

inline double std_t_scale(double df) { return std::sqrt(df / (df - 2.0)); }

inline double std_t_pdf(double x, double df) {
    const double s = std_t_scale(df);
    return t_pdf(x * s, df) * s;
}

inline double std_t_log_pdf(double x, double df) {
    return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df)
         - 0.5 * std::log(M_PI * (df - 2.0)) - 0.5 * (df + 1.0) * std::log1p(x * x / (df - 2.0));
}

inline double std_t_cdf(double x, double df) { return t_cdf(x * std_t_scale(df), df); }

inline double std_t_quantile(double p, double df) { return t_quantile(p, df) / std_t_scale(df); }

/// Log density of a variance-standardized multivariate Student-t with correlation
/// matrix R (covariance equals R). `quad` is z' R^{-1} z and `logdet` is log|R|.
inline double mvt_std_log_pdf(double quad, double logdet, int dim, double df) {
    const double k = static_cast<double>(dim);
    return std::lgamma(0.5 * (df + k)) - std::lgamma(0.5 * df) - 0.5 * k * std::log(M_PI * (df - 2.0))
         - 0.5 * logdet - 0.5 * (df + k) * std::log1p(quad / (df - 2.0));
}

/// Log density of N(0, R) evaluated through the same quadratic-form interface.
inline double mvn_log_pdf(double quad, double logdet, int dim) {
    return -0.5 * (dim * std::log(2.0 * M_PI) + logdet + quad);
}

}  // namespace strata::dist
