#pragma once

#include "strata/core.hpp"
#include "strata/dist.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace strata {

struct TestReport {
    std::string name;
    double statistic = 0.0;
    double df = 0.0;  // fractional for Welch
    double p_value = 0.0;
    bool reject_at_5pct = false;
    std::map<std::string, double> details;
};

struct CusumPath {
    Vector statistic_path;
    Vector upper_band;
    Vector lower_band;
    bool crossed = false;
};

enum class AdfTrend { Constant, ConstantTrend };
enum class JbMode { Joint, SkewnessOnly, KurtosisOnly };

namespace detail {

/// OLS via column-pivoted QR; throws on rank deficiency.
struct Ols {
    Vector beta;
    Vector residuals;
    double ssr = 0.0;
    Matrix xtx_inv;

    Ols(const Matrix& X, const Vector& y) {
        Eigen::ColPivHouseholderQR<Matrix> qr(X);
        if (qr.rank() < X.cols()) throw NumericError("regression design matrix is rank deficient");
        beta = qr.solve(y);
        residuals = y - X * beta;
        ssr = residuals.squaredNorm();
        const Matrix xtx = X.transpose() * X;
        xtx_inv = xtx.llt().solve(Matrix::Identity(X.cols(), X.cols()));
    }

    double sigma2(Eigen::Index nobs) const {
        return ssr / static_cast<double>(nobs - beta.size());
    }
};

// MacKinnon (1994/2010) approximations for the Dickey-Fuller t distribution,
// univariate case. smallp: p = Phi(b0 + b1*tau + b2*tau^2) below tau_star;
// largep adds a cubic term. crit: finite-sample 1/5/10% response surfaces
// b0 + b1/T + b2/T^2 + b3/T^3.
struct MacKinnonTable {
    double tau_star, tau_min, tau_max;
    double smallp[3];
    double largep[4];
    double crit[3][4];
};

inline const MacKinnonTable& mackinnon_table(AdfTrend trend) {
    static const MacKinnonTable kConstant{
        -1.61, -18.83, 2.74,
        {2.1659, 1.4412, 0.038269},
        {1.7339, 0.93202, -0.12745, -0.010368},
        {{-3.43035, -6.5393, -16.786, -79.433},
         {-2.86154, -2.8903, -4.234, -40.040},
         {-2.56677, -1.5384, -2.809, 0.0}}};
    static const MacKinnonTable kConstantTrend{
        -2.89, -16.18, 0.70,
        {3.2512, 1.6047, 0.049588},
        {2.5261, 0.61654, -0.37956, -0.060285},
        {{-3.95877, -9.0531, -28.428, -134.155},
         {-3.41049, -4.3904, -9.036, -45.374},
         {-3.12705, -2.5856, -3.925, -22.380}}};
    return trend == AdfTrend::Constant ? kConstant : kConstantTrend;
}

inline double mackinnon_pvalue(double tau, AdfTrend trend) {
    const auto& t = mackinnon_table(trend);
    if (tau <= t.tau_min) return 1e-16;
    if (tau >= t.tau_max) return 1.0 - 1e-16;
    double z;
    if (tau <= t.tau_star)
        z = t.smallp[0] + t.smallp[1] * tau + t.smallp[2] * tau * tau;
    else
        z = t.largep[0] + t.largep[1] * tau + t.largep[2] * tau * tau + t.largep[3] * tau * tau * tau;
    return dist::norm_cdf(z);
}

inline double mackinnon_crit(AdfTrend trend, int level_row, double nobs) {
    const auto& t = mackinnon_table(trend);
    const double* b = t.crit[level_row];
    return b[0] + b[1] / nobs + b[2] / (nobs * nobs) + b[3] / (nobs * nobs * nobs);
}

// Johansen trace critical values (90/95/99%), model with unrestricted constant,
// indexed by K - r0 = 1..12.
inline const double* johansen_trace_cv(int dim) {
    static const double kTable[12][3] = {
        {2.7055, 3.8415, 6.6349},       {13.4294, 15.4943, 19.9349},
        {27.0669, 29.7961, 35.4628},    {44.4929, 47.8545, 54.6815},
        {65.8202, 69.8189, 77.8202},    {91.1090, 95.7542, 104.9637},
        {120.3673, 125.6185, 135.9825}, {153.6341, 159.5290, 171.0905},
        {190.8714, 197.3772, 210.0366}, {232.1030, 239.2468, 253.2526},
        {277.3740, 285.1402, 300.2821}, {326.5354, 334.9795, 351.2150}};
    if (dim < 1 || dim > 12) throw ConfigError("Johansen critical values cover at most 12 variables");
    return kTable[dim - 1];
}

/// Monotone p-value from three tabulated quantiles; exact at the 95% node so
/// reject-at-5% and p < 0.05 stay coherent.
inline double interp_pvalue_from_cv(double stat, const double* cv90_95_99) {
    const double xs[3] = {cv90_95_99[0], cv90_95_99[1], cv90_95_99[2]};
    const double lp[3] = {std::log(0.10), std::log(0.05), std::log(0.01)};
    double v;
    if (stat <= xs[0]) {
        const double slope = (lp[1] - lp[0]) / (xs[1] - xs[0]);
        v = lp[0] + slope * (stat - xs[0]);
    } else if (stat <= xs[1]) {
        v = lp[0] + (lp[1] - lp[0]) * (stat - xs[0]) / (xs[1] - xs[0]);
    } else if (stat <= xs[2]) {
        v = lp[1] + (lp[2] - lp[1]) * (stat - xs[1]) / (xs[2] - xs[1]);
    } else {
        const double slope = (lp[2] - lp[1]) / (xs[2] - xs[1]);
        v = lp[2] + slope * (stat - xs[2]);
    }
    return std::clamp(std::exp(v), 1e-6, 1.0 - 1e-6);
}

inline Matrix lagged_design(const Vector& y, int lags) {
    const Eigen::Index n = y.size() - lags;
    Matrix x(n, lags);
    for (int j = 0; j < lags; ++j) x.col(j) = y.segment(lags - 1 - j, n);
    return x;
}

}  // namespace detail

/// Augmented Dickey-Fuller unit-root test; augmentation lag picked by AIC over
/// 0..max_lag on a common sample, then re-estimated on the widest sample the
/// chosen lag allows. P-values follow the MacKinnon response surfaces.
inline TestReport adf_test(const Vector& series, AdfTrend trend = AdfTrend::Constant,
                           int max_lag = 12) {
    const Eigen::Index n = series.size();
    if (n < max_lag + 10) throw DataError("adf_test: series too short for max_lag");
    if ((series.array() - series[0]).abs().maxCoeff() == 0.0)
        throw NumericError("adf_test: constant series");

    const Eigen::Index nd = n - 1;
    Vector dy(nd);
    for (Eigen::Index t = 0; t < nd; ++t) dy[t] = series[t + 1] - series[t];

    auto build = [&](int k, Eigen::Index trim) {
        // rows correspond to t = trim..nd-1 of dy
        const Eigen::Index rows = nd - trim;
        const int extra = (trend == AdfTrend::ConstantTrend) ? 2 : 1;
        Matrix x(rows, 1 + extra + k);
        Vector y(rows);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const Eigen::Index t = trim + i;
            y[i] = dy[t];
            x(i, 0) = series[t];  // lagged level y_{t-1} in original indexing
            x(i, 1) = 1.0;
            if (extra == 2) x(i, 2) = static_cast<double>(t + 1);
            for (int j = 0; j < k; ++j) x(i, 1 + extra + j) = dy[t - 1 - j];
        }
        return std::pair<Matrix, Vector>(std::move(x), std::move(y));
    };

    // lag choice on a common effective sample
    int best_lag = 0;
    double best_aic = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= max_lag; ++k) {
        auto [x, y] = build(k, max_lag);
        detail::Ols fit(x, y);
        const double nobs = static_cast<double>(y.size());
        const double ll = -0.5 * nobs * (std::log(2.0 * M_PI) + std::log(fit.ssr / nobs) + 1.0);
        const double aic = -2.0 * ll + 2.0 * static_cast<double>(x.cols());
        if (aic < best_aic) { best_aic = aic; best_lag = k; }
    }

    auto [x, y] = build(best_lag, best_lag);
    detail::Ols fit(x, y);
    const double se = std::sqrt(fit.sigma2(y.size()) * fit.xtx_inv(0, 0));
    const double tau = fit.beta[0] / se;
    const double p = detail::mackinnon_pvalue(tau, trend);

    TestReport r;
    r.name = trend == AdfTrend::Constant ? "adf_c" : "adf_ct";
    r.statistic = tau;
    r.df = static_cast<double>(y.size());
    r.p_value = p;
    r.reject_at_5pct = p < 0.05;
    r.details["lag"] = best_lag;
    r.details["nobs"] = static_cast<double>(y.size());
    r.details["crit_1pct"] = detail::mackinnon_crit(trend, 0, static_cast<double>(y.size()));
    r.details["crit_5pct"] = detail::mackinnon_crit(trend, 1, static_cast<double>(y.size()));
    r.details["crit_10pct"] = detail::mackinnon_crit(trend, 2, static_cast<double>(y.size()));
    return r;
}

/// Johansen trace test on level data, model with intercept; reduced-rank
/// regression eigenvalues against the tabulated 5% quantiles. One report per
/// null rank r0 = 0..K-1.
inline std::vector<TestReport> johansen_trace(const Matrix& levels, int lag) {
    const Eigen::Index t_all = levels.rows();
    const auto k = static_cast<int>(levels.cols());
    if (k < 2 || k > 12) throw DataError("johansen_trace: needs 2..12 variables");
    if (t_all <= k * lag + 10) throw DataError("johansen_trace: series too short for lag");

    auto demean = [](Matrix m) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j).array() -= m.col(j).mean();
        return m;
    };

    const Matrix x = demean(levels);
    const Eigen::Index nd = t_all - 1;
    Matrix dx(nd, k);
    for (Eigen::Index t = 0; t < nd; ++t) dx.row(t) = x.row(t + 1) - x.row(t);

    const Eigen::Index rows = nd - lag;
    Matrix z(rows, k * lag);
    for (int j = 0; j < lag; ++j)
        z.block(0, j * k, rows, k) = dx.block(lag - 1 - j, 0, rows, k);
    z = demean(z);
    const Matrix dxt = demean(Matrix(dx.bottomRows(rows)));
    const Matrix lx = demean(Matrix(x.block(1, 0, rows, k)));  // levels lagged by `lag` rel. to dx rows

    auto resid_on = [&](const Matrix& y) -> Matrix {
        if (z.cols() == 0) return y;
        Eigen::ColPivHouseholderQR<Matrix> qr(z);
        return y - z * qr.solve(y);
    };
    const Matrix r0t = resid_on(dxt);
    const Matrix rkt = resid_on(lx);

    const double tn = static_cast<double>(rows);
    const Matrix skk = rkt.transpose() * rkt / tn;
    const Matrix sk0 = rkt.transpose() * r0t / tn;
    const Matrix s00 = r0t.transpose() * r0t / tn;

    Eigen::LLT<Matrix> llt_s00(s00);
    if (llt_s00.info() != Eigen::Success) throw NumericError("johansen_trace: singular S00");
    const Matrix sig = sk0 * llt_s00.solve(sk0.transpose());
    Eigen::LLT<Matrix> llt_skk(skk);
    if (llt_skk.info() != Eigen::Success) throw NumericError("johansen_trace: singular Skk");
    const Matrix l = llt_skk.matrixL();
    const Matrix w = l.triangularView<Eigen::Lower>().solve(sig);
    const Matrix m = l.triangularView<Eigen::Lower>().solve(Matrix(w.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw NumericError("johansen_trace: eigen solve failed");
    Vector ev = es.eigenvalues().reverse();  // descending

    std::vector<TestReport> out;
    for (int r0 = 0; r0 < k; ++r0) {
        double trace = 0.0;
        for (int i = r0; i < k; ++i) trace += std::log1p(-std::clamp(ev[i], 0.0, 1.0 - 1e-14));
        trace *= -tn;
        const double* cv = detail::johansen_trace_cv(k - r0);
        TestReport r;
        r.name = "johansen_trace_r" + std::to_string(r0);
        r.statistic = trace;
        r.df = static_cast<double>(k - r0);
        r.p_value = detail::interp_pvalue_from_cv(trace, cv);
        r.reject_at_5pct = trace > cv[1];
        r.details["eigenvalue"] = ev[r0];
        r.details["crit_5pct"] = cv[1];
        r.details["crit_1pct"] = cv[2];
        out.push_back(std::move(r));
    }
    return out;
}

/// Multivariate Jarque-Bera on residuals standardized through the Cholesky
/// factor of their ML covariance. Joint statistic is the sum of the skewness
/// and kurtosis components (df K each).
inline TestReport jarque_bera(const Matrix& residuals, JbMode mode = JbMode::Joint) {
    const Eigen::Index t = residuals.rows();
    const auto k = static_cast<int>(residuals.cols());
    if (t < 8) throw DataError("jarque_bera: need at least 8 rows");

    Matrix c = residuals;
    for (int j = 0; j < k; ++j) c.col(j).array() -= c.col(j).mean();
    const Matrix sigma = c.transpose() * c / static_cast<double>(t);
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw NumericError("jarque_bera: singular covariance");
    const Matrix w = llt.matrixL().solve(c.transpose());  // K x T standardized

    double s3 = 0.0, s4 = 0.0;
    for (int j = 0; j < k; ++j) {
        const double b1 = w.row(j).array().cube().mean();
        const double b2 = w.row(j).array().pow(4).mean();
        s3 += b1 * b1;
        s4 += (b2 - 3.0) * (b2 - 3.0);
    }
    s3 *= static_cast<double>(t) / 6.0;
    s4 *= static_cast<double>(t) / 24.0;

    TestReport r;
    switch (mode) {
        case JbMode::Joint:        r.name = "jarque_bera"; r.statistic = s3 + s4; r.df = 2.0 * k; break;
        case JbMode::SkewnessOnly: r.name = "jb_skewness"; r.statistic = s3; r.df = k; break;
        case JbMode::KurtosisOnly: r.name = "jb_kurtosis"; r.statistic = s4; r.df = k; break;
    }
    r.p_value = dist::chi2_sf(r.statistic, r.df);
    r.reject_at_5pct = r.p_value < 0.05;
    r.details["skewness_stat"] = s3;
    r.details["kurtosis_stat"] = s4;
    return r;
}

/// Engle's LM test: T_eff * R^2 from regressing squared residuals on their own lags.
inline TestReport arch_lm(const Vector& residuals, int lags = 12) {
    const Eigen::Index t = residuals.size();
    if (t <= lags + 10) throw DataError("arch_lm: series too short for lags");
    Vector sq = residuals.array().square();
    if ((sq.array() - sq[0]).abs().maxCoeff() == 0.0)
        throw NumericError("arch_lm: constant squared residuals");

    const Eigen::Index rows = t - lags;
    Matrix x(rows, lags + 1);
    x.col(0).setOnes();
    for (int j = 0; j < lags; ++j) x.col(j + 1) = sq.segment(lags - 1 - j, rows);
    const Vector y = sq.tail(rows);

    detail::Ols fit(x, y);
    const double sst = (y.array() - y.mean()).square().sum();
    const double r2 = 1.0 - fit.ssr / sst;
    TestReport r;
    r.name = "arch_lm";
    r.statistic = static_cast<double>(rows) * r2;
    r.df = lags;
    r.p_value = dist::chi2_sf(r.statistic, r.df);
    r.reject_at_5pct = r.p_value < 0.05;
    r.details["lags"] = lags;
    return r;
}

/// Multivariate Portmanteau (asymptotic) statistic over cross-correlation
/// matrices up to `lags`; df = K^2 (lags - fitted_order).
inline TestReport portmanteau(const Matrix& residuals, int lags, int fitted_order = 0) {
    const Eigen::Index t = residuals.rows();
    const auto k = static_cast<int>(residuals.cols());
    if (t <= lags) throw DataError("portmanteau: series too short");
    if (lags <= fitted_order) throw DataError("portmanteau: lags must exceed fitted order");

    Matrix c = residuals;
    for (int j = 0; j < k; ++j) c.col(j).array() -= c.col(j).mean();
    const double tn = static_cast<double>(t);
    const Matrix c0 = c.transpose() * c / tn;
    Eigen::LLT<Matrix> llt(c0);
    if (llt.info() != Eigen::Success) throw NumericError("portmanteau: degenerate covariance");
    const Matrix c0_inv = llt.solve(Matrix::Identity(k, k));

    double q = 0.0;
    for (int j = 1; j <= lags; ++j) {
        const Eigen::Index rows = t - j;
        const Matrix cj = c.bottomRows(rows).transpose() * c.topRows(rows) / tn;
        q += (cj.transpose() * c0_inv * cj * c0_inv).trace();
    }
    TestReport r;
    r.name = "portmanteau";
    r.statistic = tn * q;
    r.df = static_cast<double>(k) * k * (lags - fitted_order);
    r.p_value = dist::chi2_sf(r.statistic, r.df);
    r.reject_at_5pct = r.p_value < 0.05;
    r.details["lags"] = lags;
    r.details["fitted_order"] = fitted_order;
    return r;
}

/// Portmanteau applied to squared standardized residuals: an LM-style Q(m)
/// check for multivariate ARCH effects.
inline TestReport mvarch_qm(const Matrix& residuals, int lags = 5) {
    Matrix z = residuals;
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        const double sd = stddev(Vector(z.col(j)));
        if (sd <= 0.0) throw NumericError("mvarch_qm: zero-variance column");
        z.col(j) /= sd;
    }
    TestReport r = portmanteau(z.array().square().matrix(), lags, 0);
    r.name = "mvarch_qm";
    return r;
}

/// CUSUM of standardized recursive residuals with Brown-Durbin-Evans 5% bands.
inline CusumPath cusum(const Vector& y, const Matrix& x) {
    const Eigen::Index t = y.size();
    const auto k = static_cast<int>(x.cols());
    if (x.rows() != t) throw DataError("cusum: dimension mismatch");
    if (t <= k + 2) throw DataError("cusum: series too short");

    Matrix xtx = x.topRows(k).transpose() * x.topRows(k);
    Eigen::FullPivLU<Matrix> lu(xtx);
    if (!lu.isInvertible()) throw NumericError("cusum: rank-deficient warm-up window");
    Matrix p = lu.inverse();
    Vector beta = p * x.topRows(k).transpose() * y.head(k);

    const Eigen::Index m = t - k;
    Vector w(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector xi = x.row(k + i);
        const double denom = 1.0 + xi.dot(p * xi);
        w[i] = (y[k + i] - xi.dot(beta)) / std::sqrt(denom);
        // Sherman-Morrison update of (X'X)^{-1} and the coefficient vector
        const Vector px = p * xi;
        p -= px * px.transpose() / denom;
        beta += p * xi * (y[k + i] - xi.dot(beta));
    }

    const double wbar = w.mean();
    const double sigma = std::sqrt((w.array() - wbar).square().sum() / static_cast<double>(m - 1));
    if (!(sigma > 0.0)) throw NumericError("cusum: zero-variance recursive residuals");

    CusumPath path;
    path.statistic_path.resize(m);
    path.upper_band.resize(m);
    path.lower_band.resize(m);
    double acc = 0.0;
    const double root = std::sqrt(static_cast<double>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        acc += w[i] / sigma;
        path.statistic_path[i] = acc;
        const double band = 0.948 * (root + 2.0 * static_cast<double>(i + 1) / root);
        path.upper_band[i] = band;
        path.lower_band[i] = -band;
        if (std::abs(acc) > band) path.crossed = true;
    }
    return path;
}

/// Welch two-sample t-test with Satterthwaite degrees of freedom, two-sided.
inline TestReport welch_t_test(const Vector& a, const Vector& b) {
    if (a.size() < 2 || b.size() < 2) throw DataError("welch_t_test: samples need at least 2 values");
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    const double va = variance(a), vb = variance(b);
    if (va <= 0.0 && vb <= 0.0) {
        if (a.mean() == b.mean()) throw NumericError("welch_t_test: both samples constant and equal");
    }
    const double se2 = va / na + vb / nb;
    const double diff = a.mean() - b.mean();
    TestReport r;
    r.name = "welch_t";
    if (se2 == 0.0) {
        r.statistic = diff > 0 ? 1e308 : -1e308;
        r.df = na + nb - 2.0;
        r.p_value = 0.0;
    } else {
        r.statistic = diff / std::sqrt(se2);
        const double da = va / na, db = vb / nb;
        r.df = se2 * se2 / (da * da / (na - 1.0) + db * db / (nb - 1.0));
        r.p_value = 2.0 * dist::t_cdf(-std::abs(r.statistic), r.df);
    }
    r.reject_at_5pct = r.p_value < 0.05;
    r.details["mean_a"] = a.mean();
    r.details["mean_b"] = b.mean();
    return r;
}

}  // namespace strata
