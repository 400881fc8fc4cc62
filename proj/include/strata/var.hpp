#pragma once

#include "strata/core.hpp"
#include "strata/dataio.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace strata {

/// Reduced-form VAR(p) estimated by equationwise least squares with intercept.
struct VarModel {
    int p = 1;
    Vector intercept;            // K
    std::vector<Matrix> lag_coef;  // p matrices, K x K; lag_coef[i](r, c) = effect of var c at lag i+1 on var r
    Matrix sigma;                // K x K residual covariance
    Matrix residuals;            // (T - p) x K
    std::vector<std::string> names;

    int k() const { return static_cast<int>(intercept.size()); }

    /// Stacked companion matrix (Kp x Kp).
    Matrix companion() const {
        const int kk = k();
        Matrix f = Matrix::Zero(kk * p, kk * p);
        for (int i = 0; i < p; ++i) f.block(0, i * kk, kk, kk) = lag_coef[i];
        if (p > 1) f.block(kk, 0, kk * (p - 1), kk * (p - 1)).setIdentity();
        return f;
    }

    double spectral_radius() const {
        return companion().eigenvalues().cwiseAbs().maxCoeff();
    }
};

struct LagSelectionTable {
    std::vector<int> lags;
    std::vector<double> aic, hq, sc, fpe;
    int chosen_aic = 1, chosen_hq = 1, chosen_sc = 1, chosen_fpe = 1;
};

struct SvarFactorization {
    Matrix impact;              // lower-triangular P with P P' = Sigma (in `ordering` coordinates)
    std::vector<int> ordering;  // panel column index per identification position
};

struct IrfResult {
    std::vector<Matrix> responses;  // horizons 0..H; (i, j) = response of variable i to shock j
    std::vector<std::string> names; // variable names in identification order
};

namespace detail {
/// Stacked regression pieces for a VAR(p) on `data` rows [0, T).
struct VarDesign {
    Matrix x;  // (T - p) x (K p + 1), intercept first
    Matrix y;  // (T - p) x K

    VarDesign(const Matrix& data, int p) {
        const Eigen::Index t = data.rows();
        const Eigen::Index k = data.cols();
        const Eigen::Index rows = t - p;
        if (rows < k * p + 2) throw DataError("fit_var: insufficient observations for lag order");
        x.resize(rows, k * p + 1);
        y = data.bottomRows(rows);
        x.col(0).setOnes();
        for (int i = 0; i < p; ++i)
            x.block(0, 1 + i * k, rows, k) = data.block(p - 1 - i, 0, rows, k);
    }
};
}  // namespace detail

inline VarModel fit_var(const Matrix& data, int p, const std::vector<std::string>& names = {}) {
    if (p < 1) throw ConfigError("fit_var: lag order must be >= 1");
    const auto k = static_cast<int>(data.cols());
    detail::VarDesign d(data, p);

    Eigen::ColPivHouseholderQR<Matrix> qr(d.x);
    if (qr.rank() < d.x.cols()) throw NumericError("fit_var: collinear regressors");
    const Matrix coef = qr.solve(d.y);  // (Kp + 1) x K
    const Matrix resid = d.y - d.x * coef;

    const double dof = static_cast<double>(d.y.rows()) - static_cast<double>(k * p + 1);
    if (dof <= 0) throw DataError("fit_var: no residual degrees of freedom");

    VarModel m;
    m.p = p;
    m.names = names;
    m.intercept = coef.row(0);
    for (int i = 0; i < p; ++i)
        m.lag_coef.push_back(coef.block(1 + i * k, 0, k, k).transpose());
    m.sigma = resid.transpose() * resid / dof;
    m.residuals = resid;
    return m;
}

inline VarModel fit_var(const ReturnPanel& panel, int p) { return fit_var(panel.values, p, panel.names); }

/// Information criteria over a common effective sample (rows max_lag..T), so
/// values are comparable across candidate orders.
inline LagSelectionTable select_lag(const Matrix& data, int max_lag) {
    const Eigen::Index t = data.rows();
    const auto k = static_cast<int>(data.cols());
    if (max_lag < 1) throw ConfigError("select_lag: max_lag must be >= 1");
    if (t - max_lag < k * max_lag + 2) throw DataError("select_lag: max_lag infeasible for sample");

    const double n = static_cast<double>(t - max_lag);
    LagSelectionTable table;
    for (int p = 1; p <= max_lag; ++p) {
        const Matrix common = data.bottomRows(t - max_lag + p);  // so the response sample is fixed
        detail::VarDesign d(common, p);
        Eigen::ColPivHouseholderQR<Matrix> qr(d.x);
        if (qr.rank() < d.x.cols()) throw NumericError("select_lag: collinear regressors at lag " + std::to_string(p));
        const Matrix resid = d.y - d.x * qr.solve(d.y);
        const Matrix sigma_ml = resid.transpose() * resid / n;
        const double logdet = sigma_ml.llt().matrixL().toDenseMatrix().diagonal().array().log().sum() * 2.0;
        const double params = static_cast<double>(p) * k * k + k;  // slopes + intercepts
        const double per_eq = static_cast<double>(p) * k + 1.0;
        table.lags.push_back(p);
        table.aic.push_back(logdet + 2.0 / n * params);
        table.hq.push_back(logdet + 2.0 * std::log(std::log(n)) / n * params);
        table.sc.push_back(logdet + std::log(n) / n * params);
        table.fpe.push_back(std::pow((n + per_eq) / (n - per_eq), k) * std::exp(logdet));
    }
    auto argmin = [&](const std::vector<double>& v) {
        return table.lags[static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin())];
    };
    table.chosen_aic = argmin(table.aic);
    table.chosen_hq = argmin(table.hq);
    table.chosen_sc = argmin(table.sc);
    table.chosen_fpe = argmin(table.fpe);
    return table;
}

inline LagSelectionTable select_lag(const ReturnPanel& panel, int max_lag) {
    return select_lag(panel.values, max_lag);
}

/// Lower-triangular factor of the covariance permuted into `ordering`;
/// identifies one-standard-deviation orthogonal shocks recursively.
inline SvarFactorization cholesky_identify(const Matrix& sigma, const std::vector<int>& ordering) {
    const auto k = static_cast<int>(sigma.cols());
    std::vector<int> ord = ordering;
    if (ord.empty()) {
        ord.resize(k);
        for (int i = 0; i < k; ++i) ord[i] = i;
    }
    if (static_cast<int>(ord.size()) != k) throw ConfigError("cholesky_identify: ordering size mismatch");

    Matrix perm(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) perm(i, j) = sigma(ord[i], ord[j]);

    Eigen::LLT<Matrix> llt(perm);
    if (llt.info() != Eigen::Success)
        throw NumericError("cholesky_identify: covariance not positive definite");
    SvarFactorization f;
    f.impact = llt.matrixL();
    f.ordering = ord;
    return f;
}

inline SvarFactorization cholesky_identify(const VarModel& m, const std::vector<int>& ordering = {}) {
    return cholesky_identify(m.sigma, ordering);
}

namespace detail {
/// MA coefficient recursion Psi_h for coefficients already in identification order.
inline std::vector<Matrix> ma_coefficients(const std::vector<Matrix>& lag_coef, int horizons) {
    const auto k = static_cast<int>(lag_coef.front().rows());
    const auto p = static_cast<int>(lag_coef.size());
    std::vector<Matrix> psi(horizons + 1);
    psi[0] = Matrix::Identity(k, k);
    for (int h = 1; h <= horizons; ++h) {
        psi[h] = Matrix::Zero(k, k);
        for (int i = 1; i <= std::min(h, p); ++i) psi[h] += lag_coef[i - 1] * psi[h - i];
    }
    return psi;
}

inline std::vector<Matrix> permute_lags(const std::vector<Matrix>& lag_coef,
                                        const std::vector<int>& ord) {
    const auto k = static_cast<int>(lag_coef.front().rows());
    std::vector<Matrix> out;
    for (const Matrix& a : lag_coef) {
        Matrix b(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) b(i, j) = a(ord[i], ord[j]);
        out.push_back(std::move(b));
    }
    return out;
}
}  // namespace detail

/// Orthogonalized impulse responses: Psi_h * P over horizons 0..H, all in the
/// factorization's variable ordering.
inline IrfResult impulse_response(const VarModel& m, const SvarFactorization& fact, int horizons) {
    if (horizons < 0) throw ConfigError("impulse_response: horizon must be >= 0");
    const auto lags = detail::permute_lags(m.lag_coef, fact.ordering);
    const auto psi = detail::ma_coefficients(lags, horizons);
    IrfResult irf;
    for (int h = 0; h <= horizons; ++h) irf.responses.push_back(psi[h] * fact.impact);
    if (!m.names.empty())
        for (int i : fact.ordering) irf.names.push_back(m.names[static_cast<std::size_t>(i)]);
    return irf;
}

/// Iterated conditional-mean forecasts; `history` rows are ordered oldest first
/// and must contain at least p rows.
inline Matrix forecast(const VarModel& m, const Matrix& history, int steps) {
    const int k = m.k();
    if (history.cols() != k) throw DataError("forecast: history column mismatch");
    if (history.rows() < m.p) throw DataError("forecast: need at least p rows of history");
    std::vector<Vector> buf;
    for (Eigen::Index i = history.rows() - m.p; i < history.rows(); ++i)
        buf.push_back(history.row(i));
    Matrix out(steps, k);
    for (int s = 0; s < steps; ++s) {
        Vector y = m.intercept;
        for (int i = 0; i < m.p; ++i) y += m.lag_coef[i] * buf[buf.size() - 1 - i];
        out.row(s) = y;
        buf.push_back(y);
    }
    return out;
}

}  // namespace strata
