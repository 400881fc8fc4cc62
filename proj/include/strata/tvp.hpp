#pragma once

#include "strata/core.hpp"
#include "strata/dataio.hpp"
#include "strata/var.hpp"

#include <Eigen/Eigenvalues>

#include <string>
#include <vector>

namespace strata {

struct TvpConfig {
    double kappa = 1e-3;       // coefficient-drift variance relative to the OLS coefficient variance
    double ewma_lambda = 0.96; // decay of the time-varying residual covariance
    int prior_window = 60;     // observations used for the OLS initialization

    void validate(int k, int p) const {
        if (kappa < 0.0) throw ConfigError("tvp: kappa must be >= 0");
        if (!(ewma_lambda > 0.0 && ewma_lambda < 1.0)) throw ConfigError("tvp: ewma_lambda in (0,1)");
        if (prior_window < k * p + 5) throw ConfigError("tvp: prior_window must be >= K*p + 5");
    }
};

/// Filtered time-varying-parameter VAR. States are the stacked per-equation
/// coefficients (intercept first, then lag blocks); the filter runs forward
/// once, so every quantity indexed by t uses information through t only.
struct TvpModel {
    int p = 1;
    int k = 0;
    int start = 0;  // first filtered row of the input panel
    TvpConfig config;
    std::vector<std::string> names;
    std::vector<YearMonth> dates;       // dates of filtered rows
    std::vector<Vector> coeff_path;     // posterior state mean per filtered t
    std::vector<Matrix> coeff_cov_path; // posterior state covariance per t
    std::vector<Matrix> sigma_path;     // EWMA residual covariance after absorbing t
    std::vector<Matrix> impact_path;    // lower-triangular chol(sigma_path[t])
    Matrix residuals;                   // one-step-ahead prediction errors, rows = filtered t
    Matrix std_innovations;             // L_{t|t-1}^{-1} residual_t

    int states() const { return k * (k * p + 1); }

    /// Coefficients at filtered index idx unpacked to (intercept, lag matrices).
    VarModel coefficients_at(std::size_t idx) const {
        VarModel m;
        m.p = p;
        m.names = names;
        const int q = k * p + 1;
        const Vector& s = coeff_path.at(idx);
        m.intercept.resize(k);
        for (int i = 0; i < p; ++i) m.lag_coef.push_back(Matrix::Zero(k, k));
        for (int eq = 0; eq < k; ++eq) {
            m.intercept[eq] = s[eq * q];
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < k; ++j) m.lag_coef[i](eq, j) = s[eq * q + 1 + i * k + j];
        }
        m.sigma = sigma_path.at(idx);
        return m;
    }
};

struct RegimeIrfSet {
    std::vector<std::string> regimes;  // early, mid, late
    std::vector<YearMonth> representative_dates;
    std::vector<IrfResult> irfs;
};

namespace detail {
inline Vector tvp_regressor(const Matrix& data, Eigen::Index t, int p) {
    const auto k = static_cast<int>(data.cols());
    Vector x(k * p + 1);
    x[0] = 1.0;
    for (int i = 0; i < p; ++i) x.segment(1 + i * k, k) = data.row(t - 1 - i);
    return x;
}
}  // namespace detail

inline TvpModel fit_tvp(const ReturnPanel& panel, int p, const TvpConfig& config = {}) {
    const Matrix& data = panel.values;
    const auto k = static_cast<int>(data.cols());
    const Eigen::Index t_all = data.rows();
    config.validate(k, p);
    if (t_all <= config.prior_window + 10) throw DataError("fit_tvp: sample shorter than prior_window + 10");

    const int q = k * p + 1;
    const int m = k * q;

    // OLS prior on the first prior_window observations
    const VarModel prior = fit_var(data.topRows(config.prior_window), p);
    Vector beta(m);
    Vector prior_var(m);
    {
        detail::VarDesign d(Matrix(data.topRows(config.prior_window)), p);
        const Matrix xtx_inv =
            (d.x.transpose() * d.x).llt().solve(Matrix::Identity(q, q));
        for (int eq = 0; eq < k; ++eq) {
            beta[eq * q] = prior.intercept[eq];
            for (int i = 0; i < p; ++i)
                for (int j = 0; j < k; ++j) beta[eq * q + 1 + i * k + j] = prior.lag_coef[i](eq, j);
            const double s2 = prior.sigma(eq, eq);
            for (int r = 0; r < q; ++r) prior_var[eq * q + r] = s2 * xtx_inv(r, r);
        }
    }

    Matrix pcov = prior_var.asDiagonal();
    const Matrix qdrift = (config.kappa * prior_var.array()).matrix().asDiagonal();
    Matrix sigma = prior.sigma;  // EWMA state, starts at the prior-window residual covariance

    TvpModel model;
    model.p = p;
    model.k = k;
    model.start = config.prior_window;
    model.config = config;
    model.names = panel.names;
    const Eigen::Index nf = t_all - config.prior_window;
    model.residuals.resize(nf, k);
    model.std_innovations.resize(nf, k);

    Matrix x_obs = Matrix::Zero(k, m);  // observation matrix I_K (x) x_t'
    for (Eigen::Index t = config.prior_window; t < t_all; ++t) {
        const Eigen::Index idx = t - config.prior_window;
        const Vector xt = detail::tvp_regressor(data, t, p);
        x_obs.setZero();
        for (int eq = 0; eq < k; ++eq) x_obs.block(eq, eq * q, 1, q) = xt.transpose();

        // predict
        pcov += qdrift;

        // innovation
        const Vector err = Vector(data.row(t)) - x_obs * beta;
        const Matrix pxt = pcov * x_obs.transpose();
        const Matrix s = x_obs * pxt + sigma;
        Eigen::LLT<Matrix> llt_s(s);
        if (llt_s.info() != Eigen::Success)
            throw NumericError("fit_tvp: innovation covariance not PD at t=" + std::to_string(t));

        model.residuals.row(idx) = err;
        model.std_innovations.row(idx) =
            Matrix(llt_s.matrixL()).triangularView<Eigen::Lower>().solve(err);

        // update (Joseph form keeps the state covariance PSD)
        const Matrix gain = llt_s.solve(pxt.transpose()).transpose();  // m x k
        beta += gain * err;
        const Matrix ikx = Matrix::Identity(m, m) - gain * x_obs;
        pcov = ikx * pcov * ikx.transpose() + gain * sigma * gain.transpose();
        pcov = 0.5 * (pcov + pcov.transpose());
        {
            const double min_diag = pcov.diagonal().minCoeff();
            if (min_diag < -1e-10)
                throw NumericError("fit_tvp: state covariance lost PSD at t=" + std::to_string(t));
        }

        // EWMA residual covariance
        sigma = config.ewma_lambda * sigma + (1.0 - config.ewma_lambda) * (err * err.transpose());
        sigma = 0.5 * (sigma + sigma.transpose());

        model.dates.push_back(panel.dates[static_cast<std::size_t>(t)]);
        model.coeff_path.push_back(beta);
        model.coeff_cov_path.push_back(pcov);
        model.sigma_path.push_back(sigma);
        Eigen::LLT<Matrix> llt_sig(sigma);
        if (llt_sig.info() != Eigen::Success)
            throw NumericError("fit_tvp: EWMA covariance not PD at t=" + std::to_string(t));
        model.impact_path.push_back(llt_sig.matrixL());
    }
    return model;
}

/// One-step-ahead prediction errors, dated; the mean-equation residual input
/// for the dependence layers.
inline ReturnPanel tvp_residuals(const TvpModel& model) {
    ReturnPanel out;
    out.names = model.names;
    out.dates = model.dates;
    out.values = model.residuals;
    return out;
}

/// Early/mid/late structural IRFs: coefficients and covariance frozen at the
/// median date of each third of the filtered sample.
inline RegimeIrfSet regime_irfs(const TvpModel& model, int horizons,
                                const std::vector<int>& ordering = {}) {
    const auto n = model.coeff_path.size();
    if (n < 3) throw DataError("regime_irfs: need at least 3 filtered observations");
    RegimeIrfSet set;
    const char* labels[3] = {"early", "mid", "late"};
    for (int rgm = 0; rgm < 3; ++rgm) {
        const std::size_t lo = rgm * n / 3;
        const std::size_t hi = (rgm + 1) * n / 3;
        const std::size_t rep = lo + (hi - lo - 1) / 2;
        const VarModel frozen = model.coefficients_at(rep);
        const SvarFactorization fact = cholesky_identify(frozen.sigma, ordering);
        set.regimes.emplace_back(labels[rgm]);
        set.representative_dates.push_back(model.dates.at(rep));
        set.irfs.push_back(impulse_response(frozen, fact, horizons));
    }
    return set;
}

}  // namespace strata
