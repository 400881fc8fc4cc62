#pragma once

#include "strata/core.hpp"
#include "strata/dist.hpp"
#include "strata/garch.hpp"
#include "strata/optim.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace strata {

enum class JointDist { Gaussian, StudentT };

/// Correlation-dynamics parameters. g = 0 collapses the asymmetric recursion to
/// plain DCC; nu_joint is absent (0) under a Gaussian joint distribution.
struct DccParams {
    double a = 0.0;
    double b = 0.0;
    double g = 0.0;
    double nu_joint = 0.0;
    Matrix qbar;
    Matrix nbar;
    bool asymmetric = false;
    double log_likelihood = 0.0;
    bool converged = true;
};

/// Filtered second-moment paths. H_t = D_t R_t D_t holds by construction; under
/// a copula fit D is identity and H coincides with R.
struct CondCovPath {
    std::vector<Matrix> q;  // quasi-correlation recursion
    std::vector<Matrix> r;  // normalized correlation
    std::vector<Matrix> h;  // conditional covariance
    Matrix d;               // T x K conditional standard deviations
    Matrix z;               // standardized residuals driving the recursion
    Matrix n;               // min(z, 0)
};

namespace detail {

/// One step of the correlation recursion. Plain DCC is the g = 0 case.
inline Matrix dcc_step(const Matrix& qbar, const Matrix& qprev, const Vector& zprev,
                       const Vector& nprev, double a, double b, double g) {
    Matrix q = (1.0 - a - b - g) * qbar + a * (zprev * zprev.transpose()) + b * qprev;
    if (g != 0.0) q += g * (nprev * nprev.transpose());
    return q;
}

inline Matrix normalize_correlation(const Matrix& q) {
    const Vector s = q.diagonal().cwiseSqrt();
    Matrix r = q.array() / (s * s.transpose()).array();
    r.diagonal().setOnes();
    return r;
}

inline Matrix sample_correlation(const Matrix& z) {
    const Eigen::Index t = z.rows();
    Matrix c = z;
    for (Eigen::Index j = 0; j < c.cols(); ++j) c.col(j).array() -= c.col(j).mean();
    Matrix cov = c.transpose() * c / static_cast<double>(t - 1);
    return normalize_correlation(cov);
}

struct DccObjectiveResult {
    double nll = 0.0;
    bool valid = true;
};

/// Negative correlation log-likelihood for a given (a, b, g, nu) over the whole
/// path; invalid parameter regions return a large penalty.
inline DccObjectiveResult dcc_path_nll(const Matrix& z, const Matrix& nmat, const Matrix& qbar,
                                       double a, double b, double g, JointDist dist_kind,
                                       double nu, std::vector<Matrix>* q_out = nullptr,
                                       std::vector<Matrix>* r_out = nullptr) {
    DccObjectiveResult res;
    const Eigen::Index t = z.rows();
    const auto k = static_cast<int>(z.cols());
    if (a < 0.0 || b < 0.0 || g < 0.0 || a + b + g >= 1.0) {
        res.valid = false;
        res.nll = 1e300;
        return res;
    }
    Matrix q = qbar;
    double nll = 0.0;
    const double tconst = dist_kind == JointDist::StudentT
                              ? -std::lgamma(0.5 * (nu + k)) + std::lgamma(0.5 * nu) +
                                    0.5 * k * std::log(M_PI * (nu - 2.0))
                              : 0.0;
    for (Eigen::Index i = 0; i < t; ++i) {
        if (i > 0) q = dcc_step(qbar, q, z.row(i - 1), nmat.row(i - 1), a, b, g);
        const Matrix r = normalize_correlation(q);
        Eigen::LLT<Matrix> llt(r);
        if (llt.info() != Eigen::Success) {
            res.valid = false;
            res.nll = 1e300;
            return res;
        }
        const Matrix l = llt.matrixL();
        const double logdet = 2.0 * l.diagonal().array().log().sum();
        const Vector w = l.triangularView<Eigen::Lower>().solve(Vector(z.row(i)));
        const double quad = w.squaredNorm();
        if (dist_kind == JointDist::StudentT) {
            nll += tconst + 0.5 * logdet + 0.5 * (nu + k) * std::log1p(quad / (nu - 2.0));
        } else {
            nll += 0.5 * (logdet + quad - z.row(i).squaredNorm());
        }
        if (q_out) q_out->push_back(q);
        if (r_out) r_out->push_back(r);
    }
    res.nll = nll;
    return res;
}

struct DccTransform {
    bool asymmetric;
    bool student;

    int dim() const { return 2 + (asymmetric ? 1 : 0) + (student ? 1 : 0); }

    void decode(const Vector& u, double& a, double& b, double& g, double& nu) const {
        const double total = logistic(u[0]) * (1.0 - 1e-6);
        if (asymmetric) {
            // stick-breaking split of the total persistence over (a, g, b)
            const double f1 = logistic(u[1]);
            const double f2 = logistic(u[2]);
            a = total * f1;
            g = total * (1.0 - f1) * f2;
            b = total * (1.0 - f1) * (1.0 - f2);
        } else {
            const double f1 = logistic(u[1]);
            a = total * f1;
            b = total * (1.0 - f1);
            g = 0.0;
        }
        nu = student ? to_interval(u[dim() - 1], kNuLower, kNuUpper) : 0.0;
    }

    Vector encode(double a, double b, double g, double nu) const {
        Vector u(dim());
        const double total = std::clamp(a + b + g, 1e-6, 1.0 - 1e-6);
        u[0] = logit(total);
        if (asymmetric) {
            u[1] = logit(std::clamp(a / total, 1e-6, 1.0 - 1e-6));
            const double rest = std::max(total - a, 1e-12);
            u[2] = logit(std::clamp(g / rest, 1e-6, 1.0 - 1e-6));
        } else {
            u[1] = logit(std::clamp(a / total, 1e-6, 1.0 - 1e-6));
        }
        if (student) u[dim() - 1] = from_interval(nu, kNuLower, kNuUpper);
        return u;
    }
};

inline NelderMeadResult dcc_multistart(const std::function<double(const Vector&)>& objective,
                                       const Vector& u0) {
    NelderMeadOptions opt;
    opt.max_evals = 6000;
    opt.diameter_tol = 1e-8;
    NelderMeadResult best;
    best.fmin = std::numeric_limits<double>::infinity();
    const double scales[3] = {0.0, 0.7, -0.7};
    for (double s : scales) {
        Vector u = u0.array() + s;
        NelderMeadResult r = nelder_mead(objective, u, opt);
        if (r.fmin < best.fmin) best = r;
    }
    return best;
}

}  // namespace detail

/// Second-stage DCC/ADCC estimation on standardized residuals z. Qbar is the
/// sample correlation of z; Nbar the mean outer product of the negative parts.
/// Optional `vol` carries the marginal conditional standard deviations so the
/// returned path can report D and H = D R D.
inline std::pair<DccParams, CondCovPath> fit_dcc(const Matrix& z, bool asymmetric,
                                                 JointDist dist_kind,
                                                 const Matrix* vol = nullptr) {
    const Eigen::Index t = z.rows();
    if (t < 100) throw DataError("fit_dcc: need at least 100 observations");

    const Matrix qbar = detail::sample_correlation(z);
    const Matrix nmat = z.cwiseMin(0.0);
    const Matrix nbar = nmat.transpose() * nmat / static_cast<double>(t);

    detail::DccTransform tf{asymmetric, dist_kind == JointDist::StudentT};
    auto objective = [&](const Vector& u) {
        double a, b, g, nu;
        tf.decode(u, a, b, g, nu);
        return detail::dcc_path_nll(z, nmat, qbar, a, b, g, dist_kind, nu).nll;
    };

    const Vector u0 = tf.encode(0.03, 0.90, asymmetric ? 0.02 : 0.0, 8.0);
    const auto best = detail::dcc_multistart(objective, u0);

    DccParams params;
    tf.decode(best.x, params.a, params.b, params.g, params.nu_joint);
    params.qbar = qbar;
    params.nbar = nbar;
    params.asymmetric = asymmetric;
    params.log_likelihood = -best.fmin;
    params.converged = best.converged;

    CondCovPath path;
    const auto final_eval = detail::dcc_path_nll(z, nmat, qbar, params.a, params.b, params.g,
                                                 dist_kind, params.nu_joint, &path.q, &path.r);
    if (!final_eval.valid) throw NumericError("fit_dcc: correlation recursion failed at optimum");
    path.z = z;
    path.n = nmat;
    if (vol) {
        if (vol->rows() != t || vol->cols() != z.cols()) throw DataError("fit_dcc: vol shape mismatch");
        path.d = *vol;
    } else {
        path.d = Matrix::Ones(t, z.cols());
    }
    for (Eigen::Index i = 0; i < t; ++i) {
        const Vector di = path.d.row(i);
        path.h.push_back(di.asDiagonal() * path.r[static_cast<std::size_t>(i)] * di.asDiagonal());
    }
    return {params, path};
}

/// Student-t copula with DCC-driven correlation. The PIT panel is mapped
/// through the standardized-t quantile inside the likelihood, so the joint
/// degrees of freedom steer both the tails and the pseudo-sample itself.
inline std::pair<DccParams, CondCovPath> fit_t_copula_dcc(const Matrix& u_panel) {
    const Eigen::Index t = u_panel.rows();
    const auto k = static_cast<int>(u_panel.cols());
    if (t < 100) throw DataError("fit_t_copula_dcc: need at least 100 observations");
    if ((u_panel.array() <= 0.0).any() || (u_panel.array() >= 1.0).any())
        throw DataError("fit_t_copula_dcc: PIT values must be strictly inside (0,1)");

    auto pseudo = [&](double nu) {
        Matrix x(t, k);
        for (Eigen::Index i = 0; i < t; ++i)
            for (int j = 0; j < k; ++j) x(i, j) = dist::std_t_quantile(u_panel(i, j), nu);
        return x;
    };

    detail::DccTransform tf{false, true};
    auto objective = [&](const Vector& u) {
        double a, b, g, nu;
        tf.decode(u, a, b, g, nu);
        const Matrix x = pseudo(nu);
        const Matrix nmat = x.cwiseMin(0.0);
        const Matrix qbar = detail::sample_correlation(x);
        auto res = detail::dcc_path_nll(x, nmat, qbar, a, b, g, JointDist::StudentT, nu);
        if (!res.valid) return res.nll;
        // copula likelihood subtracts the univariate standardized-t margins
        double marg = 0.0;
        for (Eigen::Index i = 0; i < t; ++i)
            for (int j = 0; j < k; ++j) marg += dist::std_t_log_pdf(x(i, j), nu);
        return res.nll + marg;
    };

    const Vector u0 = tf.encode(0.03, 0.90, 0.0, 15.0);
    const auto best = detail::dcc_multistart(objective, u0);

    DccParams params;
    tf.decode(best.x, params.a, params.b, params.g, params.nu_joint);
    params.asymmetric = false;
    params.log_likelihood = -best.fmin;
    params.converged = best.converged;

    const Matrix x = pseudo(params.nu_joint);
    const Matrix nmat = x.cwiseMin(0.0);
    params.qbar = detail::sample_correlation(x);
    params.nbar = nmat.transpose() * nmat / static_cast<double>(t);

    CondCovPath path;
    const auto final_eval = detail::dcc_path_nll(x, nmat, params.qbar, params.a, params.b, params.g,
                                                 JointDist::StudentT, params.nu_joint, &path.q, &path.r);
    if (!final_eval.valid) throw NumericError("fit_t_copula_dcc: recursion failed at optimum");
    path.z = x;
    path.n = nmat;
    path.d = Matrix::Ones(t, k);
    path.h = path.r;
    return {params, path};
}

/// Iterated covariance forecasts: marginal variances step through the GARCH
/// recursion with E[e^2] = h; the quasi-correlation steps with z z' replaced by
/// its conditional expectation Q_t (and n n' by Nbar when asymmetric).
inline std::vector<Matrix> cov_forecast(const std::vector<GarchParams>& marginals,
                                        const DccParams& dcc, const CondCovPath& path,
                                        const Matrix& residuals, int steps) {
    if (path.q.empty()) throw DataError("cov_forecast: empty fitted path");
    const auto k = static_cast<int>(path.z.cols());
    const Eigen::Index t = path.z.rows();
    if (static_cast<int>(marginals.size()) != k) throw DataError("cov_forecast: marginal count mismatch");

    std::vector<Vector> hvar;
    for (int j = 0; j < k; ++j) {
        const double last_h = path.d(t - 1, j) * path.d(t - 1, j);
        hvar.push_back(garch_variance_forecast(marginals[static_cast<std::size_t>(j)],
                                               residuals(t - 1, j), last_h, steps));
    }

    std::vector<Matrix> out;
    Matrix q = detail::dcc_step(dcc.qbar, path.q.back(), path.z.row(t - 1), path.n.row(t - 1),
                                dcc.a, dcc.b, dcc.g);
    for (int s = 0; s < steps; ++s) {
        if (s > 0) {
            q = (1.0 - dcc.a - dcc.b - dcc.g) * dcc.qbar + (dcc.a + dcc.b) * q;
            if (dcc.g != 0.0) q += dcc.g * dcc.nbar;
        }
        const Matrix r = detail::normalize_correlation(q);
        Vector d(k);
        for (int j = 0; j < k; ++j) d[j] = std::sqrt(hvar[static_cast<std::size_t>(j)][s]);
        out.push_back(d.asDiagonal() * r * d.asDiagonal());
    }
    return out;
}

}  // namespace strata
