#pragma once

#include "strata/core.hpp"
#include "strata/optim.hpp"
#include "strata/rng.hpp"

#include <cmath>
#include <optional>

namespace strata {

/// Gaussian process regression with an RBF kernel
///   k(x, x') = signal^2 exp(-||x - x'||^2 / (2 l^2)) + sigma_n^2 [x = x'],
/// zero prior mean, cached Cholesky solve of (K + sigma_n^2 I).
class GprModel {
public:
    GprModel(Matrix inputs, Vector targets, double length_scale, double noise_sd, double signal_sd)
        : x_(std::move(inputs)), y_(std::move(targets)), length_scale_(length_scale),
          noise_sd_(noise_sd), signal_sd_(signal_sd) {
        if (x_.rows() != y_.size()) throw DataError("gpr: inputs/targets size mismatch");
        if (x_.rows() < 1) throw DataError("gpr: need at least one training point");
        if (!(length_scale_ > 0.0) || !(signal_sd_ > 0.0) || noise_sd_ < 0.0)
            throw ConfigError("gpr: invalid hyperparameters");
        factorize();
    }

    double length_scale() const { return length_scale_; }
    double noise_sd() const { return noise_sd_; }
    double signal_sd() const { return signal_sd_; }
    const Matrix& inputs() const { return x_; }
    const Vector& targets() const { return y_; }
    double log_marginal_likelihood() const { return lml_; }
    double jitter() const { return jitter_; }

    std::pair<double, double> predict(const Vector& xstar) const {
        if (xstar.size() != x_.cols()) throw DataError("gpr: query dimension mismatch");
        const Vector ks = cross_kernel(xstar);
        const double mean = ks.dot(alpha_);
        const Vector v = llt_.matrixL().solve(ks);
        double var = signal_sd_ * signal_sd_ - v.squaredNorm();
        if (var < 0.0) var = var > -1e-10 ? 0.0 : throw NumericError("gpr: negative predictive variance");
        return {mean, var};
    }

    /// Residual of the cached solve; diagnostic for the factorization invariant.
    double solve_residual() const {
        return (kernel_matrix() * alpha_ +
                (noise_sd_ * noise_sd_ + jitter_) * alpha_ - y_).cwiseAbs().maxCoeff();
    }

    Matrix kernel_matrix() const {
        const Eigen::Index n = x_.rows();
        Matrix k(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double v = kernel(x_.row(i), x_.row(j));
                k(i, j) = v;
                k(j, i) = v;
            }
        return k;
    }

private:
    double kernel(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) const {
        const double d2 = (a - b).squaredNorm();
        return signal_sd_ * signal_sd_ * std::exp(-d2 / (2.0 * length_scale_ * length_scale_));
    }

    Vector cross_kernel(const Vector& xstar) const {
        Vector k(x_.rows());
        for (Eigen::Index i = 0; i < x_.rows(); ++i) k[i] = kernel(x_.row(i), xstar.transpose());
        return k;
    }

    void factorize() {
        const Eigen::Index n = x_.rows();
        const Matrix k = kernel_matrix();
        for (double jit = 1e-10; jit <= 1e-6 * 10.0; jit *= 100.0) {
            Matrix ka = k + (noise_sd_ * noise_sd_ + jit) * Matrix::Identity(n, n);
            llt_.compute(ka);
            if (llt_.info() == Eigen::Success) {
                jitter_ = jit;
                alpha_ = llt_.solve(y_);
                const double logdet = 2.0 * Matrix(llt_.matrixL()).diagonal().array().log().sum();
                lml_ = -0.5 * y_.dot(alpha_) - 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI);
                return;
            }
        }
        throw NumericError("gpr: kernel matrix not positive definite after jitter escalation");
    }

    Matrix x_;
    Vector y_;
    double length_scale_, noise_sd_, signal_sd_;
    double jitter_ = 1e-10;
    double lml_ = 0.0;
    Eigen::LLT<Matrix> llt_;
    Vector alpha_;
};

struct HybridForecast {
    double structural = 0.0;
    double correction = 0.0;
    double combined = 0.0;
};

namespace gpr_detail {
inline double neg_lml(const Matrix& x, const Vector& y, const Vector& log_params) {
    try {
        GprModel m(x, y, std::exp(log_params[0]), std::exp(log_params[1]), std::exp(log_params[2]));
        return -m.log_marginal_likelihood();
    } catch (const std::exception&) {
        return 1e300;
    }
}
}  // namespace gpr_detail

/// Fit hyperparameters by maximizing the log marginal likelihood over
/// (log l, log sigma_n, log signal) from five seeded starting points;
/// optimize=false keeps heuristic defaults (median-distance length scale).
inline GprModel fit_gpr(const Matrix& x, const Vector& y, bool optimize = true,
                        std::uint64_t seed = 1) {
    if (x.rows() < 2) throw DataError("fit_gpr: need at least 2 training points");
    const double ysd = std::max(stddev(y, 0), 1e-8);

    // median pairwise distance as the length-scale anchor
    std::vector<double> d2;
    const Eigen::Index cap = std::min<Eigen::Index>(x.rows(), 200);
    for (Eigen::Index i = 0; i < cap; ++i)
        for (Eigen::Index j = i + 1; j < cap; ++j) d2.push_back((x.row(i) - x.row(j)).squaredNorm());
    std::sort(d2.begin(), d2.end());
    double med = d2.empty() ? 1.0 : std::sqrt(d2[d2.size() / 2]);
    if (!(med > 0.0)) med = 1.0;

    Vector p0(3);
    p0 << std::log(med), std::log(0.1 * ysd), std::log(ysd);
    if (!optimize) return GprModel(x, y, med, 0.1 * ysd, ysd);

    auto objective = [&](const Vector& lp) { return gpr_detail::neg_lml(x, y, lp); };
    NelderMeadOptions opt;
    opt.max_evals = 2500;
    opt.diameter_tol = 1e-7;

    Rng rng = Rng::stream(seed, "gpr.multistart");
    NelderMeadResult best;
    best.fmin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < 5; ++s) {
        Vector lp = p0;
        if (s > 0)
            for (int i = 0; i < 3; ++i) lp[i] += rng.normal();
        NelderMeadResult r = nelder_mead(objective, lp, opt);
        if (r.fmin < best.fmin) best = r;
    }
    return GprModel(x, y, std::exp(best.x[0]), std::exp(best.x[1]), std::exp(best.x[2]));
}

/// Structural forecast plus the GPR mean correction on the lagged residual
/// window; combined = structural + correction by construction.
inline HybridForecast hybrid_forecast(double structural, const Vector& residual_window,
                                      const GprModel& model) {
    if (residual_window.size() != model.inputs().cols())
        throw DataError("hybrid_forecast: residual window length must match the model input dimension");
    HybridForecast h;
    h.structural = structural;
    h.correction = model.predict(residual_window).first;
    h.combined = h.structural + h.correction;
    return h;
}

}  // namespace strata
