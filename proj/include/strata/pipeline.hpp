#pragma once

#include "strata/copula.hpp"
#include "strata/csv.hpp"
#include "strata/dataio.hpp"
#include "strata/dcc.hpp"
#include "strata/garch.hpp"
#include "strata/gpr.hpp"
#include "strata/stats.hpp"
#include "strata/tvp.hpp"
#include "strata/var.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace strata {

enum class MeanKind { Var, Tvp };
enum class LayerKind { None, Dcc, Adcc, TCopula, MixCopula, Gpr };

struct ModelSpec {
    MeanKind mean = MeanKind::Var;
    LayerKind layer = LayerKind::None;

    static ModelSpec parse(const std::string& name) {
        auto piece = [&](const std::string& s, MeanKind m) -> std::optional<ModelSpec> {
            if (name == s) return ModelSpec{m, LayerKind::None};
            if (name == s + "-dcc") return ModelSpec{m, LayerKind::Dcc};
            if (name == s + "-adcc") return ModelSpec{m, LayerKind::Adcc};
            if (name == s + "-tcopula") return ModelSpec{m, LayerKind::TCopula};
            if (name == s + "-mixcopula") return ModelSpec{m, LayerKind::MixCopula};
            if (name == s + "-gpr") return ModelSpec{m, LayerKind::Gpr};
            return std::nullopt;
        };
        if (auto v = piece("var", MeanKind::Var)) return *v;
        if (auto t = piece("tvp", MeanKind::Tvp)) return *t;
        throw ConfigError("unknown model '" + name + "'");
    }

    std::string name() const {
        std::string base = mean == MeanKind::Var ? "var" : "tvp";
        switch (layer) {
            case LayerKind::None: return base;
            case LayerKind::Dcc: return base + "-dcc";
            case LayerKind::Adcc: return base + "-adcc";
            case LayerKind::TCopula: return base + "-tcopula";
            case LayerKind::MixCopula: return base + "-mixcopula";
            case LayerKind::Gpr: return base + "-gpr";
        }
        return base;
    }
};

/// Flat key = value run configuration; CLI flags override file values.
struct RunConfig {
    std::string data_path;
    std::string date_column = "date";
    std::vector<std::string> ordering;  // empty keeps the file order
    std::string boundary;               // YYYY-MM, first out-of-sample month
    int lag = 1;
    TvpConfig tvp;
    int gpr_lags = 3;
    bool gpr_optimize = true;
    int bootstrap_b = 2000;
    double tail_threshold = 0.25;
    std::uint64_t seed = 1;
    std::vector<std::string> models{"var", "tvp"};
    bool fixed_window = false;  // rolling mean-model window instead of expanding
    int window_length = 0;      // 0 = use the in-sample length
    std::string central_asset;  // default: last variable after ordering

    void set(const std::string& key, const std::string& value) {
        auto as_list = [](const std::string& v) {
            std::vector<std::string> out;
            std::string cur;
            for (char c : v) {
                if (c == ',') {
                    if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            if (!detail::trim(cur).empty()) out.push_back(detail::trim(cur));
            return out;
        };
        auto as_bool = [&](const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
        };
        try {
            if (key == "data") data_path = value;
            else if (key == "date_column") date_column = value;
            else if (key == "ordering") ordering = as_list(value);
            else if (key == "boundary") boundary = value;
            else if (key == "lag") lag = std::stoi(value);
            else if (key == "tvp.kappa") tvp.kappa = std::stod(value);
            else if (key == "tvp.lambda") tvp.ewma_lambda = std::stod(value);
            else if (key == "tvp.prior_window") tvp.prior_window = std::stoi(value);
            else if (key == "gpr.lags") gpr_lags = std::stoi(value);
            else if (key == "gpr.optimize") gpr_optimize = as_bool(value);
            else if (key == "bootstrap.b") bootstrap_b = std::stoi(value);
            else if (key == "copula.tail_threshold") tail_threshold = std::stod(value);
            else if (key == "seed") seed = std::stoull(value);
            else if (key == "models") models = as_list(value);
            else if (key == "rolling.fixed") fixed_window = as_bool(value);
            else if (key == "rolling.window") window_length = std::stoi(value);
            else if (key == "central_asset") central_asset = value;
            else throw ConfigError("unknown config key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw ConfigError("config key '" + key + "': cannot parse value '" + value + "'");
        }
    }

    static RunConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        RunConfig cfg;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = detail::trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
            cfg.set(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
        }
        return cfg;
    }

    std::vector<std::pair<std::string, std::string>> echo() const {
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
            return s;
        };
        return {{"data", data_path},
                {"date_column", date_column},
                {"ordering", join(ordering)},
                {"boundary", boundary},
                {"lag", std::to_string(lag)},
                {"tvp.kappa", fmt_double(tvp.kappa)},
                {"tvp.lambda", fmt_double(tvp.ewma_lambda)},
                {"tvp.prior_window", std::to_string(tvp.prior_window)},
                {"gpr.lags", std::to_string(gpr_lags)},
                {"gpr.optimize", gpr_optimize ? "true" : "false"},
                {"bootstrap.b", std::to_string(bootstrap_b)},
                {"copula.tail_threshold", fmt_double(tail_threshold)},
                {"seed", std::to_string(seed)},
                {"models", join(models)},
                {"rolling.fixed", fixed_window ? "true" : "false"},
                {"rolling.window", std::to_string(window_length)},
                {"central_asset", central_asset}};
    }
};

struct EvaluationRow {
    std::string model;
    Vector rmse;            // per variable
    double mean_rmse = 0.0;
    bool complete = true;
    std::vector<std::string> step_errors;
};

struct EvaluationTable {
    std::vector<std::string> variables;
    std::vector<EvaluationRow> rows;

    const EvaluationRow& row(const std::string& model) const {
        for (const auto& r : rows)
            if (r.model == model) return r;
        throw ConfigError("model '" + model + "' not present in the evaluation table");
    }
};

namespace pipeline_detail {

/// One-step mean forecasts plus the aligned residual history the dependence
/// layers consume. residuals rows [first_valid, T) are populated; out-of-sample
/// rows hold real-time forecast errors.
struct MeanForecasts {
    Matrix forecasts;   // n_oos x K
    Matrix residuals;   // T x K
    Eigen::Index first_valid = 0;
};

inline MeanForecasts run_mean_var(const ReturnPanel& returns, const SampleSplit& split,
                                  const RunConfig& cfg) {
    const Eigen::Index t_all = returns.rows();
    const Eigen::Index b = split.boundary;
    const auto k = static_cast<int>(returns.cols());
    MeanForecasts out;
    out.first_valid = cfg.lag;
    out.residuals = Matrix::Zero(t_all, k);
    out.forecasts.resize(t_all - b, k);

    const VarModel insample = fit_var(Matrix(returns.values.topRows(b)), cfg.lag, returns.names);
    out.residuals.block(cfg.lag, 0, b - cfg.lag, k) = insample.residuals;

    for (Eigen::Index t = b; t < t_all; ++t) {
        Eigen::Index lo = 0;
        if (cfg.fixed_window) {
            const Eigen::Index w = cfg.window_length > 0 ? cfg.window_length : b;
            lo = std::max<Eigen::Index>(0, t - w);
        }
        const VarModel m = fit_var(Matrix(returns.values.middleRows(lo, t - lo)), cfg.lag, returns.names);
        const Matrix f = forecast(m, Matrix(returns.values.middleRows(t - cfg.lag, cfg.lag)), 1);
        out.forecasts.row(t - b) = f.row(0);
        out.residuals.row(t) = returns.values.row(t) - f.row(0);
    }
    return out;
}

inline MeanForecasts run_mean_tvp(const ReturnPanel& returns, const SampleSplit& split,
                                  const RunConfig& cfg) {
    const Eigen::Index t_all = returns.rows();
    const Eigen::Index b = split.boundary;
    const auto k = static_cast<int>(returns.cols());
    if (cfg.tvp.prior_window >= b)
        throw ConfigError("tvp.prior_window must end before the out-of-sample boundary");

    const TvpModel m = fit_tvp(returns, cfg.lag, cfg.tvp);
    MeanForecasts out;
    out.first_valid = m.start;
    out.residuals = Matrix::Zero(t_all, k);
    out.residuals.bottomRows(t_all - m.start) = m.residuals;
    out.forecasts.resize(t_all - b, k);
    for (Eigen::Index t = b; t < t_all; ++t)
        out.forecasts.row(t - b) = returns.values.row(t) - m.residuals.row(t - m.start);
    return out;
}

/// Correction layers add a conditional-mean term to the one-step forecast of
/// row t using information strictly before t. Implementations are fitted on
/// in-sample residuals only.
class CorrectionLayer {
public:
    virtual ~CorrectionLayer() = default;
    virtual Vector correction(const Matrix& residuals, Eigen::Index t) const = 0;
};

class NullLayer final : public CorrectionLayer {
public:
    explicit NullLayer(int k) : k_(k) {}
    Vector correction(const Matrix&, Eigen::Index) const override { return Vector::Zero(k_); }

private:
    int k_;
};

/// Shared second-moment machinery: marginal GARCH recursions and the DCC
/// quasi-correlation recursion, replayed causally from the first valid row.
struct GarchDccState {
    std::vector<GarchParams> marginals;
    std::vector<double> h0;  // recursion seeds (in-sample variances)
    Eigen::Index first_valid = 0;

    /// Variance paths over rows [first_valid, t), then the one-step forecast
    /// h_t per series appended as the last row. Rows: t - first_valid + 1.
    Matrix variance_through(const Matrix& residuals, Eigen::Index t) const {
        const auto k = static_cast<int>(residuals.cols());
        const Eigen::Index n = t - first_valid;
        Matrix h(n + 1, k);
        for (int j = 0; j < k; ++j) {
            const GarchParams& p = marginals[static_cast<std::size_t>(j)];
            double hj = h0[static_cast<std::size_t>(j)];
            h(0, j) = hj;
            for (Eigen::Index i = 1; i <= n; ++i) {
                const double e = residuals(first_valid + i - 1, j);
                hj = p.omega + p.alpha * e * e + p.beta * hj;
                h(i, j) = hj;
            }
        }
        return h;
    }
};

/// Elliptical-projection correction for the DCC, ADCC and t-copula layers: the
/// forecasted correlation projects the last standardized residual vector of
/// the other series onto each target series.
class EllipticalLayer final : public CorrectionLayer {
public:
    EllipticalLayer(LayerKind kind, const Matrix& residuals, Eigen::Index first_valid,
                    Eigen::Index boundary) {
        kind_ = kind;
        state_.first_valid = first_valid;
        const auto k = static_cast<int>(residuals.cols());
        const Eigen::Index n_in = boundary - first_valid;
        const Matrix in_sample = residuals.block(first_valid, 0, n_in, k);

        Matrix z(n_in, k);
        for (int j = 0; j < k; ++j) {
            const GarchFit fit = fit_garch_t(Vector(in_sample.col(j)));
            state_.marginals.push_back(fit.params);
            state_.h0.push_back(variance(Vector(in_sample.col(j)), 0));
            const Vector h = garch_variance_path(Vector(in_sample.col(j)), fit.params,
                                                 state_.h0.back());
            z.col(j) = in_sample.col(j).array() / h.array().sqrt();
        }

        if (kind == LayerKind::TCopula) {
            Matrix u(n_in, k);
            for (int j = 0; j < k; ++j)
                for (Eigen::Index i = 0; i < n_in; ++i)
                    u(i, j) = std::clamp(
                        dist::std_t_cdf(z(i, j), state_.marginals[static_cast<std::size_t>(j)].nu),
                        1e-10, 1.0 - 1e-10);
            auto [params, path] = fit_t_copula_dcc(u);
            dcc_ = params;
        } else {
            auto [params, path] = fit_dcc(z, kind == LayerKind::Adcc,
                                          JointDist::StudentT);
            dcc_ = params;
        }
    }

    Vector correction(const Matrix& residuals, Eigen::Index t) const override {
        const auto k = static_cast<int>(residuals.cols());
        const Matrix h = state_.variance_through(residuals, t);
        const Eigen::Index n = h.rows() - 1;  // standardized rows available
        if (n < 2) return Vector::Zero(k);

        // standardized innovation rows feeding the correlation recursion
        Matrix z(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (int j = 0; j < k; ++j)
                z(i, j) = residuals(state_.first_valid + i, j) / std::sqrt(h(i, j));
        if (kind_ == LayerKind::TCopula) {
            for (Eigen::Index i = 0; i < n; ++i)
                for (int j = 0; j < k; ++j) {
                    const double u = std::clamp(
                        dist::std_t_cdf(z(i, j), state_.marginals[static_cast<std::size_t>(j)].nu),
                        1e-10, 1.0 - 1e-10);
                    z(i, j) = dist::std_t_quantile(u, dcc_.nu_joint);
                }
        }

        const Matrix nmat = z.cwiseMin(0.0);
        Matrix q = dcc_.qbar;
        for (Eigen::Index i = 1; i <= n; ++i)
            q = detail::dcc_step(dcc_.qbar, q, z.row(i - 1), nmat.row(i - 1), dcc_.a, dcc_.b,
                                 dcc_.g);
        const Matrix r = detail::normalize_correlation(q);

        // project the lagged standardized vector through the forecast correlation
        const Vector zlast = z.row(n - 1);
        Vector corr(k);
        for (int i = 0; i < k; ++i) {
            Matrix r_oo(k - 1, k - 1);
            Vector r_io(k - 1), z_o(k - 1);
            int a = 0;
            for (int m = 0; m < k; ++m) {
                if (m == i) continue;
                r_io[a] = r(i, m);
                z_o[a] = zlast[m];
                int bcol = 0;
                for (int w = 0; w < k; ++w) {
                    if (w == i) continue;
                    r_oo(a, bcol) = r(m, w);
                    ++bcol;
                }
                ++a;
            }
            const double zhat = r_io.dot(r_oo.llt().solve(z_o));
            corr[i] = std::sqrt(h(n, i)) * zhat;
        }
        return corr;
    }

private:
    LayerKind kind_;
    GarchDccState state_;
    DccParams dcc_;
};

/// Archimedean-mixture correction: pairwise mixtures against the central asset
/// summarize dependence as a weighted Kendall tau, mapped to a correlation that
/// scales the central asset's lagged standardized innovation.
class MixCopulaLayer final : public CorrectionLayer {
public:
    MixCopulaLayer(const Matrix& residuals, Eigen::Index first_valid, Eigen::Index boundary,
                   int central, std::uint64_t seed) {
        central_ = central;
        state_.first_valid = first_valid;
        const auto k = static_cast<int>(residuals.cols());
        const Eigen::Index n_in = boundary - first_valid;
        const Matrix in_sample = residuals.block(first_valid, 0, n_in, k);

        Matrix u(n_in, k);
        for (int j = 0; j < k; ++j) {
            const GarchFit fit = fit_garch_t(Vector(in_sample.col(j)));
            state_.marginals.push_back(fit.params);
            state_.h0.push_back(variance(Vector(in_sample.col(j)), 0));
            u.col(j) = pit(Vector(in_sample.col(j)), fit, PitMethod::Empirical);
        }

        rho_.assign(static_cast<std::size_t>(k), 0.0);
        for (int j = 0; j < k; ++j) {
            if (j == central_) continue;
            Matrix pair(n_in, 2);
            pair.col(0) = u.col(j);
            pair.col(1) = u.col(central_);
            const MixtureFitResult mix = fit_mixture(pair, 2, seed + static_cast<std::uint64_t>(j));
            double tau = 0.0;
            for (int c = 0; c < 3; ++c)
                tau += mix.params.weights[c] *
                       tau_from_theta(mix.params.components[static_cast<std::size_t>(c)].family,
                                      mix.params.components[static_cast<std::size_t>(c)].theta);
            rho_[static_cast<std::size_t>(j)] = std::sin(M_PI * tau / 2.0);
        }
    }

    Vector correction(const Matrix& residuals, Eigen::Index t) const override {
        const auto k = static_cast<int>(residuals.cols());
        const Matrix h = state_.variance_through(residuals, t);
        const Eigen::Index n = h.rows() - 1;
        if (n < 1) return Vector::Zero(k);
        Vector zlast(k);
        for (int j = 0; j < k; ++j)
            zlast[j] = residuals(t - 1, j) / std::sqrt(h(n - 1, j));
        Vector corr = Vector::Zero(k);
        double central_acc = 0.0;
        int central_n = 0;
        for (int j = 0; j < k; ++j) {
            if (j == central_) continue;
            corr[j] = std::sqrt(h(n, j)) * rho_[static_cast<std::size_t>(j)] * zlast[central_];
            central_acc += rho_[static_cast<std::size_t>(j)] * zlast[j];
            ++central_n;
        }
        if (central_n > 0)
            corr[central_] = std::sqrt(h(n, central_)) * central_acc / central_n;
        return corr;
    }

private:
    GarchDccState state_;
    std::vector<double> rho_;
    int central_ = 0;
};

/// Per-variable GPR on lagged residuals: hyperparameters fitted in-sample,
/// the posterior refreshed each step on all pairs seen so far.
class GprLayer final : public CorrectionLayer {
public:
    GprLayer(const Matrix& residuals, Eigen::Index first_valid, Eigen::Index boundary, int lags,
             bool optimize, std::uint64_t seed)
        : first_valid_(first_valid), d_(lags) {
        const auto k = static_cast<int>(residuals.cols());
        per_var_.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            auto [x, y] = supervision(residuals, i, boundary);
            PerVar& pv = per_var_[static_cast<std::size_t>(i)];
            pv.fmean = x.colwise().mean();
            pv.fsd.resize(x.cols());
            for (Eigen::Index c = 0; c < x.cols(); ++c)
                pv.fsd[c] = std::max(stddev(Vector(x.col(c)), 0), 1e-12);
            pv.ymean = y.mean();
            pv.ysd = std::max(stddev(y, 0), 1e-12);

            const Matrix xs = standardize(x, pv);
            const Vector ys = (y.array() - pv.ymean) / pv.ysd;
            const GprModel m = fit_gpr(xs, ys, optimize, seed + static_cast<std::uint64_t>(i));
            pv.length_scale = m.length_scale();
            pv.noise_sd = m.noise_sd();
            pv.signal_sd = m.signal_sd();
        }
    }

    Vector correction(const Matrix& residuals, Eigen::Index t) const override {
        const auto k = static_cast<int>(residuals.cols());
        Vector corr = Vector::Zero(k);
        for (int i = 0; i < k; ++i) {
            const PerVar& pv = per_var_[static_cast<std::size_t>(i)];
            auto [x, y] = supervision(residuals, i, t);
            if (x.rows() < 2) continue;
            const GprModel m(standardize(x, pv), Vector((y.array() - pv.ymean) / pv.ysd),
                             pv.length_scale, pv.noise_sd, pv.signal_sd);
            const Vector f = feature_row(residuals, i, t);
            const Vector fs = (f - pv.fmean).array() / pv.fsd.array();
            corr[i] = pv.ymean + pv.ysd * m.predict(fs).first;
        }
        return corr;
    }

    int feature_dim(int k) const { return d_ + (k - 1); }

private:
    struct PerVar {
        double length_scale = 1.0, noise_sd = 0.1, signal_sd = 1.0;
        Vector fmean, fsd;
        double ymean = 0.0, ysd = 1.0;
    };

    /// Features for predicting residual row s: d lags of the own series and
    /// the most recent lag of every other series.
    Vector feature_row(const Matrix& residuals, int var, Eigen::Index s) const {
        const auto k = static_cast<int>(residuals.cols());
        Vector f(feature_dim(k));
        for (int j = 0; j < d_; ++j) f[j] = residuals(s - 1 - j, var);
        int a = d_;
        for (int j = 0; j < k; ++j) {
            if (j == var) continue;
            f[a++] = residuals(s - 1, j);
        }
        return f;
    }

    std::pair<Matrix, Vector> supervision(const Matrix& residuals, int var,
                                          Eigen::Index end) const {
        const auto k = static_cast<int>(residuals.cols());
        const Eigen::Index lo = first_valid_ + d_;
        const Eigen::Index n = std::max<Eigen::Index>(0, end - lo);
        Matrix x(n, feature_dim(k));
        Vector y(n);
        for (Eigen::Index s = lo; s < end; ++s) {
            x.row(s - lo) = feature_row(residuals, var, s);
            y[s - lo] = residuals(s, var);
        }
        return {x, y};
    }

    Matrix standardize(const Matrix& x, const PerVar& pv) const {
        Matrix out = x;
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            out.col(c) = (x.col(c).array() - pv.fmean[c]) / pv.fsd[c];
        return out;
    }

    Eigen::Index first_valid_;
    int d_;
    std::vector<PerVar> per_var_;
};

inline std::unique_ptr<CorrectionLayer> make_layer(const ModelSpec& spec,
                                                   const MeanForecasts& mean,
                                                   const ReturnPanel& returns,
                                                   const SampleSplit& split,
                                                   const RunConfig& cfg) {
    const auto k = static_cast<int>(returns.cols());
    switch (spec.layer) {
        case LayerKind::None:
            return std::make_unique<NullLayer>(k);
        case LayerKind::Dcc:
        case LayerKind::Adcc:
        case LayerKind::TCopula:
            return std::make_unique<EllipticalLayer>(spec.layer, mean.residuals, mean.first_valid,
                                                     split.boundary);
        case LayerKind::MixCopula: {
            int central = k - 1;
            if (!cfg.central_asset.empty()) {
                central = -1;
                for (int j = 0; j < k; ++j)
                    if (returns.names[static_cast<std::size_t>(j)] == cfg.central_asset) central = j;
                if (central < 0) throw ConfigError("central_asset '" + cfg.central_asset + "' not in panel");
            }
            return std::make_unique<MixCopulaLayer>(mean.residuals, mean.first_valid,
                                                    split.boundary, central,
                                                    Rng::stream(cfg.seed, "layer.mixcopula").next_u64());
        }
        case LayerKind::Gpr:
            return std::make_unique<GprLayer>(mean.residuals, mean.first_valid, split.boundary,
                                              cfg.gpr_lags, cfg.gpr_optimize,
                                              Rng::stream(cfg.seed, "layer.gpr").next_u64());
    }
    throw ConfigError("unhandled layer kind");
}

}  // namespace pipeline_detail

/// Forecast matrix for a single model over the out-of-sample window; exposed
/// for the no-lookahead property checks.
inline Matrix model_forecasts(const ModelSpec& spec, const ReturnPanel& returns,
                              const SampleSplit& split, const RunConfig& cfg,
                              std::vector<std::string>* step_errors = nullptr) {
    using namespace pipeline_detail;
    const MeanForecasts mean = spec.mean == MeanKind::Var ? run_mean_var(returns, split, cfg)
                                                          : run_mean_tvp(returns, split, cfg);
    const auto layer = make_layer(spec, mean, returns, split, cfg);
    Matrix out = mean.forecasts;
    for (Eigen::Index t = split.boundary; t < returns.rows(); ++t) {
        try {
            out.row(t - split.boundary) += layer->correction(mean.residuals, t);
        } catch (const std::exception& e) {
            if (step_errors)
                step_errors->push_back("step " + std::to_string(t - split.boundary) + ": " + e.what());
        }
    }
    return out;
}

/// Per-variable RMSE of a forecast matrix against realized values.
inline EvaluationRow score_forecasts(const std::string& model, const Matrix& forecasts,
                                     const Matrix& realized) {
    if (forecasts.rows() != realized.rows() || forecasts.cols() != realized.cols())
        throw DataError("score_forecasts: shape mismatch");
    EvaluationRow row;
    row.model = model;
    row.rmse.resize(realized.cols());
    for (Eigen::Index j = 0; j < realized.cols(); ++j)
        row.rmse[j] = std::sqrt((forecasts.col(j) - realized.col(j)).squaredNorm() /
                                static_cast<double>(realized.rows()));
    row.mean_rmse = row.rmse.mean();
    return row;
}

/// Expanding one-step-ahead evaluation of every configured model; RMSE per
/// variable plus the cross-variable mean. Layer failures at a step are logged
/// per model and leave the uncorrected mean forecast in place.
inline EvaluationTable rolling_evaluate(const ReturnPanel& returns, const SampleSplit& split,
                                        const RunConfig& cfg) {
    if (split.boundary >= returns.rows()) throw DataError("rolling_evaluate: empty out-of-sample window");
    EvaluationTable table;
    table.variables = returns.names;
    const Eigen::Index n_oos = returns.rows() - split.boundary;
    const Matrix realized = returns.values.bottomRows(n_oos);

    for (const std::string& name : cfg.models) {
        const ModelSpec spec = ModelSpec::parse(name);
        EvaluationRow row;
        try {
            std::vector<std::string> step_errors;
            const Matrix f = model_forecasts(spec, returns, split, cfg, &step_errors);
            row = score_forecasts(name, f, realized);
            row.step_errors = std::move(step_errors);
            row.complete = row.step_errors.empty();
        } catch (const std::exception& e) {
            row.model = name;
            row.rmse = Vector::Constant(returns.cols(), std::numeric_limits<double>::quiet_NaN());
            row.mean_rmse = std::numeric_limits<double>::quiet_NaN();
            row.complete = false;
            row.step_errors.push_back(std::string("model: ") + e.what());
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Pools each group's per-variable RMSEs and runs the unequal-variance t-test.
inline TestReport compare_models(const EvaluationTable& table,
                                 const std::vector<std::string>& group_a,
                                 const std::vector<std::string>& group_b) {
    if (group_a.empty() || group_b.empty()) throw ConfigError("compare_models: empty group");
    auto pool = [&](const std::vector<std::string>& group) {
        std::vector<double> v;
        for (const auto& name : group) {
            const EvaluationRow& r = table.row(name);
            for (Eigen::Index j = 0; j < r.rmse.size(); ++j) v.push_back(r.rmse[j]);
        }
        return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
    };
    const Vector a = pool(group_a);
    const Vector b = pool(group_b);
    if (a == b) {
        TestReport r;
        r.name = "welch_t";
        r.statistic = 0.0;
        r.df = static_cast<double>(a.size() + b.size() - 2);
        r.p_value = 1.0;
        r.reject_at_5pct = false;
        r.details["mean_a"] = a.mean();
        r.details["mean_b"] = b.mean();
        return r;
    }
    return welch_t_test(a, b);
}

inline void write_evaluation_csv(const EvaluationTable& table, const std::string& path) {
    CsvWriter w(path);
    std::vector<std::string> header{"model"};
    for (const auto& v : table.variables) header.push_back(v);
    header.push_back("mean_rmse");
    header.push_back("status");
    w.header(header);
    for (const auto& row : table.rows) {
        w.field(row.model);
        for (Eigen::Index j = 0; j < row.rmse.size(); ++j) w.field(row.rmse[j]);
        w.field(row.mean_rmse);
        w.field(row.complete ? std::string("ok") : std::string("incomplete"));
        w.end_row();
    }
}

inline EvaluationTable read_evaluation_csv(const std::string& path) {
    const CsvTable csv = read_csv(path);
    if (csv.header.size() < 4 || csv.header.front() != "model")
        throw DataError("not an evaluation table: " + path);
    EvaluationTable table;
    table.variables.assign(csv.header.begin() + 1, csv.header.end() - 2);
    for (const auto& r : csv.rows) {
        EvaluationRow row;
        row.model = r.front();
        row.rmse.resize(static_cast<Eigen::Index>(table.variables.size()));
        for (std::size_t j = 0; j < table.variables.size(); ++j)
            row.rmse[static_cast<Eigen::Index>(j)] = parse_double(r[j + 1], path);
        row.mean_rmse = parse_double(r[r.size() - 2], path);
        row.complete = r.back() == "ok";
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace strata
