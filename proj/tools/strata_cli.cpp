// strata: layered multivariate time-series modeling pipeline.
//
// Subcommands cover ingestion, diagnostics, mean-equation fits (VAR / TVP),
// dependence layers (DCC / ADCC / t-copula / Archimedean mixtures), GPR
// residual correction, rolling out-of-sample evaluation and plot-data export.

#include "strata/copula.hpp"
#include "strata/dataio.hpp"
#include "strata/dcc.hpp"
#include "strata/garch.hpp"
#include "strata/gpr.hpp"
#include "strata/pipeline.hpp"
#include "strata/plotdata.hpp"
#include "strata/stats.hpp"
#include "strata/tvp.hpp"
#include "strata/var.hpp"
#include "strata/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace strata;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string data_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

struct Workspace {
    RunConfig cfg;
    TimeSeriesPanel panel;
    ReturnPanel returns;
    Eigen::Index boundary = 0;  // == returns.rows() when no split configured
};

RunConfig resolve_config(const GlobalArgs& g) {
    RunConfig cfg;
    if (!g.config_path.empty()) cfg = RunConfig::from_file(g.config_path);
    if (!g.data_path.empty()) cfg.data_path = g.data_path;
    if (g.seed_set) cfg.seed = g.seed;
    return cfg;
}

Workspace load_workspace(const GlobalArgs& g, bool need_boundary) {
    Workspace w;
    w.cfg = resolve_config(g);
    if (w.cfg.data_path.empty()) throw ConfigError("no input data: pass --data or set `data` in the config");
    w.panel = load_panel(w.cfg.data_path, w.cfg.date_column);
    if (!w.cfg.ordering.empty()) w.panel = w.panel.reordered(w.cfg.ordering);
    w.returns = to_log_returns(w.panel);
    if (!w.cfg.boundary.empty()) {
        w.boundary = split(w.returns, YearMonth::parse(w.cfg.boundary)).boundary;
    } else {
        if (need_boundary) throw ConfigError("this command needs `boundary` in the config (YYYY-MM)");
        w.boundary = w.returns.rows();
    }
    return w;
}

json config_json(const RunConfig& cfg) {
    json j;
    for (const auto& [k, v] : cfg.echo()) j[k] = v;
    return j;
}

void write_run_json(const GlobalArgs& g, const RunConfig& cfg, const std::string& command,
                    std::chrono::steady_clock::time_point started, const json& extra = {}) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["status"] = "ok";
    j["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
    j["config"] = config_json(cfg);
    if (!extra.is_null() && !extra.empty()) j.update(extra);
    std::ofstream out(fs::path(g.out_dir) / "run.json");
    out << j.dump(2) << "\n";
}

void write_reports_csv(const std::vector<TestReport>& reports, const std::string& path) {
    CsvWriter w(path);
    w.header({"name", "statistic", "df", "p_value", "reject"});
    for (const auto& r : reports) {
        w.field(r.name);
        w.field(r.statistic);
        w.field(r.df);
        w.field(r.p_value);
        w.field(r.reject_at_5pct ? std::string("yes") : std::string("no"));
        w.end_row();
    }
}

void write_describe_csv(const DescriptiveStats& s, const std::string& path) {
    CsvWriter w(path);
    w.header({"series", "mean", "std", "skewness", "kurtosis", "min", "max"});
    for (std::size_t j = 0; j < s.names.size(); ++j) {
        const auto i = static_cast<Eigen::Index>(j);
        w.field(s.names[j]);
        w.field(s.mean[i]);
        w.field(s.stddev[i]);
        w.field(s.skewness[i]);
        w.field(s.excess_kurtosis[i]);
        w.field(s.min[i]);
        w.field(s.max[i]);
        w.end_row();
    }
}

/// In-sample mean-equation residuals for the dependence layers: rows
/// [first_valid, boundary) of the aligned residual matrix.
struct MeanResiduals {
    Matrix values;                    // n_in x K
    std::vector<YearMonth> dates;
    Eigen::Index first_valid = 0;
};

MeanResiduals mean_residuals(const Workspace& w, MeanKind kind) {
    using namespace pipeline_detail;
    SampleSplit split{w.boundary};
    const MeanForecasts m = kind == MeanKind::Var ? run_mean_var(w.returns, split, w.cfg)
                                                  : run_mean_tvp(w.returns, split, w.cfg);
    MeanResiduals r;
    r.first_valid = m.first_valid;
    const Eigen::Index n = w.boundary - m.first_valid;
    r.values = m.residuals.block(m.first_valid, 0, n, w.returns.cols());
    r.dates.assign(w.returns.dates.begin() + m.first_valid, w.returns.dates.begin() + w.boundary);
    return r;
}

MeanKind parse_mean(const std::string& s) {
    if (s == "var") return MeanKind::Var;
    if (s == "tvp") return MeanKind::Tvp;
    throw ConfigError("unknown mean model '" + s + "' (use var or tvp)");
}

int central_index(const Workspace& w) {
    if (w.cfg.central_asset.empty()) return static_cast<int>(w.returns.cols()) - 1;
    for (int j = 0; j < static_cast<int>(w.returns.cols()); ++j)
        if (w.returns.names[static_cast<std::size_t>(j)] == w.cfg.central_asset) return j;
    throw ConfigError("central_asset '" + w.cfg.central_asset + "' not in panel");
}

// ---------------------------------------------------------------- commands

void cmd_ingest(const GlobalArgs& g) {
    const auto started = std::chrono::steady_clock::now();
    RunConfig cfg = resolve_config(g);
    if (cfg.data_path.empty()) throw ConfigError("no input data: pass --data or set `data` in the config");
    LoadReport report;
    TimeSeriesPanel panel = load_panel(cfg.data_path, cfg.date_column, &report);
    if (!cfg.ordering.empty()) panel = panel.reordered(cfg.ordering);
    const ReturnPanel returns = to_log_returns(panel);

    fs::create_directories(g.out_dir);
    {
        CsvWriter w((fs::path(g.out_dir) / "panel.csv").string());
        std::vector<std::string> header{"date"};
        for (const auto& n : panel.names) header.push_back(n);
        w.header(header);
        for (Eigen::Index t = 0; t < panel.rows(); ++t) {
            w.field(panel.dates[static_cast<std::size_t>(t)].str());
            for (Eigen::Index j = 0; j < panel.cols(); ++j) w.field(panel.values(t, j));
            w.end_row();
        }
    }
    {
        CsvWriter w((fs::path(g.out_dir) / "returns.csv").string());
        std::vector<std::string> header{"date"};
        for (const auto& n : returns.names) header.push_back(n);
        w.header(header);
        for (Eigen::Index t = 0; t < returns.rows(); ++t) {
            w.field(returns.dates[static_cast<std::size_t>(t)].str());
            for (Eigen::Index j = 0; j < returns.cols(); ++j) w.field(returns.values(t, j));
            w.end_row();
        }
    }
    write_describe_csv(describe(panel), (fs::path(g.out_dir) / "describe_levels.csv").string());
    write_describe_csv(describe(returns), (fs::path(g.out_dir) / "describe_returns.csv").string());
    {
        std::ofstream rep(fs::path(g.out_dir) / "ingest_report.txt");
        rep << "rows: " << panel.rows() << "\nvariables: " << panel.cols() << "\n";
        rep << "rejected rows: " << report.rejected_rows.size() << "\n";
        for (const auto& r : report.rejected_rows) rep << "  " << r << "\n";
    }
    write_run_json(g, cfg, "ingest", started,
                   json{{"rows", panel.rows()}, {"rejected", report.rejected_rows.size()}});
    std::cout << "ingested " << panel.rows() << " rows x " << panel.cols() << " variables, "
              << report.rejected_rows.size() << " rejected\n";
}

void cmd_diagnose(const GlobalArgs& g, const std::string& mean, int adf_maxlag, int pt_lags,
                  int arch_lags) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);
    std::vector<TestReport> reports;

    const Matrix levels = w.panel.values.topRows(std::min<Eigen::Index>(
        w.panel.rows(), w.boundary + 1));  // levels through the in-sample boundary
    for (Eigen::Index j = 0; j < w.panel.cols(); ++j) {
        TestReport r = adf_test(Vector(levels.col(j)), AdfTrend::Constant, adf_maxlag);
        r.name = "adf_level_" + w.panel.names[static_cast<std::size_t>(j)];
        reports.push_back(std::move(r));
    }
    const Matrix rets = w.returns.values.topRows(w.boundary);
    for (Eigen::Index j = 0; j < w.returns.cols(); ++j) {
        TestReport r = adf_test(Vector(rets.col(j)), AdfTrend::Constant, adf_maxlag);
        r.name = "adf_return_" + w.returns.names[static_cast<std::size_t>(j)];
        reports.push_back(std::move(r));
    }
    for (auto& r : johansen_trace(levels, w.cfg.lag)) reports.push_back(std::move(r));

    const MeanKind mk = parse_mean(mean);
    const MeanResiduals resid = mean_residuals(w, mk);
    {
        TestReport r = jarque_bera(resid.values, JbMode::Joint);
        r.name = mean + "_jb_joint";
        reports.push_back(std::move(r));
        r = jarque_bera(resid.values, JbMode::SkewnessOnly);
        r.name = mean + "_jb_skewness";
        reports.push_back(std::move(r));
        r = jarque_bera(resid.values, JbMode::KurtosisOnly);
        r.name = mean + "_jb_kurtosis";
        reports.push_back(std::move(r));
    }
    {
        TestReport r = portmanteau(resid.values, pt_lags, mk == MeanKind::Var ? w.cfg.lag : 0);
        r.name = mean + "_portmanteau";
        reports.push_back(std::move(r));
        r = mvarch_qm(resid.values, 5);
        r.name = mean + "_mvarch_qm";
        reports.push_back(std::move(r));
    }
    for (Eigen::Index j = 0; j < resid.values.cols(); ++j) {
        TestReport r = arch_lm(Vector(resid.values.col(j)), arch_lags);
        r.name = mean + "_archlm_" + w.returns.names[static_cast<std::size_t>(j)];
        reports.push_back(std::move(r));
    }

    // recursive-residual stability per equation of the in-sample VAR design
    {
        detail::VarDesign d(Matrix(w.returns.values.topRows(w.boundary)), w.cfg.lag);
        for (Eigen::Index j = 0; j < w.returns.cols(); ++j) {
            const CusumPath path = cusum(Vector(d.y.col(j)), d.x);
            emit_cusum(path, w.returns.names[static_cast<std::size_t>(j)],
                       (fs::path(g.out_dir) /
                        ("cusum_" + w.returns.names[static_cast<std::size_t>(j)] + ".csv"))
                           .string());
        }
    }

    write_reports_csv(reports, (fs::path(g.out_dir) / "tests.csv").string());
    write_run_json(g, w.cfg, "diagnose", started, json{{"tests", reports.size()}});
    int rejected = 0;
    for (const auto& r : reports) rejected += r.reject_at_5pct ? 1 : 0;
    std::cout << "diagnose: " << reports.size() << " tests, " << rejected << " rejected at 5%\n";
}

void cmd_fit_var(const GlobalArgs& g, int max_lag, int horizon) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);

    const Matrix in_sample = w.returns.values.topRows(w.boundary);
    const LagSelectionTable table = select_lag(in_sample, max_lag);
    {
        CsvWriter wr((fs::path(g.out_dir) / "lag_selection.csv").string());
        wr.header({"lag", "aic", "hq", "sc", "fpe"});
        for (std::size_t i = 0; i < table.lags.size(); ++i) {
            wr.field(table.lags[i]);
            wr.field(table.aic[i]);
            wr.field(table.hq[i]);
            wr.field(table.sc[i]);
            wr.field(table.fpe[i]);
            wr.end_row();
        }
    }

    const VarModel m = fit_var(in_sample, w.cfg.lag, w.returns.names);
    for (int i = 0; i < m.p; ++i) {
        CsvWriter wr((fs::path(g.out_dir) / ("var_coef_lag" + std::to_string(i + 1) + ".csv")).string());
        std::vector<std::string> header{"equation"};
        for (const auto& n : m.names) header.push_back(n);
        wr.header(header);
        for (int r = 0; r < m.k(); ++r) {
            wr.field(m.names[static_cast<std::size_t>(r)]);
            for (int c = 0; c < m.k(); ++c) wr.field(m.lag_coef[static_cast<std::size_t>(i)](r, c));
            wr.end_row();
        }
    }
    {
        CsvWriter wr((fs::path(g.out_dir) / "var_intercept_sigma.csv").string());
        std::vector<std::string> header{"equation", "intercept"};
        for (const auto& n : m.names) header.push_back("sigma_" + n);
        wr.header(header);
        for (int r = 0; r < m.k(); ++r) {
            wr.field(m.names[static_cast<std::size_t>(r)]);
            wr.field(m.intercept[r]);
            for (int c = 0; c < m.k(); ++c) wr.field(m.sigma(r, c));
            wr.end_row();
        }
    }
    const IrfResult irf = impulse_response(m, cholesky_identify(m), horizon);
    emit_irf(irf, (fs::path(g.out_dir) / "irf.csv").string());

    write_run_json(g, w.cfg, "fit-var", started,
                   json{{"chosen_aic", table.chosen_aic},
                        {"chosen_sc", table.chosen_sc},
                        {"aic_at_chosen", table.aic[static_cast<std::size_t>(table.chosen_aic - 1)]}});
    std::cout << "fit-var: lag " << w.cfg.lag << " fitted; criteria minimum at AIC="
              << table.chosen_aic << " SC=" << table.chosen_sc << "\n";
}

void cmd_fit_tvp(const GlobalArgs& g, int horizon) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);

    ReturnPanel in_sample = w.returns.head(w.boundary);
    const TvpModel m = fit_tvp(in_sample, w.cfg.lag, w.cfg.tvp);
    {
        CsvWriter wr((fs::path(g.out_dir) / "tvp_coeff_path.csv").string());
        wr.header({"date", "equation", "regressor", "value"});
        const int q = m.k * m.p + 1;
        std::vector<std::string> regressors{"intercept"};
        for (int L = 1; L <= m.p; ++L)
            for (const auto& n : m.names) regressors.push_back(n + "_lag" + std::to_string(L));
        for (std::size_t t = 0; t < m.coeff_path.size(); ++t)
            for (int eq = 0; eq < m.k; ++eq)
                for (int r = 0; r < q; ++r) {
                    wr.field(m.dates[t].str());
                    wr.field(m.names[static_cast<std::size_t>(eq)]);
                    wr.field(regressors[static_cast<std::size_t>(r)]);
                    wr.field(m.coeff_path[t][eq * q + r]);
                    wr.end_row();
                }
    }
    const RegimeIrfSet set = regime_irfs(m, horizon);
    emit_regime_irfs(set, (fs::path(g.out_dir) / "tvp_irf.csv").string());
    {
        CsvWriter wr((fs::path(g.out_dir) / "tvp_residuals.csv").string());
        std::vector<std::string> header{"date"};
        for (const auto& n : m.names) header.push_back(n);
        wr.header(header);
        for (Eigen::Index t = 0; t < m.residuals.rows(); ++t) {
            wr.field(m.dates[static_cast<std::size_t>(t)].str());
            for (int j = 0; j < m.k; ++j) wr.field(m.residuals(t, j));
            wr.end_row();
        }
    }
    write_run_json(g, w.cfg, "fit-tvp", started,
                   json{{"filtered_rows", m.residuals.rows()},
                        {"regimes", {set.representative_dates[0].str(),
                                     set.representative_dates[1].str(),
                                     set.representative_dates[2].str()}}});
    std::cout << "fit-tvp: " << m.residuals.rows() << " filtered observations, regime dates "
              << set.representative_dates[0].str() << " / " << set.representative_dates[1].str()
              << " / " << set.representative_dates[2].str() << "\n";
}

void cmd_fit_dcc(const GlobalArgs& g, const std::string& mean, bool asymmetric,
                 const std::string& joint) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);
    const MeanResiduals resid = mean_residuals(w, parse_mean(mean));
    const auto k = static_cast<int>(resid.values.cols());

    std::vector<GarchFit> fits;
    Matrix z(resid.values.rows(), k);
    Matrix vol(resid.values.rows(), k);
    for (int j = 0; j < k; ++j) {
        fits.push_back(fit_garch_t(Vector(resid.values.col(j))));
        vol.col(j) = fits.back().variance_path.array().sqrt();
        z.col(j) = resid.values.col(j).array() / vol.col(j).array();
    }

    DccParams params;
    CondCovPath path;
    if (joint == "tcopula") {
        Matrix u(z.rows(), k);
        for (int j = 0; j < k; ++j) u.col(j) = pit(Vector(resid.values.col(j)), fits[static_cast<std::size_t>(j)]);
        std::tie(params, path) = fit_t_copula_dcc(u);
    } else if (joint == "t" || joint == "gaussian") {
        std::tie(params, path) =
            fit_dcc(z, asymmetric, joint == "t" ? JointDist::StudentT : JointDist::Gaussian, &vol);
    } else {
        throw ConfigError("unknown joint distribution '" + joint + "' (use gaussian, t, tcopula)");
    }

    {
        CsvWriter wr((fs::path(g.out_dir) / "dcc_marginals.csv").string());
        wr.header({"series", "omega", "alpha1", "beta1", "shape"});
        for (int j = 0; j < k; ++j) {
            wr.field(w.returns.names[static_cast<std::size_t>(j)]);
            wr.field(fits[static_cast<std::size_t>(j)].params.omega);
            wr.field(fits[static_cast<std::size_t>(j)].params.alpha);
            wr.field(fits[static_cast<std::size_t>(j)].params.beta);
            wr.field(fits[static_cast<std::size_t>(j)].params.nu);
            wr.end_row();
        }
    }
    {
        CsvWriter wr((fs::path(g.out_dir) / "dcc_joint.csv").string());
        if (asymmetric)
            wr.header({"dccA1", "dccB1", "dccG1", "mshape", "loglik"});
        else
            wr.header({"dccA1", "dccB1", "mshape", "loglik"});
        wr.field(params.a);
        wr.field(params.b);
        if (asymmetric) wr.field(params.g);
        wr.field(params.nu_joint);
        wr.field(params.log_likelihood);
        wr.end_row();
    }
    emit_rt_path(path, w.returns.names, resid.dates, (fs::path(g.out_dir) / "rt_path.csv").string());

    write_run_json(g, w.cfg, "fit-dcc", started,
                   json{{"dccA1", params.a}, {"dccB1", params.b}, {"dccG1", params.g},
                        {"mshape", params.nu_joint}});
    std::cout << "fit-dcc (" << mean << ", " << joint << (asymmetric ? ", asymmetric" : "")
              << "): a=" << params.a << " b=" << params.b;
    if (asymmetric) std::cout << " g=" << params.g;
    if (params.nu_joint > 0) std::cout << " shape=" << params.nu_joint;
    std::cout << "\n";
}

void cmd_fit_copula(const GlobalArgs& g, const std::string& mean, const std::string& family,
                    bool full_dim) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);
    const MeanResiduals resid = mean_residuals(w, parse_mean(mean));
    const auto k = static_cast<int>(resid.values.cols());
    const int central = central_index(w);

    Matrix u(resid.values.rows(), k);
    for (int j = 0; j < k; ++j) {
        const GarchFit fit = fit_garch_t(Vector(resid.values.col(j)));
        u.col(j) = pit(Vector(resid.values.col(j)), fit, PitMethod::Empirical);
    }

    CsvWriter wr((fs::path(g.out_dir) / "copula_fit.csv").string());
    wr.header({"model", "pair", "family", "parameter", "weight", "loglik"});

    auto emit_single = [&](const std::string& pair_label, const Matrix& data, CopulaFamily fam) {
        const SingleFitResult fit = fit_single(data, fam);
        wr.field(mean);
        wr.field(pair_label);
        wr.field(family_name(fam));
        wr.field(fit.spec.theta);
        wr.field(1.0);
        wr.field(fit.log_likelihood);
        wr.end_row();
    };
    auto emit_mixture = [&](const std::string& pair_label, const Matrix& data, std::uint64_t seed) {
        const MixtureFitResult fit = fit_mixture(data, 3, seed);
        for (int c = 0; c < 3; ++c) {
            wr.field(mean);
            wr.field(pair_label);
            wr.field(family_name(fit.params.components[static_cast<std::size_t>(c)].family));
            wr.field(fit.params.components[static_cast<std::size_t>(c)].theta);
            wr.field(fit.params.weights[c]);
            wr.field(fit.log_likelihood);
            wr.end_row();
        }
    };

    if (full_dim) {
        if (family != "clayton" && family != "gumbel")
            throw ConfigError("--full-dim supports clayton and gumbel only");
        emit_single("all", u, family == "clayton" ? CopulaFamily::Clayton : CopulaFamily::Gumbel);
    } else {
        for (int j = 0; j < k; ++j) {
            if (j == central) continue;
            Matrix pair(u.rows(), 2);
            pair.col(0) = u.col(j);
            pair.col(1) = u.col(central);
            const std::string label = w.returns.names[static_cast<std::size_t>(j)] + ":" +
                                      w.returns.names[static_cast<std::size_t>(central)];
            if (family == "mixture")
                emit_mixture(label, pair, Rng::stream(w.cfg.seed, "cli.copula." + label).next_u64());
            else if (family == "clayton")
                emit_single(label, pair, CopulaFamily::Clayton);
            else if (family == "frank")
                emit_single(label, pair, CopulaFamily::Frank);
            else if (family == "gumbel")
                emit_single(label, pair, CopulaFamily::Gumbel);
            else
                throw ConfigError("unknown family '" + family + "'");
        }
    }
    write_run_json(g, w.cfg, "fit-copula", started);
    std::cout << "fit-copula (" << mean << ", " << family << ") written to copula_fit.csv\n";
}

void cmd_gof_impl(const GlobalArgs& g, const std::string& mean, const std::string& family,
                  int replications, double tail_threshold) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);
    const MeanResiduals resid = mean_residuals(w, parse_mean(mean));
    const auto k = static_cast<int>(resid.values.cols());
    const int central = central_index(w);

    Matrix u(resid.values.rows(), k);
    for (int j = 0; j < k; ++j) {
        const GarchFit fit = fit_garch_t(Vector(resid.values.col(j)));
        u.col(j) = pit(Vector(resid.values.col(j)), fit, PitMethod::Empirical);
    }

    std::vector<std::string> families;
    if (family == "all") families = {"clayton", "frank", "gumbel"};
    else families = {family};

    CsvWriter wr((fs::path(g.out_dir) / "gof.csv").string());
    wr.header({"model", "pair", "copula", "kind", "statistic", "p_value", "decision"});
    for (int j = 0; j < k; ++j) {
        if (j == central) continue;
        Matrix pair(u.rows(), 2);
        pair.col(0) = u.col(j);
        pair.col(1) = u.col(central);
        const std::string label = w.returns.names[static_cast<std::size_t>(j)] + ":" +
                                  w.returns.names[static_cast<std::size_t>(central)];
        for (const auto& fam_name : families) {
            CopulaModel model;
            if (fam_name == "mixture") {
                model = fit_mixture(pair, 2, Rng::stream(w.cfg.seed, "cli.gof." + label).next_u64())
                            .params;
            } else {
                CopulaFamily fam = fam_name == "clayton" ? CopulaFamily::Clayton
                                   : fam_name == "frank" ? CopulaFamily::Frank
                                                         : CopulaFamily::Gumbel;
                model = fit_single(pair, fam).spec;
            }
            const GofResult res = gof_bootstrap(pair, model, replications,
                                                Rng::stream(w.cfg.seed, "cli.gofboot." + label + fam_name)
                                                    .next_u64(),
                                                tail_threshold);
            wr.field(mean); wr.field(label); wr.field(fam_name); wr.field(std::string("global"));
            wr.field(res.statistic_global); wr.field(res.p_global);
            wr.field(res.p_global < 0.05 ? std::string("rejected") : std::string("accepted"));
            wr.end_row();
            wr.field(mean); wr.field(label); wr.field(fam_name); wr.field(std::string("tail"));
            wr.field(res.statistic_tail); wr.field(res.p_tail);
            wr.field(res.p_tail < 0.05 ? std::string("rejected") : std::string("accepted"));
            wr.end_row();
        }
    }
    write_run_json(g, w.cfg, "gof", started, json{{"replications", replications}});
    std::cout << "gof (" << mean << ", " << family << ", B=" << replications
              << ") written to gof.csv\n";
}

void cmd_fit_gpr(const GlobalArgs& g, const std::string& mean, int lags, bool no_opt) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, false);
    fs::create_directories(g.out_dir);

    RunConfig cfg = w.cfg;
    cfg.gpr_lags = lags;
    cfg.gpr_optimize = !no_opt;

    using namespace pipeline_detail;
    SampleSplit split{w.boundary};
    const MeanKind mk = parse_mean(mean);
    const MeanForecasts mf = mk == MeanKind::Var ? run_mean_var(w.returns, split, cfg)
                                                 : run_mean_tvp(w.returns, split, cfg);
    const GprLayer layer(mf.residuals, mf.first_valid, w.boundary, cfg.gpr_lags, cfg.gpr_optimize,
                         Rng::stream(cfg.seed, "layer.gpr").next_u64());

    // hyperparameters per variable are private to the layer; refit per series
    // for the report
    {
        CsvWriter wr((fs::path(g.out_dir) / "gpr_params.csv").string());
        wr.header({"variable", "length_scale", "noise_sd", "signal_sd"});
        const Eigen::Index n_in = w.boundary - mf.first_valid;
        for (int j = 0; j < static_cast<int>(w.returns.cols()); ++j) {
            // reproduce the per-variable standardized fit
            const Eigen::Index lo = mf.first_valid + cfg.gpr_lags;
            const Eigen::Index n = w.boundary - lo;
            (void)n_in;
            Matrix x(n, cfg.gpr_lags + static_cast<int>(w.returns.cols()) - 1);
            Vector y(n);
            for (Eigen::Index s = lo; s < w.boundary; ++s) {
                int a = 0;
                for (int L = 0; L < cfg.gpr_lags; ++L) x(s - lo, a++) = mf.residuals(s - 1 - L, j);
                for (int o = 0; o < static_cast<int>(w.returns.cols()); ++o) {
                    if (o == j) continue;
                    x(s - lo, a++) = mf.residuals(s - 1, o);
                }
                y[s - lo] = mf.residuals(s, j);
            }
            Matrix xs = x;
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                const double mu = x.col(c).mean();
                const double sd = std::max(stddev(Vector(x.col(c)), 0), 1e-12);
                xs.col(c) = (x.col(c).array() - mu) / sd;
            }
            const double ymu = y.mean();
            const double ysd = std::max(stddev(y, 0), 1e-12);
            const GprModel m = fit_gpr(xs, Vector((y.array() - ymu) / ysd), cfg.gpr_optimize,
                                       Rng::stream(cfg.seed, "layer.gpr").next_u64() +
                                           static_cast<std::uint64_t>(j));
            wr.field(w.returns.names[static_cast<std::size_t>(j)]);
            wr.field(m.length_scale());
            wr.field(m.noise_sd());
            wr.field(m.signal_sd());
            wr.end_row();
        }
    }

    if (w.boundary < w.returns.rows()) {
        CsvWriter wr((fs::path(g.out_dir) / "gpr_corrections.csv").string());
        wr.header({"date", "variable", "correction"});
        for (Eigen::Index t = w.boundary; t < w.returns.rows(); ++t) {
            const Vector corr = layer.correction(mf.residuals, t);
            for (int j = 0; j < static_cast<int>(w.returns.cols()); ++j) {
                wr.field(w.returns.dates[static_cast<std::size_t>(t)].str());
                wr.field(w.returns.names[static_cast<std::size_t>(j)]);
                wr.field(corr[j]);
                wr.end_row();
            }
        }
    }
    write_run_json(g, cfg, "fit-gpr", started);
    std::cout << "fit-gpr (" << mean << ", d=" << lags << ") written\n";
}

void cmd_evaluate(const GlobalArgs& g) {
    const auto started = std::chrono::steady_clock::now();
    const Workspace w = load_workspace(g, true);
    fs::create_directories(g.out_dir);
    const SampleSplit split{w.boundary};
    const EvaluationTable table = rolling_evaluate(w.returns, split, w.cfg);
    write_evaluation_csv(table, (fs::path(g.out_dir) / "rmse.csv").string());

    json models;
    for (const auto& row : table.rows) {
        json entry;
        entry["complete"] = row.complete;
        entry["mean_rmse"] = row.mean_rmse;
        entry["errors"] = row.step_errors;
        models[row.model] = entry;
    }
    write_run_json(g, w.cfg, "evaluate", started, json{{"models", models}});
    std::cout << "evaluate: " << table.rows.size() << " models over "
              << (w.returns.rows() - w.boundary) << " out-of-sample steps\n";
    for (const auto& row : table.rows)
        std::cout << "  " << row.model << ": mean RMSE " << row.mean_rmse
                  << (row.complete ? "" : " [incomplete]") << "\n";
}

void cmd_compare(const GlobalArgs& g, const std::string& table_path, const std::string& group_a,
                 const std::string& group_b) {
    const auto started = std::chrono::steady_clock::now();
    RunConfig cfg = resolve_config(g);
    auto split_list = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == ',') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else
                cur += c;
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };
    const EvaluationTable table = read_evaluation_csv(table_path);
    const TestReport r = compare_models(table, split_list(group_a), split_list(group_b));
    fs::create_directories(g.out_dir);
    {
        CsvWriter wr((fs::path(g.out_dir) / "comparison.csv").string());
        wr.header({"name", "statistic", "df", "p_value", "reject", "mean_a", "mean_b"});
        wr.field(r.name);
        wr.field(r.statistic);
        wr.field(r.df);
        wr.field(r.p_value);
        wr.field(r.reject_at_5pct ? std::string("yes") : std::string("no"));
        wr.field(r.details.at("mean_a"));
        wr.field(r.details.at("mean_b"));
        wr.end_row();
    }
    write_run_json(g, cfg, "compare", started,
                   json{{"t", r.statistic}, {"df", r.df}, {"p", r.p_value}});
    std::cout << "compare: t=" << r.statistic << " df=" << r.df << " p=" << r.p_value << " -> "
              << (r.reject_at_5pct ? "reject" : "fail to reject") << " equal means at 5%\n";
}

void cmd_plotdata(const GlobalArgs& g, const std::string& kind, const std::string& in_dir) {
    const auto started = std::chrono::steady_clock::now();
    RunConfig cfg = resolve_config(g);
    fs::create_directories(g.out_dir);
    const fs::path in(in_dir);
    const fs::path out(g.out_dir);

    if (kind == "rmse-bars") {
        const EvaluationTable table = read_evaluation_csv((in / "rmse.csv").string());
        emit_rmse_bars(table, (out / "plot_rmse_bars.csv").string());
    } else if (kind == "irf") {
        // normalize either constant-parameter or regime IRF files to one schema
        const fs::path candidates[2] = {in / "irf.csv", in / "tvp_irf.csv"};
        bool found = false;
        CsvWriter wr((out / "plot_irf.csv").string());
        wr.header({"shock", "response", "horizon", "regime", "value"});
        for (const auto& c : candidates) {
            if (!fs::exists(c)) continue;
            found = true;
            const CsvTable csv = read_csv(c.string());
            for (const auto& row : csv.rows) {
                for (std::size_t i = 0; i < 5; ++i) wr.field(row[i]);
                wr.end_row();
            }
        }
        if (!found) throw DataError("no irf.csv or tvp_irf.csv under " + in_dir);
    } else if (kind == "cusum") {
        CsvWriter wr((out / "plot_cusum.csv").string());
        wr.header({"series", "index", "statistic", "upper", "lower"});
        bool found = false;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(in))
            if (entry.path().filename().string().rfind("cusum_", 0) == 0) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            found = true;
            const CsvTable csv = read_csv(f.string());
            for (const auto& row : csv.rows) {
                for (std::size_t i = 0; i < 5; ++i) wr.field(row[i]);
                wr.end_row();
            }
        }
        if (!found) throw DataError("no cusum_*.csv files under " + in_dir);
    } else if (kind == "rt-path") {
        const CsvTable csv = read_csv((in / "rt_path.csv").string());
        CsvWriter wr((out / "plot_rt_path.csv").string());
        wr.header({"date", "var_i", "var_j", "value"});
        for (const auto& row : csv.rows) {
            for (std::size_t i = 0; i < 4; ++i) wr.field(row[i]);
            wr.end_row();
        }
    } else {
        throw ConfigError("unknown plotdata kind '" + kind + "'");
    }
    write_run_json(g, cfg, "plotdata", started, json{{"kind", kind}});
    std::cout << "plotdata: " << kind << " written under " << g.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"strata: layered macro-financial time-series modeling"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "flat key = value config file")->expected(1);
    app.add_option("--out", g.out_dir, "output directory (default: out)");
    app.add_option("--data", g.data_path, "input CSV (overrides config)");
    auto* seed_opt = app.add_option("--seed", g.seed, "root RNG seed (overrides config)");

    auto* ingest = app.add_subcommand("ingest", "load a panel, emit normalized CSVs and stats");

    std::string diag_mean = "var";
    int adf_maxlag = 12, pt_lags = 15, arch_lags = 12;
    auto* diagnose = app.add_subcommand("diagnose", "unit-root, cointegration and residual tests");
    diagnose->add_option("--mean", diag_mean, "mean model for residual tests (var|tvp)");
    diagnose->add_option("--adf-maxlag", adf_maxlag, "max augmentation lag");
    diagnose->add_option("--pt-lags", pt_lags, "portmanteau lags");
    diagnose->add_option("--arch-lags", arch_lags, "ARCH-LM lags");

    int max_lag = 12, horizon = 24;
    auto* fitvar = app.add_subcommand("fit-var", "lag selection, VAR fit and impulse responses");
    fitvar->add_option("--max-lag", max_lag, "criteria evaluated for 1..max-lag");
    fitvar->add_option("--horizon", horizon, "IRF horizon");

    int tvp_horizon = 24;
    auto* fittvp = app.add_subcommand("fit-tvp", "time-varying coefficients and regime IRFs");
    fittvp->add_option("--horizon", tvp_horizon, "IRF horizon");

    std::string dcc_mean = "var", dcc_joint = "t";
    bool dcc_asym = false;
    auto* fitdcc = app.add_subcommand("fit-dcc", "marginal GARCH plus correlation dynamics");
    fitdcc->add_option("--mean", dcc_mean, "residual source (var|tvp)");
    fitdcc->add_flag("--asymmetric", dcc_asym, "ADCC recursion");
    fitdcc->add_option("--joint", dcc_joint, "joint distribution (gaussian|t|tcopula)");

    std::string cop_mean = "var", cop_family = "mixture";
    bool cop_fulldim = false;
    auto* fitcop = app.add_subcommand("fit-copula", "Archimedean single or mixture fits");
    fitcop->add_option("--mean", cop_mean, "residual source (var|tvp)");
    fitcop->add_option("--family", cop_family, "clayton|frank|gumbel|mixture");
    fitcop->add_flag("--full-dim", cop_fulldim, "one K-dimensional fit (clayton/gumbel)");

    std::string gof_mean = "var", gof_family = "all";
    int gof_b = 0;
    double gof_tail = -1.0;
    auto* gof = app.add_subcommand("gof", "parametric-bootstrap goodness of fit");
    gof->add_option("--mean", gof_mean, "residual source (var|tvp)");
    gof->add_option("--family", gof_family, "clayton|frank|gumbel|mixture|all");
    gof->add_option("--B", gof_b, "bootstrap replications (default from config)");
    gof->add_option("--tail-threshold", gof_tail, "joint lower-orthant cutoff");

    std::string gpr_mean = "var";
    int gpr_lags_flag = 3;
    bool gpr_noopt = false;
    auto* fitgpr = app.add_subcommand("fit-gpr", "GPR residual models and corrections");
    fitgpr->add_option("--mean", gpr_mean, "residual source (var|tvp)");
    fitgpr->add_option("--lags", gpr_lags_flag, "own-residual lags d");
    fitgpr->add_flag("--no-opt", gpr_noopt, "skip hyperparameter optimization");

    auto* evaluate = app.add_subcommand("evaluate", "rolling out-of-sample RMSE for all models");

    std::string cmp_table, cmp_a, cmp_b;
    auto* compare = app.add_subcommand("compare", "two-sample t-test between model groups");
    compare->add_option("--table", cmp_table, "rmse.csv produced by evaluate")->required();
    compare->add_option("--group-a", cmp_a, "comma-separated model names")->required();
    compare->add_option("--group-b", cmp_b, "comma-separated model names")->required();

    std::string plot_kind, plot_in = "out";
    auto* plotdata = app.add_subcommand("plotdata", "normalize artifacts into plot-ready CSVs");
    plotdata->add_option("--kind", plot_kind, "irf|rmse-bars|cusum|rt-path")->required();
    plotdata->add_option("--in", plot_in, "directory holding upstream artifacts");

    try {
        app.parse(argc, argv);
        g.seed_set = seed_opt->count() > 0;
        if (ingest->parsed()) cmd_ingest(g);
        else if (diagnose->parsed()) cmd_diagnose(g, diag_mean, adf_maxlag, pt_lags, arch_lags);
        else if (fitvar->parsed()) cmd_fit_var(g, max_lag, horizon);
        else if (fittvp->parsed()) cmd_fit_tvp(g, tvp_horizon);
        else if (fitdcc->parsed()) cmd_fit_dcc(g, dcc_mean, dcc_asym, dcc_joint);
        else if (fitcop->parsed()) cmd_fit_copula(g, cop_mean, cop_family, cop_fulldim);
        else if (gof->parsed()) {
            RunConfig cfg = resolve_config(g);
            cmd_gof_impl(g, gof_mean, gof_family, gof_b > 0 ? gof_b : cfg.bootstrap_b,
                         gof_tail >= 0 ? gof_tail : cfg.tail_threshold);
        } else if (fitgpr->parsed()) cmd_fit_gpr(g, gpr_mean, gpr_lags_flag, gpr_noopt);
        else if (evaluate->parsed()) cmd_evaluate(g);
        else if (compare->parsed()) cmd_compare(g, cmp_table, cmp_a, cmp_b);
        else if (plotdata->parsed()) cmd_plotdata(g, plot_kind, plot_in);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 4;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
