#include "strata/pipeline.hpp"
#include "strata/plotdata.hpp"
#include "strata/rng.hpp"

#include "table_a1_fixture.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <sstream>

using namespace strata;

namespace {

ReturnPanel synthetic_panel(std::uint64_t seed, int t, int k) {
    Rng rng(seed);
    ReturnPanel p;
    Matrix a = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) a(i, i) = 0.2 + 0.1 * i;
    a(0, k - 1) = 0.15;
    p.values.resize(t, k);
    p.values.row(0).setZero();
    Vector prev = Vector::Zero(k);
    double h = 1.0;
    for (int i = 1; i < t; ++i) {
        Vector e(k);
        h = 0.02 + 0.12 * e.size() * 0.0 + 0.08 * prev.squaredNorm() / k + 0.85 * h;
        for (int j = 0; j < k; ++j) e[j] = std::sqrt(h) * 0.05 * rng.normal();
        prev = a * prev + e;
        p.values.row(i) = prev;
    }
    YearMonth ym{1999, 1};
    for (int i = 0; i < t; ++i) {
        p.dates.push_back(ym);
        ym = ym.next();
    }
    for (int j = 0; j < k; ++j) p.names.push_back("v" + std::to_string(j));
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig small_config() {
    RunConfig cfg;
    cfg.lag = 1;
    cfg.tvp.prior_window = 60;
    cfg.tvp.kappa = 1e-3;
    cfg.gpr_optimize = false;  // heuristic hyperparameters keep the tests quick
    cfg.seed = 42;
    return cfg;
}

}  // namespace

TEST_CASE("model spec parsing round trips and rejects unknowns") {
    for (const std::string name :
         {"var", "var-dcc", "var-adcc", "var-tcopula", "var-mixcopula", "var-gpr", "tvp",
          "tvp-dcc", "tvp-adcc", "tvp-tcopula", "tvp-mixcopula", "tvp-gpr"})
        CHECK(ModelSpec::parse(name).name() == name);
    CHECK_THROWS_AS(ModelSpec::parse("arma"), ConfigError);
    CHECK_THROWS_AS(ModelSpec::parse("var-svm"), ConfigError);
}

TEST_CASE("run config file parsing and overrides") {
    const std::string path = "/tmp/strata_cfg_test.conf";
    {
        std::ofstream out(path);
        out << "# comment\n"
            << "data = /tmp/foo.csv\n"
            << "boundary = 2023-03\n"
            << "lag = 2\n"
            << "tvp.kappa = 0.005\n"
            << "models = var, tvp-gpr\n"
            << "seed = 99\n";
    }
    RunConfig cfg = RunConfig::from_file(path);
    CHECK(cfg.data_path == "/tmp/foo.csv");
    CHECK(cfg.boundary == "2023-03");
    CHECK(cfg.lag == 2);
    CHECK(cfg.tvp.kappa == 0.005);
    REQUIRE(cfg.models.size() == 2);
    CHECK(cfg.models[1] == "tvp-gpr");
    CHECK(cfg.seed == 99);

    cfg.set("lag", "3");
    CHECK(cfg.lag == 3);
    CHECK_THROWS_AS(cfg.set("nonsense", "1"), ConfigError);
    CHECK_THROWS_AS(cfg.set("lag", "abc"), ConfigError);
}

TEST_CASE("score_forecasts oracle and constant-bias cases") {
    Rng rng(1);
    const Matrix realized = rng.normal_matrix(30, 3);
    SECTION("oracle forecasts give zero RMSE") {
        const EvaluationRow row = score_forecasts("oracle", realized, realized);
        for (int j = 0; j < 3; ++j) CHECK(row.rmse[j] == 0.0);
        CHECK(row.mean_rmse == 0.0);
    }
    SECTION("constant bias c gives RMSE |c|") {
        const Matrix biased = realized.array() + 0.25;
        const EvaluationRow row = score_forecasts("biased", biased, realized);
        for (int j = 0; j < 3; ++j)
            CHECK_THAT(row.rmse[j], Catch::Matchers::WithinAbs(0.25, 1e-12));
    }
}

TEST_CASE("rolling evaluate covers the configured model list and is deterministic") {
    const ReturnPanel panel = synthetic_panel(7, 230, 2);
    const SampleSplit sp{220};
    RunConfig cfg = small_config();
    cfg.models = {"var", "tvp", "var-dcc"};

    const EvaluationTable t1 = rolling_evaluate(panel, sp, cfg);
    REQUIRE(t1.rows.size() == 3);
    for (const auto& row : t1.rows) {
        CHECK(row.complete);
        for (Eigen::Index j = 0; j < row.rmse.size(); ++j) CHECK(row.rmse[j] >= 0.0);
    }

    const EvaluationTable t2 = rolling_evaluate(panel, sp, cfg);
    const std::string f1 = "/tmp/strata_eval_1.csv", f2 = "/tmp/strata_eval_2.csv";
    write_evaluation_csv(t1, f1);
    write_evaluation_csv(t2, f2);
    CHECK(slurp(f1) == slurp(f2));

    // read-back round trip
    const EvaluationTable t3 = read_evaluation_csv(f1);
    REQUIRE(t3.rows.size() == t1.rows.size());
    CHECK(t3.row("var").rmse[0] == t1.row("var").rmse[0]);
}

TEST_CASE("no-lookahead: prefix truncation reproduces prefix forecasts") {
    const ReturnPanel full = synthetic_panel(9, 235, 2);
    const SampleSplit sp{220};
    RunConfig cfg = small_config();

    const ReturnPanel prefix = full.head(228);  // drop the last 7 out-of-sample rows

    for (const std::string name : {"var", "tvp", "var-dcc", "tvp-gpr"}) {
        const ModelSpec spec = ModelSpec::parse(name);
        const Matrix f_full = model_forecasts(spec, full, sp, cfg);
        const Matrix f_prefix = model_forecasts(spec, prefix, sp, cfg);
        INFO("model " << name);
        CHECK((f_full.topRows(8) - f_prefix).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("model-list monotonicity: adding a model changes no other row") {
    const ReturnPanel panel = synthetic_panel(11, 228, 2);
    const SampleSplit sp{218};
    RunConfig cfg = small_config();
    cfg.models = {"var"};
    const EvaluationTable only_var = rolling_evaluate(panel, sp, cfg);
    cfg.models = {"var", "tvp"};
    const EvaluationTable both = rolling_evaluate(panel, sp, cfg);
    CHECK(only_var.row("var").rmse == both.row("var").rmse);
}

TEST_CASE("dependence layers produce corrections that differ from the plain mean") {
    const ReturnPanel panel = synthetic_panel(13, 240, 2);
    const SampleSplit sp{225};
    RunConfig cfg = small_config();
    const Matrix base = model_forecasts(ModelSpec::parse("var"), panel, sp, cfg);
    for (const std::string name : {"var-dcc", "var-adcc", "var-mixcopula", "var-gpr"}) {
        const Matrix layered = model_forecasts(ModelSpec::parse(name), panel, sp, cfg);
        INFO("model " << name);
        CHECK((layered - base).cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("compare_models: identical groups and the published-table fixture") {
    EvaluationTable table;
    table.variables = {"DGS10", "UMCSENT", "GEPUCURRENT", "INDPRO_US", "USD_EUR", "APE", "BRENT"};
    auto push = [&](const std::string& name, const std::array<double, 7>& vals) {
        EvaluationRow row;
        row.model = name;
        row.rmse.resize(7);
        for (int j = 0; j < 7; ++j) row.rmse[j] = vals[static_cast<std::size_t>(j)];
        row.mean_rmse = row.rmse.mean();
        table.rows.push_back(std::move(row));
    };
    push("var-mixcopula", fixtures::kVarGarchClayton);
    push("tvp-mixcopula", fixtures::kTvpGarchMixCopula);
    push("var-gpr", fixtures::kVarGpr);
    push("tvp-gpr", fixtures::kTvpGpr);

    SECTION("identical groups give t = 0, p = 1") {
        const TestReport r = compare_models(table, {"var-gpr"}, {"var-gpr"});
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SECTION("copula rows vs GPR rows reproduce the published test") {
        const TestReport r =
            compare_models(table, {"var-mixcopula", "tvp-mixcopula"}, {"var-gpr", "tvp-gpr"});
        CHECK_THAT(r.statistic, Catch::Matchers::WithinAbs(0.1983, 5e-4));
        CHECK_THAT(r.df, Catch::Matchers::WithinAbs(25.809, 5e-3));
        CHECK_THAT(r.p_value, Catch::Matchers::WithinAbs(0.8444, 5e-4));
        CHECK_FALSE(r.reject_at_5pct);
    }
    SECTION("groups far apart are separated with power") {
        EvaluationRow far;
        far.model = "far";
        far.rmse = Vector::Constant(7, 10.0);
        far.mean_rmse = 10.0;
        table.rows.push_back(far);
        const TestReport r = compare_models(table, {"far"}, {"var-gpr", "tvp-gpr"});
        CHECK(r.p_value < 0.001);
    }
    SECTION("empty group is an error") {
        CHECK_THROWS_AS(compare_models(table, {}, {"var-gpr"}), ConfigError);
    }
}

TEST_CASE("plotdata: cusum round trip and rmse-bars cardinality") {
    Rng rng(15);
    Matrix x(120, 2);
    x.col(0).setOnes();
    for (int i = 0; i < 120; ++i) x(i, 1) = rng.normal();
    Vector y(120);
    for (int i = 0; i < 120; ++i) y[i] = 1.0 + 0.5 * x(i, 1) + rng.normal();
    const CusumPath path = cusum(y, x);

    const std::string file = "/tmp/strata_cusum_roundtrip.csv";
    emit_cusum(path, "eq0", file);
    const CusumPath back = read_cusum_csv(file);
    REQUIRE(back.statistic_path.size() == path.statistic_path.size());
    for (Eigen::Index i = 0; i < path.statistic_path.size(); ++i) {
        CHECK(back.statistic_path[i] == path.statistic_path[i]);
        CHECK(back.upper_band[i] == path.upper_band[i]);
    }
    CHECK(back.crossed == path.crossed);

    EvaluationTable table;
    table.variables = {"a", "b", "c"};
    for (const std::string name : {"m1", "m2"}) {
        EvaluationRow row;
        row.model = name;
        row.rmse = Vector::Ones(3);
        row.mean_rmse = 1.0;
        table.rows.push_back(row);
    }
    const std::string bars = "/tmp/strata_bars.csv";
    emit_rmse_bars(table, bars);
    const CsvTable csv = read_csv(bars);
    CHECK(csv.rows.size() == 2 * 3);
}

TEST_CASE("irf plotdata schema") {
    VarModel m;
    m.p = 1;
    m.intercept = Vector::Zero(2);
    Matrix a(2, 2);
    a << 0.5, 0.1, 0.0, 0.4;
    m.lag_coef = {a};
    m.sigma = Matrix::Identity(2, 2);
    m.names = {"x", "y"};
    const IrfResult irf = impulse_response(m, cholesky_identify(m), 3);
    const std::string file = "/tmp/strata_irf.csv";
    emit_irf(irf, file);
    const CsvTable csv = read_csv(file);
    REQUIRE(csv.header.size() == 5);
    CHECK(csv.header[0] == "shock");
    CHECK(csv.header[3] == "regime");
    CHECK(csv.rows.size() == 2 * 2 * 4);
    CHECK(csv.rows.front()[3] == "const");
}
