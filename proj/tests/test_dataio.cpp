#include "strata/dataio.hpp"
#include "strata/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

using namespace strata;

namespace {

std::string write_temp_csv(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/strata_test_" + name;
    std::ofstream out(path);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("load_panel parses, sorts and validates a monthly csv") {
    const auto path = write_temp_csv("basic.csv",
                                     "date,a,b\n"
                                     "2020-02,2.0,20\n"
                                     "2020-01,1.0,10\n"
                                     "2020-03,3.0,30\n");
    const TimeSeriesPanel p = load_panel(path);
    REQUIRE(p.rows() == 3);
    REQUIRE(p.cols() == 2);
    CHECK(p.dates.front().str() == "2020-01");
    CHECK(p.dates.back().str() == "2020-03");
    CHECK(p.values(0, 0) == 1.0);
    CHECK(p.values(2, 1) == 30.0);
}

TEST_CASE("load_panel rejects rows with missing cells and reports them") {
    const auto path = write_temp_csv("missing.csv",
                                     "date,a,b\n"
                                     "2020-01,1.0,10\n"
                                     "2020-02,,20\n"
                                     "2020-03,3.0,30\n");
    LoadReport report;
    CHECK_THROWS_AS(load_panel(path, "date", &report), DataError);  // gap after rejection
    CHECK(report.rejected_rows.size() == 1);

    const auto path2 = write_temp_csv("missing_tail.csv",
                                      "date,a,b\n"
                                      "2020-01,1.0,10\n"
                                      "2020-02,2.0,20\n"
                                      "2020-03,,30\n");
    LoadReport report2;
    const TimeSeriesPanel p = load_panel(path2, "date", &report2);
    CHECK(p.rows() == 2);
    CHECK(report2.rejected_rows.size() == 1);
}

TEST_CASE("load_panel error paths") {
    CHECK_THROWS_AS(load_panel(write_temp_csv("one_row.csv", "date,a\n2020-01,1\n")), DataError);
    CHECK_THROWS_AS(load_panel(write_temp_csv("dup.csv",
                                              "date,a\n2020-03,1\n2020-03,2\n")),
                    DataError);
    CHECK_THROWS_AS(load_panel(write_temp_csv("bad_date.csv", "date,a\nMarch-20,1\n2020-04,2\n")),
                    DataError);
    CHECK_THROWS_AS(load_panel(write_temp_csv("bad_cell.csv", "date,a\n2020-01,x\n2020-02,2\n")),
                    DataError);
}

TEST_CASE("to_log_returns matches analytic cases") {
    TimeSeriesPanel p;
    p.names = {"a"};
    p.dates = {YearMonth{2020, 1}, YearMonth{2020, 2}, YearMonth{2020, 3}};
    p.values.resize(3, 1);

    SECTION("constant series gives zero returns") {
        p.values << 5, 5, 5;
        const ReturnPanel r = to_log_returns(p);
        REQUIRE(r.rows() == 2);
        CHECK(r.values(0, 0) == 0.0);
        CHECK(r.values(1, 0) == 0.0);
        CHECK(r.dates.front().str() == "2020-02");
    }
    SECTION("geometric series gives unit returns") {
        p.values << 1.0, std::exp(1.0), std::exp(2.0);
        const ReturnPanel r = to_log_returns(p);
        CHECK_THAT(r.values(0, 0), Catch::Matchers::WithinAbs(1.0, 1e-14));
        CHECK_THAT(r.values(1, 0), Catch::Matchers::WithinAbs(1.0, 1e-14));
    }
    SECTION("zero level is a domain violation") {
        p.values << 1.0, 0.0, 2.0;
        CHECK_THROWS_AS(to_log_returns(p), DataError);
    }
}

TEST_CASE("round trip: exp-cumulated returns reconstruct levels") {
    Rng rng(77);
    TimeSeriesPanel p;
    p.names = {"a", "b"};
    YearMonth ym{1999, 1};
    p.values.resize(60, 2);
    for (int t = 0; t < 60; ++t) {
        p.dates.push_back(ym);
        ym = ym.next();
        for (int j = 0; j < 2; ++j) p.values(t, j) = std::exp(rng.normal());
    }
    const ReturnPanel r = to_log_returns(p);
    Matrix rebuilt(60, 2);
    rebuilt.row(0) = p.values.row(0);
    for (int t = 1; t < 60; ++t)
        rebuilt.row(t) = rebuilt.row(t - 1).array() * r.values.row(t - 1).array().exp();
    CHECK(((rebuilt - p.values).array().abs() / p.values.array()).maxCoeff() < 1e-10);
}

TEST_CASE("describe moments on seeded normal sample") {
    Rng rng(12345);
    ReturnPanel p;
    p.names = {"z"};
    p.values.resize(10000, 1);
    YearMonth ym{1200, 1};
    for (int t = 0; t < 10000; ++t) {
        p.values(t, 0) = rng.normal();
        p.dates.push_back(ym);
        ym = ym.next();
    }
    const DescriptiveStats s = describe(p);
    CHECK_THAT(s.mean[0], Catch::Matchers::WithinAbs(0.0, 0.05));
    CHECK_THAT(s.stddev[0], Catch::Matchers::WithinAbs(1.0, 0.05));
    CHECK_THAT(s.skewness[0], Catch::Matchers::WithinAbs(0.0, 0.1));
    CHECK_THAT(s.excess_kurtosis[0], Catch::Matchers::WithinAbs(0.0, 0.2));
}

TEST_CASE("describe is exactly symmetric on a two-point sample") {
    ReturnPanel p;
    p.names = {"x"};
    p.values.resize(10, 1);
    YearMonth ym{2000, 1};
    for (int t = 0; t < 10; ++t) {
        p.values(t, 0) = (t % 2 == 0) ? -1.0 : 1.0;
        p.dates.push_back(ym);
        ym = ym.next();
    }
    CHECK(describe(p).skewness[0] == 0.0);
}

TEST_CASE("describe is permutation invariant for mean/std/min/max") {
    Rng rng(9);
    ReturnPanel p;
    p.names = {"x"};
    p.values.resize(50, 1);
    YearMonth ym{2000, 1};
    for (int t = 0; t < 50; ++t) {
        p.values(t, 0) = rng.normal();
        p.dates.push_back(ym);
        ym = ym.next();
    }
    const DescriptiveStats a = describe(p);
    ReturnPanel q = p;
    std::reverse(q.values.col(0).begin(), q.values.col(0).end());
    const DescriptiveStats b = describe(q);
    CHECK_THAT(a.mean[0], Catch::Matchers::WithinAbs(b.mean[0], 1e-14));
    CHECK_THAT(a.stddev[0], Catch::Matchers::WithinAbs(b.stddev[0], 1e-14));
    CHECK(a.min[0] == b.min[0]);
    CHECK(a.max[0] == b.max[0]);
}

TEST_CASE("split partitions rows exactly at the boundary date") {
    ReturnPanel p;
    p.names = {"x"};
    p.values = Matrix::Zero(24, 1);
    YearMonth ym{2021, 1};
    for (int t = 0; t < 24; ++t) {
        p.dates.push_back(ym);
        ym = ym.next();
    }
    const SampleSplit s = split(p, YearMonth{2022, 1});
    CHECK(s.boundary == 12);
    CHECK(p.dates[static_cast<std::size_t>(s.boundary)].str() == "2022-01");

    SECTION("boundary at first date is an error") {
        CHECK_THROWS_AS(split(p, p.dates.front()), DataError);
    }
    SECTION("boundary at last date leaves one out-of-sample row") {
        const SampleSplit tail = split(p, p.dates.back());
        CHECK(p.rows() - tail.boundary == 1);
    }
    SECTION("boundary outside range is an error") {
        CHECK_THROWS_AS(split(p, YearMonth{2030, 1}), DataError);
    }
}
