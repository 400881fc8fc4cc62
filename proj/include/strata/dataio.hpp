#pragma once

#include "strata/core.hpp"
#include "strata/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace strata {

/// Calendar month label. Input dates are normalized to month starts.
struct YearMonth {
    int year = 0;
    int month = 1;  // 1..12

    static YearMonth parse(const std::string& s) {
        // accepts YYYY-MM or YYYY-MM-DD
        if (s.size() < 7 || s[4] != '-') throw DataError("unparseable date '" + s + "'");
        YearMonth ym;
        try {
            ym.year = std::stoi(s.substr(0, 4));
            ym.month = std::stoi(s.substr(5, 2));
        } catch (const std::exception&) {
            throw DataError("unparseable date '" + s + "'");
        }
        if (ym.month < 1 || ym.month > 12) throw DataError("unparseable date '" + s + "'");
        if (s.size() > 7 && s[7] != '-') throw DataError("unparseable date '" + s + "'");
        return ym;
    }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
        return buf;
    }

    int index() const { return year * 12 + (month - 1); }
    YearMonth next() const { return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1}; }

    friend bool operator==(const YearMonth& a, const YearMonth& b) { return a.index() == b.index(); }
    friend bool operator<(const YearMonth& a, const YearMonth& b) { return a.index() < b.index(); }
    friend bool operator<=(const YearMonth& a, const YearMonth& b) { return a.index() <= b.index(); }
};

/// Dated multivariate level panel; rows are strictly increasing consecutive months.
struct TimeSeriesPanel {
    std::vector<YearMonth> dates;
    std::vector<std::string> names;
    Matrix values;  // T x K

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        throw ConfigError("unknown variable '" + name + "'");
    }

    /// Reorder columns; every requested name must exist.
    TimeSeriesPanel reordered(const std::vector<std::string>& order) const {
        TimeSeriesPanel out;
        out.dates = dates;
        out.names = order;
        out.values.resize(rows(), static_cast<Eigen::Index>(order.size()));
        for (std::size_t j = 0; j < order.size(); ++j)
            out.values.col(static_cast<Eigen::Index>(j)) = values.col(column(order[j]));
        return out;
    }
};

/// Log-return panel; row t holds log(level[t+1]/level[t]) and carries the later
/// month's date.
struct ReturnPanel {
    std::vector<YearMonth> dates;
    std::vector<std::string> names;
    Matrix values;  // (T-1) x K

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    ReturnPanel head(Eigen::Index n) const {
        ReturnPanel out;
        out.dates.assign(dates.begin(), dates.begin() + n);
        out.names = names;
        out.values = values.topRows(n);
        return out;
    }
};

struct SampleSplit {
    Eigen::Index boundary = 0;  // rows [0, boundary) in-sample, [boundary, T) out-of-sample
};

struct DescriptiveStats {
    std::vector<std::string> names;
    Vector mean, stddev, skewness, excess_kurtosis, min, max;
};

struct LoadReport {
    std::vector<std::string> rejected_rows;  // human-readable description per dropped row
};

inline TimeSeriesPanel load_panel(const std::string& path, const std::string& date_column = "date",
                                  LoadReport* report = nullptr) {
    const CsvTable csv = read_csv(path);
    const int dcol = csv.column(date_column);
    if (dcol < 0) throw DataError("date column '" + date_column + "' not found in " + path);

    std::vector<std::string> names;
    std::vector<int> value_cols;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
        if (static_cast<int>(j) == dcol) continue;
        names.push_back(csv.header[j]);
        value_cols.push_back(static_cast<int>(j));
    }
    if (names.empty()) throw DataError("no value columns in " + path);

    struct Row { YearMonth ym; std::vector<double> v; };
    std::vector<Row> rows;
    LoadReport local;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& raw = csv.rows[r];
        if (raw.size() != csv.header.size())
            throw DataError("row " + std::to_string(r + 2) + " has " + std::to_string(raw.size()) +
                            " fields, expected " + std::to_string(csv.header.size()));
        const YearMonth ym = YearMonth::parse(detail::trim(raw[dcol]));
        bool missing = false;
        for (int c : value_cols)
            if (detail::trim(raw[c]).empty()) { missing = true; break; }
        if (missing) {
            local.rejected_rows.push_back("row " + std::to_string(r + 2) + " (" + ym.str() +
                                          "): missing value");
            continue;
        }
        Row row;
        row.ym = ym;
        for (int c : value_cols)
            row.v.push_back(parse_double(raw[c], "row " + std::to_string(r + 2) + ", column '" +
                                                     csv.header[c] + "'"));
        rows.push_back(std::move(row));
    }
    if (report) *report = local;

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.ym < b.ym; });
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].ym == rows[i - 1].ym)
            throw DataError("duplicate date " + rows[i].ym.str());
    if (rows.size() < 2) throw DataError("fewer than 2 usable rows");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].ym.index() != rows[i - 1].ym.index() + 1)
            throw DataError("non-monthly gap between " + rows[i - 1].ym.str() + " and " +
                            rows[i].ym.str());

    TimeSeriesPanel panel;
    panel.names = names;
    panel.values.resize(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        panel.dates.push_back(rows[i].ym);
        for (std::size_t j = 0; j < names.size(); ++j)
            panel.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].v[j];
    }
    return panel;
}

inline ReturnPanel to_log_returns(const TimeSeriesPanel& panel) {
    if (panel.rows() < 2) throw DataError("need at least 2 rows to compute returns");
    if ((panel.values.array() <= 0.0).any())
        throw DataError("non-positive level encountered; log-returns undefined");
    ReturnPanel out;
    out.names = panel.names;
    out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
    const Eigen::Index t = panel.rows() - 1;
    out.values = panel.values.bottomRows(t).array().log().matrix() -
                 panel.values.topRows(t).array().log().matrix();
    return out;
}

namespace detail {
template <class Panel>
DescriptiveStats describe_matrix(const Panel& p) {
    if (p.rows() < 4) throw DataError("describe: need at least 4 rows");
    const Eigen::Index k = p.cols();
    DescriptiveStats s;
    s.names = p.names;
    s.mean.resize(k); s.stddev.resize(k); s.skewness.resize(k);
    s.excess_kurtosis.resize(k); s.min.resize(k); s.max.resize(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const Vector col = p.values.col(j);
        s.mean[j] = col.mean();
        s.stddev[j] = stddev(col);
        s.skewness[j] = skewness(col);
        s.excess_kurtosis[j] = excess_kurtosis(col);
        s.min[j] = col.minCoeff();
        s.max[j] = col.maxCoeff();
    }
    return s;
}
}  // namespace detail

inline DescriptiveStats describe(const TimeSeriesPanel& p) { return detail::describe_matrix(p); }
inline DescriptiveStats describe(const ReturnPanel& p) { return detail::describe_matrix(p); }

/// First out-of-sample row is the first return dated >= boundary_date.
inline SampleSplit split(const ReturnPanel& panel, const YearMonth& boundary_date) {
    if (panel.rows() < 2) throw DataError("split: need at least 2 return rows");
    if (!(panel.dates.front() < boundary_date) || panel.dates.back() < boundary_date)
        throw DataError("split boundary " + boundary_date.str() + " outside panel range " +
                        panel.dates.front().str() + ".." + panel.dates.back().str());
    Eigen::Index b = 0;
    while (b < panel.rows() && panel.dates[static_cast<std::size_t>(b)] < boundary_date) ++b;
    if (b == 0 || b >= panel.rows())
        throw DataError("split boundary leaves an empty sample side");
    return SampleSplit{b};
}

}  // namespace strata
