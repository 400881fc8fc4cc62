#pragma once

#include "strata/csv.hpp"
#include "strata/dcc.hpp"
#include "strata/pipeline.hpp"
#include "strata/stats.hpp"
#include "strata/tvp.hpp"
#include "strata/var.hpp"

#include <string>
#include <vector>

namespace strata {

/// Long-format IRF rows: shock,response,horizon,regime,value. A constant-
/// parameter model carries the regime label "const".
inline void write_irf_csv(const IrfResult& irf, const std::string& regime, CsvWriter& w) {
    const auto k = static_cast<int>(irf.responses.front().rows());
    auto name = [&](int i) {
        return irf.names.empty() ? "v" + std::to_string(i) : irf.names[static_cast<std::size_t>(i)];
    };
    for (int shock = 0; shock < k; ++shock)
        for (int resp = 0; resp < k; ++resp)
            for (std::size_t h = 0; h < irf.responses.size(); ++h) {
                w.field(name(shock));
                w.field(name(resp));
                w.field(static_cast<int>(h));
                w.field(regime);
                w.field(irf.responses[h](resp, shock));
                w.end_row();
            }
}

inline void emit_irf(const IrfResult& irf, const std::string& path) {
    CsvWriter w(path);
    w.header({"shock", "response", "horizon", "regime", "value"});
    write_irf_csv(irf, "const", w);
}

inline void emit_regime_irfs(const RegimeIrfSet& set, const std::string& path) {
    CsvWriter w(path);
    w.header({"shock", "response", "horizon", "regime", "value"});
    for (std::size_t r = 0; r < set.irfs.size(); ++r) write_irf_csv(set.irfs[r], set.regimes[r], w);
}

inline void emit_rmse_bars(const EvaluationTable& table, const std::string& path) {
    CsvWriter w(path);
    w.header({"model", "variable", "rmse"});
    for (const auto& row : table.rows)
        for (std::size_t j = 0; j < table.variables.size(); ++j) {
            w.field(row.model);
            w.field(table.variables[j]);
            w.field(row.rmse[static_cast<Eigen::Index>(j)]);
            w.end_row();
        }
}

inline void emit_cusum(const CusumPath& path, const std::string& label, const std::string& file) {
    CsvWriter w(file);
    w.header({"series", "index", "statistic", "upper", "lower"});
    for (Eigen::Index i = 0; i < path.statistic_path.size(); ++i) {
        w.field(label);
        w.field(static_cast<int>(i));
        w.field(path.statistic_path[i]);
        w.field(path.upper_band[i]);
        w.field(path.lower_band[i]);
        w.end_row();
    }
}

inline CusumPath read_cusum_csv(const std::string& file) {
    const CsvTable csv = read_csv(file);
    CusumPath p;
    const auto n = static_cast<Eigen::Index>(csv.rows.size());
    p.statistic_path.resize(n);
    p.upper_band.resize(n);
    p.lower_band.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        p.statistic_path[i] = parse_double(csv.rows[static_cast<std::size_t>(i)][2], file);
        p.upper_band[i] = parse_double(csv.rows[static_cast<std::size_t>(i)][3], file);
        p.lower_band[i] = parse_double(csv.rows[static_cast<std::size_t>(i)][4], file);
        if (std::abs(p.statistic_path[i]) > p.upper_band[i]) p.crossed = true;
    }
    return p;
}

/// Long-format conditional correlation path: date,var_i,var_j,value over the
/// strict upper triangle.
inline void emit_rt_path(const CondCovPath& path, const std::vector<std::string>& names,
                         const std::vector<YearMonth>& dates, const std::string& file) {
    CsvWriter w(file);
    w.header({"date", "var_i", "var_j", "value"});
    const auto k = static_cast<int>(path.z.cols());
    for (std::size_t t = 0; t < path.r.size(); ++t)
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                w.field(t < dates.size() ? dates[t].str() : std::to_string(t));
                w.field(names[static_cast<std::size_t>(i)]);
                w.field(names[static_cast<std::size_t>(j)]);
                w.field(path.r[t](i, j));
                w.end_row();
            }
}

}  // namespace strata
