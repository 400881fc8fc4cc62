#pragma once

#include "strata/core.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace strata {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') { field += '"'; ++i; }
            else if (c == '"') quoted = false;
            else field += c;
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}
}  // namespace detail

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    CsvTable t;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (first) {
            for (auto& f : fields) t.header.push_back(detail::trim(f));
            first = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (first) throw DataError("empty file: " + path);
    return t;
}

/// Row-oriented CSV writer with round-trip-exact float formatting, so repeated
/// runs under the same inputs produce byte-identical files.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw DataError("cannot open file for writing: " + path);
    }

    void header(const std::vector<std::string>& names) { write_row_strings(names); }

    CsvWriter& field(const std::string& s) { fields_.push_back(s); return *this; }
    CsvWriter& field(double x) { fields_.push_back(fmt_double(x)); return *this; }
    CsvWriter& field(int x) { fields_.push_back(std::to_string(x)); return *this; }
    CsvWriter& field(std::size_t x) { fields_.push_back(std::to_string(x)); return *this; }

    void end_row() {
        write_row_strings(fields_);
        fields_.clear();
    }

private:
    void write_row_strings(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

    std::ofstream out_;
    std::vector<std::string> fields_;
};

inline double parse_double(const std::string& s, const std::string& context) {
    const std::string t = detail::trim(s);
    if (t.empty()) throw DataError("missing value in " + context);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end == t.c_str() || *end != '\0') throw DataError("non-numeric cell '" + t + "' in " + context);
    return v;
}

}  // namespace strata
