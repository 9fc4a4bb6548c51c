#pragma once

#include "ptc/bench/experiment.hpp"
#include "ptc/problems/io.hpp"

#include <istream>
#include <sstream>
#include <string>
#include <vector>

namespace ptc {

/// Report CSV rows kept as text so tables echo the written values verbatim.
struct ReportCells {
    std::string alpha;
    std::string method;
    std::string avg_var;
    std::string avg_opt;
    std::string avg_coverage;
    std::string trials;
    std::string seed;
};

inline std::vector<ReportCells> read_report_csv(std::istream& is) {
    std::string line;
    require(static_cast<bool>(std::getline(is, line)), ErrorCode::ParseError, "report csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == kReportHeader, ErrorCode::ParseError, "report csv: header must be '" + std::string(kReportHeader) + "'");
    std::vector<ReportCells> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto c = split_csv_line(line);
        require(c.size() == 7, ErrorCode::ParseError, "report csv: expected 7 columns");
        for (const auto& cell : c) require(!cell.empty(), ErrorCode::ParseError, "report csv: empty cell");
        rows.push_back({c[0], c[1], c[2], c[3], c[4], c[5], c[6]});
    }
    require(!rows.empty(), ErrorCode::ParseError, "report csv: no data rows");
    return rows;
}

/// Two panels (VaR, coverage), alpha rows by method columns, both in first-appearance order.
inline std::string format_report_table(const std::vector<ReportCells>& rows) {
    std::vector<std::string> alphas;
    std::vector<std::string> methods;
    auto note = [](std::vector<std::string>& v, const std::string& s) {
        if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
    };
    for (const auto& r : rows) {
        note(alphas, r.alpha);
        note(methods, r.method);
    }
    auto lookup = [&](const std::string& a, const std::string& m, bool coverage) -> std::string {
        for (const auto& r : rows)
            if (r.alpha == a && r.method == m) return coverage ? r.avg_coverage : r.avg_var;
        return "-";
    };
    std::ostringstream out;
    for (bool coverage : {false, true}) {
        std::vector<std::vector<std::string>> grid;
        grid.push_back({"alpha"});
        for (const auto& m : methods) grid.back().push_back(m);
        for (const auto& a : alphas) {
            grid.push_back({a});
            for (const auto& m : methods) grid.back().push_back(lookup(a, m, coverage));
        }
        std::vector<std::size_t> width(methods.size() + 1, 0);
        for (const auto& row : grid)
            for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
        if (coverage) out << '\n';
        out << (coverage ? "Average coverage" : "Average VaR") << '\n';
        for (const auto& row : grid) {
            for (std::size_t i = 0; i < row.size(); ++i) {
                if (i) out << "  ";
                out << std::string(width[i] - row[i].size(), ' ') << row[i];
            }
            out << '\n';
        }
    }
    return out.str();
}

}  // namespace ptc
