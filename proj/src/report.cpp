#include "pass/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <sstream>

#include "pass/csv.hpp"
#include "pass/errors.hpp"

namespace pass::report {

namespace {

std::string trim_number(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::vector<ResultRow> parse_results_csv(std::istream& in) {
    std::string line;
    long line_number = 0;
    if (!std::getline(in, line)) throw ParseError("results: empty file");
    ++line_number;
    const auto header = csv::split_line(line);
    const std::vector<std::string> expected = {
        "function", "policy", "epsilon", "pi_d", "delta", "kind", "arl1_mean", "arl1_se",
        "ci_lo", "ci_hi", "n", "censored", "discarded_false_alarms"};
    if (std::vector<std::string>(header.begin(), header.end()) != expected) {
        throw ParseError("results: unexpected header '" + line + "'");
    }
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        const auto f = csv::split_line(line);
        if (f.size() != expected.size()) {
            throw ParseError("line " + std::to_string(line_number) + ": expected " +
                             std::to_string(expected.size()) + " fields");
        }
        ResultRow row;
        row.function = f[0];
        row.policy = f[1];
        row.epsilon = csv::parse_double(f[2], line_number);
        row.pi_d = csv::parse_double(f[3], line_number);
        row.delta = csv::parse_double(f[4], line_number);
        row.kind = f[5];
        row.arl1_mean = csv::parse_double(f[6], line_number);
        row.arl1_se = csv::parse_double(f[7], line_number);
        row.ci_lo = csv::parse_double(f[8], line_number);
        row.ci_hi = csv::parse_double(f[9], line_number);
        row.n = csv::parse_long(f[10], line_number);
        row.censored = csv::parse_long(f[11], line_number);
        row.discarded_false_alarms = csv::parse_long(f[12], line_number);
        rows.push_back(std::move(row));
    }
    return rows;
}

void flag_best_epsilon(std::vector<ResultRow>& rows) {
    std::map<std::string, std::size_t> best;
    const auto group_key = [](const ResultRow& row) {
        return row.function + '|' + row.policy + '|' + row.kind + '|' + trim_number(row.pi_d) +
               '|' + trim_number(row.delta);
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string key = group_key(rows[i]);
        const auto it = best.find(key);
        if (it == best.end() || rows[i].arl1_mean < rows[it->second].arl1_mean) {
            best[key] = i;
        }
    }
    for (auto& row : rows) row.best_epsilon = false;
    for (const auto& [key, idx] : best) rows[idx].best_epsilon = true;
}

std::string summary_table(const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "function" << std::setw(16) << "policy"
       << std::setw(12) << "kind" << std::right << std::setw(7) << "pi_d" << std::setw(7)
       << "delta" << std::setw(7) << "eps" << std::setw(10) << "ARL1" << std::setw(9) << "SE"
       << std::setw(6) << "best" << '\n';
    for (const auto& row : rows) {
        os << std::left << std::setw(12) << row.function << std::setw(16) << row.policy
           << std::setw(12) << row.kind << std::right << std::setw(7) << trim_number(row.pi_d)
           << std::setw(7) << trim_number(row.delta) << std::setw(7)
           << trim_number(row.epsilon) << std::setw(10) << std::fixed << std::setprecision(2)
           << row.arl1_mean << std::setw(9) << row.arl1_se << std::setw(6)
           << (row.best_epsilon ? "*" : "") << '\n';
        os.unsetf(std::ios::fixed);
        os << std::setprecision(6);
    }
    return os.str();
}

std::map<std::string, std::string> series_files(const std::vector<ResultRow>& rows) {
    std::map<std::string, std::vector<ResultRow>> groups;
    for (const auto& row : rows) {
        const std::string name = "series_" + row.function + "_" + row.policy + "_" + row.kind +
                                 "_pi" + trim_number(row.pi_d) + "_eps" +
                                 trim_number(row.epsilon) + ".csv";
        groups[name].push_back(row);
    }
    std::map<std::string, std::string> files;
    for (auto& [name, group] : groups) {
        std::stable_sort(group.begin(), group.end(),
                         [](const ResultRow& a, const ResultRow& b) { return a.delta < b.delta; });
        std::ostringstream os;
        os << "delta,arl1_mean,arl1_se,ci_lo,ci_hi\n";
        for (const auto& row : group) {
            os << csv::format_number(row.delta) << ',' << csv::format_number(row.arl1_mean)
               << ',' << csv::format_number(row.arl1_se) << ',' << csv::format_number(row.ci_lo)
               << ',' << csv::format_number(row.ci_hi) << '\n';
        }
        files[name] = os.str();
    }
    return files;
}

}  // namespace pass::report
