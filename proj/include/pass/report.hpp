#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pass::report {

struct ResultRow {
    std::string function;
    std::string policy;
    double epsilon = 0.0;
    double pi_d = 0.0;
    double delta = 0.0;
    std::string kind;
    double arl1_mean = 0.0;
    double arl1_se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    long n = 0;
    long censored = 0;
    long discarded_false_alarms = 0;
    bool best_epsilon = false;  // argmin of means within its (pi_d, delta) group
};

std::vector<ResultRow> parse_results_csv(std::istream& in);

// Marks the best-epsilon row per (function, policy, kind, pi_d, delta).
void flag_best_epsilon(std::vector<ResultRow>& rows);

// Console table, one row per cell, with a best-epsilon marker column.
std::string summary_table(const std::vector<ResultRow>& rows);

// ARL-vs-delta series (sorted by delta ascending), one file per
// (function, policy, kind, pi_d, epsilon); returns filename -> content.
std::map<std::string, std::string> series_files(const std::vector<ResultRow>& rows);

}  // namespace pass::report
