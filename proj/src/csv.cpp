#include "pass/csv.hpp"

#include <cstdio>

#include "pass/errors.hpp"

namespace pass::csv {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, long line_number) {
    try {
        std::size_t used = 0;
        const std::string s(field);
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_number) + ": expected a number, got '" +
                         std::string(field) + "'");
    }
}

long parse_long(std::string_view field, long line_number) {
    try {
        std::size_t used = 0;
        const std::string s(field);
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_number) +
                         ": expected an integer, got '" + std::string(field) + "'");
    }
}

}  // namespace pass::csv
