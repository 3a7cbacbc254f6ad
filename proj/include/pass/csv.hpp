#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pass::csv {

// Numbers are written with 17 significant digits so emitted CSVs replay
// bit-exactly.
std::string format_number(double v);

std::vector<std::string> split_line(std::string_view line);

// Parse helpers that name the offending line in their error message.
double parse_double(std::string_view field, long line_number);
long parse_long(std::string_view field, long line_number);

}  // namespace pass::csv
