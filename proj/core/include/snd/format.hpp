#pragma once

#include <string>
#include <vector>

namespace snd {

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

// Fixed-point text with the given number of decimals.
std::string format_fixed(double v, int decimals);

// RFC 4180 quoting, only when needed.
std::string csv_field(const std::string& s);
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace snd
