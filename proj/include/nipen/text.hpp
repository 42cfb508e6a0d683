#pragma once

#include <string>
#include <vector>

namespace nipen {

std::string trim(const std::string& s);
std::string lower(const std::string& s);

// Splits on the delimiter and trims each field; keeps empty fields.
std::vector<std::string> split(const std::string& line, char delim);

// Shortest-round-trip style formatting ("%.17g"): reloading the printed
// text reproduces the double bit-exactly.
std::string format_g17(double v);

// Fixed-point with the given number of decimals, for presentation tables.
std::string format_fixed(double v, int decimals);

double parse_double(const std::string& token, const std::string& context);
long long parse_int(const std::string& token, const std::string& context);

} // namespace nipen
