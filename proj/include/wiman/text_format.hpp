#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wiman {

// Shortest decimal form that parses back to the same double ("inf", "-inf",
// "nan" for non-finite values).
std::string format_double(double x);

// Strict parse of a whole token; throws UsageError on garbage.
double parse_double(std::string_view token);
long long parse_integer(std::string_view token);

// Radius shorthand: "e2" is e^2, "e2.5" is e^2.5, a bare number is itself.
double parse_radius(std::string_view token);
std::vector<double> parse_radius_list(std::string_view csv);

std::vector<std::string_view> split(std::string_view text, char sep);

}  // namespace wiman
