#include "wiman/text_format.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "wiman/errors.hpp"

namespace wiman {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::runtime_error("format_double: to_chars failed");
  return std::string(buf, end);
}

double parse_double(std::string_view token) {
  if (token == "inf" || token == "+inf") return INFINITY;
  if (token == "-inf") return -INFINITY;
  double value = 0.0;
  const char* first = token.data();
  if (!token.empty() && token.front() == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
    throw UsageError("not a number: '" + std::string(token) + "'");
  return value;
}

long long parse_integer(std::string_view token) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size() || token.empty())
    throw UsageError("not an integer: '" + std::string(token) + "'");
  return value;
}

double parse_radius(std::string_view token) {
  if (!token.empty() && (token.front() == 'e' || token.front() == 'E')) {
    if (token.size() == 1) return std::exp(1.0);
    return std::exp(parse_double(token.substr(1)));
  }
  return parse_double(token);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::vector<double> parse_radius_list(std::string_view csv) {
  std::vector<double> out;
  for (auto part : split(csv, ',')) out.push_back(parse_radius(part));
  return out;
}

}  // namespace wiman
