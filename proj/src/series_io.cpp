#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "wiman/errors.hpp"
#include "wiman/power_series.hpp"
#include "wiman/text_format.hpp"

namespace wiman {

namespace {

constexpr std::string_view kCertificateTag = "# tail_certificate";

std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

}  // namespace

void write_series(std::ostream& out, const MultiPowerSeries& f) {
  out << f.dimension() << ' ' << f.truncation() << '\n';
  if (const auto& cert = f.certificate()) {
    out << kCertificateTag;
    for (double r : cert->radius_limit) out << ' ' << format_double(r);
    out << ' ' << format_double(cert->log_relative_bound) << '\n';
  }
  const IndexTable& table = f.indices();
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (auto e : table[i]) out << e << ' ';
    out << format_double(f.log_moduli()[i]) << ' ' << format_double(f.phases()[i]) << '\n';
  }
}

MultiPowerSeries read_series(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw UsageError("series file: missing header");
  auto header = tokens_of(line);
  if (header.size() != 2) throw UsageError("series file: header must be 'p N'");
  long long p = parse_integer(header[0]);
  long long N = parse_integer(header[1]);
  if (p < 1 || p > 64) throw UsageError("series file: dimension out of range");
  if (N < 0) throw UsageError("series file: negative truncation");

  std::optional<TailCertificate> cert;
  std::vector<Term> terms;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind(kCertificateTag, 0) == 0) {
      auto toks = tokens_of(line.substr(kCertificateTag.size()));
      if (toks.size() != static_cast<std::size_t>(p) + 1)
        throw UsageError("series file: malformed tail certificate on line " + std::to_string(line_no));
      TailCertificate c;
      for (long long j = 0; j < p; ++j) c.radius_limit.push_back(parse_double(toks[static_cast<std::size_t>(j)]));
      c.log_relative_bound = parse_double(toks.back());
      cert = std::move(c);
      continue;
    }
    auto toks = tokens_of(line);
    if (toks.empty() || toks.front().starts_with('#')) continue;
    if (toks.size() != static_cast<std::size_t>(p) + 2)
      throw UsageError("series file: line " + std::to_string(line_no) + " must have p + 2 fields");
    std::vector<std::int32_t> n;
    for (long long j = 0; j < p; ++j) {
      long long v = parse_integer(toks[static_cast<std::size_t>(j)]);
      if (v < 0 || v > INT32_MAX) throw UsageError("series file: bad exponent on line " + std::to_string(line_no));
      n.push_back(static_cast<std::int32_t>(v));
    }
    terms.push_back({MultiIndex(std::move(n)), parse_double(toks[static_cast<std::size_t>(p)]),
                     parse_double(toks[static_cast<std::size_t>(p) + 1])});
  }
  return MultiPowerSeries(static_cast<int>(p), N, std::move(terms), std::move(cert));
}

void save_series(const std::string& path, const MultiPowerSeries& f) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write series file " + path);
  write_series(out, f);
}

MultiPowerSeries load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open series file " + path);
  return read_series(in);
}

}  // namespace wiman
