#include "wiman/random_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "wiman/errors.hpp"
#include "wiman/log_math.hpp"

namespace wiman {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  return w < 0.0 ? w + kTwoPi : w;
}

}  // namespace

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::rademacher: return "rademacher";
    case SystemKind::steinhaus: return "steinhaus";
    case SystemKind::complex_ms: return "complex_ms";
    case SystemKind::unit: return "unit";
  }
  return "?";
}

SystemKind parse_system_kind(std::string_view name) {
  for (auto k : {SystemKind::rademacher, SystemKind::steinhaus, SystemKind::complex_ms, SystemKind::unit})
    if (to_string(k) == name) return k;
  throw UsageError("unknown coefficient system '" + std::string(name) + "'");
}

std::complex<double> Multiplier::value() const {
  const double m = std::exp(log_modulus);
  // Exact values on the axes so Rademacher draws are exactly +-1.
  if (phase == 0.0) return {m, 0.0};
  if (phase == std::numbers::pi) return {-m, 0.0};
  return std::polar(m, phase);
}

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
  return static_cast<double>(counter_hash(seed, stream, counter) >> 11) * 0x1.0p-53;
}

Multiplier draw_multiplier(const CoefficientSystem& sys, std::uint64_t stream, std::uint64_t counter) {
  const std::uint64_t h = counter_hash(sys.seed, stream, counter);
  switch (sys.kind) {
    case SystemKind::rademacher:
      return {0.0, (h >> 63) ? std::numbers::pi : 0.0};
    case SystemKind::steinhaus:
      return {0.0, kTwoPi * (static_cast<double>(h >> 11) * 0x1.0p-53)};
    case SystemKind::complex_ms: {
      // (X + iY)/sqrt(2) has phase pi/4 + quadrant * pi/2.
      const bool x_neg = (h >> 63) & 1U;
      const bool y_neg = (h >> 62) & 1U;
      int quadrant = !x_neg && !y_neg ? 0 : x_neg && !y_neg ? 1 : x_neg && y_neg ? 2 : 3;
      return {0.0, std::numbers::pi / 4.0 + quadrant * std::numbers::pi / 2.0};
    }
    case SystemKind::unit:
      return {0.0, 0.0};
  }
  return {};
}

SystemDraw draw_system(const CoefficientSystem& sys, std::shared_ptr<const IndexTable> indices,
                       std::uint64_t stream) {
  if (!indices) throw UsageError("null index table");
  if (!indices->is_canonical()) throw UsageError("draw_system: indices must be distinct");
  SystemDraw draw{indices, {}};
  draw.multipliers.reserve(indices->size());
  for (std::size_t i = 0; i < indices->size(); ++i)
    draw.multipliers.push_back(draw_multiplier(sys, stream, graded_lex_rank((*indices)[i])));
  return draw;
}

SystemDraw draw_system(const CoefficientSystem& sys, std::span<const MultiIndex> indices, std::uint64_t stream) {
  if (indices.empty()) return {std::make_shared<IndexTable>(1), {}};
  std::vector<MultiIndex> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end(), [](const MultiIndex& a, const MultiIndex& b) {
    return graded_lex_less(a.entries(), b.entries());
  });
  auto table = std::make_shared<IndexTable>(sorted.front().dimension());
  table->reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) throw UsageError("draw_system: duplicate multi-index");
    table->push_back(sorted[i].entries());
  }
  return draw_system(sys, std::move(table), stream);
}

MultiPowerSeries randomize(const MultiPowerSeries& f, const SystemDraw& draw) {
  if (!draw.indices || draw.multipliers.size() != draw.indices->size())
    throw UsageError("randomize: malformed draw");
  const bool aligned = draw.indices == f.shared_indices() || *draw.indices == f.indices();
  if (!aligned && draw.indices->dimension() != f.dimension())
    throw DomainError("randomize: draw dimension does not match the series");

  std::vector<double> log_moduli(f.size());
  std::vector<double> phases(f.size());
  bool shrinks = false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    std::size_t k = i;
    if (!aligned) {
      auto found = draw.indices->find(f.indices()[i]);
      if (!found) throw DomainError("randomize: missing multiplier for a stored index");
      k = *found;
    }
    const Multiplier& m = draw.multipliers[k];
    if (m.log_modulus > 0.0) throw DomainError("randomize: multiplier modulus exceeds 1");
    if (m.log_modulus == kNegInf) throw DomainError("randomize: zero multiplier");
    shrinks = shrinks || m.log_modulus < 0.0;
    log_moduli[i] = f.log_moduli()[i] + m.log_modulus;
    phases[i] = wrap_phase(f.phases()[i] + m.phase);
  }
  if (shrinks && f.certificate())
    throw DomainError("randomize: non-unit multipliers would invalidate the tail certificate");
  return MultiPowerSeries(f.shared_indices(), f.truncation(), std::move(log_moduli), std::move(phases),
                          f.certificate());
}

MultiPowerSeries randomize(const MultiPowerSeries& f, const CoefficientSystem& sys, std::uint64_t stream) {
  return randomize(f, draw_system(sys, f.shared_indices(), stream));
}

double ms_orthogonality_stat(SystemKind kind, std::uint64_t seed, std::span<const std::uint64_t> index_tuple,
                             int trials, MsPart part) {
  if (index_tuple.empty()) throw UsageError("ms_orthogonality_stat: empty index tuple");
  if (trials < 100) throw UsageError("ms_orthogonality_stat: need at least 100 trials");
  for (std::size_t j = 0; j < index_tuple.size(); ++j) {
    if (index_tuple[j] < 1) throw UsageError("ms_orthogonality_stat: indices start at 1");
    if (j > 0 && index_tuple[j] <= index_tuple[j - 1])
      throw UsageError("ms_orthogonality_stat: indices must be strictly increasing");
  }
  const CoefficientSystem sys{kind, seed};
  std::complex<double> sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::complex<double> prod = 1.0;
    for (auto i : index_tuple) {
      std::complex<double> z = draw_multiplier(sys, static_cast<std::uint64_t>(t), i).value();
      if (part == MsPart::real) z = z.real();
      if (part == MsPart::imag) z = z.imag();
      prod *= z;
    }
    sum += prod;
  }
  return std::abs(sum / static_cast<double>(trials));
}

}  // namespace wiman
