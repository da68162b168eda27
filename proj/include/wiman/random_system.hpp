#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "wiman/multi_index.hpp"
#include "wiman/power_series.hpp"

namespace wiman {

// rademacher: independent +-1.  steinhaus: exp(2 pi i w), w ~ U[0,1).
// complex_ms: (X + iY)/sqrt(2) with X, Y independent Rademacher.
// unit: every multiplier is +1 (deterministic control, not a multiplicative
// system).
enum class SystemKind { rademacher, steinhaus, complex_ms, unit };

std::string_view to_string(SystemKind kind);
SystemKind parse_system_kind(std::string_view name);

struct CoefficientSystem {
  SystemKind kind = SystemKind::steinhaus;
  std::uint64_t seed = 0;
};

// Z = exp(log_modulus + i phase). Every built-in kind has log_modulus == 0.
struct Multiplier {
  double log_modulus = 0.0;
  double phase = 0.0;

  std::complex<double> value() const;
};

// Counter-based stream: a pure function of (seed, stream, counter).
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

Multiplier draw_multiplier(const CoefficientSystem& sys, std::uint64_t stream, std::uint64_t counter);

// One multiplier per index, aligned with `indices` by position.
struct SystemDraw {
  std::shared_ptr<const IndexTable> indices;
  std::vector<Multiplier> multipliers;
};

// Multiplier for n is keyed on (seed, stream, graded-lex rank of n), so the
// draw does not depend on the order in which indices are listed. `stream`
// separates independent realisations (one per Monte Carlo trial).
SystemDraw draw_system(const CoefficientSystem& sys, std::shared_ptr<const IndexTable> indices,
                       std::uint64_t stream = 0);
SystemDraw draw_system(const CoefficientSystem& sys, std::span<const MultiIndex> indices, std::uint64_t stream = 0);

// a_n -> a_n Z_n for every stored n.
MultiPowerSeries randomize(const MultiPowerSeries& f, const SystemDraw& draw);

// Convenience: draw over f's own index table and randomize.
MultiPowerSeries randomize(const MultiPowerSeries& f, const CoefficientSystem& sys, std::uint64_t stream = 0);

enum class MsPart { whole, real, imag };

// |(1/T) sum_t prod_j X_{i_j}(t)| over T independent realisations; the
// variables X_i are the system's single-subscript sequence (counter = i).
double ms_orthogonality_stat(SystemKind kind, std::uint64_t seed, std::span<const std::uint64_t> index_tuple,
                             int trials, MsPart part = MsPart::whole);

}  // namespace wiman
