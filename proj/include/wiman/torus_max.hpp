#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wiman/power_series.hpp"
#include "wiman/random_system.hpp"

namespace wiman {

// Search effort for max_modulus.
//  grid_per_axis: floor on the dense grid size per axis; rounded up to a power
//    of two and never below the Nyquist size of the significant window.
//  refine_steps: coordinate-ascent sweeps (golden section per angle).
//  sample_count: random starts in sampled mode (p >= 3).
//  oversample: power-of-two multiplier on the Nyquist grid.
// Raising any field never lowers the estimate: grids are nested powers of two
// and every coarser level's candidates are still refined.
struct TorusBudget {
  int grid_per_axis = 0;
  int refine_steps = 3;
  int sample_count = 256;
  int oversample = 1;

  TorusBudget doubled() const;
};

enum class SupMode { dense, sampled };

// log_value is a certified lower bound of ln M_f(r). It lies between
// ln mu_f(r) and sum_modulus(f, r).
struct SupEstimate {
  double log_value;
  std::vector<double> argmax_angles;
  SupMode mode;
};

// max |f(r_1 e^{i t_1}, ..., r_p e^{i t_p})| over the torus. Dense tensor grid
// (FFT) for p <= 2, random multi-start for p >= 3; both refined by coordinate
// ascent. Terms below e^-40 of the maximal term are dropped from the search
// and their total mass is subtracted, so the result stays a lower bound.
SupEstimate max_modulus(const MultiPowerSeries& f, const RadiusVector& r, const TorusBudget& budget = {});

// ln |f| at one point of the torus (direct summation).
double log_modulus_at(const MultiPowerSeries& f, const RadiusVector& r, std::span<const double> angles);

// ln S(r), S(r)^2 = sum |a_n|^2 r^{2n}; -inf for the zero series.
double s_norm(const MultiPowerSeries& f, const RadiusVector& r);

struct TailMcConfig {
  std::int64_t N = 64;
  int p = 1;
  double beta = 1.0;
  int trials = 500;
  CoefficientSystem system{SystemKind::steinhaus, 0};
  TorusBudget budget{};
  std::optional<double> threshold;  // A; defaults to the fitted quantile
  unsigned workers = 1;
};

struct TailMcRow {
  int trial;
  double W;
  double S;
  double ratio;
};

struct TailMcResult {
  double quantile_ratio;
  double exceed_fraction;
  double threshold;
  std::vector<TailMcRow> rows;  // sorted by trial
};

// W_N = max over the torus of |sum_{|n|<=N} X_n e^{i n.t}| (unit coefficients)
// for independent draws; reports the empirical (1 - N^-beta) quantile of
// W_N / (S_N ln^{1/2} N) and the fraction of trials above the threshold.
TailMcResult tail_probability_mc(const TailMcConfig& config);

// Order statistic at position ceil(level * n) - 1 of the sorted values.
double empirical_quantile(std::vector<double> values, double level);

}  // namespace wiman
