#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wiman/bounds.hpp"
#include "wiman/power_series.hpp"
#include "wiman/torus_max.hpp"

namespace wiman {

// k^p log-spaced boxes covering prod_i [lo_i, hi_i]. Cell ids run with axis 1
// fastest: id = c_1 + k c_2 + k^2 c_3 + ...
class RadialGrid {
 public:
  RadialGrid(std::vector<double> lo, std::vector<double> hi, int cells_per_axis);

  int dimension() const { return static_cast<int>(lo_.size()); }
  int cells_per_axis() const { return k_; }
  std::size_t cell_count() const { return count_; }
  std::span<const double> lo() const { return lo_; }
  std::span<const double> hi() const { return hi_; }

  std::vector<int> coordinates(std::size_t id) const;
  // Centre of the cell in log coordinates, mapped back to radii.
  RadiusVector center(std::size_t id) const;
  // prod_i (ln hi_i - ln lo_i) / k
  double cell_log_volume() const;
  double scanned_log_measure() const { return cell_log_volume() * static_cast<double>(count_); }

 private:
  std::vector<double> lo_, hi_;
  int k_;
  std::size_t count_;
};

// eq1: M <= mu ln^kappa mu, kappa = params.exponent or 1/2 + eps.
// eq3 / eq5: M <= mu * bracket^{1/2+delta} / ^{1/4+delta}.
// thm11b_half / star_quarter: M <= mu ln^{p/2+delta} mu / ln^{p/4+delta} mu.
// eq9_tail: tail beyond d(r) <= mu.
// lemma23: r_s d/dr_s ln M <= h(.., ln M, ..) on every axis.
enum class Predicate { eq1, eq3, eq5, star_quarter, thm11b_half, eq9_tail, lemma23 };

std::string_view to_string(Predicate predicate);
Predicate parse_predicate(std::string_view name);

struct ScanRow {
  std::size_t cell_id;
  std::vector<double> radii;
  double lhs_log;
  double rhs_log;
  bool flagged;
};

struct ExceptionalReport {
  std::vector<std::size_t> flagged;  // ascending
  double flagged_log_measure;
  double scanned_log_measure;
  std::string predicate_name;
  std::vector<ScanRow> rows;  // one per cell, by id
};

// Smallest nominal truncation the scan accepts: ceil(2 max_cells d(r)).
std::int64_t required_truncation(const MultiPowerSeries& f, const RadialGrid& grid, double delta2);

// Evaluates the predicate at every cell centre. Each cell is independent;
// the report does not depend on `workers`.
ExceptionalReport scan(const MultiPowerSeries& f, const RadialGrid& grid, Predicate predicate,
                       const BoundParams& params = {}, const TorusBudget& budget = {}, unsigned workers = 1);

// Total log-volume of a set of cells (duplicates count once).
double log_measure(std::span<const std::size_t> cells, const RadialGrid& grid);

struct FitSample {
  double x;
  double y;
};

struct ExponentFit {
  double slope;
  double intercept;
  double r2;
  std::size_t sample_count;
};

// Ordinary least squares y = slope x + intercept. Needs at least 10 samples
// spread over at least 1.5 in x.
ExponentFit exponent_fit(std::span<const FitSample> samples);

// (x, y) = (ln ln mu, ln M - ln mu) for p = 1 and (ln bracket, ln M - ln mu)
// for p >= 2, at each radius vector.
std::vector<FitSample> wiman_samples(const MultiPowerSeries& f, std::span<const RadiusVector> radii,
                                     const TorusBudget& budget = {});

}  // namespace wiman
