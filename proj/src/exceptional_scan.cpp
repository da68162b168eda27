#include "wiman/exceptional_scan.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wiman/errors.hpp"
#include "wiman/parallel.hpp"

namespace wiman {

namespace {

constexpr double kEq9Slack = 1e-12;

struct Sides {
  double lhs;
  double rhs;
};

Sides evaluate(const MultiPowerSeries& f, const RadiusVector& r, Predicate predicate, const BoundParams& params,
               const TorusBudget& budget) {
  const double mu = maximal_term(f, r).log_value;
  auto sup = [&] { return max_modulus(f, r, budget).log_value; };
  switch (predicate) {
    case Predicate::eq1:
      return {sup(), rhs_power(mu, params.exponent.value_or(0.5 + params.eps))};
    case Predicate::eq3:
      return {sup(), rhs_multivariate(mu, r, params.delta, BracketPower::half)};
    case Predicate::eq5:
      return {sup(), rhs_multivariate(mu, r, params.delta, BracketPower::quarter)};
    case Predicate::star_quarter:
      return {sup(), rhs_reduced(mu, f.dimension(), params.delta, BracketPower::quarter)};
    case Predicate::thm11b_half:
      return {sup(), rhs_reduced(mu, f.dimension(), params.delta, BracketPower::half)};
    case Predicate::eq9_tail:
      return {tail_sum(f, r, tail_cut_index_from(mu, r, params.delta2)), mu};
    case Predicate::lemma23: {
      const double lm = sum_modulus(f, r);
      Sides worst{0.0, 0.0};
      double margin = -std::numeric_limits<double>::infinity();
      for (int s = 0; s < f.dimension(); ++s) {
        const double lhs = std::log(partial_log_derivative(f, r, s));
        const double rhs = std::log(lemma23_rhs(lm, r, s, params.delta1));
        if (lhs - rhs > margin) {
          margin = lhs - rhs;
          worst = {lhs, rhs};
        }
      }
      return worst;
    }
  }
  throw UsageError("unknown predicate");
}

}  // namespace

RadialGrid::RadialGrid(std::vector<double> lo, std::vector<double> hi, int cells_per_axis)
    : lo_(std::move(lo)), hi_(std::move(hi)), k_(cells_per_axis), count_(1) {
  if (lo_.empty() || lo_.size() != hi_.size()) throw UsageError("grid bounds must be nonempty and of equal length");
  if (k_ < 1) throw UsageError("grid needs at least one cell per axis");
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i])) throw UsageError("grid bounds must be finite");
    if (std::log(lo_[i]) < 1.1 - 1e-12) throw DomainError("grid lower bounds must be at least e^1.1");
    if (!(hi_[i] > lo_[i])) throw UsageError("grid needs hi > lo on every axis");
  }
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (count_ > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(k_))
      throw UsageError("grid has too many cells");
    count_ *= static_cast<std::size_t>(k_);
  }
}

std::vector<int> RadialGrid::coordinates(std::size_t id) const {
  if (id >= count_) throw UsageError("cell id " + std::to_string(id) + " is outside the grid");
  std::vector<int> c(lo_.size());
  for (auto& ci : c) {
    ci = static_cast<int>(id % static_cast<std::size_t>(k_));
    id /= static_cast<std::size_t>(k_);
  }
  return c;
}

RadiusVector RadialGrid::center(std::size_t id) const {
  auto c = coordinates(id);
  std::vector<double> radii(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double a = std::log(lo_[i]), b = std::log(hi_[i]);
    radii[i] = std::exp(a + (c[i] + 0.5) * (b - a) / k_);
  }
  return RadiusVector(std::move(radii));
}

double RadialGrid::cell_log_volume() const {
  double v = 1.0;
  for (std::size_t i = 0; i < lo_.size(); ++i) v *= (std::log(hi_[i]) - std::log(lo_[i])) / k_;
  return v;
}

std::string_view to_string(Predicate predicate) {
  switch (predicate) {
    case Predicate::eq1: return "eq1";
    case Predicate::eq3: return "eq3";
    case Predicate::eq5: return "eq5";
    case Predicate::star_quarter: return "star_quarter";
    case Predicate::thm11b_half: return "thm11b_half";
    case Predicate::eq9_tail: return "eq9_tail";
    case Predicate::lemma23: return "lemma23";
  }
  return "?";
}

Predicate parse_predicate(std::string_view name) {
  for (auto p : {Predicate::eq1, Predicate::eq3, Predicate::eq5, Predicate::star_quarter, Predicate::thm11b_half,
                 Predicate::eq9_tail, Predicate::lemma23})
    if (to_string(p) == name) return p;
  throw UsageError("unknown predicate '" + std::string(name) + "'");
}

std::int64_t required_truncation(const MultiPowerSeries& f, const RadialGrid& grid, double delta2) {
  double d_max = 0.0;
  for (std::size_t id = 0; id < grid.cell_count(); ++id)
    d_max = std::max(d_max, tail_cut_index(f, grid.center(id), delta2));
  return static_cast<std::int64_t>(std::ceil(2.0 * d_max));
}

ExceptionalReport scan(const MultiPowerSeries& f, const RadialGrid& grid, Predicate predicate,
                       const BoundParams& params, const TorusBudget& budget, unsigned workers) {
  params.validate();
  if (grid.dimension() != f.dimension()) throw DomainError("grid dimension does not match the series");
  if (f.empty()) throw ZeroSeriesError();
  const std::int64_t need = required_truncation(f, grid, params.delta2);
  if (f.truncation() < need)
    throw DomainError("inadequate truncation: N = " + std::to_string(f.truncation()) + " but the grid needs N >= " +
                      std::to_string(need));

  ExceptionalReport report;
  report.predicate_name = std::string(to_string(predicate));
  report.rows.resize(grid.cell_count());
  parallel_for(grid.cell_count(), workers, [&](std::size_t id) {
    const RadiusVector r = grid.center(id);
    const Sides s = evaluate(f, r, predicate, params, budget);
    const double slack = predicate == Predicate::eq9_tail ? kEq9Slack : 0.0;
    report.rows[id] = {id, std::vector<double>(r.radii().begin(), r.radii().end()), s.lhs, s.rhs,
                       s.lhs > s.rhs + slack};
  });
  for (const auto& row : report.rows)
    if (row.flagged) report.flagged.push_back(row.cell_id);
  report.flagged_log_measure = log_measure(report.flagged, grid);
  report.scanned_log_measure = grid.scanned_log_measure();
  return report;
}

double log_measure(std::span<const std::size_t> cells, const RadialGrid& grid) {
  std::vector<std::size_t> ids(cells.begin(), cells.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (!ids.empty() && ids.back() >= grid.cell_count())
    throw UsageError("cell id " + std::to_string(ids.back()) + " is outside the grid");
  return grid.cell_log_volume() * static_cast<double>(ids.size());
}

ExponentFit exponent_fit(std::span<const FitSample> samples) {
  const std::size_t n = samples.size();
  if (n < 10) throw DomainError("exponent fit needs at least 10 samples, got " + std::to_string(n));
  double xmin = samples[0].x, xmax = samples[0].x, mx = 0.0, my = 0.0;
  for (const auto& s : samples) {
    if (!std::isfinite(s.x) || !std::isfinite(s.y)) throw DomainError("exponent fit samples must be finite");
    xmin = std::min(xmin, s.x);
    xmax = std::max(xmax, s.x);
    mx += s.x;
    my += s.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& s : samples) {
    sxx += (s.x - mx) * (s.x - mx);
    sxy += (s.x - mx) * (s.y - my);
    syy += (s.y - my) * (s.y - my);
  }
  if (!(sxx > 0.0)) throw DomainError("exponent fit: x has no variance");
  if (xmax - xmin < 1.5) throw DomainError("exponent fit needs x to span at least 1.5");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return {slope, my - slope * mx, r2, n};
}

std::vector<FitSample> wiman_samples(const MultiPowerSeries& f, std::span<const RadiusVector> radii,
                                     const TorusBudget& budget) {
  std::vector<FitSample> out;
  out.reserve(radii.size());
  for (const auto& r : radii) {
    const double mu = maximal_term(f, r).log_value;
    if (!(mu > 1.0)) throw DomainError("Wiman samples need mu_f(r) > e");
    const double x = f.dimension() == 1 ? std::log(mu) : log_bracket(mu, r);
    out.push_back({x, max_modulus(f, r, budget).log_value - mu});
  }
  return out;
}

}  // namespace wiman
