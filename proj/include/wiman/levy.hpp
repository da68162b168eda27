#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wiman/power_series.hpp"
#include "wiman/random_system.hpp"
#include "wiman/torus_max.hpp"

namespace wiman {

// psi(r) = ln mu_g(r) for g = e^z, i.e. max_n (n ln r - ln n!).
double psi(double r);

// Smallest r >= 1 with psi(r) = t (psi is strictly increasing there).
double psi_inverse(double t);

// Log-spaced samples of psi, used to bracket inversions.
class PsiTable {
 public:
  PsiTable(double lo, double hi, int count);

  std::span<const double> radii() const { return r_; }
  std::span<const double> values() const { return psi_; }
  // Bisection on psi inside the tabulated bracket; falls back to psi_inverse
  // outside the table.
  double inverse(double t) const;

 private:
  std::vector<double> r_;
  std::vector<double> psi_;
};

// A_t: r_1 = t and r_i in (t1, t2) = (psi^-1(psi(t)/2), psi^-1(2 psi(t))) for
// i >= 2.
struct RegionA {
  double t;
  double t1;
  double t2;
  int p;
};

RegionA region_A(double t, int p, const PsiTable* table = nullptr);

// 1 / (2^{p-1} (2p - 1))
double product_sum_constant(int p);
// prod psi_i >= c_p (sum psi_i)^p, evaluated in logs.
bool product_sum_holds(std::span<const double> psi_values);

struct LowerBoundConfig {
  int p = 2;
  double eps = 0.15;
  std::vector<double> t_values;
  int trials = 50;
  CoefficientSystem system{SystemKind::steinhaus, 0};
  std::int64_t N = 0;  // 0: smallest adequate truncation
  TorusBudget budget{};
  int points_per_t = 8;
  double eta = 0.05;          // r_1 ranges over [t, t (1 + eta)]
  std::optional<double> r0;   // start of the measure curve; defaults to min t
  double delta2 = 0.1;
  unsigned workers = 1;
};

struct LowerBoundRow {
  double t;
  std::vector<double> radii;
  int trial;
  double lhs_log;
  double rhs_log;
  bool holds;
  bool retried;
};

struct MeasurePoint {
  double log_t;
  double measure;  // log measure of the union of thickened A_s, r0 <= s <= t
};

struct LowerBoundResult {
  double hold_fraction;
  double region_log_measure_slope;  // NaN when the t range is too narrow to fit
  bool product_sum_ok;
  std::int64_t truncation;
  std::vector<LowerBoundRow> rows;  // by t, then trial, then point
  std::vector<MeasurePoint> measure_curve;
};

// For f = exp_sum(p) randomized by a Steinhaus draw per trial, checks
// M_f(r) >= mu_f(r) ln^{p/4-eps} mu_f(r) at points sampled in the thickened
// A_t. A failed check is retried once at doubled budget.
LowerBoundResult lower_bound_experiment(const LowerBoundConfig& config);

struct ErdosRenyiConfig {
  std::vector<double> r_values;
  int trials = 200;
  double eps = 0.1;
  CoefficientSystem system{SystemKind::steinhaus, 0};
  std::int64_t N = 0;
  TorusBudget budget{};
  double delta2 = 0.1;
  unsigned workers = 1;
};

struct ErdosRenyiPoint {
  double r;
  double median_ratio;  // median of M / (mu ln^{1/4-eps} mu)
};

std::vector<ErdosRenyiPoint> erdos_renyi_ratio(const ErdosRenyiConfig& config);

// exp_sum(p) stored up to the given radii with the nominal truncation the
// scan rule asks for at those radii (or `N` if it is at least that large).
MultiPowerSeries exp_sum_for_radii(int p, std::span<const RadiusVector> radii, double delta2, std::int64_t N = 0);

}  // namespace wiman
