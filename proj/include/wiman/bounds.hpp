#pragma once

#include <functional>
#include <optional>
#include <span>

#include "wiman/power_series.hpp"

namespace wiman {

// delta: exponent slack of the bounds, delta1: slack in h, delta2: tail-cut
// slack, eps: slack in the one-variable inequality. `exponent` overrides the
// whole power of ln mu in the free-exponent predicate.
struct BoundParams {
  double delta = 0.05;
  double delta1 = 0.05;
  double delta2 = 0.1;
  double eps = 0.05;
  std::optional<double> exponent;

  void validate() const;
};

enum class BracketPower { half, quarter };

// ln ln x; x must exceed e.
double ln2(double x);

// mu_log + kappa * ln(mu_log): ln of mu * ln^kappa mu. Requires mu_log > 1.
double rhs_power(double mu_log, double kappa);

// ln of mu * ln^{1/2+eps} mu.
double rhs_classical(double mu_log, double eps);

// ln of mu * (prod_i ln^{p-1} r_i * ln^p mu)^{x+delta}, x = 1/2 or 1/4,
// assembled from iterated logs. Requires every r_i > e and mu > e.
double rhs_multivariate(double mu_log, const RadiusVector& r, double delta, BracketPower power);
double rhs_multivariate(const MultiPowerSeries& f, const RadiusVector& r, double delta, BracketPower power);

// ln(prod_i ln^{p-1} r_i * ln^p mu), the bracket alone.
double log_bracket(double mu_log, const RadiusVector& r);

// ln of mu * ln^{p/x+delta} mu with x = 2 (half) or 4 (quarter).
double rhs_reduced(double mu_log, int p, double delta, BracketPower power);
double rhs_reduced(const MultiPowerSeries& f, const RadiusVector& r, double delta, BracketPower power);

struct IntegralEstimate {
  double value;
  double tail_delta;  // value over [e, 2R]^p minus value over [e, R]^p
};

// Integral of prod dr_i/r_i / ln^beta M(r) over [e, R]^p, midpoint rule in
// u = ln r with `steps` nodes per axis.
IntegralEstimate condition4_integral(const MultiPowerSeries& f, double beta, double R, int steps);
// Same, for an arbitrary ln M given as a function of the radius vector.
IntegralEstimate condition4_integral(int p, const std::function<double(const RadiusVector&)>& log_majorant,
                                     double beta, double R, int steps);

// h(u) = prod_i u_i ln^{1+delta1} u_i for u_i > 1.
double lemma23_h(std::span<const double> u, double delta1);

// h at (ln r_1, .., ln M, .., ln r_p) with ln M in slot `axis` (0-based).
// Requires every r_i >= e^1.1 and ln M > 1.
double lemma23_rhs(const MultiPowerSeries& f, const RadiusVector& r, int axis, double delta1);
double lemma23_rhs(double log_majorant, const RadiusVector& r, int axis, double delta1);

}  // namespace wiman
