#include "wiman/bounds.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wiman/errors.hpp"

namespace wiman {

namespace {

constexpr double kE = std::numbers::e;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be positive and finite");
}

void require_large_radii(const RadiusVector& r) {
  for (double lr : r.logs())
    if (!(lr > 1.0)) throw DomainError("every radius must exceed e");
}

double slack_of(BracketPower power) { return power == BracketPower::half ? 0.5 : 0.25; }

// Midpoint rule over [1, log_hi]^p in log coordinates.
double log_box_integral(int p, const std::function<double(const RadiusVector&)>& log_majorant, double beta,
                        double log_hi, int steps) {
  const double h = (log_hi - 1.0) / steps;
  const auto pp = static_cast<std::size_t>(p);
  std::vector<int> k(pp, 0);
  std::vector<double> radii(pp);
  double total = 0.0;
  for (;;) {
    for (std::size_t j = 0; j < pp; ++j) radii[j] = std::exp(1.0 + (k[j] + 0.5) * h);
    const double lm = log_majorant(RadiusVector(radii));
    if (!(lm > 0.0)) throw DomainError("integrability check needs M > 1 on the whole box");
    total += std::exp(-beta * std::log(lm));
    std::size_t j = 0;
    while (j < pp && ++k[j] == steps) k[j++] = 0;
    if (j == pp) break;
  }
  return total * std::pow(h, p);
}

}  // namespace

void BoundParams::validate() const {
  require_positive(delta, "delta");
  require_positive(delta1, "delta1");
  require_positive(delta2, "delta2");
  require_positive(eps, "eps");
  if (exponent && !std::isfinite(*exponent)) throw UsageError("exponent must be finite");
}

double ln2(double x) {
  if (!(x > kE)) throw DomainError("ln ln x needs x > e");
  return std::log(std::log(x));
}

double rhs_power(double mu_log, double kappa) {
  if (!(mu_log > 1.0)) throw DomainError("ln mu_f(r) must exceed 1");
  return mu_log + kappa * std::log(mu_log);
}

double rhs_classical(double mu_log, double eps) {
  require_positive(eps, "eps");
  return rhs_power(mu_log, 0.5 + eps);
}

double log_bracket(double mu_log, const RadiusVector& r) {
  if (!(mu_log > 1.0)) throw DomainError("mu_f(r) must exceed e");
  require_large_radii(r);
  const int p = r.dimension();
  double sum = 0.0;
  for (double lr : r.logs()) sum += std::log(lr);
  return (p - 1) * sum + p * std::log(mu_log);
}

double rhs_multivariate(double mu_log, const RadiusVector& r, double delta, BracketPower power) {
  require_positive(delta, "delta");
  return mu_log + (slack_of(power) + delta) * log_bracket(mu_log, r);
}

double rhs_multivariate(const MultiPowerSeries& f, const RadiusVector& r, double delta, BracketPower power) {
  return rhs_multivariate(maximal_term(f, r).log_value, r, delta, power);
}

double rhs_reduced(double mu_log, int p, double delta, BracketPower power) {
  require_positive(delta, "delta");
  if (p < 1) throw UsageError("dimension must be at least 1");
  if (!(mu_log > 1.0)) throw DomainError("mu_f(r) must exceed e");
  return mu_log + (p * slack_of(power) + delta) * std::log(mu_log);
}

double rhs_reduced(const MultiPowerSeries& f, const RadiusVector& r, double delta, BracketPower power) {
  f.require_radius(r);
  return rhs_reduced(maximal_term(f, r).log_value, f.dimension(), delta, power);
}

IntegralEstimate condition4_integral(int p, const std::function<double(const RadiusVector&)>& log_majorant,
                                     double beta, double R, int steps) {
  if (p < 1) throw UsageError("dimension must be at least 1");
  require_positive(beta, "beta");
  if (steps < 1) throw UsageError("steps must be at least 1");
  if (!(R > kE) || !std::isfinite(R)) throw DomainError("cutoff radius must exceed e");
  const double v1 = log_box_integral(p, log_majorant, beta, std::log(R), steps);
  const double v2 = log_box_integral(p, log_majorant, beta, std::log(2.0 * R), steps);
  return {v1, v2 - v1};
}

IntegralEstimate condition4_integral(const MultiPowerSeries& f, double beta, double R, int steps) {
  if (!f.in_class_lambda()) throw DomainError("integrability check needs a series depending on every variable");
  return condition4_integral(f.dimension(), [&](const RadiusVector& r) { return sum_modulus(f, r); }, beta, R,
                             steps);
}

double lemma23_h(std::span<const double> u, double delta1) {
  require_positive(delta1, "delta1");
  double h = 1.0;
  for (double x : u) {
    if (!(x > 1.0)) throw DomainError("h(u) needs every u_i > 1");
    h *= x * std::pow(std::log(x), 1.0 + delta1);
  }
  return h;
}

double lemma23_rhs(double log_majorant, const RadiusVector& r, int axis, double delta1) {
  if (axis < 0 || axis >= r.dimension()) throw UsageError("axis out of range");
  for (double lr : r.logs())
    if (lr < 1.1 - 1e-12) throw DomainError("lemma bound needs every r_i >= e^1.1");
  if (!(log_majorant > 1.0)) throw DomainError("lemma bound needs M_f(r) > e");
  std::vector<double> u(r.logs().begin(), r.logs().end());
  u[static_cast<std::size_t>(axis)] = log_majorant;
  return lemma23_h(u, delta1);
}

double lemma23_rhs(const MultiPowerSeries& f, const RadiusVector& r, int axis, double delta1) {
  return lemma23_rhs(sum_modulus(f, r), r, axis, delta1);
}

}  // namespace wiman
