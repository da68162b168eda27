#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wiman/multi_index.hpp"

namespace wiman {

// One coefficient a_n = exp(log_modulus) * exp(i * phase).
struct Term {
  MultiIndex index;
  double log_modulus = 0.0;
  double phase = 0.0;
};

// Certifies a pruned table: for every r <= radius_limit (componentwise) the
// coefficients of the represented function that are not stored satisfy
//   sum |a_n| r^n <= exp(log_relative_bound) * sum_{stored} |a_n| r^n.
struct TailCertificate {
  std::vector<double> radius_limit;
  double log_relative_bound = 0.0;

  friend bool operator==(const TailCertificate&, const TailCertificate&) = default;
};

// r = (r_1, ..., r_p) with every r_i > 0.
class RadiusVector {
 public:
  explicit RadiusVector(std::vector<double> radii);
  RadiusVector(std::initializer_list<double> radii) : RadiusVector(std::vector<double>(radii)) {}

  int dimension() const { return static_cast<int>(radii_.size()); }
  double operator[](int i) const { return radii_[static_cast<std::size_t>(i)]; }
  std::span<const double> radii() const { return radii_; }
  std::span<const double> logs() const { return logs_; }
  // r^ = min_i r_i
  double min() const;

 private:
  std::vector<double> radii_;
  std::vector<double> logs_;
};

// Truncated power series in p complex variables, stored in log-modulus/phase
// form. The index table is kept in graded-lexicographic order and is shared
// (copy-free) between a series and its randomizations. Immutable.
class MultiPowerSeries {
 public:
  MultiPowerSeries(int dimension, std::int64_t truncation, std::vector<Term> terms,
                   std::optional<TailCertificate> certificate = std::nullopt);
  // The table must be canonical and every |n| <= truncation.
  MultiPowerSeries(std::shared_ptr<const IndexTable> indices, std::int64_t truncation,
                   std::vector<double> log_moduli, std::vector<double> phases,
                   std::optional<TailCertificate> certificate = std::nullopt);

  int dimension() const { return indices_->dimension(); }
  std::int64_t truncation() const { return truncation_; }
  std::size_t size() const { return log_moduli_.size(); }
  bool empty() const { return log_moduli_.empty(); }

  const IndexTable& indices() const { return *indices_; }
  const std::shared_ptr<const IndexTable>& shared_indices() const { return indices_; }
  std::span<const double> log_moduli() const { return log_moduli_; }
  std::span<const double> phases() const { return phases_; }
  const std::optional<TailCertificate>& certificate() const { return certificate_; }

  std::vector<Term> terms() const;

  // f in Lambda^p: every variable appears in some stored monomial.
  bool in_class_lambda() const;

  // Dimension must match and r must lie inside the certificate's radius box.
  void require_radius(const RadiusVector& r) const;

  // ln(|a_n| r^n) for each stored term, in table order.
  std::vector<double> log_terms(const RadiusVector& r) const;

 private:
  std::shared_ptr<const IndexTable> indices_;
  std::int64_t truncation_;
  std::vector<double> log_moduli_;
  std::vector<double> phases_;
  std::optional<TailCertificate> certificate_;
};

// exp(z_1 + ... + z_p) truncated at total degree N: a_n = 1 / (n_1! ... n_p!).
MultiPowerSeries make_exp_sum(int p, std::int64_t N);

// Same function with nominal truncation N, storing only indices with n_j at
// most a Chernoff cap for radius_limit[j]. Carries a TailCertificate whose
// bound is below e^-60. Falls back to make_exp_sum when N does not exceed the
// sum of the caps.
MultiPowerSeries make_exp_sum_pruned(int p, std::int64_t N, std::span<const double> radius_limit);

// Per-axis cap used by make_exp_sum_pruned.
std::int32_t poisson_cap(double rate, double log_target);

// ln M_f(r) where M_f(r) = sum |a_n| r^n (the coefficient majorant).
double sum_modulus(const MultiPowerSeries& f, const RadiusVector& r);

struct MaximalTerm {
  double log_value;
  MultiIndex argmax;
};

// ln mu_f(r) = max_n ln(|a_n| r^n); ties (within 1e-12 relative) go to the
// lexicographically smallest index.
MaximalTerm maximal_term(const MultiPowerSeries& f, const RadiusVector& r);

// r_s d/dr_s ln M_f(r) = sum n_s |a_n| r^n / sum |a_n| r^n. Axis is 0-based.
double partial_log_derivative(const MultiPowerSeries& f, const RadiusVector& r, int axis);

// d(r) = ln^{p/2+1+delta2} mu_f(r) * prod_i (ln^p r_i * ln_2^2 r_i)^{1+delta2}.
double tail_cut_index(const MultiPowerSeries& f, const RadiusVector& r, double delta2);
double tail_cut_index_from(double log_mu, const RadiusVector& r, double delta2);

// ln of sum_{|n| >= d} |a_n| r^n. For a pruned series the certified bound on
// the unstored coefficients is added, so the value stays an upper bound.
double tail_sum(const MultiPowerSeries& f, const RadiusVector& r, double d);

// Text format: header "p N", optional "# tail_certificate r_1 .. r_p bound",
// then one line "n_1 .. n_p log_modulus phase" per term. Doubles are written
// in shortest round-trip form, so write/read is exact.
void write_series(std::ostream& out, const MultiPowerSeries& f);
MultiPowerSeries read_series(std::istream& in);
void save_series(const std::string& path, const MultiPowerSeries& f);
MultiPowerSeries load_series(const std::string& path);

}  // namespace wiman
