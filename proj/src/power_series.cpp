#include "wiman/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wiman/errors.hpp"
#include "wiman/log_math.hpp"

namespace wiman {

__extension__ typedef unsigned __int128 u128;

// ---------------------------------------------------------------------------
// MultiIndex / IndexTable

MultiIndex::MultiIndex(std::vector<std::int32_t> entries) : entries_(std::move(entries)) {
  for (auto v : entries_) {
    if (v < 0) throw UsageError("multi-index entries must be nonnegative");
    order_ += v;
  }
}

bool graded_lex_less(std::span<const std::int32_t> a, std::span<const std::int32_t> b) {
  std::int64_t oa = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  std::int64_t ob = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  if (oa != ob) return oa < ob;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace {

constexpr u128 kRankOverflow = ~u128{0};

// C(n, k) saturating at kRankOverflow.
u128 binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < k) return 0;
  k = std::min(k, n - k);
  u128 c = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    u128 factor = static_cast<u128>(n - k + i);
    if (c > kRankOverflow / factor) return kRankOverflow;
    c = c * factor / static_cast<u128>(i);
  }
  return c;
}

u128 checked_add(u128 a, u128 b) {
  if (a == kRankOverflow || b == kRankOverflow || a > kRankOverflow - b) return kRankOverflow;
  return a + b;
}

}  // namespace

std::uint64_t graded_lex_rank(std::span<const std::int32_t> n) {
  const auto p = static_cast<std::int64_t>(n.size());
  std::int64_t k = std::accumulate(n.begin(), n.end(), std::int64_t{0});
  // Indices of order < k.
  u128 rank = k == 0 ? 0 : binomial(k - 1 + p, p);
  std::int64_t remaining = k;
  for (std::int64_t j = 0; j + 1 < p; ++j) {
    std::int64_t q = p - j - 1;
    // Completions with a smaller entry at position j (hockey-stick identity).
    u128 below = binomial(remaining + q, q);
    u128 at_or_above = binomial(remaining - n[static_cast<std::size_t>(j)] + q, q);
    if (below == kRankOverflow || at_or_above == kRankOverflow)
      throw DomainError("graded-lex rank overflows 64 bits");
    rank = checked_add(rank, below - at_or_above);
    remaining -= n[static_cast<std::size_t>(j)];
  }
  if (rank > static_cast<u128>(UINT64_MAX)) throw DomainError("graded-lex rank overflows 64 bits");
  return static_cast<std::uint64_t>(rank);
}

IndexTable::IndexTable(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw UsageError("dimension must be at least 1");
}

void IndexTable::push_back(std::span<const std::int32_t> n) {
  if (static_cast<int>(n.size()) != dimension_) throw UsageError("multi-index dimension mismatch");
  std::int64_t order = 0;
  for (auto v : n) {
    if (v < 0) throw UsageError("multi-index entries must be nonnegative");
    order += v;
  }
  data_.insert(data_.end(), n.begin(), n.end());
  orders_.push_back(order);
}

void IndexTable::reserve(std::size_t count) {
  data_.reserve(count * static_cast<std::size_t>(dimension_));
  orders_.reserve(count);
}

MultiIndex IndexTable::index(std::size_t i) const {
  auto e = (*this)[i];
  return MultiIndex(std::vector<std::int32_t>(e.begin(), e.end()));
}

std::int64_t IndexTable::max_order() const {
  return orders_.empty() ? 0 : *std::max_element(orders_.begin(), orders_.end());
}

std::int32_t IndexTable::max_entry(int axis) const {
  std::int32_t m = 0;
  for (std::size_t i = 0; i < size(); ++i) m = std::max(m, (*this)[i][static_cast<std::size_t>(axis)]);
  return m;
}

bool IndexTable::is_canonical() const {
  for (std::size_t i = 1; i < size(); ++i)
    if (!graded_lex_less((*this)[i - 1], (*this)[i])) return false;
  return true;
}

std::optional<std::size_t> IndexTable::find(std::span<const std::int32_t> n) const {
  std::size_t lo = 0, hi = size();
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (graded_lex_less((*this)[mid], n))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < size() && std::equal(n.begin(), n.end(), (*this)[lo].begin())) return lo;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// RadiusVector

RadiusVector::RadiusVector(std::vector<double> radii) : radii_(std::move(radii)) {
  if (radii_.empty()) throw UsageError("radius vector must be nonempty");
  logs_.reserve(radii_.size());
  for (double r : radii_) {
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radii must be positive and finite");
    logs_.push_back(std::log(r));
  }
}

double RadiusVector::min() const { return *std::min_element(radii_.begin(), radii_.end()); }

// ---------------------------------------------------------------------------
// MultiPowerSeries

namespace {

void check_certificate(const std::optional<TailCertificate>& cert, int p) {
  if (!cert) return;
  if (static_cast<int>(cert->radius_limit.size()) != p)
    throw UsageError("tail certificate dimension mismatch");
  if (std::isnan(cert->log_relative_bound)) throw UsageError("tail certificate bound is NaN");
}

}  // namespace

MultiPowerSeries::MultiPowerSeries(int dimension, std::int64_t truncation, std::vector<Term> terms,
                                   std::optional<TailCertificate> certificate)
    : truncation_(truncation), certificate_(std::move(certificate)) {
  if (dimension < 1) throw UsageError("dimension must be at least 1");
  if (truncation < 0) throw UsageError("truncation must be nonnegative");
  check_certificate(certificate_, dimension);

  std::erase_if(terms, [](const Term& t) { return t.log_modulus == kNegInf; });
  for (const auto& t : terms) {
    if (t.index.dimension() != dimension) throw UsageError("term dimension mismatch");
    if (t.index.order() > truncation) throw UsageError("term order exceeds truncation");
    if (!std::isfinite(t.log_modulus) || !std::isfinite(t.phase))
      throw UsageError("coefficient log-modulus and phase must be finite");
  }
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return graded_lex_less(a.index.entries(), b.index.entries());
  });
  auto table = std::make_shared<IndexTable>(dimension);
  table->reserve(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0 && terms[i].index == terms[i - 1].index) throw UsageError("duplicate multi-index");
    table->push_back(terms[i].index.entries());
    log_moduli_.push_back(terms[i].log_modulus);
    phases_.push_back(terms[i].phase);
  }
  indices_ = std::move(table);
}

MultiPowerSeries::MultiPowerSeries(std::shared_ptr<const IndexTable> indices, std::int64_t truncation,
                                   std::vector<double> log_moduli, std::vector<double> phases,
                                   std::optional<TailCertificate> certificate)
    : indices_(std::move(indices)),
      truncation_(truncation),
      log_moduli_(std::move(log_moduli)),
      phases_(std::move(phases)),
      certificate_(std::move(certificate)) {
  if (!indices_) throw UsageError("null index table");
  if (truncation < 0) throw UsageError("truncation must be nonnegative");
  if (log_moduli_.size() != indices_->size() || phases_.size() != indices_->size())
    throw UsageError("coefficient arrays do not match the index table");
  if (indices_->max_order() > truncation) throw UsageError("term order exceeds truncation");
  for (std::size_t i = 0; i < log_moduli_.size(); ++i)
    if (!std::isfinite(log_moduli_[i]) || !std::isfinite(phases_[i]))
      throw UsageError("coefficient log-modulus and phase must be finite");
  check_certificate(certificate_, indices_->dimension());
}

std::vector<Term> MultiPowerSeries::terms() const {
  std::vector<Term> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back({indices_->index(i), log_moduli_[i], phases_[i]});
  return out;
}

bool MultiPowerSeries::in_class_lambda() const {
  for (int j = 0; j < dimension(); ++j)
    if (indices_->max_entry(j) == 0) return false;
  return !empty();
}

void MultiPowerSeries::require_radius(const RadiusVector& r) const {
  if (r.dimension() != dimension())
    throw DomainError("radius dimension " + std::to_string(r.dimension()) + " does not match series dimension " +
                      std::to_string(dimension()));
  if (certificate_) {
    for (int j = 0; j < dimension(); ++j)
      if (r[j] > certificate_->radius_limit[static_cast<std::size_t>(j)])
        throw DomainError("radius beyond the pruned series' certified range on axis " + std::to_string(j + 1));
  }
}

std::vector<double> MultiPowerSeries::log_terms(const RadiusVector& r) const {
  require_radius(r);
  const auto logs = r.logs();
  const auto p = static_cast<std::size_t>(dimension());
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    auto n = (*indices_)[i];
    double v = log_moduli_[i];
    for (std::size_t j = 0; j < p; ++j)
      if (n[j] != 0) v += n[j] * logs[j];
    out[i] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Constructors for exp(z_1 + ... + z_p)

namespace {

constexpr double kMaxStoredTerms = 5.0e7;

// Appends every index of order k with n_j <= caps[j], in lexicographic order.
void enumerate_level(IndexTable& table, std::vector<std::int32_t>& n, std::size_t j, std::int64_t remaining,
                     std::span<const std::int32_t> caps) {
  const std::size_t p = n.size();
  if (j + 1 == p) {
    if (remaining <= caps[j]) {
      n[j] = static_cast<std::int32_t>(remaining);
      table.push_back(n);
    }
    return;
  }
  std::int64_t top = std::min<std::int64_t>(remaining, caps[j]);
  for (std::int64_t v = 0; v <= top; ++v) {
    n[j] = static_cast<std::int32_t>(v);
    enumerate_level(table, n, j + 1, remaining - v, caps);
  }
}

MultiPowerSeries build_exp_sum(int p, std::int64_t N, std::int64_t max_level, std::vector<std::int32_t> caps,
                               std::optional<TailCertificate> cert) {
  auto table = std::make_shared<IndexTable>(p);
  std::vector<std::int32_t> n(static_cast<std::size_t>(p), 0);
  for (std::int64_t k = 0; k <= max_level; ++k) enumerate_level(*table, n, 0, k, caps);

  std::int64_t max_entry = 0;
  for (auto c : caps) max_entry = std::max<std::int64_t>(max_entry, c);
  std::vector<double> log_fact(static_cast<std::size_t>(max_entry) + 1);
  for (std::size_t i = 0; i < log_fact.size(); ++i) log_fact[i] = log_factorial(static_cast<std::int64_t>(i));

  std::vector<double> log_moduli(table->size());
  for (std::size_t i = 0; i < table->size(); ++i) {
    double v = 0.0;
    for (auto e : (*table)[i]) v -= log_fact[static_cast<std::size_t>(e)];
    log_moduli[i] = v;
  }
  std::vector<double> phases(table->size(), 0.0);
  return MultiPowerSeries(std::move(table), N, std::move(log_moduli), std::move(phases), std::move(cert));
}

double count_simplex(int p, std::int64_t N) {
  // C(N + p, p) in floating point, only used for a size guard.
  double c = 1.0;
  for (int i = 1; i <= p; ++i) c = c * static_cast<double>(N + i) / i;
  return c;
}

}  // namespace

MultiPowerSeries make_exp_sum(int p, std::int64_t N) {
  if (p < 1) throw UsageError("dimension must be at least 1");
  if (N < 0) throw UsageError("truncation must be nonnegative");
  if (N > INT32_MAX || count_simplex(p, N) > kMaxStoredTerms)
    throw DomainError("exp_sum(" + std::to_string(p) + ", " + std::to_string(N) +
                      ") has too many terms to store; use make_exp_sum_pruned");
  std::vector<std::int32_t> caps(static_cast<std::size_t>(p), static_cast<std::int32_t>(N));
  return build_exp_sum(p, N, N, std::move(caps), std::nullopt);
}

std::int32_t poisson_cap(double rate, double log_target) {
  if (!(rate > 0.0)) throw DomainError("poisson_cap: rate must be positive");
  // Chernoff: P(X >= k) <= exp(-rate + k (1 + ln rate - ln k)) for k > rate.
  auto log_tail = [&](double k) { return -rate + k * (1.0 + std::log(rate) - std::log(k)); };
  auto cap = static_cast<std::int64_t>(std::floor(rate)) + 1;
  while (log_tail(static_cast<double>(cap + 1)) > log_target) ++cap;
  if (cap > INT32_MAX) throw DomainError("poisson_cap: cap exceeds index range");
  return static_cast<std::int32_t>(cap);
}

MultiPowerSeries make_exp_sum_pruned(int p, std::int64_t N, std::span<const double> radius_limit) {
  if (p < 1) throw UsageError("dimension must be at least 1");
  if (N < 0) throw UsageError("truncation must be nonnegative");
  if (static_cast<int>(radius_limit.size()) != p) throw UsageError("radius limit dimension mismatch");

  constexpr double kLogTarget = -60.0;
  const double per_axis_target = kLogTarget - std::log(static_cast<double>(p));
  std::vector<std::int32_t> caps;
  std::vector<double> log_tails;
  std::int64_t cap_sum = 0;
  for (double hi : radius_limit) {
    auto cap = poisson_cap(hi, per_axis_target);
    caps.push_back(cap);
    double k = cap + 1.0;
    log_tails.push_back(-hi + k * (1.0 + std::log(hi) - std::log(k)));
    cap_sum += cap;
  }
  if (N <= cap_sum) return make_exp_sum(p, N);

  double box = 1.0;
  for (auto c : caps) box *= c + 1.0;
  if (box > kMaxStoredTerms) throw DomainError("pruned exp_sum box is too large to store");

  // Unstored mass / stored mass <= tau / (1 - tau), tau = sum of axis tails.
  double log_tau = log_sum_exp(log_tails);
  TailCertificate cert{std::vector<double>(radius_limit.begin(), radius_limit.end()),
                       log_tau - std::log1p(-std::exp(log_tau))};
  return build_exp_sum(p, N, cap_sum, std::move(caps), std::move(cert));
}

// ---------------------------------------------------------------------------
// Majorant, maximal term, derivatives, tails

double sum_modulus(const MultiPowerSeries& f, const RadiusVector& r) {
  if (f.empty()) throw ZeroSeriesError();
  auto logs = f.log_terms(r);
  return log_sum_exp(logs);
}

MaximalTerm maximal_term(const MultiPowerSeries& f, const RadiusVector& r) {
  if (f.empty()) throw ZeroSeriesError();
  auto logs = f.log_terms(r);
  double best = *std::max_element(logs.begin(), logs.end());
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  const IndexTable& table = f.indices();
  std::optional<std::size_t> arg;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (logs[i] < best - tol) continue;
    if (!arg || std::lexicographical_compare(table[i].begin(), table[i].end(), table[*arg].begin(),
                                             table[*arg].end()))
      arg = i;
  }
  return {best, table.index(*arg)};
}

double partial_log_derivative(const MultiPowerSeries& f, const RadiusVector& r, int axis) {
  if (f.empty()) throw ZeroSeriesError();
  if (axis < 0 || axis >= f.dimension()) throw UsageError("axis out of range");
  auto logs = f.log_terms(r);
  const IndexTable& table = f.indices();
  LogSumAccumulator numerator;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    auto ns = table[i][static_cast<std::size_t>(axis)];
    if (ns > 0) numerator.add(logs[i] + std::log(static_cast<double>(ns)));
  }
  if (numerator.empty()) return 0.0;
  return std::exp(numerator.value() - log_sum_exp(logs));
}

double tail_cut_index_from(double log_mu, const RadiusVector& r, double delta2) {
  if (!(delta2 >= 0.0)) throw DomainError("delta2 must be nonnegative");
  if (!(log_mu >= 1.0)) throw DomainError("tail_cut_index needs ln mu_f(r) >= 1");
  const double p = r.dimension();
  double log_d = (p / 2.0 + 1.0 + delta2) * std::log(log_mu);
  for (double lr : r.logs()) {
    if (lr < 1.1 - 1e-12) throw DomainError("tail_cut_index needs every r_i >= exp(1.1)");
    double ll = std::log(lr);  // ln_2 r_i > 0
    log_d += (1.0 + delta2) * (p * ll + 2.0 * std::log(ll));
  }
  return std::exp(log_d);
}

double tail_cut_index(const MultiPowerSeries& f, const RadiusVector& r, double delta2) {
  return tail_cut_index_from(maximal_term(f, r).log_value, r, delta2);
}

double tail_sum(const MultiPowerSeries& f, const RadiusVector& r, double d) {
  if (!(d >= 0.0)) throw DomainError("tail cut must be nonnegative");
  if (f.empty()) return kNegInf;
  auto logs = f.log_terms(r);
  const IndexTable& table = f.indices();
  LogSumAccumulator acc;
  for (std::size_t i = 0; i < logs.size(); ++i)
    if (static_cast<double>(table.order(i)) >= d) acc.add(logs[i]);
  if (f.certificate() && d <= static_cast<double>(f.truncation()))
    acc.add(f.certificate()->log_relative_bound + log_sum_exp(logs));
  return acc.value();
}

}  // namespace wiman
