#include "wiman/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wiman/errors.hpp"
#include "wiman/exceptional_scan.hpp"
#include "wiman/log_math.hpp"
#include "wiman/parallel.hpp"

namespace wiman {

namespace {

constexpr std::uint64_t kPointStream = 0x41745f7074ULL;

double bisect_psi(double t, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (psi(mid) < t ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::int64_t adequate_truncation(int p, std::span<const RadiusVector> radii, double delta2, std::int64_t N) {
  double d_max = 0.0;
  for (const auto& r : radii) {
    double log_mu = 0.0;
    for (double ri : r.radii()) log_mu += psi(ri);
    d_max = std::max(d_max, tail_cut_index_from(log_mu, r, delta2));
  }
  const auto need = static_cast<std::int64_t>(std::ceil(2.0 * d_max));
  if (N == 0) return std::max<std::int64_t>(need, p);
  if (N < need)
    throw DomainError("inadequate truncation: N = " + std::to_string(N) + " but the radii need N >= " +
                      std::to_string(need));
  return N;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

double psi(double r) {
  if (!(r > 0.0)) throw DomainError("psi needs r > 0");
  const double lr = std::log(r);
  const auto base = static_cast<std::int64_t>(std::floor(r));
  double best = kNegInf;
  for (std::int64_t n = std::max<std::int64_t>(0, base - 1); n <= base + 1; ++n)
    best = std::max(best, static_cast<double>(n) * lr - log_factorial(n));
  return best;
}

double psi_inverse(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("psi_inverse needs a finite t >= 0");
  if (t == 0.0) return 1.0;
  double hi = 2.0;
  while (psi(hi) < t) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("psi_inverse: cannot bracket t");
  }
  return bisect_psi(t, std::max(1.0, hi / 2.0), hi);
}

PsiTable::PsiTable(double lo, double hi, int count) {
  if (!(lo >= 1.0) || !(hi > lo) || count < 2) throw UsageError("psi table needs 1 <= lo < hi and count >= 2");
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) {
    r_.push_back(std::exp(a + (b - a) * i / (count - 1)));
    psi_.push_back(psi(r_.back()));
  }
}

double PsiTable::inverse(double t) const {
  if (t < psi_.front() || t > psi_.back()) return psi_inverse(t);
  auto it = std::lower_bound(psi_.begin(), psi_.end(), t);
  const auto i = static_cast<std::size_t>(it - psi_.begin());
  if (i == 0) return r_.front();
  return bisect_psi(t, r_[i - 1], r_[i]);
}

RegionA region_A(double t, int p, const PsiTable* table) {
  if (p < 1) throw UsageError("dimension must be at least 1");
  const double pt = psi(t);
  if (!(pt >= 2.0)) throw DomainError("region A_t needs psi(t) >= 2");
  if (p == 1) return {t, t, t, 1};
  auto inv = [&](double v) { return table ? table->inverse(v) : psi_inverse(v); };
  return {t, inv(pt / 2.0), inv(2.0 * pt), p};
}

double product_sum_constant(int p) {
  if (p < 1) throw UsageError("dimension must be at least 1");
  return 1.0 / (std::ldexp(1.0, p - 1) * (2.0 * p - 1.0));
}

bool product_sum_holds(std::span<const double> psi_values) {
  const int p = static_cast<int>(psi_values.size());
  double log_prod = 0.0, sum = 0.0;
  for (double v : psi_values) {
    if (!(v > 0.0)) return false;
    log_prod += std::log(v);
    sum += v;
  }
  return log_prod >= std::log(product_sum_constant(p)) + p * std::log(sum);
}

MultiPowerSeries exp_sum_for_radii(int p, std::span<const RadiusVector> radii, double delta2, std::int64_t N) {
  if (radii.empty()) throw UsageError("no radii given");
  std::vector<double> limit(static_cast<std::size_t>(p), 0.0);
  for (const auto& r : radii) {
    if (r.dimension() != p) throw UsageError("radius dimension mismatch");
    for (int j = 0; j < p; ++j) limit[static_cast<std::size_t>(j)] = std::max(limit[static_cast<std::size_t>(j)], r[j]);
  }
  return make_exp_sum_pruned(p, adequate_truncation(p, radii, delta2, N), limit);
}

LowerBoundResult lower_bound_experiment(const LowerBoundConfig& cfg) {
  if (cfg.system.kind != SystemKind::steinhaus)
    throw DomainError("lower-bound experiment is stated for the Steinhaus system only");
  if (cfg.p < 1) throw UsageError("dimension must be at least 1");
  if (cfg.t_values.empty()) throw UsageError("no t values given");
  if (cfg.trials < 1 || cfg.points_per_t < 1) throw UsageError("trials and points_per_t must be positive");
  if (!(cfg.eta > 0.0)) throw UsageError("eta must be positive");
  if (!(cfg.eps > 0.0)) throw UsageError("eps must be positive");

  const auto p = static_cast<std::size_t>(cfg.p);
  std::vector<RegionA> regions;
  std::vector<RadiusVector> points;
  for (std::size_t ti = 0; ti < cfg.t_values.size(); ++ti) {
    regions.push_back(region_A(cfg.t_values[ti], cfg.p));
    const RegionA& A = regions.back();
    for (int k = 0; k < cfg.points_per_t; ++k) {
      std::vector<double> r(p);
      auto u = [&](std::size_t axis) {
        return counter_uniform(cfg.system.seed ^ kPointStream, ti, static_cast<std::uint64_t>(k) * p + axis);
      };
      r[0] = A.t * std::exp(std::log1p(cfg.eta) * u(0));
      for (std::size_t j = 1; j < p; ++j) r[j] = A.t1 * std::exp(std::log(A.t2 / A.t1) * u(j));
      points.emplace_back(std::move(r));
    }
  }

  LowerBoundResult result{};
  result.product_sum_ok = true;
  for (const auto& r : points) {
    std::vector<double> ps;
    for (double ri : r.radii()) ps.push_back(psi(ri));
    result.product_sum_ok = result.product_sum_ok && product_sum_holds(ps);
  }

  const MultiPowerSeries f = exp_sum_for_radii(cfg.p, points, cfg.delta2, cfg.N);
  result.truncation = f.truncation();
  const double exponent = cfg.p / 4.0 - cfg.eps;

  const std::size_t per_t = static_cast<std::size_t>(cfg.points_per_t);
  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  result.rows.resize(cfg.t_values.size() * trials * per_t);
  parallel_for(trials, cfg.workers, [&](std::size_t trial) {
    const MultiPowerSeries g = randomize(f, cfg.system, trial);
    for (std::size_t ti = 0; ti < cfg.t_values.size(); ++ti)
      for (std::size_t k = 0; k < per_t; ++k) {
        const RadiusVector& r = points[ti * per_t + k];
        const double mu = maximal_term(g, r).log_value;
        const double rhs = mu + exponent * std::log(mu);
        double lhs = max_modulus(g, r, cfg.budget).log_value;
        bool retried = false;
        if (lhs < rhs) {
          lhs = std::max(lhs, max_modulus(g, r, cfg.budget.doubled()).log_value);
          retried = true;
        }
        result.rows[(ti * trials + trial) * per_t + k] = {cfg.t_values[ti],
                                                          std::vector<double>(r.radii().begin(), r.radii().end()),
                                                          static_cast<int>(trial),
                                                          lhs,
                                                          rhs,
                                                          lhs >= rhs,
                                                          retried};
      }
  });
  const auto held = std::count_if(result.rows.begin(), result.rows.end(), [](const auto& row) { return row.holds; });
  result.hold_fraction = static_cast<double>(held) / static_cast<double>(result.rows.size());

  // Union of thickened slices: r_1 in [s, s(1+eta)] for s = r0 (1+eta)^k.
  const double t_max = *std::max_element(cfg.t_values.begin(), cfg.t_values.end());
  double s = cfg.r0.value_or(*std::min_element(cfg.t_values.begin(), cfg.t_values.end()));
  const PsiTable table(1.0, 4.0 * t_max + 8.0, 2048);
  double measure = 0.0;
  std::vector<FitSample> fit;
  while (s <= t_max * (1.0 + 1e-12)) {
    const RegionA A = region_A(s, cfg.p, &table);
    double slice = std::log1p(cfg.eta);
    for (std::size_t j = 1; j < p; ++j) slice *= std::log(A.t2 / A.t1);
    measure += slice;
    s *= 1.0 + cfg.eta;
    result.measure_curve.push_back({std::log(s), measure});
    fit.push_back({std::log(s), measure});
  }
  // A narrow t range cannot support a fit; the slope is then reported as NaN.
  try {
    result.region_log_measure_slope = exponent_fit(fit).slope;
  } catch (const DomainError&) {
    result.region_log_measure_slope = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

std::vector<ErdosRenyiPoint> erdos_renyi_ratio(const ErdosRenyiConfig& cfg) {
  if (cfg.system.kind != SystemKind::steinhaus && cfg.system.kind != SystemKind::unit)
    throw DomainError("Erdos-Renyi ratio is stated for the Steinhaus system (or the unit control)");
  if (cfg.r_values.empty()) throw UsageError("no radii given");
  if (cfg.trials < 1) throw UsageError("trials must be positive");
  std::vector<RadiusVector> radii;
  for (double r : cfg.r_values) radii.push_back(RadiusVector{r});
  const MultiPowerSeries f = exp_sum_for_radii(1, radii, cfg.delta2, cfg.N);
  const double exponent = 0.25 - cfg.eps;

  const std::size_t trials = static_cast<std::size_t>(cfg.trials);
  std::vector<double> log_ratio(radii.size() * trials);
  parallel_for(trials, cfg.workers, [&](std::size_t trial) {
    const MultiPowerSeries g = randomize(f, cfg.system, trial);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      const double mu = maximal_term(g, radii[i]).log_value;
      if (!(mu > 1.0)) throw DomainError("ratio needs mu_g(r) > e");
      log_ratio[i * trials + trial] = max_modulus(g, radii[i], cfg.budget).log_value - mu - exponent * std::log(mu);
    }
  });
  std::vector<ErdosRenyiPoint> out;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    std::vector<double> v(log_ratio.begin() + static_cast<std::ptrdiff_t>(i * trials),
                          log_ratio.begin() + static_cast<std::ptrdiff_t>((i + 1) * trials));
    for (double& x : v) x = std::exp(x);
    out.push_back({cfg.r_values[i], median(std::move(v))});
  }
  return out;
}

}  // namespace wiman
