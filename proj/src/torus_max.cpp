#include "wiman/torus_max.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <set>
#include <string>

#include "wiman/errors.hpp"
#include "wiman/log_math.hpp"
#include "wiman/parallel.hpp"

namespace wiman {

namespace {

using cplx = std::complex<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kWindowDepth = 40.0;
constexpr std::size_t kCandidatesPerLevel = 3;
constexpr int kGoldenIterations = 30;
constexpr std::size_t kMaxGridPoints = std::size_t{1} << 26;
constexpr std::uint64_t kSampleSeed = 0x746f727573ULL;

std::size_t pow2_ceil(std::size_t x) {
  std::size_t m = 1;
  while (m < x) m <<= 1;
  return m;
}

double wrap_angle(double t) {
  double w = std::fmod(t, kTwoPi);
  return w < 0.0 ? w + kTwoPi : w;
}

// Significant part of f on the torus of radius r, scaled by e^-log_scale and
// shifted so every axis starts at exponent 0 (the shift does not change |f|).
struct TrigWindow {
  int p = 0;
  double log_scale = 0.0;
  double omitted = 0.0;  // mass left out, in units of e^log_scale
  std::vector<std::int32_t> exps;
  std::vector<cplx> coeffs;
  std::vector<std::int32_t> span;

  std::size_t size() const { return coeffs.size(); }
  const std::int32_t* exp(std::size_t i) const { return exps.data() + i * static_cast<std::size_t>(p); }
};

TrigWindow make_window(const MultiPowerSeries& f, std::span<const double> logs, double log_majorant) {
  TrigWindow w;
  w.p = f.dimension();
  const auto p = static_cast<std::size_t>(w.p);
  w.log_scale = *std::max_element(logs.begin(), logs.end());
  const double floor_log = w.log_scale - kWindowDepth;
  const IndexTable& table = f.indices();

  std::vector<std::int32_t> lo(p, INT32_MAX), hi(p, 0);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    if (logs[i] >= floor_log) {
      kept.push_back(i);
      for (std::size_t j = 0; j < p; ++j) {
        lo[j] = std::min(lo[j], table[i][j]);
        hi[j] = std::max(hi[j], table[i][j]);
      }
    } else {
      w.omitted += std::exp(logs[i] - w.log_scale);
    }
  }
  if (f.certificate()) w.omitted += std::exp(f.certificate()->log_relative_bound + log_majorant - w.log_scale);

  w.span.resize(p);
  for (std::size_t j = 0; j < p; ++j) w.span[j] = hi[j] - lo[j];
  w.exps.reserve(kept.size() * p);
  w.coeffs.reserve(kept.size());
  for (auto i : kept) {
    for (std::size_t j = 0; j < p; ++j) w.exps.push_back(table[i][j] - lo[j]);
    w.coeffs.push_back(std::polar(std::exp(logs[i] - w.log_scale), f.phases()[i]));
  }
  return w;
}

std::vector<std::vector<cplx>> angle_powers(const TrigWindow& w, std::span<const double> angles) {
  std::vector<std::vector<cplx>> tables(static_cast<std::size_t>(w.p));
  for (std::size_t j = 0; j < tables.size(); ++j) {
    tables[j].resize(static_cast<std::size_t>(w.span[j]) + 1);
    for (std::size_t k = 0; k < tables[j].size(); ++k)
      tables[j][k] = std::polar(1.0, static_cast<double>(k) * angles[j]);
  }
  return tables;
}

double window_abs(const TrigWindow& w, std::span<const double> angles) {
  auto tables = angle_powers(w, angles);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    cplx term = w.coeffs[i];
    const std::int32_t* e = w.exp(i);
    for (std::size_t j = 0; j < tables.size(); ++j)
      if (e[j] != 0) term *= tables[j][static_cast<std::size_t>(e[j])];
    sum += term;
  }
  return std::abs(sum);
}

// Coefficients of the one-variable polynomial obtained by freezing every
// angle except `axis`.
std::vector<cplx> line_polynomial(const TrigWindow& w, std::span<const double> angles, int axis) {
  auto tables = angle_powers(w, angles);
  const auto a = static_cast<std::size_t>(axis);
  std::vector<cplx> b(static_cast<std::size_t>(w.span[a]) + 1, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < w.size(); ++i) {
    cplx term = w.coeffs[i];
    const std::int32_t* e = w.exp(i);
    for (std::size_t j = 0; j < tables.size(); ++j)
      if (j != a && e[j] != 0) term *= tables[j][static_cast<std::size_t>(e[j])];
    b[static_cast<std::size_t>(e[a])] += term;
  }
  return b;
}

double horner_norm(const std::vector<cplx>& b, double x) {
  const cplx z = std::polar(1.0, x);
  cplx acc = b.back();
  for (std::size_t k = b.size() - 1; k-- > 0;) acc = acc * z + b[k];
  return std::norm(acc);
}

// Coordinate ascent: golden-section search on each angle within +-bracket[j]
// of the current point. Only strict improvements move the point, so extra
// sweeps can only raise `value`.
void refine(const TrigWindow& w, std::vector<double>& angles, double& value, std::span<const double> bracket,
            int sweeps) {
  constexpr double g = 0.6180339887498949;
  for (int s = 0; s < sweeps; ++s) {
    for (int axis = 0; axis < w.p; ++axis) {
      const auto a = static_cast<std::size_t>(axis);
      if (w.span[a] == 0) continue;
      auto b = line_polynomial(w, angles, axis);
      auto phi = [&](double x) { return horner_norm(b, x); };
      double best_x = angles[a];
      double best_f = value * value;
      double lo = angles[a] - bracket[a], hi = angles[a] + bracket[a];
      double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
      double fc = phi(c), fd = phi(d);
      auto consider = [&](double x, double fx) {
        if (fx > best_f) {
          best_f = fx;
          best_x = x;
        }
      };
      consider(c, fc);
      consider(d, fd);
      for (int it = 0; it < kGoldenIterations; ++it) {
        if (fc >= fd) {
          hi = d;
          d = c;
          fd = fc;
          c = hi - g * (hi - lo);
          fc = phi(c);
          consider(c, fc);
        } else {
          lo = c;
          c = d;
          fc = fd;
          d = lo + g * (hi - lo);
          fd = phi(d);
          consider(d, fd);
        }
      }
      if (best_f > value * value) {
        angles[a] = best_x;
        value = std::sqrt(best_f);
      }
    }
  }
}

// --- FFTW plumbing --------------------------------------------------------

struct FftwFree {
  void operator()(fftw_complex* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

FftwBuffer fftw_buffer(std::size_t n) {
  auto* p = fftw_alloc_complex(n);
  if (!p) throw std::bad_alloc();
  return FftwBuffer(p);
}

// Planning is not thread-safe in FFTW; execution with new arrays is.
fftw_plan backward_plan(const std::vector<int>& dims) {
  static std::mutex mutex;
  static std::map<std::vector<int>, fftw_plan> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(dims);
  if (it != cache.end()) return it->second;
  std::size_t total = 1;
  for (int d : dims) total *= static_cast<std::size_t>(d);
  auto in = fftw_buffer(total), out = fftw_buffer(total);
  fftw_plan plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), in.get(), out.get(), FFTW_BACKWARD,
                                 FFTW_ESTIMATE);
  if (!plan) throw std::runtime_error("FFTW planning failed");
  cache.emplace(dims, plan);
  return plan;
}

struct Best {
  double value = -1.0;
  std::vector<double> angles;

  void offer(double v, const std::vector<double>& a) {
    if (v > value) {
      value = v;
      angles = a;
    }
  }
};

Best dense_search(const TrigWindow& w, const TorusBudget& budget) {
  const auto p = static_cast<std::size_t>(w.p);
  const std::size_t q = pow2_ceil(static_cast<std::size_t>(std::max(1, budget.grid_per_axis)));
  const std::size_t os = pow2_ceil(static_cast<std::size_t>(std::max(1, budget.oversample)));

  std::vector<std::size_t> base(p), fine(p);
  std::size_t total = 1;
  for (std::size_t j = 0; j < p; ++j) {
    base[j] = pow2_ceil(2 * static_cast<std::size_t>(w.span[j]) + 1);
    fine[j] = std::max(base[j] * os, q);
    total *= fine[j];
    if (total > kMaxGridPoints)
      throw DomainError("torus grid of " + std::to_string(total) + "+ points exceeds the dense-mode limit");
  }
  std::vector<std::size_t> stride(p, 1);
  for (std::size_t j = p - 1; j-- > 0;) stride[j] = stride[j + 1] * fine[j + 1];

  auto in = fftw_buffer(total), out = fftw_buffer(total);
  std::fill_n(reinterpret_cast<double*>(in.get()), 2 * total, 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < p; ++j) pos += static_cast<std::size_t>(w.exp(i)[j]) * stride[j];
    in[pos][0] += w.coeffs[i].real();
    in[pos][1] += w.coeffs[i].imag();
  }
  std::vector<int> dims(fine.begin(), fine.end());
  fftw_execute_dft(backward_plan(dims), in.get(), out.get());
  std::vector<double> mag(total);
  for (std::size_t k = 0; k < total; ++k) mag[k] = std::hypot(out[k][0], out[k][1]);

  Best best;
  std::vector<double> angles(p, 0.0);
  {
    std::size_t arg = static_cast<std::size_t>(std::max_element(mag.begin(), mag.end()) - mag.begin());
    for (std::size_t j = 0; j < p; ++j) angles[j] = kTwoPi * static_cast<double>((arg / stride[j]) % fine[j]) / fine[j];
    best.offer(mag[arg], angles);
  }

  // Every level is a subgrid of the fine grid; a larger budget only adds levels.
  std::set<std::vector<std::size_t>> levels;
  for (std::size_t a = 1; a <= os; a <<= 1)
    for (std::size_t qq = 1; qq <= q; qq <<= 1) {
      std::vector<std::size_t> m(p);
      for (std::size_t j = 0; j < p; ++j) m[j] = std::max(base[j] * a, qq);
      levels.insert(std::move(m));
    }

  for (const auto& m : levels) {
    std::size_t count = 1;
    for (auto mj : m) count *= mj;
    std::vector<std::size_t> step(p);
    for (std::size_t j = 0; j < p; ++j) step[j] = fine[j] / m[j];

    auto fine_pos = [&](const std::vector<std::size_t>& k) {
      std::size_t pos = 0;
      for (std::size_t j = 0; j < p; ++j) pos += (k[j] % m[j]) * step[j] * stride[j];
      return pos;
    };

    std::vector<std::pair<double, std::size_t>> peaks;
    std::vector<std::size_t> k(p, 0);
    for (std::size_t lin = 0; lin < count; ++lin) {
      std::size_t rem = lin;
      for (std::size_t j = p; j-- > 0;) {
        k[j] = rem % m[j];
        rem /= m[j];
      }
      const double v = mag[fine_pos(k)];
      bool is_peak = true;
      for (std::size_t j = 0; j < p && is_peak; ++j) {
        if (m[j] == 1) continue;
        auto kk = k;
        kk[j] = (k[j] + 1) % m[j];
        if (mag[fine_pos(kk)] > v) is_peak = false;
        kk[j] = (k[j] + m[j] - 1) % m[j];
        if (mag[fine_pos(kk)] > v) is_peak = false;
      }
      if (is_peak) peaks.emplace_back(v, lin);
    }
    const std::size_t keep = std::min(kCandidatesPerLevel, peaks.size());
    std::partial_sort(peaks.begin(), peaks.begin() + static_cast<std::ptrdiff_t>(keep), peaks.end(),
                      [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });

    std::vector<double> bracket(p);
    for (std::size_t j = 0; j < p; ++j) bracket[j] = kTwoPi / static_cast<double>(m[j]);
    for (std::size_t c = 0; c < keep; ++c) {
      std::size_t rem = peaks[c].second;
      for (std::size_t j = p; j-- > 0;) {
        angles[j] = kTwoPi * static_cast<double>(rem % m[j]) / static_cast<double>(m[j]);
        rem /= m[j];
      }
      double value = peaks[c].first;
      refine(w, angles, value, bracket, budget.refine_steps);
      best.offer(value, angles);
    }
  }
  return best;
}

Best sampled_search(const TrigWindow& w, const TorusBudget& budget) {
  const auto p = static_cast<std::size_t>(w.p);
  std::vector<double> bracket(p);
  for (std::size_t j = 0; j < p; ++j) bracket[j] = kTwoPi / (2.0 * w.span[j] + 1.0);
  Best best;
  const int starts = std::max(0, budget.sample_count) + 1;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> angles(p, 0.0);
    if (s > 0)
      for (std::size_t j = 0; j < p; ++j)
        angles[j] = kTwoPi * counter_uniform(kSampleSeed, static_cast<std::uint64_t>(s), j);
    double value = window_abs(w, angles);
    refine(w, angles, value, bracket, budget.refine_steps);
    best.offer(value, angles);
  }
  return best;
}

}  // namespace

TorusBudget TorusBudget::doubled() const {
  return {grid_per_axis * 2, std::max(1, refine_steps * 2), std::max(1, sample_count * 2), std::max(1, oversample) * 2};
}

SupEstimate max_modulus(const MultiPowerSeries& f, const RadiusVector& r, const TorusBudget& budget) {
  if (f.empty()) throw ZeroSeriesError();
  auto logs = f.log_terms(r);
  const double majorant = log_sum_exp(logs);
  const SupMode mode = f.dimension() <= 2 ? SupMode::dense : SupMode::sampled;
  const bool nonnegative = std::all_of(f.phases().begin(), f.phases().end(), [](double t) {
    return std::remainder(t, kTwoPi) == 0.0;
  });
  // M = sum |a_n| r^n at the zero angles.
  if (nonnegative) {
    double log_value = majorant;
    if (f.certificate()) log_value += std::log1p(-std::min(1.0, std::exp(f.certificate()->log_relative_bound)));
    return {log_value, std::vector<double>(static_cast<std::size_t>(f.dimension()), 0.0), mode};
  }
  const TrigWindow w = make_window(f, logs, majorant);

  Best best = mode == SupMode::dense ? dense_search(w, budget) : sampled_search(w, budget);

  const double certified = best.value - w.omitted;
  double log_value = certified > 0.0 ? w.log_scale + std::log(certified) : kNegInf;
  // Cauchy: every |a_n| r^n is itself a lower bound for M.
  log_value = std::min(std::max(log_value, w.log_scale), majorant);
  for (double& t : best.angles) t = wrap_angle(t);
  return {log_value, std::move(best.angles), mode};
}

double log_modulus_at(const MultiPowerSeries& f, const RadiusVector& r, std::span<const double> angles) {
  if (static_cast<int>(angles.size()) != f.dimension()) throw UsageError("angle count does not match dimension");
  if (f.empty()) return kNegInf;
  auto logs = f.log_terms(r);
  const double scale = *std::max_element(logs.begin(), logs.end());
  const IndexTable& table = f.indices();
  cplx sum = 0.0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    double arg = f.phases()[i];
    for (std::size_t j = 0; j < angles.size(); ++j) arg += table[i][j] * angles[j];
    sum += std::polar(std::exp(logs[i] - scale), arg);
  }
  return scale + std::log(std::abs(sum));
}

double s_norm(const MultiPowerSeries& f, const RadiusVector& r) {
  if (f.empty()) return kNegInf;
  auto logs = f.log_terms(r);
  for (double& v : logs) v *= 2.0;
  return 0.5 * log_sum_exp(logs);
}

double empirical_quantile(std::vector<double> values, double level) {
  if (values.empty()) throw UsageError("empirical_quantile: no values");
  std::sort(values.begin(), values.end());
  auto n = static_cast<double>(values.size());
  auto idx = static_cast<long long>(std::ceil(level * n)) - 1;
  idx = std::clamp<long long>(idx, 0, static_cast<long long>(values.size()) - 1);
  return values[static_cast<std::size_t>(idx)];
}

TailMcResult tail_probability_mc(const TailMcConfig& cfg) {
  if (cfg.p < 1) throw UsageError("mc-tail: p must be at least 1");
  if (!(cfg.beta > 0.0)) throw UsageError("mc-tail: beta must be positive");
  if (cfg.trials < 50) throw UsageError("mc-tail: need at least 50 trials for a meaningful quantile");
  if (static_cast<double>(cfg.N) < std::max<double>(cfg.p, 4.0 * std::numbers::pi))
    throw DomainError("mc-tail: N must be at least max(p, 4 pi)");

  const MultiPowerSeries shape = make_exp_sum(cfg.p, cfg.N);
  const MultiPowerSeries unit(shape.shared_indices(), cfg.N, std::vector<double>(shape.size(), 0.0),
                              std::vector<double>(shape.size(), 0.0));
  const RadiusVector ones(std::vector<double>(static_cast<std::size_t>(cfg.p), 1.0));
  const double S = std::sqrt(static_cast<double>(unit.size()));
  const double norm = S * std::sqrt(std::log(static_cast<double>(cfg.N)));

  std::vector<TailMcRow> rows(static_cast<std::size_t>(cfg.trials));
  parallel_for(rows.size(), cfg.workers, [&](std::size_t t) {
    auto g = randomize(unit, cfg.system, t);
    double W = std::exp(max_modulus(g, ones, cfg.budget).log_value);
    rows[t] = {static_cast<int>(t), W, S, W / norm};
  });

  std::vector<double> ratios;
  ratios.reserve(rows.size());
  for (const auto& row : rows) ratios.push_back(row.ratio);
  const double level = 1.0 - std::pow(static_cast<double>(cfg.N), -cfg.beta);
  const double q = empirical_quantile(ratios, level);
  const double A = cfg.threshold.value_or(q);
  auto exceed = std::count_if(ratios.begin(), ratios.end(), [&](double x) { return x > A; });
  return {q, static_cast<double>(exceed) / static_cast<double>(ratios.size()), A, std::move(rows)};
}

}  // namespace wiman
