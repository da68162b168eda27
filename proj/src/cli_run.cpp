#include "wiman/cli_run.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wiman/bounds.hpp"
#include "wiman/errors.hpp"
#include "wiman/exceptional_scan.hpp"
#include "wiman/levy.hpp"
#include "wiman/parallel.hpp"
#include "wiman/power_series.hpp"
#include "wiman/random_system.hpp"
#include "wiman/text_format.hpp"
#include "wiman/torus_max.hpp"

namespace wiman {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands = {"analyze", "scan", "mc-tail", "levy", "fit"};
const std::set<std::string> kTopKeys = {"command", "series", "system", "budget", "params", "workers", "out"};
const std::set<std::string> kSeriesKeys = {"family", "p", "N", "file"};
const std::set<std::string> kSystemKeys = {"kind", "seed", "stream"};
const std::set<std::string> kBudgetKeys = {"grid_per_axis", "refine_steps", "sample_count", "oversample"};
const std::set<std::string> kParamKeys = {"delta", "delta1", "delta2", "eps",   "exponent", "r",      "predicate",
                                          "lo",    "hi",     "cells",  "beta",  "trials",   "threshold", "mode",
                                          "t",     "points", "eta",    "r0",    "r_lo",     "r_hi"};

// ---------------------------------------------------------------------------
// Manifest access

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key)) throw UsageError("unknown key '" + key + "' in " + where);
}

const json& section(const json& m, const char* key) {
  static const json empty = json::object();
  return m.contains(key) ? m.at(key) : empty;
}

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_radius(v.get<std::string>());
  throw UsageError(std::string("'") + key + "' must be a number");
}

std::optional<double> optional_number(const json& obj, const char* key) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return number(obj, key, 0.0);
}

long long integer(const json& obj, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long long>();
  if (v.is_string()) return parse_integer(v.get<std::string>());
  throw UsageError(std::string("'") + key + "' must be an integer");
}

std::string text(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_string()) throw UsageError(std::string("'") + key + "' must be a string");
  return obj.at(key).get<std::string>();
}

std::vector<double> numbers(const json& obj, const char* key) {
  if (!obj.contains(key)) throw UsageError(std::string("missing '") + key + "'");
  const json& v = obj.at(key);
  if (v.is_string()) return parse_radius_list(v.get<std::string>());
  if (!v.is_array()) throw UsageError(std::string("'") + key + "' must be a list");
  std::vector<double> out;
  for (const auto& x : v) {
    if (x.is_number()) {
      out.push_back(x.get<double>());
    } else if (x.is_string()) {
      out.push_back(parse_radius(x.get<std::string>()));
    } else {
      throw UsageError(std::string("'") + key + "' entries must be numbers");
    }
  }
  if (out.empty()) throw UsageError(std::string("'") + key + "' is empty");
  return out;
}

unsigned workers_of(const json& m) {
  long long w = integer(m, "workers", 1);
  if (w < 1 || w > 1024) throw UsageError("workers must be in [1, 1024]");
  return static_cast<unsigned>(w);
}

TorusBudget budget_of(const json& m) {
  const json& b = section(m, "budget");
  TorusBudget budget;
  budget.grid_per_axis = static_cast<int>(integer(b, "grid_per_axis", budget.grid_per_axis));
  budget.refine_steps = static_cast<int>(integer(b, "refine_steps", budget.refine_steps));
  budget.sample_count = static_cast<int>(integer(b, "sample_count", budget.sample_count));
  budget.oversample = static_cast<int>(integer(b, "oversample", budget.oversample));
  if (budget.grid_per_axis < 0 || budget.refine_steps < 0 || budget.sample_count < 0 || budget.oversample < 1 ||
      budget.grid_per_axis > (1 << 24) || budget.oversample > 64)
    throw UsageError("budget fields out of range");
  return budget;
}

BoundParams params_of(const json& m) {
  const json& p = section(m, "params");
  BoundParams params;
  params.delta = number(p, "delta", params.delta);
  params.delta1 = number(p, "delta1", params.delta1);
  params.delta2 = number(p, "delta2", params.delta2);
  params.eps = number(p, "eps", params.eps);
  params.exponent = optional_number(p, "exponent");
  try {
    params.validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  return params;
}

std::optional<CoefficientSystem> system_of(const json& m, const std::string& fallback = "none") {
  const json& s = section(m, "system");
  const std::string kind = text(s, "kind", fallback);
  if (kind == "none") return std::nullopt;
  const long long seed = integer(s, "seed", 0);
  if (seed < 0) throw UsageError("seed must be nonnegative");
  return CoefficientSystem{parse_system_kind(kind), static_cast<std::uint64_t>(seed)};
}

std::uint64_t stream_of(const json& m) {
  long long s = integer(section(m, "system"), "stream", 0);
  if (s < 0) throw UsageError("stream must be nonnegative");
  return static_cast<std::uint64_t>(s);
}

int dimension_of(const json& m) {
  long long p = integer(section(m, "series"), "p", 1);
  if (p < 1 || p > 16) throw UsageError("p must be in [1, 16]");
  return static_cast<int>(p);
}

// N is an integer or "auto" (0 here).
std::int64_t truncation_of(const json& m) {
  const json& s = section(m, "series");
  if (!s.contains("N") || (s.at("N").is_string() && s.at("N").get<std::string>() == "auto")) return 0;
  long long N = integer(s, "N", 0);
  if (N < 1) throw UsageError("N must be a positive integer or \"auto\"");
  return N;
}

std::vector<RadiusVector> radius_points(const std::vector<double>& flat, int p) {
  if (flat.size() != static_cast<std::size_t>(p)) throw UsageError("radius list must have p entries");
  return {RadiusVector(flat)};
}

// Series for a command that evaluates at (at most) the given radii.
MultiPowerSeries build_series(const json& m, std::span<const RadiusVector> radii, double delta2) {
  const json& s = section(m, "series");
  const std::string family = text(s, "family", "exp_sum");
  if (family == "file") {
    MultiPowerSeries f = load_series(text(s, "file", ""));
    if (s.contains("p") && dimension_of(m) != f.dimension()) throw UsageError("p does not match the series file");
    return f;
  }
  if (family != "exp_sum") throw UsageError("unknown series family '" + family + "'");
  const int p = dimension_of(m);
  const std::int64_t N = truncation_of(m);
  if (N == 0) return exp_sum_for_radii(p, radii, delta2);
  std::vector<double> limit(static_cast<std::size_t>(p), 0.0);
  for (const auto& r : radii) {
    if (r.dimension() != p) throw UsageError("radius dimension does not match p");
    for (int j = 0; j < p; ++j) limit[static_cast<std::size_t>(j)] = std::max(limit[static_cast<std::size_t>(j)], r[j]);
  }
  return make_exp_sum_pruned(p, N, limit);
}

// ---------------------------------------------------------------------------
// Artifacts

class Artifacts {
 public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  void write(const std::string& name, const std::string& content) const {
    if (dir_.empty()) return;
    std::ofstream f(std::filesystem::path(dir_) / name, std::ios::binary);
    if (!f) throw UsageError("cannot write " + name + " under " + dir_);
    f << content;
  }

 private:
  std::string dir_;
};

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }
  Csv& cell(double x) { return raw(format_double(x)); }
  Csv& cell(long long x) { return raw(std::to_string(x)); }
  Csv& raw(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  void end() {
    out_ << '\n';
    first_ = true;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

std::vector<std::string> indexed(const std::string& stem, int p) {
  std::vector<std::string> out;
  for (int j = 1; j <= p; ++j) out.push_back(stem + std::to_string(j));
  return out;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// ---------------------------------------------------------------------------
// Commands

json run_analyze(const json& m, const Artifacts&) {
  const BoundParams params = params_of(m);
  const auto points = radius_points(numbers(section(m, "params"), "r"), dimension_of(m));
  MultiPowerSeries f = build_series(m, points, params.delta2);
  if (auto sys = system_of(m)) f = randomize(f, *sys, stream_of(m));
  const RadiusVector& r = points.front();
  f.require_radius(r);

  const auto mt = maximal_term(f, r);
  const auto sup = max_modulus(f, r, budget_of(m));
  json derivs = json::array();
  for (int s = 0; s < f.dimension(); ++s) derivs.push_back(partial_log_derivative(f, r, s));
  json summary = {{"command", "analyze"},
                  {"p", f.dimension()},
                  {"N", f.truncation()},
                  {"stored_terms", f.size()},
                  {"r", std::vector<double>(r.radii().begin(), r.radii().end())},
                  {"log_mu", mt.log_value},
                  {"central_index", std::vector<std::int32_t>(mt.argmax.entries().begin(), mt.argmax.entries().end())},
                  {"log_majorant", sum_modulus(f, r)},
                  {"log_M", sup.log_value},
                  {"argmax_angles", sup.argmax_angles},
                  {"sup_mode", sup.mode == SupMode::dense ? "dense" : "sampled"},
                  {"log_S", s_norm(f, r)},
                  {"log_derivatives", derivs}};
  try {
    summary["tail_cut_index"] = tail_cut_index(f, r, params.delta2);
  } catch (const DomainError&) {
    summary["tail_cut_index"] = nullptr;
  }
  return summary;
}

json run_scan(const json& m, const Artifacts& artifacts) {
  const json& pj = section(m, "params");
  const BoundParams params = params_of(m);
  const int p = dimension_of(m);
  auto lo = numbers(pj, "lo"), hi = numbers(pj, "hi");
  if (lo.size() == 1) lo.assign(static_cast<std::size_t>(p), lo[0]);
  if (hi.size() == 1) hi.assign(static_cast<std::size_t>(p), hi[0]);
  const long long cells = integer(pj, "cells", 16);
  if (cells < 0 || cells > 4096) throw UsageError("cells must be in [1, 4096]");
  const RadialGrid grid(lo, hi, static_cast<int>(cells));
  const Predicate predicate = parse_predicate(text(pj, "predicate", "eq3"));

  std::vector<RadiusVector> centres;
  for (std::size_t id = 0; id < grid.cell_count(); ++id) centres.push_back(grid.center(id));
  MultiPowerSeries f = build_series(m, centres, params.delta2);
  if (auto sys = system_of(m)) f = randomize(f, *sys, stream_of(m));

  const auto report = scan(f, grid, predicate, params, budget_of(m), workers_of(m));
  Csv csv(concat(concat({"cell_id"}, indexed("r_", p)), {"lhs_log", "rhs_log", "flagged"}));
  for (const auto& row : report.rows) {
    csv.cell(static_cast<long long>(row.cell_id));
    for (double r : row.radii) csv.cell(r);
    csv.cell(row.lhs_log).cell(row.rhs_log).cell(static_cast<long long>(row.flagged));
    csv.end();
  }
  artifacts.write("scan.csv", csv.str());
  return {{"command", "scan"},
          {"predicate", report.predicate_name},
          {"N", f.truncation()},
          {"cells", grid.cell_count()},
          {"flagged_count", report.flagged.size()},
          {"flagged_log_measure", report.flagged_log_measure},
          {"scanned_log_measure", report.scanned_log_measure}};
}

json run_mc_tail(const json& m, const Artifacts& artifacts) {
  const json& pj = section(m, "params");
  TailMcConfig cfg;
  cfg.p = dimension_of(m);
  cfg.N = truncation_of(m);
  if (cfg.N == 0) cfg.N = 64;
  cfg.beta = number(pj, "beta", 1.0);
  cfg.trials = static_cast<int>(integer(pj, "trials", 500));
  cfg.threshold = optional_number(pj, "threshold");
  cfg.system = system_of(m, "steinhaus").value_or(CoefficientSystem{SystemKind::unit, 0});
  cfg.budget = budget_of(m);
  cfg.workers = workers_of(m);
  const auto res = tail_probability_mc(cfg);

  Csv csv({"trial", "W", "S", "ratio"});
  for (const auto& row : res.rows) {
    csv.cell(static_cast<long long>(row.trial)).cell(row.W).cell(row.S).cell(row.ratio);
    csv.end();
  }
  artifacts.write("mc_tail.csv", csv.str());
  return {{"command", "mc-tail"},
          {"N", cfg.N},
          {"p", cfg.p},
          {"beta", cfg.beta},
          {"trials", cfg.trials},
          {"system", std::string(to_string(cfg.system.kind))},
          {"seed", cfg.system.seed},
          {"quantile_ratio", res.quantile_ratio},
          {"exceed_fraction", res.exceed_fraction},
          {"threshold", res.threshold}};
}

json run_levy(const json& m, const Artifacts& artifacts) {
  const json& pj = section(m, "params");
  const std::string mode = text(pj, "mode", "lower-bound");
  const auto sys = system_of(m, "steinhaus");
  if (!sys) throw UsageError("levy needs a coefficient system");
  const std::int64_t N = truncation_of(m);
  const long long trials = integer(pj, "trials", 50);
  if (trials < 1) throw UsageError("trials must be positive");

  if (mode == "lower-bound") {
    LowerBoundConfig cfg;
    cfg.p = dimension_of(m);
    cfg.eps = number(pj, "eps", 0.15);
    cfg.t_values = numbers(pj, "t");
    cfg.trials = static_cast<int>(trials);
    cfg.system = *sys;
    cfg.N = N;
    cfg.budget = budget_of(m);
    cfg.points_per_t = static_cast<int>(integer(pj, "points", 8));
    cfg.eta = number(pj, "eta", 0.05);
    cfg.r0 = optional_number(pj, "r0");
    cfg.delta2 = params_of(m).delta2;
    cfg.workers = workers_of(m);
    const auto res = lower_bound_experiment(cfg);

    Csv csv(concat(concat({"t"}, indexed("r_", cfg.p)), {"trial", "lhs_log", "rhs_log", "holds"}));
    for (const auto& row : res.rows) {
      csv.cell(row.t);
      for (double r : row.radii) csv.cell(r);
      csv.cell(static_cast<long long>(row.trial)).cell(row.lhs_log).cell(row.rhs_log);
      csv.cell(static_cast<long long>(row.holds));
      csv.end();
    }
    artifacts.write("levy.csv", csv.str());
    Csv curve({"log_t", "measure"});
    for (const auto& pt : res.measure_curve) {
      curve.cell(pt.log_t).cell(pt.measure);
      curve.end();
    }
    artifacts.write("measure.csv", curve.str());
    return {{"command", "levy"},
            {"mode", mode},
            {"hold_fraction", res.hold_fraction},
            {"slope", res.region_log_measure_slope},
            {"product_sum_ok", res.product_sum_ok},
            {"N", res.truncation},
            {"eps", cfg.eps},
            {"seed", sys->seed}};
  }
  if (mode == "erdos-renyi") {
    if (dimension_of(m) != 1) throw UsageError("erdos-renyi mode is one-dimensional");
    ErdosRenyiConfig cfg;
    cfg.r_values = numbers(pj, "r");
    cfg.trials = static_cast<int>(trials);
    cfg.eps = number(pj, "eps", 0.1);
    cfg.system = *sys;
    cfg.N = N;
    cfg.budget = budget_of(m);
    cfg.delta2 = params_of(m).delta2;
    cfg.workers = workers_of(m);
    const auto res = erdos_renyi_ratio(cfg);
    Csv csv({"r", "median_ratio"});
    json medians = json::array();
    for (const auto& pt : res) {
      csv.cell(pt.r).cell(pt.median_ratio);
      csv.end();
      medians.push_back(pt.median_ratio);
    }
    artifacts.write("erdos_renyi.csv", csv.str());
    return {{"command", "levy"}, {"mode", mode}, {"eps", cfg.eps}, {"seed", sys->seed}, {"median_ratio", medians}};
  }
  throw UsageError("levy mode must be lower-bound or erdos-renyi");
}

json run_fit(const json& m, const Artifacts& artifacts) {
  const json& pj = section(m, "params");
  const int p = dimension_of(m);
  const double lo = number(pj, "r_lo", std::exp(2.0));
  const double hi = number(pj, "r_hi", std::exp(6.0));
  const long long count = integer(pj, "points", 41);
  if (!(lo > 1.0) || !(hi > lo) || count < 2 || count > 100000) throw UsageError("fit needs 1 < r_lo < r_hi, points >= 2");
  std::vector<RadiusVector> radii;
  for (long long k = 0; k < count; ++k) {
    const double s = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(k) / (count - 1));
    radii.emplace_back(std::vector<double>(static_cast<std::size_t>(p), s));
  }
  const MultiPowerSeries f = build_series(m, radii, params_of(m).delta2);
  const TorusBudget budget = budget_of(m);
  const auto sys = system_of(m);

  if (!sys) {
    const auto samples = wiman_samples(f, radii, budget);
    const auto fit = exponent_fit(samples);
    Csv csv({"x", "y"});
    for (const auto& s : samples) {
      csv.cell(s.x).cell(s.y);
      csv.end();
    }
    artifacts.write("fit.csv", csv.str());
    return {{"command", "fit"},
            {"slope", fit.slope},
            {"intercept", fit.intercept},
            {"r2", fit.r2},
            {"sample_count", fit.sample_count}};
  }

  const long long trials = integer(pj, "trials", 200);
  if (trials < 1) throw UsageError("trials must be positive");
  std::vector<ExponentFit> fits(static_cast<std::size_t>(trials));
  parallel_for(fits.size(), workers_of(m), [&](std::size_t t) {
    fits[t] = exponent_fit(wiman_samples(randomize(f, *sys, t), radii, budget));
  });
  Csv csv({"trial", "slope", "intercept", "r2"});
  std::vector<double> slopes;
  for (std::size_t t = 0; t < fits.size(); ++t) {
    csv.cell(static_cast<long long>(t)).cell(fits[t].slope).cell(fits[t].intercept).cell(fits[t].r2);
    csv.end();
    slopes.push_back(fits[t].slope);
  }
  artifacts.write("fit.csv", csv.str());
  std::sort(slopes.begin(), slopes.end());
  const std::size_t n = slopes.size();
  const double med = n % 2 ? slopes[n / 2] : 0.5 * (slopes[n / 2 - 1] + slopes[n / 2]);
  return {{"command", "fit"},
          {"system", std::string(to_string(sys->kind))},
          {"seed", sys->seed},
          {"trials", trials},
          {"median_slope", med}};
}

// ---------------------------------------------------------------------------
// Flags -> manifest

struct Flags {
  std::optional<std::string> family, file, N, system, r, predicate, lo, hi, mode, t, threshold, exponent, r0, r_lo,
      r_hi;
  std::optional<long long> p, seed, stream, workers, cells, trials, points, grid, refine, samples, oversample;
  std::optional<double> delta, delta1, delta2, eps, beta, eta;
  std::optional<std::string> out;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--family", f.family, "series family: exp_sum or file");
  sub->add_option("--file", f.file, "series file (with --family file)");
  sub->add_option("--p", f.p, "dimension");
  sub->add_option("--N", f.N, "truncation degree or 'auto'");
  sub->add_option("--system", f.system, "none, rademacher, steinhaus, complex_ms or unit");
  sub->add_option("--seed", f.seed, "seed of the coefficient system");
  sub->add_option("--stream", f.stream, "realisation index for single-draw commands");
  sub->add_option("--workers", f.workers, "concurrent cells or trials");
  sub->add_option("--out", f.out, "output directory");
  sub->add_option("--grid", f.grid, "torus grid floor per axis");
  sub->add_option("--refine", f.refine, "coordinate-ascent sweeps");
  sub->add_option("--samples", f.samples, "random starts for p >= 3");
  sub->add_option("--oversample", f.oversample, "Nyquist grid multiplier");
  sub->add_option("--delta", f.delta);
  sub->add_option("--delta1", f.delta1);
  sub->add_option("--delta2", f.delta2);
  sub->add_option("--eps", f.eps);
}

json manifest_from_flags(const std::string& command, const Flags& f) {
  json m = {{"command", command}};
  json series = json::object(), system = json::object(), budget = json::object(), params = json::object();
  auto put = [](json& obj, const char* key, const auto& opt) {
    if (opt) obj[key] = *opt;
  };
  put(series, "family", f.family);
  put(series, "file", f.file);
  put(series, "p", f.p);
  if (f.N) {
    if (*f.N == "auto") {
      series["N"] = "auto";
    } else {
      series["N"] = parse_integer(*f.N);
    }
  }
  put(system, "kind", f.system);
  put(system, "seed", f.seed);
  put(system, "stream", f.stream);
  put(budget, "grid_per_axis", f.grid);
  put(budget, "refine_steps", f.refine);
  put(budget, "sample_count", f.samples);
  put(budget, "oversample", f.oversample);
  put(params, "delta", f.delta);
  put(params, "delta1", f.delta1);
  put(params, "delta2", f.delta2);
  put(params, "eps", f.eps);
  put(params, "beta", f.beta);
  put(params, "eta", f.eta);
  put(params, "cells", f.cells);
  put(params, "trials", f.trials);
  put(params, "points", f.points);
  put(params, "predicate", f.predicate);
  put(params, "mode", f.mode);
  put(params, "r", f.r);
  put(params, "lo", f.lo);
  put(params, "hi", f.hi);
  put(params, "t", f.t);
  put(params, "r0", f.r0);
  put(params, "r_lo", f.r_lo);
  put(params, "r_hi", f.r_hi);
  put(params, "threshold", f.threshold);
  put(params, "exponent", f.exponent);
  if (!series.empty()) m["series"] = series;
  if (!system.empty()) m["system"] = system;
  if (!budget.empty()) m["budget"] = budget;
  if (!params.empty()) m["params"] = params;
  put(m, "workers", f.workers);
  put(m, "out", f.out);
  return m;
}

}  // namespace

void validate_manifest(const json& m) {
  check_keys(m, kTopKeys, "manifest");
  const std::string command = text(m, "command", "");
  if (!kCommands.count(command)) throw UsageError("manifest command must be one of analyze, scan, mc-tail, levy, fit");
  if (m.contains("series")) check_keys(m.at("series"), kSeriesKeys, "series");
  if (m.contains("system")) check_keys(m.at("system"), kSystemKeys, "system");
  if (m.contains("budget")) check_keys(m.at("budget"), kBudgetKeys, "budget");
  if (m.contains("params")) check_keys(m.at("params"), kParamKeys, "params");
  if (m.contains("out") && !m.at("out").is_string()) throw UsageError("out must be a string");
  budget_of(m);
  params_of(m);
  workers_of(m);
}

int run_manifest(const json& m, std::ostream& out, std::ostream& err) {
  try {
    validate_manifest(m);
    const Artifacts artifacts(text(m, "out", ""));
    json echo = m;
    echo.erase("out");
    echo.erase("workers");
    artifacts.write("manifest.json", echo.dump(2) + "\n");

    const std::string command = m.at("command").get<std::string>();
    json summary;
    if (command == "analyze") summary = run_analyze(m, artifacts);
    if (command == "scan") summary = run_scan(m, artifacts);
    if (command == "mc-tail") summary = run_mc_tail(m, artifacts);
    if (command == "levy") summary = run_levy(m, artifacts);
    if (command == "fit") summary = run_fit(m, artifacts);
    const std::string text_summary = summary.dump(2) + "\n";
    artifacts.write("summary.json", text_summary);
    out << text_summary;
    return 0;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wiman-type inequalities for power series in several variables"};
  app.require_subcommand(0, 1);
  std::string manifest_path;
  std::string out_override;
  app.add_option("--manifest", manifest_path, "run a JSON manifest instead of a subcommand");
  app.add_option("--out", out_override, "output directory (overrides the manifest)");

  Flags flags;
  auto* analyze = app.add_subcommand("analyze", "mu, M, S and derivatives at one radius vector");
  add_common(analyze, flags);
  analyze->add_option("--r", flags.r, "radii, e.g. e2,e2")->required();

  auto* scan_cmd = app.add_subcommand("scan", "flag grid cells violating an inequality");
  add_common(scan_cmd, flags);
  scan_cmd->add_option("--predicate", flags.predicate, "eq1, eq3, eq5, star_quarter, thm11b_half, eq9_tail, lemma23");
  scan_cmd->add_option("--lo", flags.lo, "per-axis lower radii")->required();
  scan_cmd->add_option("--hi", flags.hi, "per-axis upper radii")->required();
  scan_cmd->add_option("--cells", flags.cells, "cells per axis");
  scan_cmd->add_option("--exponent", flags.exponent, "exponent of ln mu for eq1");

  auto* mc = app.add_subcommand("mc-tail", "Monte Carlo of the sup of random polynomials");
  add_common(mc, flags);
  mc->add_option("--beta", flags.beta);
  mc->add_option("--trials", flags.trials);
  mc->add_option("--threshold", flags.threshold, "A; defaults to the fitted quantile");

  auto* levy = app.add_subcommand("levy", "lower-bound region and Erdos-Renyi ratio experiments");
  add_common(levy, flags);
  levy->add_option("--mode", flags.mode, "lower-bound or erdos-renyi");
  levy->add_option("--t", flags.t, "base radii of A_t");
  levy->add_option("--r", flags.r, "radii for erdos-renyi");
  levy->add_option("--trials", flags.trials);
  levy->add_option("--points", flags.points, "sampled points per t");
  levy->add_option("--eta", flags.eta, "thickening of the r_1 slice");
  levy->add_option("--r0", flags.r0, "start of the measure curve");

  auto* fit = app.add_subcommand("fit", "fit ln(M/mu) against ln ln mu");
  add_common(fit, flags);
  fit->add_option("--r-lo", flags.r_lo);
  fit->add_option("--r-hi", flags.r_hi);
  fit->add_option("--points", flags.points);
  fit->add_option("--trials", flags.trials);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, eo;
    const int code = app.exit(e, o, eo);
    out << o.str();
    err << eo.str();
    return code == 0 ? 0 : 2;
  }

  json manifest;
  try {
    if (!manifest_path.empty()) {
      if (app.get_subcommands().size() > 0) throw UsageError("--manifest cannot be combined with a subcommand");
      std::ifstream in(manifest_path);
      if (!in) throw UsageError("cannot open manifest " + manifest_path);
      manifest = json::parse(in);
    } else {
      auto subs = app.get_subcommands();
      if (subs.empty()) throw UsageError("a subcommand or --manifest is required (see --help)");
      manifest = manifest_from_flags(subs.front()->get_name(), flags);
    }
    if (!out_override.empty()) manifest["out"] = out_override;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  return run_manifest(manifest, out, err);
}

}  // namespace wiman
