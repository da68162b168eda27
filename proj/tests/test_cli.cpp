#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wiman/cli_run.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "wiman");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = wiman::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("wiman_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("analyze exp_sum") {
  auto r = run({"analyze", "--family", "exp_sum", "--p", "2", "--N", "80", "--r", "e2,e2"});
  REQUIRE(r.code == 0);
  auto s = json::parse(r.out);
  CHECK(s["log_majorant"].get<double>() == doctest::Approx(2.0 * std::exp(2.0)).epsilon(1e-9));
  CHECK(std::abs(s["log_majorant"].get<double>() - 2.0 * std::exp(2.0)) < 1e-6);
  CHECK(s["log_M"].get<double>() == s["log_majorant"].get<double>());
  CHECK(s["log_mu"].get<double>() < s["log_majorant"].get<double>());
}

TEST_CASE("mc-tail reruns are byte identical") {
  auto a = scratch("mc_a"), b = scratch("mc_b");
  auto ra = run({"mc-tail", "--N", "64", "--p", "1", "--beta", "1", "--trials", "500", "--seed", "7", "--out", a.string()});
  auto rb = run({"mc-tail", "--N", "64", "--p", "1", "--beta", "1", "--trials", "500", "--seed", "7", "--workers", "2",
                 "--out", b.string()});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(slurp(a / "mc_tail.csv") == slurp(b / "mc_tail.csv"));
  CHECK(slurp(a / "summary.json") == slurp(b / "summary.json"));
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  auto summary = json::parse(slurp(a / "summary.json"));
  for (const char* key : {"N", "p", "beta", "trials", "seed", "quantile_ratio", "exceed_fraction"})
    CHECK(summary.contains(key));
  CHECK(slurp(a / "mc_tail.csv").rfind("trial,W,S,ratio\n", 0) == 0);
}

TEST_CASE("manifest replay reproduces the run") {
  auto a = scratch("replay_a"), b = scratch("replay_b");
  auto ra = run({"scan", "--p", "1", "--predicate", "eq1", "--lo", "e2", "--hi", "e4", "--cells", "12", "--system",
                 "steinhaus", "--seed", "3", "--out", a.string()});
  REQUIRE(ra.code == 0);
  auto rb = run({"--manifest", (a / "manifest.json").string(), "--out", b.string()});
  REQUIRE(rb.code == 0);
  CHECK(slurp(a / "scan.csv") == slurp(b / "scan.csv"));
  CHECK(slurp(a / "scan.csv").rfind("cell_id,r_1,lhs_log,rhs_log,flagged\n", 0) == 0);
}

TEST_CASE("inadequate truncation is a domain error naming N") {
  auto r = run({"scan", "--predicate", "eq5", "--delta", "0.05", "--p", "2", "--N", "60", "--lo", "e2,e2", "--hi",
                "e4,e4", "--cells", "4"});
  CHECK(r.code == 1);
  CHECK(r.err.find("N >= ") != std::string::npos);
}

TEST_CASE("usage errors exit with status 2") {
  CHECK(run({"scan", "--predicate", "nope", "--lo", "e2", "--hi", "e3"}).code == 2);
  CHECK(run({"analyze"}).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run({"fit", "--system", "gaussian"}).code == 2);
  auto dir = scratch("bad_manifest");
  fs::create_directories(dir);
  std::ofstream(dir / "m.json") << R"({"command": "scan", "colour": 1})";
  CHECK(run({"--manifest", (dir / "m.json").string()}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("fit and levy subcommands") {
  auto f = run({"fit", "--p", "1", "--r-lo", "e2", "--r-hi", "e6", "--points", "21"});
  REQUIRE(f.code == 0);
  CHECK(json::parse(f.out)["slope"].get<double>() == doctest::Approx(0.5).epsilon(0.1));

  auto l = run({"levy", "--mode", "erdos-renyi", "--r", "e2,e3", "--trials", "3"});
  REQUIRE(l.code == 0);
  CHECK(json::parse(l.out)["median_ratio"].size() == 2);
}

#ifdef WIMAN_CLI_PATH
TEST_CASE("installed binary exit codes") {
  const std::string bin = WIMAN_CLI_PATH;
  CHECK(std::system((bin + " --help > /dev/null").c_str()) == 0);
  CHECK(WEXITSTATUS(std::system((bin + " analyze > /dev/null 2>&1").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((bin + " analyze --p 1 --N 5 --r 0.5,0.5 > /dev/null 2>&1").c_str())) == 2);
}
#endif
