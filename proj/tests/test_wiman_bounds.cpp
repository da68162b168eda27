#include <doctest.h>

#include <cmath>
#include <numbers>

#include "wiman/bounds.hpp"
#include "wiman/errors.hpp"

using namespace wiman;

namespace {

const double e = std::numbers::e;

// Closed form of the integral of du / (u ln^{1+d} u) over [e, U].
double h_factor_integral(double U, double d) { return (1.0 - std::pow(std::log(U), -d)) / d; }

}  // namespace

TEST_CASE("classical right-hand side") {
  CHECK(rhs_classical(e, 1e-12) == doctest::Approx(e + 0.5));
  CHECK(rhs_classical(100.0, 0.05) == doctest::Approx(102.53284).epsilon(1e-7));
  CHECK(rhs_classical(100.0, 0.1) > rhs_classical(100.0, 0.05));
  CHECK_THROWS_AS(rhs_classical(1.0, 0.05), DomainError);
  CHECK_THROWS_AS(rhs_classical(5.0, 0.0), DomainError);
}

TEST_CASE("multivariate right-hand side") {
  SUBCASE("p = 1 reduces to the classical bound") {
    RadiusVector r{std::exp(3.0)};
    CHECK(rhs_multivariate(50.0, r, 0.07, BracketPower::half) == doctest::Approx(rhs_classical(50.0, 0.07)));
  }
  SUBCASE("exp_sum at (e^2, e^2), factor by factor") {
    auto f = make_exp_sum(2, 80);
    RadiusVector r{e * e, e * e};
    const double mu = maximal_term(f, r).log_value;
    // bracket = ln r_1 * ln r_2 * ln^2 mu = 2 * 2 * mu^2 (in log-mu units).
    const double bracket = 2.0 * 2.0 * mu * mu;
    CHECK(rhs_multivariate(f, r, 0.05, BracketPower::half) ==
          doctest::Approx(mu + 0.55 * std::log(bracket)).epsilon(1e-13));
    CHECK(rhs_multivariate(f, r, 0.05, BracketPower::quarter) < rhs_multivariate(f, r, 0.05, BracketPower::half));
  }
  SUBCASE("domain guards") {
    CHECK_THROWS_AS(rhs_multivariate(10.0, RadiusVector{2.0, 10.0}, 0.05, BracketPower::half), DomainError);
    CHECK_THROWS_AS(rhs_multivariate(0.5, RadiusVector{10.0, 10.0}, 0.05, BracketPower::half), DomainError);
  }
}

TEST_CASE("reduced right-hand side") {
  CHECK(rhs_reduced(40.0, 1, 0.05, BracketPower::half) == doctest::Approx(rhs_classical(40.0, 0.05)));
  CHECK(rhs_reduced(100.0, 2, 0.1, BracketPower::quarter) == doctest::Approx(102.76310).epsilon(1e-7));
  CHECK(rhs_reduced(100.0, 2, 0.1, BracketPower::quarter) < rhs_reduced(100.0, 2, 0.1, BracketPower::half));
  CHECK_THROWS_AS(rhs_reduced(1.0, 2, 0.1, BracketPower::half), DomainError);
}

TEST_CASE("multivariate bound dominates the reduced bound when every ln r_i > 1") {
  for (double a : {1.05, 1.5, 3.0})
    for (double b : {1.2, 2.0, 4.0}) {
      RadiusVector r{std::exp(a), std::exp(b)};
      for (double mu : {3.0, 30.0, 300.0})
        CHECK(rhs_multivariate(mu, r, 0.05, BracketPower::half) >= rhs_reduced(mu, 2, 0.05, BracketPower::half));
    }
}

TEST_CASE("right-hand sides increase with their slack") {
  RadiusVector r{std::exp(2.0), std::exp(3.0)};
  for (double mu : {2.0, 20.0}) {
    CHECK(rhs_multivariate(mu, r, 0.2, BracketPower::quarter) > rhs_multivariate(mu, r, 0.1, BracketPower::quarter));
    CHECK(rhs_reduced(mu, 2, 0.2, BracketPower::half) > rhs_reduced(mu, 2, 0.1, BracketPower::half));
    CHECK(rhs_classical(mu, 0.2) > rhs_classical(mu, 0.1));
  }
}

TEST_CASE("integrability integral") {
  SUBCASE("exp_sum in two variables against a fine quadrature") {
    auto f = make_exp_sum_pruned(2, 100000, std::vector<double>{2.0 * std::exp(4.0), 2.0 * std::exp(4.0)});
    const double R = std::exp(4.0);
    auto est = condition4_integral(f, 1.0, R, 24);
    // ln M = r_1 + r_2 exactly, so the integrand is 1 / (e^u + e^v) in log coordinates.
    auto oracle = condition4_integral(
        2, [](const RadiusVector& r) { return r[0] + r[1]; }, 1.0, R, 400);
    CHECK(est.value == doctest::Approx(oracle.value).epsilon(0.01));
    auto finer = condition4_integral(f, 1.0, R, 48);
    CHECK(std::abs(finer.value - est.value) < 0.005 * est.value);
    CHECK(est.tail_delta > 0.0);
    CHECK(est.tail_delta < 0.2 * est.value);
  }
  SUBCASE("slow growth diverges") {
    // ln M(r) = ln^2 r with beta = 0.4: the integral of du / u^0.8 diverges.
    // Increments over [ln R, 2 ln R] grow like ln^0.2 R; with beta = 1 they decay.
    auto lm = [](const RadiusVector& r) { return std::pow(std::log(r[0]), 2.0); };
    auto increment = [&](double beta, double logR) {
      return condition4_integral(1, lm, beta, std::exp(2.0 * logR), 4000).value -
             condition4_integral(1, lm, beta, std::exp(logR), 4000).value;
    };
    CHECK(increment(0.4, 8.0) > increment(0.4, 4.0));
    CHECK(increment(0.4, 16.0) > increment(0.4, 8.0));
    CHECK(increment(1.0, 16.0) < increment(1.0, 8.0));
    // The R -> 2R tail shrinks in both cases, so on its own it is only evidence.
    CHECK(condition4_integral(1, lm, 0.4, std::exp(16.0), 4000).tail_delta <
          condition4_integral(1, lm, 0.4, std::exp(8.0), 4000).tail_delta);
  }
  SUBCASE("guards") {
    auto lm = [](const RadiusVector&) { return -1.0; };
    CHECK_THROWS_AS(condition4_integral(1, lm, 1.0, 10.0, 10), DomainError);
    CHECK_THROWS_AS(condition4_integral(make_exp_sum(2, 0), 1.0, 10.0, 10), DomainError);
  }
}

TEST_CASE("lemma bound for the logarithmic derivative") {
  SUBCASE("p = 1 has no product factor") {
    RadiusVector r{std::exp(2.0)};
    const double lm = 30.0;
    CHECK(lemma23_rhs(lm, r, 0, 0.05) == doctest::Approx(lm * std::pow(std::log(lm), 1.05)));
  }
  SUBCASE("exp_sum at (e^3, e^3)") {
    auto f = make_exp_sum(2, 140);
    RadiusVector r{std::exp(3.0), std::exp(3.0)};
    const double lhs = partial_log_derivative(f, r, 0);
    CHECK(lhs == doctest::Approx(std::exp(3.0)).epsilon(1e-9));
    const double lm = 2.0 * std::exp(3.0);
    const double oracle = lm * std::pow(std::log(lm), 1.05) * 3.0 * std::pow(std::log(3.0), 1.05);
    CHECK(lemma23_rhs(f, r, 0, 0.05) == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(lhs < lemma23_rhs(f, r, 0, 0.05));
  }
  SUBCASE("1/h is integrable away from the singularity at u = 1") {
    // Midpoint rule in s = ln ln u over [e, U]^2 against the closed form.
    const double d = 0.05;
    double previous_gap = 1e9;
    for (double U : {1e3, 1e6, 1e12}) {
      const int steps = 2000;
      const double smax = std::log(std::log(U));
      double one_axis = 0.0;
      for (int k = 0; k < steps; ++k) {
        const double s = (k + 0.5) * smax / steps;
        const double u = std::exp(std::exp(s));
        std::vector<double> uu{u};
        // du = u ln u ds
        one_axis += u * std::log(u) / lemma23_h(uu, d) * smax / steps;
      }
      const double exact = h_factor_integral(U, d);
      CHECK(one_axis == doctest::Approx(exact).epsilon(1e-6));
      const double gap = 1.0 / (d * d) - exact * exact;
      CHECK(gap < previous_gap);
      previous_gap = gap;
    }
    std::vector<double> at_one{1.0, 5.0};
    CHECK_THROWS_AS(lemma23_h(at_one, d), DomainError);
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(lemma23_rhs(10.0, RadiusVector{2.0}, 0, 0.05), DomainError);
    CHECK_THROWS_AS(lemma23_rhs(0.9, RadiusVector{10.0}, 0, 0.05), DomainError);
    CHECK_THROWS_AS(lemma23_rhs(10.0, RadiusVector{10.0}, 1, 0.05), UsageError);
  }
}
