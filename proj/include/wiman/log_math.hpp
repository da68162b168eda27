#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>

namespace wiman {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-sum-exp: value() == ln(sum_i exp(x_i)) without overflow.
// Keeps a running maximum and rescales the partial sum when it moves.
class LogSumAccumulator {
 public:
  void add(double log_x) {
    if (log_x == kNegInf) return;
    if (log_x <= max_) {
      sum_ += std::exp(log_x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - log_x) + 1.0;
      max_ = log_x;
    }
  }

  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }
  bool empty() const { return max_ == kNegInf; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// ln(e^a + e^b)
inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

inline double log_factorial(std::int64_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

}  // namespace wiman
