#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace eqlab {

inline double normal_cdf(double x, double mean = 0.0, double sd = 1.0) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

// Welford running mean/variance.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// One-sample Kolmogorov-Smirnov statistic against an analytic CDF.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double f = cdf(xs[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct BinomialSummary {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double rate = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Wilson score interval at 95%.
inline BinomialSummary binomial_summary(std::size_t successes, std::size_t trials) {
  BinomialSummary s;
  s.successes = successes;
  s.trials = trials;
  if (trials == 0) return s;
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z = 1.959963984540054;
  s.rate = p;
  s.std_error = std::sqrt(p * (1.0 - p) / n);
  const double denom = 1.0 + z * z / n;
  const double center = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  s.ci_low = std::max(0.0, center - half);
  s.ci_high = std::min(1.0, center + half);
  return s;
}

}  // namespace eqlab
