#pragma once

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "common.hpp"
#include "stats.hpp"

namespace eqlab {

// Maps Rad(1 - delta) to about N(1, gamma^2) and Rad(delta) to about N(-1, gamma^2).
struct RejectionKernelConfig {
  double delta = 0.0;
  double gamma = 1.0;
  int N = 1;

  void validate() const {
    if (!(delta >= 0.0 && delta < 0.1)) throw std::invalid_argument("rejection kernel needs 0 <= delta < 0.1");
    if (!(gamma > 0.0)) throw std::invalid_argument("rejection kernel needs gamma > 0");
    if (N < 1) throw std::invalid_argument("rejection kernel needs N >= 1");
  }

  // The acceptance set is |x| <= half_width.
  double half_width() const {
    if (delta == 0.0) return std::numeric_limits<double>::infinity();
    return gamma * gamma / 2.0 * (std::log1p(-delta) - std::log(delta));
  }

  bool accepts(double x) const { return std::abs(x) <= half_width(); }

  double tail_mass() const {
    const double w = half_width();
    if (std::isinf(w)) return 0.0;
    // P_{N(1, gamma^2)}[|X| > w]
    return 0.5 * std::erfc((w - 1.0) / (gamma * std::sqrt(2.0))) + 0.5 * std::erfc((w + 1.0) / (gamma * std::sqrt(2.0)));
  }

  // P_{N(1)}[X not in S] + (P_{N(-1)}[X not in S] + delta / (1 - delta))^N
  double tv_bound() const {
    const double out = tail_mass();
    return out + std::pow(out + delta / (1.0 - delta), N);
  }
};

struct KernelThreshold {
  double delta_max = 0.0;  // the displayed upper bound on delta
  int N_min = 1;
};

// delta < min(exp(-10 sqrt(log(1/eps)) / gamma^2), exp(-10 sqrt(log(1/eps)) gamma^2)), eps = 1/(2000 n^2); N >= log(2000 n^2)
inline KernelThreshold kernel_threshold(double gamma, std::size_t n) {
  if (!(gamma > 0)) throw std::invalid_argument("gamma must be positive");
  const double log_inv_eps = std::log(2000.0) + 2.0 * std::log(static_cast<double>(std::max<std::size_t>(n, 1)));
  const double root = std::sqrt(log_inv_eps);
  KernelThreshold t;
  t.delta_max = std::min(std::exp(-10.0 * root / (gamma * gamma)), std::exp(-10.0 * root * gamma * gamma));
  t.N_min = static_cast<int>(std::ceil(log_inv_eps));
  return t;
}

// A configuration inside the threshold: delta at half the bound, N at the minimum.
inline RejectionKernelConfig threshold_config(double gamma, std::size_t n) {
  auto t = kernel_threshold(gamma, n);
  return {t.delta_max / 2.0, gamma, t.N_min};
}

namespace detail {
// N(b, gamma^2) conditioned on |x| <= w, by inverse CDF.
inline double truncated_normal(double b, double gamma, double w, Rng& rng) {
  if (std::isinf(w)) return std::normal_distribution<double>(b, gamma)(rng);
  boost::math::normal_distribution<double> nd(b, gamma);
  const double lo = boost::math::cdf(nd, -w), hi = boost::math::cdf(nd, w);
  if (!(hi > lo)) return b > 0 ? w : -w;
  double u = std::uniform_real_distribution<double>(lo, hi)(rng);
  if (u <= 0.0 || u >= 1.0) return b > 0 ? w : -w;
  return std::clamp(boost::math::quantile(nd, u), -w, w);
}
}  // namespace detail

inline double rejection_kernel(int b, const RejectionKernelConfig& cfg, Rng& rng) {
  if (b != 1 && b != -1) throw std::invalid_argument("rejection kernel input must be +1 or -1");
  const double w = cfg.half_width();
  std::normal_distribution<double> propose(static_cast<double>(b), cfg.gamma);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double odds = cfg.delta / (1.0 - cfg.delta);
  for (int i = 0; i < cfg.N; ++i) {
    const double x = propose(rng);
    if (std::abs(x) > w) continue;
    // 1 - odds * (density of N(-b) / density of N(b)) at x
    const double accept = 1.0 - odds * std::exp(-2.0 * b * x / (cfg.gamma * cfg.gamma));
    if (unif(rng) < std::clamp(accept, 0.0, 1.0)) return x;
  }
  return detail::truncated_normal(static_cast<double>(b), cfg.gamma, w, rng);
}

}  // namespace eqlab
