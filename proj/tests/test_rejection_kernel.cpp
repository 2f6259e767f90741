#include <gtest/gtest.h>

#include <cmath>

#include "eqlab/rejection_kernel.hpp"

using namespace eqlab;

TEST(RejectionKernel, ThresholdFormula) {
  auto t = kernel_threshold(1.0, 100);
  const double root = std::sqrt(std::log(2000.0 * 100 * 100));
  EXPECT_NEAR(t.delta_max, std::exp(-10.0 * root), 1e-300);
  EXPECT_EQ(t.N_min, static_cast<int>(std::ceil(std::log(2e7))));
  auto c = threshold_config(0.5, 100);
  EXPECT_LT(c.delta, kernel_threshold(0.5, 100).delta_max);
  EXPECT_EQ(c.N, kernel_threshold(0.5, 100).N_min);
  // symmetric in gamma <-> 1/gamma
  EXPECT_DOUBLE_EQ(kernel_threshold(0.5, 10).delta_max, kernel_threshold(2.0, 10).delta_max);
}

TEST(RejectionKernel, AcceptanceRegion) {
  RejectionKernelConfig cfg{1e-4, 0.5, 20};
  EXPECT_NEAR(cfg.half_width(), 0.125 * std::log((1 - 1e-4) / 1e-4), 1e-12);
  EXPECT_TRUE(cfg.accepts(0.0));
  EXPECT_FALSE(cfg.accepts(cfg.half_width() + 1e-9));
  EXPECT_TRUE(std::isinf(RejectionKernelConfig{0.0, 1.0, 1}.half_width()));
  EXPECT_GT(cfg.tv_bound(), 0.3);  // the example setting is far from the threshold
}

TEST(RejectionKernel, OutputsStayInsideAcceptanceSet) {
  RejectionKernelConfig cfg{0.05, 1.0, 3};
  Rng rng = make_rng(61);
  for (int t = 0; t < 20000; ++t) {
    double x = rejection_kernel(t % 2 ? 1 : -1, cfg, rng);
    EXPECT_LE(std::abs(x), cfg.half_width());
  }
}

// KS distance is at most the total-variation distance, which the bound controls.
TEST(RejectionKernel, KsWithinTotalVariationBound) {
  for (double delta : {1e-4, 1e-2}) {
    RejectionKernelConfig cfg{delta, 0.5, 20};
    Rng rng = make_rng(62, static_cast<std::uint64_t>(1e6 * delta));
    std::bernoulli_distribution major(1.0 - delta);
    std::vector<double> xs(50000);
    for (auto& x : xs) x = rejection_kernel(major(rng) ? 1 : -1, cfg, rng);
    double ks = ks_statistic(xs, [&](double v) { return normal_cdf(v, 1.0, 0.5); });
    EXPECT_LE(ks, cfg.tv_bound() + 0.01);
  }
}

TEST(RejectionKernel, ThresholdSettingMatchesTargetLaw) {
  RejectionKernelConfig cfg = threshold_config(1.0, 50);
  Rng rng = make_rng(63);
  std::vector<double> plus(40000), minus(40000);
  for (auto& x : plus) x = rejection_kernel(1, cfg, rng);
  for (auto& x : minus) x = rejection_kernel(-1, cfg, rng);
  EXPECT_LE(ks_statistic(plus, [](double v) { return normal_cdf(v, 1.0, 1.0); }), 0.02);
  EXPECT_LE(ks_statistic(minus, [](double v) { return normal_cdf(v, -1.0, 1.0); }), 0.02);
}

TEST(RejectionKernel, FallbackIsTruncatedNormal) {
  Rng rng = make_rng(64);
  const double w = 0.5;
  for (int t = 0; t < 1000; ++t) {
    double x = detail::truncated_normal(1.0, 1.0, w, rng);
    EXPECT_LE(std::abs(x), w);
  }
}

TEST(RejectionKernel, InvalidInputs) {
  Rng rng = make_rng(65);
  EXPECT_THROW(rejection_kernel(0, RejectionKernelConfig{}, rng), std::invalid_argument);
  EXPECT_THROW((RejectionKernelConfig{0.2, 1.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((RejectionKernelConfig{0.01, 0.0, 1}.validate()), std::invalid_argument);
  EXPECT_THROW((RejectionKernelConfig{0.01, 1.0, 0}.validate()), std::invalid_argument);
  EXPECT_THROW(kernel_threshold(0.0, 10), std::invalid_argument);
}
