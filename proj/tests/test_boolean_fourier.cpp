#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eqlab/boolean_fourier.hpp"

using namespace eqlab;

namespace {
HypercubeFunction random_function(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return tabulate(d, [&](std::size_t) { return n01(rng); });
}
}  // namespace

TEST(BooleanFourier, RoundtripAndParseval) {
  Rng rng = make_rng(1);
  for (int d = 1; d <= 14; ++d) {
    auto f = random_function(d, rng);
    auto spec = wht_forward(f);
    auto back = wht_inverse(spec);
    for (std::size_t x = 0; x < f.size(); ++x) EXPECT_NEAR(back[x], f[x], 1e-10);
    double total = 0.0;
    for (double c : spec.coeffs()) total += c * c;
    EXPECT_NEAR(total, l2_norm_sq(f), 1e-10);
  }
}

TEST(BooleanFourier, FastTransformMatchesNaiveExactly) {
  Rng rng = make_rng(2);
  std::uniform_int_distribution<int> small(-16, 16);
  for (int d = 1; d <= 8; ++d) {
    auto f = tabulate(d, [&](std::size_t) { return static_cast<double>(small(rng)); });
    EXPECT_EQ(wht_forward(f).coeffs(), wht_forward_naive(f).coeffs());
  }
}

TEST(BooleanFourier, CoordinateConvention) {
  // bit i set means x_i = -1
  EXPECT_EQ(coord(0b101, 0), -1);
  EXPECT_EQ(coord(0b101, 1), 1);
  EXPECT_EQ(chi(0b11, 0b01), -1.0);
  EXPECT_EQ(chi(0b11, 0b11), 1.0);
  for (std::size_t x = 0; x < 64; ++x) EXPECT_EQ(point_code(point_coords(x, 6)), x);
}

TEST(BooleanFourier, ParityHasOneCoefficient) {
  const int d = 7;
  const Mask s = 0b1010010;
  auto spec = wht_forward(parity(d, s));
  for (std::size_t t = 0; t < spec.size(); ++t) EXPECT_DOUBLE_EQ(spec[t], t == s ? 1.0 : 0.0);
  auto lw = level_weights(spec);
  EXPECT_DOUBLE_EQ(lw[3], 1.0);
}

TEST(BooleanFourier, EvaluateAgreesWithTable) {
  Rng rng = make_rng(3);
  auto f = random_function(6, rng);
  auto spec = wht_forward(f);
  for (std::size_t x = 0; x < f.size(); ++x) EXPECT_NEAR(evaluate(spec, x), f[x], 1e-12);
}

TEST(BooleanFourier, InnerProductIsPlancherel) {
  Rng rng = make_rng(4);
  auto f = random_function(8, rng), g = random_function(8, rng);
  auto a = wht_forward(f), b = wht_forward(g);
  double s = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) s += a[t] * b[t];
  EXPECT_NEAR(inner(f, g), s, 1e-12);
}

TEST(BooleanFourier, Mod8ValuesAreResidues) {
  auto f = mod8(9);
  for (std::size_t x = 0; x < f.size(); ++x) {
    int sum = 0;
    for (int i = 0; i < 9; ++i) sum += coord(x, i);
    EXPECT_EQ(f[x], ((sum % 8) + 8) % 8);
  }
}

// parity_mod4 = Im prod_j i^{(1 + x_j)/2}, so fhat(S) = 2^{-d/2} sin(pi (d + 2|S|) / 4)
TEST(BooleanFourier, ParityMod4SpectrumOracle) {
  for (int d = 2; d <= 12; ++d) {
    auto spec = wht_forward(parity_mod4(d));
    double mx = 0.0;
    for (std::size_t s = 0; s < spec.size(); ++s) {
      const double expected = std::pow(2.0, -d / 2.0) * std::sin(std::numbers::pi * (d + 2 * popcount(s)) / 4.0);
      EXPECT_NEAR(spec[s], expected, 1e-14) << "d=" << d << " S=" << s;
      mx = std::max(mx, spec[s] * spec[s]);
    }
    EXPECT_NEAR(mx, d % 2 == 0 ? std::ldexp(1.0, -d) : std::ldexp(1.0, -d - 1), 1e-15) << "d=" << d;
  }
}

TEST(BooleanFourier, JuntaEmbedsCoordinates) {
  Rng rng = make_rng(5);
  auto h = random_function(3, rng);
  auto f = junta(h, 6, {5, 0, 2});
  for (std::size_t x = 0; x < f.size(); ++x) {
    std::size_t hx = ((x >> 5) & 1) | (((x >> 0) & 1) << 1) | (((x >> 2) & 1) << 2);
    EXPECT_DOUBLE_EQ(f[x], h[hx]);
  }
  auto spec = wht_forward(f);
  for (std::size_t s = 0; s < spec.size(); ++s)
    if (s & ~Mask{0b100101}) EXPECT_NEAR(spec[s], 0.0, 1e-14);
}

TEST(BooleanFourier, CapsAndShapes) {
  EXPECT_THROW(HypercubeFunction(21), SizeError);
  EXPECT_THROW(HypercubeFunction(3, std::vector<double>(7)), std::invalid_argument);
  EXPECT_THROW(FourierSpectrum(2, std::vector<double>(5)), std::invalid_argument);
  EXPECT_THROW(junta(parity(3, 1), 2), std::invalid_argument);
}
