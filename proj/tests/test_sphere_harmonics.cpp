#include <gtest/gtest.h>

#include <cmath>

#include "eqlab/sphere_harmonics.hpp"

using namespace eqlab;

namespace {
SpherePolynomial random_polynomial(int d, int max_degree, int terms, Rng& rng) {
  SpherePolynomial p(d);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int t = 0; t < terms; ++t) {
    Exponent a(d, 0);
    int deg = std::uniform_int_distribution<int>(0, max_degree)(rng);
    for (int k = 0; k < deg; ++k) a[std::uniform_int_distribution<int>(0, d - 1)(rng)]++;
    p.add_term(a, n01(rng));
  }
  return p;
}
}  // namespace

TEST(SphereHarmonics, DimensionFormulaMatchesLaplacianKernel) {
  for (int d = 2; d <= 8; ++d)
    for (int l = 0; l <= 5; ++l) EXPECT_EQ(dim_harmonic(d, l), laplacian_kernel_dim(d, l)) << d << "," << l;
  EXPECT_EQ(dim_harmonic(3, 2), 5u);
  EXPECT_EQ(dim_harmonic(2, 4), 2u);
}

TEST(SphereHarmonics, SphereMoments) {
  const int d = 5;
  Exponent a(d, 0);
  a[0] = 2;
  EXPECT_NEAR(monomial_moment(a, d), 1.0 / d, 1e-15);
  a[0] = 4;
  EXPECT_NEAR(monomial_moment(a, d), 3.0 / (d * (d + 2.0)), 1e-15);
  a[0] = 2;
  a[1] = 2;
  EXPECT_NEAR(monomial_moment(a, d), 1.0 / (d * (d + 2.0)), 1e-15);
  a[1] = 1;
  EXPECT_EQ(monomial_moment(a, d), 0.0);
}

TEST(SphereHarmonics, DecompositionProperties) {
  Rng rng = make_rng(31);
  for (int d : {2, 3, 4, 6}) {
    for (int t = 0; t < 5; ++t) {
      auto p = random_polynomial(d, 5, 8, rng);
      auto dec = harmonic_decompose(p);
      double total = 0.0;
      SpherePolynomial sum(d);
      for (const auto& c : dec.components) {
        EXPECT_LE(laplacian(c.h).max_abs_coeff(), 1e-9);
        EXPECT_LE(c.h.degree(), c.degree);
        total += c.norm_sq;
        sum += c.h;
        for (const auto& o : dec.components)
          if (o.degree != c.degree) EXPECT_NEAR(inner_product(c.h, o.h), 0.0, 1e-9);
      }
      EXPECT_NEAR(total, norm_sq(p), 1e-9);
      for (int k = 0; k < 5; ++k) {
        auto x = sample_sphere(d, rng);
        EXPECT_NEAR(sum(x), p(x), 1e-9);
      }
    }
  }
}

TEST(SphereHarmonics, ClosedFormProjectorMatchesGramProjection) {
  Rng rng = make_rng(32);
  for (int d : {3, 4}) {
    auto p = random_polynomial(d, 4, 10, rng);
    auto dec = harmonic_decompose(p);
    for (int l = 0; l <= p.degree(); ++l) {
      auto g = project_via_gram(p, l);
      EXPECT_NEAR(norm_sq(g - dec.components[static_cast<std::size_t>(l)].h), 0.0, 1e-9) << "d=" << d << " l=" << l;
    }
  }
}

TEST(SphereHarmonics, ComponentNormsAreRotationInvariant) {
  Rng rng = make_rng(33);
  auto p = random_polynomial(4, 4, 8, rng);
  auto a = harmonic_decompose(p);
  auto b = harmonic_decompose(compose_linear(p, haar_rotation(4, rng)));
  for (std::size_t l = 0; l < a.components.size(); ++l) EXPECT_NEAR(a.components[l].norm_sq, b.norm_at(static_cast<int>(l)), 1e-9);
}

TEST(SphereHarmonics, RotationAlignmentClosedForms) {
  // x_1 lives in V_{d,1}, dimension d, so the alignment is ||x_1||^2 / d = 1/d^2
  for (int d = 2; d <= 8; ++d) {
    auto r = rotation_alignment(SpherePolynomial::coordinate(d, 0));
    EXPECT_EQ(r.level, 1);
    EXPECT_NEAR(r.value, 1.0 / (d * d), 1e-14);
  }
  // |x|^2 is constant on the sphere
  auto c = rotation_alignment(SpherePolynomial::radius_sq(5));
  EXPECT_EQ(c.level, 0);
  EXPECT_NEAR(c.value, 1.0, 1e-14);
}

TEST(SphereHarmonics, RotationAlignmentTiesPreferLowerLevel) {
  // sqrt(d) x_1 has ratio 1/d at level 1; the constant 1/2 ties it at level 0 when d = 4
  const int d = 4;
  auto p = SpherePolynomial::coordinate(d, 0) * std::sqrt(static_cast<double>(d)) + SpherePolynomial::constant(d, 1.0 / 2.0);
  auto r = rotation_alignment(p);
  EXPECT_EQ(r.level, 0);
}

TEST(SphereHarmonics, MonteCarloAgreesWithClosedForm) {
  auto p = SpherePolynomial::coordinate(3, 0) * SpherePolynomial::coordinate(3, 1);
  auto mc = rotation_alignment_monte_carlo(p, 4000, 9);
  auto exact = rotation_alignment(p);
  EXPECT_EQ(mc.level, exact.level);
  EXPECT_NEAR(mc.value, exact.value, 4.0 * mc.std_error);
}

TEST(SphereHarmonics, WeakLearnableVerdict) {
  EXPECT_TRUE(weak_learnable_sphere_verdict(SpherePolynomial::coordinate(6, 0), 1.0));
  Exponent a(6, 0);
  a[0] = a[1] = a[2] = 1;
  SpherePolynomial cubic(6);
  cubic.add_term(a, 1.0);
  EXPECT_FALSE(weak_learnable_sphere_verdict(cubic, 2.0));
  // ||x1 x2 x3||^2 = 1/480 sits between 6^-4 and 6^-3
  EXPECT_FALSE(weak_learnable_sphere_verdict(cubic, 3.0));
  EXPECT_TRUE(weak_learnable_sphere_verdict(cubic, 4.0));
}

TEST(SphereHarmonics, SamplesLieOnSphere) {
  Rng rng = make_rng(34);
  for (int t = 0; t < 100; ++t) {
    auto x = sample_sphere(7, rng);
    double r = 0.0;
    for (double v : x) r += v * v;
    EXPECT_NEAR(r, 1.0, 1e-12);
  }
}

TEST(SphereHarmonics, Caps) {
  EXPECT_THROW(harmonic_decompose(SpherePolynomial::coordinate(13, 0)), SizeError);
  EXPECT_THROW(harmonic_decompose(SpherePolynomial::coordinate(3, 0, 9)), SizeError);
  EXPECT_THROW(SpherePolynomial(1), std::invalid_argument);
}
