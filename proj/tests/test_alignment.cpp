#include <gtest/gtest.h>

#include <cmath>

#include "eqlab/alignment.hpp"

using namespace eqlab;

namespace {
HypercubeFunction random_function(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return tabulate(d, [&](std::size_t) { return n01(rng); });
}

HypercubeFunction centered(const HypercubeFunction& f) {
  double mean = wht_forward(f)[0];
  auto out = f;
  for (double& v : out.values()) v -= mean;
  return out;
}
}  // namespace

TEST(Groups, OrdersAndEnumerationAgree) {
  for (auto kind : {GroupKind::perm, GroupKind::sign, GroupKind::sign_perm}) {
    GroupSpec g(kind, 4);
    double count = 0;
    for_each_element(g, [&](const SignedPermutation&) { count += 1; });
    EXPECT_EQ(count, group_order(g)) << to_string(kind);
  }
  GroupSpec fix(GroupKind::perm_fixing, 5, 0b00101);
  double count = 0;
  for_each_element(fix, [&](const SignedPermutation& e) {
    count += 1;
    EXPECT_EQ(e.perm[0], 0);
    EXPECT_EQ(e.perm[2], 2);
  });
  EXPECT_EQ(count, 6.0);
  EXPECT_THROW(group_order(GroupSpec(GroupKind::rot, 3)), std::invalid_argument);
  EXPECT_THROW(GroupSpec(GroupKind::perm, 3, 1), std::invalid_argument);
}

TEST(Groups, MatrixActionMatchesPointAction) {
  Rng rng = make_rng(11);
  GroupSpec g(GroupKind::sign_perm, 6);
  for (int t = 0; t < 20; ++t) {
    auto e = sample_element(g, rng);
    Eigen::MatrixXd m = e.matrix();
    EXPECT_TRUE(is_orthogonal(m));
    std::size_t x = std::uniform_int_distribution<std::size_t>(0, 63)(rng);
    Eigen::VectorXd v(6);
    for (int i = 0; i < 6; ++i) v(i) = coord(x, i);
    Eigen::VectorXd mv = m * v;
    std::size_t y = e.apply(x);
    for (int i = 0; i < 6; ++i) EXPECT_EQ(mv(i), coord(y, i));
  }
}

TEST(Groups, HaarRotationIsSpecialOrthogonal) {
  Rng rng = make_rng(12);
  for (int d = 2; d <= 8; ++d) {
    auto q = haar_rotation(d, rng);
    EXPECT_TRUE(is_orthogonal(q, 1e-12));
    EXPECT_NEAR(q.determinant(), 1.0, 1e-12);
  }
}

// Uniformity check on the first column: E[q_11^2] = 1/d.
TEST(Groups, HaarRotationFirstMoment) {
  Rng rng = make_rng(13);
  const int d = 5, n = 20000;
  double s = 0.0;
  for (int t = 0; t < n; ++t) {
    auto q = haar_rotation(d, rng);
    s += q(0, 0) * q(0, 0);
  }
  EXPECT_NEAR(s / n, 1.0 / d, 0.01);
}

TEST(Alignment, SignPermClosedFormMatchesBruteForce) {
  Rng rng = make_rng(14);
  for (int d = 2; d <= 4; ++d)
    for (int t = 0; t < 5; ++t) {
      auto f = random_function(d, rng);
      auto closed = sign_perm_alignment(wht_forward(f));
      auto brute = brute_force_alignment(f, GroupSpec(GroupKind::sign_perm, d));
      EXPECT_NEAR(brute.value, std::max(closed.value, closed.level0_weight), 1e-10);
      auto fc = centered(f);
      EXPECT_NEAR(brute_force_alignment(fc, GroupSpec(GroupKind::sign_perm, d)).value, sign_perm_alignment(wht_forward(fc)).value, 1e-10);
    }
}

TEST(Alignment, SignClosedFormMatchesBruteForce) {
  Rng rng = make_rng(15);
  for (int d = 2; d <= 5; ++d) {
    auto f = random_function(d, rng);
    EXPECT_NEAR(brute_force_alignment(f, GroupSpec(GroupKind::sign, d)).value, sign_alignment(wht_forward(f)).value, 1e-10);
  }
}

TEST(Alignment, PermutationOrbitMethodMatchesBruteForce) {
  Rng rng = make_rng(16);
  for (int d = 3; d <= 5; ++d) {
    auto f = random_function(d, rng);
    auto spec = wht_forward(f);
    EXPECT_NEAR(perm_subgroup_alignment(spec, 0).value, brute_force_alignment(f, GroupSpec(GroupKind::perm, d)).value, 1e-9);
    Mask t = 0b1;
    EXPECT_NEAR(perm_subgroup_alignment(spec, t).value, brute_force_alignment(f, GroupSpec(GroupKind::perm_fixing, d, t)).value, 1e-9);
  }
}

TEST(Alignment, ParityUnderPermutationsIsInverseBinomial) {
  // a single parity of size k spreads evenly over C(d, k) images
  auto exact = perm_subgroup_alignment(wht_forward(parity(8, 0b111)), 0);
  EXPECT_NEAR(exact.value, 1.0 / binomial(8, 3), 1e-12);
  auto mc = perm_subgroup_alignment(wht_forward(parity(10, 0b11)), 0, 99, 20000);
  ASSERT_TRUE(mc.std_error.has_value());
  EXPECT_NEAR(mc.value, 1.0 / binomial(10, 2), 4.0 * *mc.std_error + 1e-12);
}

TEST(Alignment, WitnessAttainsReportedValue) {
  Rng rng = make_rng(17);
  auto f = centered(random_function(4, rng));
  GroupSpec g(GroupKind::sign_perm, 4);
  auto brute = brute_force_alignment(f, g);
  ASSERT_EQ(brute.witness.spectrum.size(), std::size_t{16});
  auto h = wht_inverse(FourierSpectrum(4, brute.witness.spectrum));
  EXPECT_NEAR(alignment_objective(f, g, h), brute.value, 1e-10);
  // any unit-norm h is bounded by the alignment
  for (int t = 0; t < 10; ++t) {
    auto r = random_function(4, rng);
    double n = std::sqrt(l2_norm_sq(r));
    for (double& v : r.values()) v /= n;
    EXPECT_LE(alignment_objective(f, g, r), brute.value + 1e-12);
  }
}

TEST(Alignment, ParityMod4BelowInverseDimensionScale) {
  for (int d = 4; d <= 12; ++d) EXPECT_LE(sign_perm_alignment(wht_forward(parity_mod4(d))).value, std::ldexp(1.0, -d) * (1 + 1e-12));
}

TEST(Alignment, CrossPredictabilityOfParities) {
  const int d = 6, k = 2;
  auto fam = parity_family(d, k);
  auto est = cross_predictability(fam, GroupSpec(GroupKind::sign_perm, d), 20000, 5);
  auto [cp, align] = family_parity_closed_forms(d, k);
  EXPECT_NEAR(est.value, cp, 4.0 * est.std_error);
  EXPECT_NEAR(brute_force_alignment(fam.members, GroupSpec(GroupKind::sign_perm, d)).value, align, 1e-10);
}

TEST(Alignment, InvariantPartIsInvariant) {
  Rng rng = make_rng(18);
  auto f = random_function(5, rng);
  for (auto g : {GroupSpec(GroupKind::perm, 5), GroupSpec(GroupKind::perm_fixing, 5, 0b11), GroupSpec(GroupKind::sign_perm, 5)}) {
    auto inv = wht_inverse(invariant_part(wht_forward(f), g));
    for (int t = 0; t < 5; ++t) {
      auto moved = compose(inv, sample_element(g, rng));
      for (std::size_t x = 0; x < inv.size(); ++x) EXPECT_NEAR(moved[x], inv[x], 1e-12);
    }
  }
}

TEST(Alignment, MspBoundRejectsLowLeapSets) {
  FourierSupport f(2, {0b11});
  EXPECT_NO_THROW(msp_alignment_bound(f, 0, 1, 4));
  EXPECT_NEAR(msp_alignment_bound(f, 0, 1, 4), 16.0 / 16.0, 1e-15);
  EXPECT_THROW(msp_alignment_bound(f, 0b1, 1, 4), std::invalid_argument);
  EXPECT_THROW(msp_alignment_bound(f, 0, 1, 3), std::invalid_argument);
}

TEST(Alignment, BruteForceCaps) {
  EXPECT_THROW(brute_force_alignment(parity(11, 1), GroupSpec(GroupKind::sign, 11)), SizeError);
}
