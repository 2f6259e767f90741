#include <gtest/gtest.h>

#include <algorithm>

#include "eqlab/msp.hpp"

using namespace eqlab;

TEST(Msp, StaircaseExamples) {
  FourierSupport staircase(3, {0b1, 0b11, 0b111});
  FourierSupport jump(3, {0b11, 0b111});
  FourierSupport wide(4, {0b111, 0b1000});
  EXPECT_TRUE(is_l_msp(staircase, 1).satisfies);
  EXPECT_FALSE(is_l_msp(jump, 1).satisfies);
  EXPECT_TRUE(is_l_msp(jump, 2).satisfies);
  EXPECT_FALSE(is_l_msp(wide, 2).satisfies);
  EXPECT_TRUE(is_l_msp(wide, 3).satisfies);
  EXPECT_EQ(minimal_leap(staircase), 1);
  EXPECT_EQ(minimal_leap(jump), 2);
  EXPECT_EQ(minimal_leap(wide), 3);
}

TEST(Msp, ReportContents) {
  FourierSupport jump(3, {0b11, 0b111});
  auto r = is_l_msp(jump, 1);
  EXPECT_EQ(r.closure, Mask{0});
  EXPECT_EQ(r.violating_sets.size(), 2u);
  EXPECT_EQ(r.minimal_leap, 2);
  auto ok = is_l_msp(jump, 2);
  EXPECT_EQ(ok.closure, Mask{0b111});
  EXPECT_EQ(ok.ordering.size(), 2u);
  EXPECT_TRUE(ok.violating_sets.empty());
}

TEST(Msp, EmptySetAndEmptySupport) {
  EXPECT_TRUE(is_l_msp(FourierSupport(2, {0b0, 0b1, 0b11}), 1).satisfies);
  EXPECT_TRUE(is_l_msp(FourierSupport(0, {}), 1).satisfies);
}

TEST(Msp, GreedyMatchesExhaustive) {
  Rng rng = make_rng(21);
  for (int t = 0; t < 300; ++t) {
    int p = std::uniform_int_distribution<int>(1, 6)(rng);
    int m = std::uniform_int_distribution<int>(1, std::min(7, (1 << p) - 1))(rng);
    std::vector<Mask> all;
    for (Mask x = 1; x < (Mask{1} << p); ++x) all.push_back(x);
    std::shuffle(all.begin(), all.end(), rng);
    FourierSupport f(p, std::vector<Mask>(all.begin(), all.begin() + m));
    for (int l = 1; l <= p; ++l) EXPECT_EQ(is_l_msp(f, l).satisfies, is_l_msp_exhaustive(f, l));
  }
}

TEST(Msp, MonotoneInLeapAndRelabelInvariant) {
  Rng rng = make_rng(22);
  for (int t = 0; t < 100; ++t) {
    const int p = 5;
    std::vector<Mask> sets;
    for (int i = 0; i < 4; ++i) {
      Mask s = std::uniform_int_distribution<Mask>(1, 31)(rng);
      if (std::find(sets.begin(), sets.end(), s) == sets.end()) sets.push_back(s);
    }
    FourierSupport f(p, sets);
    for (int l = 1; l < p; ++l)
      if (is_l_msp(f, l).satisfies) EXPECT_TRUE(is_l_msp(f, l + 1).satisfies);
    std::vector<int> perm = {0, 1, 2, 3, 4};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Mask> moved;
    for (Mask s : sets) {
      Mask m = 0;
      for (int i = 0; i < p; ++i)
        if ((s >> i) & 1) m |= Mask{1} << perm[i];
      moved.push_back(m);
    }
    EXPECT_EQ(minimal_leap(f), minimal_leap(FourierSupport(p, moved)));
  }
}

TEST(Msp, SupportValidation) {
  EXPECT_THROW(FourierSupport(2, {0b100}), std::invalid_argument);
  EXPECT_THROW(FourierSupport(2, {0b1, 0b1}), std::invalid_argument);
  EXPECT_THROW(FourierSupport(2, {0b1}, {0.0}), std::invalid_argument);
  EXPECT_THROW(FourierSupport(2, {0b1}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Msp, NecessityBoundShape) {
  FourierSupport h(3, {0b11, 0b111});
  EXPECT_THROW(necessity_bound(h, 10, 2, 0.1, 1, 0.1, 10), std::domain_error);
  EXPECT_THROW(necessity_bound(h, 5, 1, 0.1, 1, 0.1, 10), std::invalid_argument);
  auto a = necessity_bound(h, 100, 1, 0.1, 1, 0.1, 10);
  auto b = necessity_bound(h, 1000, 1, 0.1, 1, 0.1, 10);
  EXPECT_GE(a.probability_bound, b.probability_bound);
  EXPECT_GE(a.direct_bound, b.direct_bound);
  EXPECT_LE(a.probability_bound, 1.0);
  EXPECT_GE(b.probability_bound, 0.0);
  EXPECT_DOUBLE_EQ(a.c_h, 1.0);
  EXPECT_DOUBLE_EQ(a.C_h, 64.0 * 2.0);
  EXPECT_DOUBLE_EQ(a.eps0, 0.5);
  EXPECT_DOUBLE_EQ(a.C, std::max(std::sqrt(a.C_h), 2.0 * a.C_h / a.c_h));
  // nothing is reachable, so every set counts toward the alignment bound
  EXPECT_NEAR(a.alignment_bound, 64.0 * 2.0 / 1e4, 1e-15);
}
