#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "eqlab/gd_engine.hpp"

using namespace eqlab;

namespace {
HypercubeFunction random_function(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return tabulate(d, [&](std::size_t) { return n01(rng); });
}

constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST(GdEngine, ClipContract) {
  Rng rng = make_rng(41);
  std::normal_distribution<double> n01(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd v(7);
    for (int i = 0; i < 7; ++i) v(i) = 3.0 * n01(rng);
    const double R = std::uniform_real_distribution<double>(0.0, 10.0)(rng);
    Eigen::VectorXd c = clip_to_ball(v, R);
    EXPECT_NEAR(c.norm(), std::min(v.norm(), R), 1e-12);
    EXPECT_NEAR(c.dot(v), c.norm() * v.norm(), 1e-9);
  }
  EXPECT_THROW(clip_to_ball(Eigen::VectorXd::Ones(2), -1.0), std::invalid_argument);
}

TEST(GdEngine, NetworkGradientMatchesFiniteDifferences) {
  Rng rng = make_rng(42);
  for (auto act : {Activation::tanh(), Activation::monomial(3), Activation::linear()}) {
    TwoLayerNet net = init_net(5, 4, act, InitSpec::gaussian(0.5), InitSpec::gaussian(0.5), rng);
    Eigen::VectorXd x(4);
    x << 0.3, -1.0, 0.7, 0.2;
    Eigen::VectorXd g = net.gradient(x);
    Eigen::VectorXd theta = net.params();
    for (Eigen::Index j = 0; j < theta.size(); ++j) {
      const double h = 1e-6;
      TwoLayerNet p = net, m = net;
      Eigen::VectorXd tp = theta, tm = theta;
      tp(j) += h;
      tm(j) -= h;
      p.set_params(tp);
      m.set_params(tm);
      EXPECT_NEAR(g(j), (p(x) - m(x)) / (2 * h), 1e-6) << act.name() << " param " << j;
    }
  }
}

// Without clipping g_D is half the population-loss gradient.
TEST(GdEngine, UnclippedGradientIsHalfLossGradient) {
  Rng rng = make_rng(43);
  auto f = random_function(4, rng);
  Dataset ds = hypercube_dataset(f);
  TwoLayerNet net = init_net(3, 4, Activation::tanh(), InitSpec::gaussian(0.5), InitSpec::gaussian(0.5), rng);
  Eigen::VectorXd g = population_gradient(net, ds, kInf);
  Eigen::VectorXd theta = net.params();
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double h = 1e-6;
    TwoLayerNet p = net, m = net;
    Eigen::VectorXd tp = theta, tm = theta;
    tp(j) += h;
    tm(j) -= h;
    p.set_params(tp);
    m.set_params(tm);
    EXPECT_NEAR(g(j), 0.5 * (population_loss(p, ds) - population_loss(m, ds)) / (2 * h), 1e-6);
  }
}

TEST(GdEngine, RunsAreReproducibleAndNoiseIsKeyedByStep) {
  Rng rng = make_rng(44);
  auto f = random_function(5, rng);
  Dataset ds = hypercube_dataset(f);
  TwoLayerNet net = init_net(4, 5, Activation::tanh(), InitSpec::gaussian(0.4), InitSpec::gaussian(0.4), rng);
  TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.tau = 0.05;
  cfg.R = 2.0;
  cfg.k = 20;
  cfg.seed = 7;
  cfg.stride = 5;
  auto a = gd_run(net, ds, cfg), b = gd_run(net, ds, cfg);
  EXPECT_EQ(a.losses, b.losses);
  ASSERT_EQ(a.snapshot_steps, (std::vector<int>{0, 5, 10, 15, 20}));
  for (std::size_t i = 0; i < a.snapshots.size(); ++i) EXPECT_EQ(a.snapshots[i], b.snapshots[i]);
  EXPECT_EQ(step_noise(7, 3, 10, 0.5), step_noise(7, 3, 10, 0.5));
  EXPECT_NE(step_noise(7, 3, 10, 0.5), step_noise(7, 4, 10, 0.5));
  for (double l : a.losses) EXPECT_GE(l, 0.0);
}

TEST(GdEngine, ZeroStepAndZeroNoiseLeaveParametersFixed) {
  Rng rng = make_rng(45);
  Dataset ds = hypercube_dataset(random_function(3, rng));
  TwoLayerNet net = init_net(3, 3, Activation::relu(), InitSpec::gaussian(1.0), InitSpec::gaussian(1.0), rng);
  TrainConfig cfg;
  cfg.k = 5;
  auto tr = gd_run(net, ds, cfg);
  EXPECT_EQ(tr.final_net.params(), net.params());
}

TEST(GdEngine, NoiselessGdDecreasesLoss) {
  Rng rng = make_rng(46);
  Dataset ds = hypercube_dataset(parity(3, 0b1));
  TwoLayerNet net = init_net(8, 3, Activation::tanh(), InitSpec::gaussian(0.5), InitSpec::gaussian(0.1), rng);
  TrainConfig cfg;
  cfg.eta = 0.2;
  cfg.k = 200;
  auto tr = gd_run(net, ds, cfg);
  EXPECT_LT(tr.losses.back(), 0.2 * tr.losses.front());
}

TEST(GdEngine, DivergenceIsReported) {
  Rng rng = make_rng(47);
  Dataset ds = hypercube_dataset(full_parity(3));
  TwoLayerNet net = init_net(4, 3, Activation::monomial(5), InitSpec::gaussian(2.0), InitSpec::gaussian(2.0), rng);
  TrainConfig cfg;
  cfg.eta = 1e6;
  cfg.k = 50;
  EXPECT_THROW(gd_run(net, ds, cfg), std::overflow_error);
}

TEST(GdEngine, SgdStepFollowsUpdateRule) {
  Rng rng = make_rng(48);
  TwoLayerNet net = init_net(3, 2, Activation::tanh(), InitSpec::gaussian(0.7), InitSpec::gaussian(0.7), rng);
  Dataset one;
  one.X.resize(1, 2);
  one.X << 1.0, -1.0;
  one.y.resize(1);
  one.y << 0.5;
  one.weight = Eigen::VectorXd::Ones(1);
  const double eta = 0.05;
  auto tr = sgd_run(net, one, eta);
  Eigen::VectorXd x = one.X.row(0).transpose();
  Eigen::VectorXd expected = net.params() + 2.0 * eta * (0.5 - net(x)) * net.gradient(x);
  EXPECT_LE((tr.final_net.params() - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(GdEngine, JunkGradientIdentity) {
  Rng rng = make_rng(49);
  for (int t = 0; t < 20; ++t) {
    const int d = 3 + t % 4;
    TwoLayerNet net = init_net(4, d, t % 2 ? Activation::relu() : Activation::tanh(), InitSpec::gaussian(0.8), InitSpec::gaussian(0.8), rng);
    auto jg = junk_gradient_difference(net, random_function(d, rng), random_function(d, rng), 0.3 + t * 0.2);
    EXPECT_LE((jg.difference - jg.direct).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(GdEngine, CouplingsHoldForEachGroup) {
  Rng rng = make_rng(50);
  const int d = 6;
  Dataset ds = hypercube_dataset(random_function(d, rng));
  TrainConfig cfg;
  cfg.eta = 0.05;
  cfg.tau = 0.02;
  cfg.R = 3.0;
  cfg.k = 15;
  cfg.seed = 3;
  Eigen::MatrixXd probes = ds.X.topRows(20);
  TwoLayerNet net = init_net(6, d, Activation::tanh(), InitSpec::gaussian(0.4), InitSpec::gaussian(0.4), rng);
  for (auto kind : {GroupKind::perm, GroupKind::sign, GroupKind::sign_perm}) {
    auto m = sample_element(GroupSpec(kind, d), rng).matrix();
    EXPECT_LE(equivariance_coupling_check(net, m, ds, cfg, probes), 1e-10) << to_string(kind);
  }
  EXPECT_LE(equivariance_coupling_check(net, haar_rotation(d, rng), ds, cfg, probes), 1e-10);
  cfg.clip = ClipMode::loss_gradient;
  EXPECT_LE(equivariance_coupling_check(net, haar_rotation(d, rng), ds, cfg, probes), 1e-10);
}

// The coupling breaks when the first layer is not transformed, so the check has teeth.
TEST(GdEngine, CouplingDetectsNonEquivariantStart) {
  Rng rng = make_rng(51);
  const int d = 5;
  Dataset ds = hypercube_dataset(random_function(d, rng));
  TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.k = 5;
  TwoLayerNet net = init_net(4, d, Activation::tanh(), InitSpec::gaussian(0.6), InitSpec::gaussian(0.6), rng);
  auto m = haar_rotation(d, rng);
  Trajectory a = gd_run(net, ds, cfg);
  Trajectory b = gd_run(net, transform_points(ds, m), cfg);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    Eigen::VectorXd x = ds.X.row(i).transpose();
    worst = std::max(worst, std::abs(a.final_net(x) - b.final_net(Eigen::VectorXd(m * x))));
  }
  EXPECT_GT(worst, 1e-3);
}

TEST(GdEngine, BoundArithmetic) {
  auto b = theorem_bound(0.1, 1.0, 0.1, 10, 1.0 / 120, 0.5);
  EXPECT_NEAR(b.raw, 0.1 * std::sqrt(10.0 / 120) / 0.2 + (1.0 / 120) / 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(theorem_bound(1, 10, 0.01, 100, 0.5, 0.1).clamped, 1.0);
  EXPECT_TRUE(std::isinf(theorem_bound(1, 1, 0, 1, 0.5, 1).raw));
  EXPECT_THROW(theorem_bound(1, 1, 1, 1, 1, 0), std::invalid_argument);
  auto kl = kl_budget(0.1, 2.0, 0.5, 10, 0.01);
  EXPECT_NEAR(kl.kl, 10 * 0.01 * 4.0 * 0.01 / (2 * 0.25), 1e-15);
  EXPECT_NEAR(kl.tv, std::sqrt(kl.kl / 2), 1e-15);
}

TEST(GdEngine, BumpWeakLearningSignal) {
  auto f = parity(6, 0b11);
  auto rep = weak_learn_boolean(f, 2, 3000, 1.0 / 24000, 0.0, 5);
  EXPECT_DOUBLE_EQ(rep.loss_before, 1.0);
  EXPECT_LT(rep.loss_after, rep.loss_before);
  EXPECT_GT(rep.gradient_norm_sq, 0.0);
  auto est = bump_correlation_moment(f, 2.0 / 6, 20000, 6);
  EXPECT_GT(est.value - 3 * est.std_error, bump_correlation_lower_bound(wht_forward(f), 2));
}

TEST(GdEngine, SphereWeakLearningSignal) {
  auto p = SpherePolynomial::coordinate(4, 0);
  auto rep = weak_learn_sphere(p, 1, 400, 1.0 / 400, 8, 20000);
  EXPECT_GT(rep.gradient_norm_sq, rep.noise_floor);
  EXPECT_LT(rep.loss_after, rep.loss_before);
}

TEST(GdEngine, LowerBoundExperimentReportsConsistency) {
  const int d = 6;
  auto f = parity(d, 0b111);
  HypercubeFunction alpha(d);
  TrainConfig cfg;
  cfg.eta = 0.1;
  cfg.R = 1.0;
  cfg.tau = 0.1;
  cfg.k = 5;
  cfg.seed = 4;
  NetFactory factory = [](Rng& rng) { return init_net(4, 6, Activation::tanh(), InitSpec::gaussian(0.4), InitSpec::gaussian(0.1), rng); };
  double c = sign_perm_alignment(wht_forward(f)).value;
  auto rep = lower_bound_experiment(f, alpha, GroupSpec(GroupKind::sign_perm, d), factory, cfg, 20, c, 0.5, 2);
  EXPECT_EQ(rep.trials, 20u);
  EXPECT_NEAR(rep.threshold, 0.5, 1e-15);
  EXPECT_TRUE(rep.consistent);
  auto again = lower_bound_experiment(f, alpha, GroupSpec(GroupKind::sign_perm, d), factory, cfg, 20, c, 0.5, 1);
  EXPECT_EQ(rep.learned.successes, again.learned.successes);
}

TEST(GdEngine, ConfigValidation) {
  TrainConfig cfg;
  cfg.eta = -1;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.eta = 0;
  cfg.stride = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(hypercube_dataset(HypercubeFunction(17)), SizeError);
}
