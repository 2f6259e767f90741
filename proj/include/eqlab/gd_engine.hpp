#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "alignment.hpp"
#include "boolean_fourier.hpp"
#include "common.hpp"
#include "groups.hpp"
#include "network.hpp"
#include "sphere_harmonics.hpp"
#include "stats.hpp"

namespace eqlab {

enum class ClipMode { network_gradient, loss_gradient };

// Projection onto the closed ball of radius R.
inline Eigen::VectorXd clip_to_ball(const Eigen::VectorXd& v, double R) {
  if (R < 0) throw std::invalid_argument("clipping radius must be nonnegative");
  const double n = v.norm();
  if (n <= R) return v;
  return v * (R / n);
}

// g_D(theta) = -E[(y - f) * Pi_R(grad f)]  (or -E[Pi_R((y - f) grad f)] in loss mode)
inline Eigen::VectorXd population_gradient(const TwoLayerNet& net, const Dataset& ds, double R,
                                           ClipMode mode = ClipMode::network_gradient) {
  if (ds.dim() != net.dim()) throw std::invalid_argument("data dimension does not match the network");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(net.num_params());
  if (R == 0.0) return g;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    auto x = ds.X.row(i);
    const double r = ds.y(i) - net(x);
    Eigen::VectorXd grad = net.gradient(x);
    if (mode == ClipMode::network_gradient)
      g -= ds.weight(i) * r * clip_to_ball(grad, R);
    else
      g -= ds.weight(i) * clip_to_ball(r * grad, R);
  }
  return g;
}

struct TrainConfig {
  double eta = 0.0;
  double tau = 0.0;
  double R = std::numeric_limits<double>::infinity();
  int k = 0;
  std::uint64_t seed = 0;
  ClipMode clip = ClipMode::network_gradient;
  int stride = 1;  // snapshot every `stride` steps (the final step is always kept)

  void validate() const {
    if (eta < 0 || tau < 0 || R < 0) throw std::invalid_argument("eta, tau and R must be nonnegative");
    if (k < 0) throw std::invalid_argument("step count must be nonnegative");
    if (stride < 1) throw std::invalid_argument("snapshot stride must be positive");
  }
};

struct Trajectory {
  std::vector<int> snapshot_steps;
  std::vector<Eigen::VectorXd> snapshots;
  std::vector<double> losses;  // one per step 0..k
  TwoLayerNet final_net;
};

// Gaussian noise for one GD step, keyed by (seed, step); entry j is the noise on parameter j.
inline Eigen::VectorXd step_noise(std::uint64_t seed, int step, Eigen::Index n, double tau) {
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  if (tau == 0.0) return xi;
  Rng rng = make_rng(seed, 0x6e6f697365ULL, static_cast<std::uint64_t>(step));
  std::normal_distribution<double> nd(0.0, tau);
  for (Eigen::Index j = 0; j < n; ++j) xi(j) = nd(rng);
  return xi;
}

using NoiseMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

inline Trajectory gd_run(const TwoLayerNet& net0, const Dataset& ds, const TrainConfig& cfg, const NoiseMap& noise_map = {}) {
  cfg.validate();
  Trajectory tr;
  TwoLayerNet net = net0;
  Eigen::VectorXd theta = net.params();
  tr.snapshot_steps.push_back(0);
  tr.snapshots.push_back(theta);
  tr.losses.push_back(population_loss(net, ds));
  for (int t = 0; t < cfg.k; ++t) {
    Eigen::VectorXd xi = step_noise(cfg.seed, t, theta.size(), cfg.tau);
    if (noise_map) xi = noise_map(xi);
    theta = theta - cfg.eta * population_gradient(net, ds, cfg.R, cfg.clip) + xi;
    if (!theta.allFinite()) throw std::overflow_error("non-finite parameters after GD step " + std::to_string(t + 1));
    net.set_params(theta);
    tr.losses.push_back(population_loss(net, ds));
    if ((t + 1) % cfg.stride == 0 || t + 1 == cfg.k) {
      tr.snapshot_steps.push_back(t + 1);
      tr.snapshots.push_back(theta);
    }
  }
  tr.final_net = std::move(net);
  return tr;
}

// One pass over `samples` in order; losses are on `eval` when given, else the per-sample squared error.
inline Trajectory sgd_run(const TwoLayerNet& net0, const Dataset& samples, double eta, const Dataset* eval = nullptr) {
  if (eta < 0) throw std::invalid_argument("step size must be nonnegative");
  Trajectory tr;
  TwoLayerNet net = net0;
  Eigen::VectorXd theta = net.params();
  tr.snapshot_steps.push_back(0);
  tr.snapshots.push_back(theta);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    auto x = samples.X.row(i);
    const double r = samples.y(i) - net(x);
    tr.losses.push_back(eval ? population_loss(net, *eval) : r * r);
    theta += 2.0 * eta * r * net.gradient(x);
    if (!theta.allFinite()) throw std::overflow_error("non-finite parameters after SGD step " + std::to_string(i + 1));
    net.set_params(theta);
    tr.snapshot_steps.push_back(static_cast<int>(i + 1));
    tr.snapshots.push_back(theta);
  }
  if (eval) tr.losses.push_back(population_loss(net, *eval));
  tr.final_net = std::move(net);
  return tr;
}

struct JunkGradient {
  Eigen::VectorXd difference;  // g_{D(alpha)} - g_{D(f)}
  Eigen::VectorXd direct;      // E[(f - alpha) Pi_R(grad f_NN)]
};

inline JunkGradient junk_gradient_difference(const TwoLayerNet& net, const HypercubeFunction& f, const HypercubeFunction& alpha, double R) {
  if (f.dim() != alpha.dim() || f.dim() != net.dim()) throw std::invalid_argument("dimension mismatch");
  Dataset df = hypercube_dataset(f);
  Dataset da = hypercube_dataset(alpha);
  JunkGradient out;
  out.difference = population_gradient(net, da, R) - population_gradient(net, df, R);
  out.direct = Eigen::VectorXd::Zero(net.num_params());
  for (std::size_t x = 0; x < f.size(); ++x) {
    auto pt = df.X.row(static_cast<Eigen::Index>(x));
    out.direct += std::ldexp(f[x] - alpha[x], -f.dim()) * clip_to_ball(net.gradient(pt), R);
  }
  return out;
}

struct BoundValue {
  double raw = 0.0;
  double clamped = 0.0;
};

// eta R sqrt(k C) / (2 tau) + C / eps
inline BoundValue theorem_bound(double eta, double R, double tau, int k, double c, double eps) {
  if (eta < 0 || R < 0 || tau < 0 || k < 0 || c < 0) throw std::invalid_argument("bound inputs must be nonnegative");
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  double drift = 0.0;
  if (k > 0 && eta > 0 && R > 0 && c > 0)
    drift = tau == 0 ? std::numeric_limits<double>::infinity() : eta * R * std::sqrt(k * c) / (2.0 * tau);
  BoundValue b;
  b.raw = drift + c / eps;
  b.clamped = std::clamp(b.raw, 0.0, 1.0);
  return b;
}

struct KlBudget {
  double kl = 0.0;
  double tv = 0.0;
};

inline KlBudget kl_budget(double eta, double R, double tau, int k, double c) {
  if (!(tau > 0)) throw std::invalid_argument("kl budget needs tau > 0");
  KlBudget b;
  b.kl = k * eta * eta * R * R * c / (2.0 * tau * tau);
  b.tv = std::sqrt(b.kl / 2.0);
  return b;
}

// Runs GD from net0 on ds and, coupled, from (W0 M^T, a0) on M ds with noise xi~ = M^T . xi.
// Returns max over probes x of |f(x; theta^k) - f(Mx; theta~^k)|.
inline double equivariance_coupling_check(const TwoLayerNet& net0, const Eigen::MatrixXd& m, const Dataset& ds,
                                          const TrainConfig& cfg, const Eigen::MatrixXd& probes) {
  if (m.rows() != net0.dim() || !is_orthogonal(m)) throw std::invalid_argument("coupling matrix must be orthogonal and d x d");
  if (probes.cols() != net0.dim()) throw std::invalid_argument("probe dimension mismatch");
  const Eigen::MatrixXd mt = m.transpose();
  TwoLayerNet net1 = net0;
  net1.W = net0.W * mt;
  const int width = net0.width(), d = net0.dim();
  NoiseMap map = [&](const Eigen::VectorXd& xi) {
    Eigen::VectorXd out = xi;
    for (int i = 0; i < width; ++i) {
      Eigen::RowVectorXd row = xi.segment(i * d, d).transpose() * mt;
      out.segment(i * d, d) = row.transpose();
    }
    return out;
  };
  Trajectory a = gd_run(net0, ds, cfg);
  Trajectory b = gd_run(net1, transform_points(ds, m), cfg, map);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < probes.rows(); ++i) {
    Eigen::VectorXd x = probes.row(i).transpose();
    Eigen::VectorXd mx = m * x;
    worst = std::max(worst, std::abs(a.final_net(x) - b.final_net(mx)));
  }
  return worst;
}

// ---- weak learning constructions ----

struct WeakLearnReport {
  double loss_before = 0.0;
  double loss_after = 0.0;
  double gradient_norm_sq = 0.0;
  double r_s = 0.0;
  double noise_floor = 0.0;  // sphere only: expected gradient_norm_sq from sampling noise alone
  std::size_t samples = 0;   // sphere only
};

inline double r_s_value(const FourierSpectrum& spec, int s) {
  const int d = spec.dim();
  double best = 0.0;
  for (std::size_t S = 0; S < spec.size(); ++S)
    if (popcount(S) == s) best = std::max(best, std::abs(spec[S]));
  return best / (static_cast<double>(d) * d * binomial(d, s));
}

// Bump network, W0 ~ three_point(s/d), a0 = 0, one exact GD step.
inline WeakLearnReport weak_learn_boolean(const HypercubeFunction& f, int s, int m, double eta, double tau, std::uint64_t seed,
                                          double R = std::numeric_limits<double>::infinity()) {
  const int d = f.dim();
  if (s < 0 || s > d) throw std::invalid_argument("s must lie in [0, d]");
  Rng rng = make_rng(seed, 0x77);
  TwoLayerNet net = init_net(m, d, Activation::bump(), InitSpec::three_point(static_cast<double>(s) / d), InitSpec::zero(), rng);
  Dataset ds = hypercube_dataset(f);
  TrainConfig cfg;
  cfg.eta = eta;
  cfg.tau = tau;
  cfg.R = R;
  cfg.k = 1;
  cfg.seed = derive_seed(seed, 0x78);
  WeakLearnReport rep;
  rep.r_s = r_s_value(wht_forward(f), s);
  rep.gradient_norm_sq = population_gradient(net, ds, R).squaredNorm();
  Trajectory tr = gd_run(net, ds, cfg);
  rep.loss_before = tr.losses.front();
  rep.loss_after = tr.losses.back();
  return rep;
}

// (1/d^4) C(d,s)^{-2} sum_{|S|=s} fhat(S)^2
inline double bump_correlation_lower_bound(const FourierSpectrum& spec, int s) {
  const int d = spec.dim();
  double w = level_weights(spec).at(static_cast<std::size_t>(s));
  double c = binomial(d, s);
  return w / (std::pow(static_cast<double>(d), 4) * c * c);
}

// Monte-Carlo E_w[E_x[f(x) bump(<w,x>)]^2] for w ~ three_point(p)^d; inner expectation exact.
inline Estimate bump_correlation_moment(const HypercubeFunction& f, double p, std::size_t n_w, std::uint64_t seed) {
  const int d = f.dim();
  InitSpec init = InitSpec::three_point(p);
  Activation bump = Activation::bump();
  Rng rng = make_rng(seed, 0xb0);
  RunningStats acc;
  std::vector<double> w(d);
  for (std::size_t t = 0; t < n_w; ++t) {
    for (double& v : w) v = init.draw(rng);
    double c = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) {
      double z = 0.0;
      for (int i = 0; i < d; ++i) z += w[i] * coord(x, i);
      c += f[x] * bump(z);
    }
    c = std::ldexp(c, -d);
    acc.add(c * c);
  }
  return {acc.mean(), acc.std_error(), n_w};
}

// sigma(t) = t^l, W rows ~ N(0, I/sqrt(d)), a0 = 0, one step on a with Monte-Carlo sphere expectations.
inline WeakLearnReport weak_learn_sphere(const SpherePolynomial& p, int l, int m, double eta, std::uint64_t seed,
                                         std::size_t n_samples = 20000, double tau = 0.0) {
  const int d = p.dim();
  if (m < 0) throw std::invalid_argument("width must be nonnegative");
  if (n_samples < 2) throw std::invalid_argument("need at least two sphere samples");
  Rng rng = make_rng(seed, 0x5f);
  TwoLayerNet net = init_net(m, d, Activation::monomial(l), InitSpec::gaussian(std::pow(static_cast<double>(d), -0.25)),
                             InitSpec::zero(), rng);
  auto draw = [&](std::size_t n) {
    Dataset ds;
    ds.X.resize(static_cast<Eigen::Index>(n), d);
    ds.y.resize(static_cast<Eigen::Index>(n));
    ds.weight = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
      auto x = sample_sphere(d, rng);
      for (int j = 0; j < d; ++j) ds.X(i, j) = x[j];
      ds.y(i) = p(x);
    }
    return ds;
  };
  Dataset train = draw(n_samples);
  Dataset eval = draw(n_samples);

  // a-gradient at a = 0 is -E[y sigma(Wx)]
  Eigen::MatrixXd feats = (train.X * net.W.transpose()).unaryExpr([&](double z) { return net.act(z); });
  Eigen::VectorXd c = feats.transpose() * train.y / static_cast<double>(n_samples);
  WeakLearnReport rep;
  rep.samples = n_samples;
  rep.gradient_norm_sq = c.squaredNorm();
  for (int i = 0; i < m; ++i) {
    Eigen::ArrayXd prod = feats.col(i).array() * train.y.array();
    double var = (prod - prod.mean()).square().sum() / static_cast<double>(n_samples - 1);
    rep.noise_floor += var / static_cast<double>(n_samples);
  }
  rep.loss_before = population_loss(net, eval);
  Eigen::VectorXd xi = step_noise(derive_seed(seed, 0x60), 0, m, tau);
  net.a = eta * c + xi;
  rep.loss_after = population_loss(net, eval);
  return rep;
}

// ---- lower-bound experiment ----

struct LowerBoundReport {
  std::size_t trials = 0;
  double threshold = 0.0;  // ||f - alpha||^2 - eps
  BinomialSummary learned;  // runs on f o g reaching the threshold
  BinomialSummary junk;     // junk runs whose loss on f o g reaches the threshold
  BoundValue bound;
  bool consistent = false;  // learned.rate <= bound + 3 SE
};

using NetFactory = std::function<TwoLayerNet(Rng&)>;

template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j)
    pool.emplace_back([&, j] {
      for (std::size_t i = static_cast<std::size_t>(j); i < n; i += static_cast<std::size_t>(jobs)) fn(i);
    });
  for (auto& t : pool) t.join();
}

inline LowerBoundReport lower_bound_experiment(const HypercubeFunction& f, const HypercubeFunction& alpha, const GroupSpec& g,
                                               const NetFactory& factory, const TrainConfig& cfg, std::size_t n_trials,
                                               double c_alignment, double eps, int jobs = 1) {
  if (f.dim() > 12) throw SizeError("lower-bound experiment runs in exact mode with d <= 12");
  if (f.dim() != alpha.dim() || g.d != f.dim()) throw std::invalid_argument("dimension mismatch");
  LowerBoundReport rep;
  rep.trials = n_trials;
  rep.threshold = l2_norm_sq(f - alpha) - eps;
  rep.bound = theorem_bound(cfg.eta, cfg.R, cfg.tau, cfg.k, c_alignment, eps);
  std::vector<char> learned(n_trials, 0), junk(n_trials, 0);
  parallel_for(n_trials, jobs, [&](std::size_t t) {
    Rng rng = make_rng(cfg.seed, 0x1b, t);
    SignedPermutation e = sample_element(g, rng);
    TwoLayerNet net0 = factory(rng);
    TrainConfig c = cfg;
    c.seed = derive_seed(cfg.seed, 0x1c, t);
    c.stride = std::max(1, cfg.k);
    Dataset target = hypercube_dataset(compose(f, e));
    Trajectory real = gd_run(net0, target, c);
    learned[t] = real.losses.back() <= rep.threshold;
    Trajectory fake = gd_run(net0, hypercube_dataset(compose(alpha, e)), c);
    junk[t] = population_loss(fake.final_net, target) <= rep.threshold;
  });
  std::size_t nl = 0, nj = 0;
  for (std::size_t t = 0; t < n_trials; ++t) {
    nl += learned[t];
    nj += junk[t];
  }
  rep.learned = binomial_summary(nl, n_trials);
  rep.junk = binomial_summary(nj, n_trials);
  rep.consistent = rep.learned.rate <= rep.bound.raw + 3.0 * rep.learned.std_error;
  return rep;
}

}  // namespace eqlab
