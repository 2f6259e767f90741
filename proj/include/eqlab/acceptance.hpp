#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "alignment.hpp"
#include "boolean_fourier.hpp"
#include "gd_engine.hpp"
#include "msp.hpp"
#include "reductions.hpp"
#include "rejection_kernel.hpp"
#include "sphere_harmonics.hpp"
#include "stats.hpp"

namespace eqlab::acceptance {

enum class Scale { quick, full };

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {
inline std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(4);
  ss << v;
  return ss.str();
}

inline std::string ci(const BinomialSummary& s) {
  return fmt(s.rate) + " [" + fmt(s.ci_low) + ", " + fmt(s.ci_high) + "] (" + std::to_string(s.successes) + "/" +
         std::to_string(s.trials) + ")";
}

inline HypercubeFunction random_function(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  return tabulate(d, [&](std::size_t) { return n01(rng); });
}
}  // namespace detail

// 1. WHT roundtrip and Parseval; fast transform equals the naive transform.
inline CheckResult fourier_core(Scale) {
  CheckResult r{1, "Fourier core (roundtrip, Parseval, fast == naive)", false, "", 0.0};
  Rng rng = make_rng(101);
  double worst_rt = 0.0, worst_pv = 0.0;
  for (int i = 0; i < 50; ++i) {
    int d = 3 + i % 10;
    auto f = detail::random_function(d, rng);
    auto spec = wht_forward(f);
    auto back = wht_inverse(spec);
    for (std::size_t x = 0; x < f.size(); ++x) worst_rt = std::max(worst_rt, std::abs(back[x] - f[x]));
    double lw = 0.0;
    for (double w : level_weights(spec)) lw += w;
    worst_pv = std::max(worst_pv, std::abs(lw - l2_norm_sq(f)));
  }
  bool exact = true;
  std::uniform_int_distribution<int> small(-8, 8);
  for (int d = 3; d <= 8; ++d)
    for (int rep = 0; rep < 3; ++rep) {
      auto f = tabulate(d, [&](std::size_t) { return static_cast<double>(small(rng)); });
      exact = exact && wht_forward(f).coeffs() == wht_forward_naive(f).coeffs();
    }
  r.passed = worst_rt <= 1e-10 && worst_pv <= 1e-10 && exact;
  r.detail = "max roundtrip err " + detail::fmt(worst_rt) + ", max Parseval err " + detail::fmt(worst_pv) +
             ", fast==naive " + (exact ? "yes" : "no");
  return r;
}

// 2. Sign-perm closed form vs brute-force enumeration with eigen witness.
inline CheckResult sign_perm_closed_form(Scale s) {
  CheckResult r{2, "Sign-perm alignment closed form == brute force", false, "", 0.0};
  Rng rng = make_rng(202);
  const int per_d = s == Scale::full ? 20 : 4;
  double worst = 0.0, worst_centered = 0.0;
  for (int d = 3; d <= 5; ++d) {
    GroupSpec g(GroupKind::sign_perm, d);
    for (int i = 0; i < per_d; ++i) {
      auto f = detail::random_function(d, rng);
      auto spec = wht_forward(f);
      auto closed = sign_perm_alignment(spec);
      auto brute = brute_force_alignment(f, g);
      worst = std::max(worst, std::abs(std::max(closed.value, closed.level0_weight) - brute.value));
      auto centered = f;
      for (double& v : centered.values()) v -= spec[0];
      worst_centered = std::max(worst_centered, std::abs(sign_perm_alignment(wht_forward(centered)).value -
                                                         brute_force_alignment(centered, g).value));
    }
  }
  r.passed = worst <= 1e-9 && worst_centered <= 1e-9;
  r.detail = std::to_string(3 * per_d) + " functions; max |diff| " + detail::fmt(worst) + " (with level 0), " +
             detail::fmt(worst_centered) + " (mean-zero)";
  return r;
}

// 3. parity_mod4 alignments.
inline CheckResult parity_mod4_alignment(Scale s) {
  CheckResult r{3, "parity_mod4 sign-perm <= 2^-d and sign alignment", false, "", 0.0};
  bool ok = true;
  std::string notes;
  for (int d = 4; d <= 12; ++d) {
    auto spec = wht_forward(parity_mod4(d));
    double bound = std::ldexp(1.0, -d);
    double sp = sign_perm_alignment(spec).value;
    double sg = sign_alignment(spec).value;
    // even d: 2^-d; odd d: 2^-(d+1)
    double expected = d % 2 == 0 ? bound : bound / 2;
    ok = ok && sp <= bound * (1 + 1e-12) && std::abs(sg - expected) <= 1e-15;
  }
  const int max_brute = s == Scale::full ? 6 : 5;
  double worst = 0.0;
  for (int d = 4; d <= max_brute; ++d) {
    auto f = parity_mod4(d);
    auto spec = wht_forward(f);
    worst = std::max(worst, std::abs(brute_force_alignment(f, GroupSpec(GroupKind::sign, d)).value - sign_alignment(spec).value));
    worst = std::max(worst, std::abs(brute_force_alignment(f, GroupSpec(GroupKind::sign_perm, d)).value -
                                     std::max(sign_perm_alignment(spec).value, spec[0] * spec[0])));
  }
  ok = ok && worst <= 1e-12;
  r.passed = ok;
  r.detail = "d=4..12 closed forms ok=" + std::string(ok ? "yes" : "no") + "; brute force d<=" + std::to_string(max_brute) +
             " max |diff| " + detail::fmt(worst) + "; sign alignment 2^-d (even d), 2^-(d+1) (odd d)";
  return r;
}

// 4. MSP classification and greedy == exhaustive.
inline CheckResult msp_classification(Scale s) {
  CheckResult r{4, "MSP examples and greedy == exhaustive", false, "", 0.0};
  auto sup = [](int p, std::vector<Mask> sets) { return FourierSupport(p, std::move(sets)); };
  auto staircase = sup(3, {0b1, 0b11, 0b111});
  auto two = sup(3, {0b11, 0b111});
  auto three = sup(4, {0b111, 0b1000});
  bool examples = is_l_msp(staircase, 1).satisfies && !is_l_msp(two, 1).satisfies && is_l_msp(two, 2).satisfies &&
                  !is_l_msp(three, 2).satisfies && is_l_msp(three, 3).satisfies && minimal_leap(staircase) == 1 &&
                  minimal_leap(two) == 2 && minimal_leap(three) == 3;
  Rng rng = make_rng(404);
  const int n = s == Scale::full ? 200 : 50;
  int mismatches = 0, checks = 0;
  for (int i = 0; i < n; ++i) {
    int p = std::uniform_int_distribution<int>(1, 6)(rng);
    int m = std::uniform_int_distribution<int>(1, std::min(6, (1 << p) - 1))(rng);
    std::vector<Mask> all;
    for (Mask x = 1; x < (Mask{1} << p); ++x) all.push_back(x);
    std::shuffle(all.begin(), all.end(), rng);
    FourierSupport f(p, std::vector<Mask>(all.begin(), all.begin() + m));
    for (int l = 1; l <= p; ++l) {
      ++checks;
      if (is_l_msp(f, l).satisfies != is_l_msp_exhaustive(f, l)) ++mismatches;
    }
  }
  r.passed = examples && mismatches == 0;
  r.detail = std::string("examples ") + (examples ? "ok" : "WRONG") + "; " + std::to_string(mismatches) + " mismatches in " +
             std::to_string(checks) + " (support, l) checks over " + std::to_string(n) + " supports";
  return r;
}

// 5. mod-8 identity, exhaustive over the cube.
inline CheckResult mod8_identity(Scale s) {
  CheckResult r{5, "mod-8 identity exhaustive", false, "", 0.0};
  Rng rng = make_rng(505);
  const int max_d = s == Scale::full ? 12 : 8;
  std::size_t checked = 0, failed = 0;
  for (int d = 2; d <= max_d; ++d)
    for (int t = 0; t < 20; ++t) {
      Mask S = random_subset(d, d / 2, rng);
      for (std::size_t x = 0; x < (std::size_t{1} << d); ++x) {
        Point p(d);
        for (int i = 0; i < d; ++i) p[i] = coord(x, i);
        ++checked;
        failed += !mod8_identity_check(p, S);
      }
    }
  r.passed = failed == 0;
  r.detail = std::to_string(checked) + " (x, S) pairs for d=2.." + std::to_string(max_d) + ", " + std::to_string(failed) + " failures";
  return r;
}

// 6. Reductions with cheating oracles.
inline CheckResult reductions_with_oracles(Scale s, int jobs = 1) {
  CheckResult r{6, "Reductions with cheating oracles", false, "", 0.0};
  const bool full = s == Scale::full;
  auto a = run_lpgn_to_sfsm8_trials(20, 0.1, 100, full ? 1000 : 200, 606, 0.0, jobs);
  auto b = run_promise_to_lpgn_trials(16, 0.5, 200, full ? 500 : 100, 607, 0.0, jobs);
  LpnToPromiseConfig lc{200, 20};
  auto c = run_lpn_to_promise_trials(10, 0.8, lc, full ? 100 : 20, 608, 0.0, jobs);
  LpnToPromiseConfig pc{100, 20};
  // composed chain: rho = 1 - 2 delta with delta inside the kernel threshold
  double rho = 1.0 - 2.0 * threshold_config(0.1, static_cast<std::size_t>(pc.n_A)).delta;
  auto d = run_pipeline_trials(8, rho, 0.2, pc, full ? 100 : 20, 609, 0.0, jobs);
  r.passed = a.success.rate >= 0.9 && b.success.rate >= 0.9 && c.r_recovered->rate >= 0.9 && c.success.rate >= 0.9 &&
             d.success.rate >= 0.8;
  r.detail = "LPGN->SFSM8 " + detail::ci(a.success) + "; promise->LPGN " + detail::ci(b.success) + "; LPN->promise r_hat " +
             detail::ci(*c.r_recovered) + ", answer " + detail::ci(c.success) + "; pipeline " + detail::ci(d.success);
  return r;
}

// 7. Rejection kernel KS against N(+-1, gamma^2).
inline CheckResult rejection_kernel_ks(Scale s) {
  CheckResult r{7, "Rejection kernel KS <= 0.02", false, "", 0.0};
  const std::size_t n_samples = s == Scale::full ? 100000 : 20000;
  double worst = 0.0;
  std::string notes;
  for (double gamma : {0.5, 1.0}) {
    RejectionKernelConfig cfg = threshold_config(gamma, 100);
    Rng rng = make_rng(707, static_cast<std::uint64_t>(gamma * 1000));
    for (int sign : {1, -1}) {
      // input law Rad(p) for +1, Rad(q) for -1
      std::bernoulli_distribution major(1.0 - cfg.delta);
      std::vector<double> xs(n_samples);
      for (auto& x : xs) x = rejection_kernel(major(rng) ? sign : -sign, cfg, rng);
      double ks = ks_statistic(std::move(xs), [&](double v) { return normal_cdf(v, sign, gamma); });
      worst = std::max(worst, ks);
      notes += " gamma=" + detail::fmt(gamma) + (sign > 0 ? " +1" : " -1") + ": " + detail::fmt(ks) + ";";
    }
    notes += " (delta=" + detail::fmt(cfg.delta) + ", N=" + std::to_string(cfg.N) + ", Delta=" + detail::fmt(cfg.tv_bound()) + ")";
  }
  r.passed = worst <= 0.02;
  r.detail = std::to_string(n_samples) + " samples each;" + notes;
  return r;
}

// 8. Coupled GD runs under perm, sign_perm and rotation.
inline CheckResult equivariance_couplings(Scale) {
  CheckResult r{8, "Equivariance couplings <= 1e-8", false, "", 0.0};
  const int d = 8, k = 50, probes = 100;
  TrainConfig cfg;
  cfg.eta = 0.05;
  cfg.tau = 0.01;
  cfg.R = 5.0;
  cfg.k = k;
  cfg.seed = 808;
  Rng rng = make_rng(808);
  auto cube_probes = [&] {
    Eigen::MatrixXd p(probes, d);
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < probes; ++i)
      for (int j = 0; j < d; ++j) p(i, j) = coin(rng) ? -1.0 : 1.0;
    return p;
  };
  auto target = detail::random_function(d, rng);
  Dataset cube = hypercube_dataset(target);

  TwoLayerNet n1 = init_net(16, d, Activation::tanh(), InitSpec::gaussian(1.0 / std::sqrt(d)), InitSpec::gaussian(0.5), rng);
  Eigen::MatrixXd perm = sample_element(GroupSpec(GroupKind::perm, d), rng).matrix();
  double dev_perm = equivariance_coupling_check(n1, perm, cube, cfg, cube_probes());

  TwoLayerNet n2 = init_net(16, d, Activation::tanh(), InitSpec::three_point(0.5), InitSpec::rademacher(), rng);
  Eigen::MatrixXd sperm = sample_element(GroupSpec(GroupKind::sign_perm, d), rng).matrix();
  double dev_sperm = equivariance_coupling_check(n2, sperm, cube, cfg, cube_probes());

  SpherePolynomial p = SpherePolynomial::coordinate(d, 0) * SpherePolynomial::coordinate(d, 1) + SpherePolynomial::coordinate(d, 2);
  Dataset sphere;
  const int n = 256;
  sphere.X.resize(n, d);
  sphere.y.resize(n);
  sphere.weight = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int i = 0; i < n; ++i) {
    auto x = sample_sphere(d, rng);
    for (int j = 0; j < d; ++j) sphere.X(i, j) = x[j];
    sphere.y(i) = p(x);
  }
  Eigen::MatrixXd sprobes(probes, d);
  for (int i = 0; i < probes; ++i) {
    auto x = sample_sphere(d, rng);
    for (int j = 0; j < d; ++j) sprobes(i, j) = x[j];
  }
  TwoLayerNet n3 = init_net(16, d, Activation::relu(), InitSpec::gaussian(1.0), InitSpec::gaussian(0.5), rng);
  double dev_rot = equivariance_coupling_check(n3, haar_rotation(d, rng), sphere, cfg, sprobes);

  r.passed = dev_perm <= 1e-8 && dev_sperm <= 1e-8 && dev_rot <= 1e-8;
  r.detail = "perm " + detail::fmt(dev_perm) + ", sign_perm " + detail::fmt(dev_sperm) + ", rot " + detail::fmt(dev_rot) +
             " (d=8, k=50, 100 probes)";
  return r;
}

// 9. Junk-gradient identity.
inline CheckResult junk_gradient_identity(Scale) {
  CheckResult r{9, "Junk-gradient identity to 1e-10", false, "", 0.0};
  Rng rng = make_rng(909);
  const Activation acts[] = {Activation::tanh(), Activation::relu(), Activation::monomial(2), Activation::monomial(3), Activation::bump()};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    int d = 3 + i % 6;
    int m = 1 + i % 7;
    TwoLayerNet net = init_net(m, d, acts[i % 5], InitSpec::gaussian(0.7), InitSpec::gaussian(0.7), rng);
    auto f = detail::random_function(d, rng);
    const double mean = wht_forward(f)[0];
    HypercubeFunction alpha = i % 2 ? detail::random_function(d, rng) : tabulate(d, [&](std::size_t) { return mean; });
    double R = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    auto jg = junk_gradient_difference(net, f, alpha, R);
    worst = std::max(worst, (jg.difference - jg.direct).cwiseAbs().maxCoeff());
  }
  r.passed = worst <= 1e-10;
  r.detail = "50 cases, max |diff| " + detail::fmt(worst);
  return r;
}

// 10. Weak learning of chi_{1,2} with a bump network.
inline CheckResult weak_learn_parity(Scale s, int jobs = 1) {
  CheckResult r{10, "Weak-learn chi_{1,2} (gradient moment and one GD step)", false, "", 0.0};
  const int d = 8;
  auto f = parity(d, 0b11);
  double bound = bump_correlation_lower_bound(wht_forward(f), 2);
  auto est = bump_correlation_moment(f, 0.25, s == Scale::full ? 100000 : 20000, 1010);
  bool moment_ok = est.value - bound >= 3.0 * est.std_error;
  const int m = 4000, seeds = s == Scale::full ? 50 : 10;
  std::vector<char> drop(seeds, 0);
  parallel_for(static_cast<std::size_t>(seeds), jobs, [&](std::size_t i) {
    auto rep = weak_learn_boolean(f, 2, m, 1.0 / (8.0 * m), 1e-8, 2000 + i);
    drop[i] = rep.loss_after < l2_norm_sq(f);
  });
  int drops = 0;
  for (char c : drop) drops += c;
  bool step_ok = drops * 10 >= seeds * 9;
  r.passed = moment_ok && step_ok;
  r.detail = "moment " + detail::fmt(est.value) + " +- " + detail::fmt(est.std_error) + " vs bound " + detail::fmt(bound) +
             "; loss below ||f||^2 in " + std::to_string(drops) + "/" + std::to_string(seeds) + " seeds";
  return r;
}

// 11. Empirical success fraction vs the GD lower bound.
inline CheckResult lower_bound_consistency(Scale s, int jobs = 1) {
  CheckResult r{11, "Lower-bound experiment consistency", false, "", 0.0};
  const int d = 10;
  auto f = parity(d, 0b111);
  HypercubeFunction alpha(d);
  GroupSpec g(GroupKind::sign_perm, d);
  double c = sign_perm_alignment(wht_forward(f - alpha)).value;
  NetFactory factory = [d](Rng& rng) {
    return init_net(8, d, Activation::tanh(), InitSpec::gaussian(1.0 / std::sqrt(d)), InitSpec::gaussian(0.1), rng);
  };
  struct Setting {
    double eta, R, tau;
    int k;
  };
  const Setting settings[] = {{0.1, 1.0, 0.1, 10}, {0.05, 2.0, 0.2, 20}};
  const std::size_t trials = s == Scale::full ? 200 : 40;
  const double eps = 0.5;
  bool ok = true;
  std::string notes;
  for (const auto& st : settings) {
    TrainConfig cfg;
    cfg.eta = st.eta;
    cfg.R = st.R;
    cfg.tau = st.tau;
    cfg.k = st.k;
    cfg.seed = 1111 + st.k;
    auto rep = lower_bound_experiment(f, alpha, g, factory, cfg, trials, c, eps, jobs);
    ok = ok && rep.bound.raw < 0.5 && rep.consistent;
    notes += " [eta=" + detail::fmt(st.eta) + " tau=" + detail::fmt(st.tau) + " k=" + std::to_string(st.k) + "] fraction " +
             detail::fmt(rep.learned.rate) + " (junk " + detail::fmt(rep.junk.rate) + ") vs bound " + detail::fmt(rep.bound.raw) + ";";
  }
  r.passed = ok;
  r.detail = "C=" + detail::fmt(c) + ", " + std::to_string(trials) + " trials each;" + notes;
  return r;
}

// 12. Sphere harmonics.
inline CheckResult sphere_module(Scale s) {
  CheckResult r{12, "Sphere harmonics (dims, decomposition, rotation alignment)", false, "", 0.0};
  bool dims = true;
  for (int d = 2; d <= 8; ++d)
    for (int l = 0; l <= 4; ++l) dims = dims && dim_harmonic(d, l) == laplacian_kernel_dim(d, l);
  Rng rng = make_rng(1212);
  double lap = 0.0, orth = 0.0, comp = 0.0;
  for (int d : {3, 5, 8}) {
    for (int t = 0; t < 4; ++t) {
      SpherePolynomial p(d);
      std::normal_distribution<double> n01(0.0, 1.0);
      for (int term = 0; term < 6; ++term) {
        Exponent a(d, 0);
        int deg = std::uniform_int_distribution<int>(0, 4)(rng);
        for (int k = 0; k < deg; ++k) a[std::uniform_int_distribution<int>(0, d - 1)(rng)]++;
        p.add_term(a, n01(rng));
      }
      auto dec = harmonic_decompose(p);
      double total = 0.0;
      for (const auto& c : dec.components) {
        lap = std::max(lap, laplacian(c.h).max_abs_coeff());
        total += c.norm_sq;
        for (const auto& o : dec.components)
          if (o.degree != c.degree) orth = std::max(orth, std::abs(inner_product(c.h, o.h)));
      }
      comp = std::max(comp, std::abs(total - norm_sq(p)));
    }
  }
  const int d = 6;
  auto mc = rotation_alignment_monte_carlo(SpherePolynomial::coordinate(d, 0), s == Scale::full ? 10000 : 2000, 1213);
  double target = 1.0 / (d * d);
  bool mc_ok = std::abs(mc.value - target) <= 3.0 * mc.std_error;
  r.passed = dims && lap <= 1e-9 && orth <= 1e-9 && comp <= 1e-9 && mc_ok;
  r.detail = std::string("dims ") + (dims ? "match" : "MISMATCH") + "; max |Lap h| " + detail::fmt(lap) + ", max |<h_l,h_l'>| " +
             detail::fmt(orth) + ", completeness err " + detail::fmt(comp) + "; MC rotation alignment " + detail::fmt(mc.value) +
             " +- " + detail::fmt(mc.std_error) + " vs 1/36=" + detail::fmt(target);
  return r;
}

inline std::vector<CheckResult> run_all(Scale s, int jobs = 1, const std::function<void(const CheckResult&)>& on_result = {}) {
  std::vector<std::function<CheckResult()>> checks = {
      [&] { return fourier_core(s); },
      [&] { return sign_perm_closed_form(s); },
      [&] { return parity_mod4_alignment(s); },
      [&] { return msp_classification(s); },
      [&] { return mod8_identity(s); },
      [&] { return reductions_with_oracles(s, jobs); },
      [&] { return rejection_kernel_ks(s); },
      [&] { return equivariance_couplings(s); },
      [&] { return junk_gradient_identity(s); },
      [&] { return weak_learn_parity(s, jobs); },
      [&] { return lower_bound_consistency(s, jobs); },
      [&] { return sphere_module(s); },
  };
  std::vector<CheckResult> out;
  for (auto& check : checks) {
    auto t0 = std::chrono::steady_clock::now();
    CheckResult res;
    try {
      res = check();
    } catch (const std::exception& e) {
      res.id = static_cast<int>(out.size()) + 1;
      res.name = "criterion " + std::to_string(res.id);
      res.passed = false;
      res.detail = std::string("exception: ") + e.what();
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

inline std::string format_line(const CheckResult& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2fs", r.seconds);
  return std::string(r.passed ? "PASS" : "FAIL") + "  " + std::to_string(r.id) + ". " + r.name + " :: " + r.detail + " (" + buf + ")";
}

}  // namespace eqlab::acceptance
