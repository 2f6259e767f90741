#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"
#include "gd_engine.hpp"
#include "network.hpp"
#include "rejection_kernel.hpp"
#include "stats.hpp"

namespace eqlab {

using Point = std::vector<int>;

struct LabeledSample {
  Point x;
  double y = 0.0;
};

using Samples = std::vector<LabeledSample>;

// Answers are +1/-1 for parity problems, 0..7 for SFSM8. For parity problems 0 means "error".
using Oracle = std::function<int(const Point& query, const Samples& samples)>;

inline int chi(Mask s, const Point& x) {
  int v = 1;
  for (std::size_t i = 0; i < x.size(); ++i)
    if ((s >> i) & 1) v *= x[i];
  return v;
}

inline int mod8_residue(int v) { return ((v % 8) + 8) % 8; }

inline int sum_coords(const Point& x) {
  int s = 0;
  for (int v : x) s += v;
  return s;
}

inline int f_mod8(const Point& x) { return mod8_residue(sum_coords(x)); }

// f_mod8(x . s) without forming x . s
inline int f_mod8_flipped(const Point& x, const Point& s) {
  int v = 0;
  for (std::size_t i = 0; i < x.size(); ++i) v += x[i] * s[i];
  return mod8_residue(v);
}

inline Point hadamard(const Point& x, const Point& s) {
  Point out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * s[i];
  return out;
}

// s_j = +1 iff j in S
inline Point sign_vector(Mask S, int d) {
  Point s(d);
  for (int j = 0; j < d; ++j) s[j] = ((S >> j) & 1) ? 1 : -1;
  return s;
}

inline Point random_point(int d, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Point x(d);
  for (int& v : x) v = coin(rng) ? -1 : 1;
  return x;
}

struct LpnInstance {
  int d = 0;
  double rho = 1.0;
  Mask secret = 0;
  Point query;
  Samples samples;
  int answer() const { return chi(secret, query); }
};

struct LpgnInstance {
  int d = 0;
  double gamma = 0.0;
  Mask secret = 0;
  Point query;
  Samples samples;
  int answer() const { return chi(secret, query); }
};

struct Sfsm8Instance {
  int d = 0;
  double gamma = 0.0;
  Point flips;
  Point query;
  Samples samples;  // (x_i . s, f_mod8(x_i) + noise)
  int answer() const { return f_mod8_flipped(query, flips); }
};

namespace detail {
inline void check_reduction_dim(int d) {
  if (d < 1 || d > 64) throw std::invalid_argument("reduction dimension must lie in [1, 64]");
}

inline LpnInstance gen_lpn_with_secret(int d, std::size_t n, double rho, Mask secret, Rng& rng) {
  if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("LPN correlation rho must lie in (0, 1]");
  LpnInstance inst;
  inst.d = d;
  inst.rho = rho;
  inst.secret = secret;
  inst.query = random_point(d, rng);
  std::bernoulli_distribution keep((1.0 + rho) / 2.0);
  inst.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point x = random_point(d, rng);
    int y = chi(secret, x) * (keep(rng) ? 1 : -1);
    inst.samples.push_back({std::move(x), static_cast<double>(y)});
  }
  return inst;
}
}  // namespace detail

inline LpnInstance gen_lpn(int d, std::size_t n, double rho, Rng& rng) {
  detail::check_reduction_dim(d);
  Mask s = 0;
  std::bernoulli_distribution coin(0.5);
  for (int j = 0; j < d; ++j)
    if (coin(rng)) s |= Mask{1} << j;
  return detail::gen_lpn_with_secret(d, n, rho, s, rng);
}

inline LpnInstance gen_promise_lpn(int d, std::size_t n, double rho, Rng& rng) {
  detail::check_reduction_dim(d);
  return detail::gen_lpn_with_secret(d, n, rho, random_subset(d, d / 2, rng), rng);
}

inline LpgnInstance gen_lpgn(int d, std::size_t n, double gamma, Rng& rng) {
  detail::check_reduction_dim(d);
  if (!(gamma >= 0.0)) throw std::invalid_argument("LPGN noise gamma must be nonnegative");
  LpgnInstance inst;
  inst.d = d;
  inst.gamma = gamma;
  inst.secret = random_subset(d, d / 2, rng);
  inst.query = random_point(d, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Point x = random_point(d, rng);
    double y = chi(inst.secret, x) + gamma * noise(rng);
    inst.samples.push_back({std::move(x), y});
  }
  return inst;
}

inline Sfsm8Instance gen_sfsm8(int d, std::size_t n, double gamma, Rng& rng, std::optional<Point> flips = std::nullopt) {
  detail::check_reduction_dim(d);
  if (!(gamma >= 0.0)) throw std::invalid_argument("SFSM8 noise gamma must be nonnegative");
  Sfsm8Instance inst;
  inst.d = d;
  inst.gamma = gamma;
  inst.flips = flips ? *flips : random_point(d, rng);
  if (static_cast<int>(inst.flips.size()) != d) throw std::invalid_argument("flip vector has the wrong length");
  inst.query = random_point(d, rng);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    Point x = random_point(d, rng);
    double y = f_mod8(x) + gamma * noise(rng);
    inst.samples.push_back({hadamard(x, inst.flips), y});
  }
  return inst;
}

// sum_j x_j s_j == 2 chi_S(x) + 2|S| - 2 - sum_j x_j  (mod 8)
inline bool mod8_identity_check(const Point& x, Mask S) {
  const int d = static_cast<int>(x.size());
  int lhs = 0;
  for (int j = 0; j < d; ++j) lhs += x[j] * (((S >> j) & 1) ? 1 : -1);
  int rhs = 2 * chi(S, x) + 2 * popcount(S) - 2 - sum_coords(x);
  return mod8_residue(lhs) == mod8_residue(rhs);
}

// ---- LPGN -> SFSM8 ----

inline double lpgn_label_map(int t, double y) {
  if (t >= 2 && t <= 5) return t + 2.0 * y;
  if (t <= 1) return t + 4.0 - 2.0 * y;
  return t - 4.0 - 2.0 * y;
}

inline Samples lpgn_to_sfsm8_samples(const Samples& samples, int set_size) {
  Samples out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    int t = mod8_residue(2 * set_size - 2 - sum_coords(s.x));
    out.push_back({s.x, lpgn_label_map(t, s.y)});
  }
  return out;
}

// +1, -1, or 0 for "error"
inline int reduce_lpgn_to_sfsm8(const Point& q, const Samples& samples, const Oracle& sfsm8_oracle, int set_size) {
  Samples mapped = lpgn_to_sfsm8_samples(samples, set_size);
  int ans = mod8_residue(sfsm8_oracle(q, mapped) - 2 * set_size + 2 + sum_coords(q));
  if (ans == 2) return 1;
  if (ans == 6) return -1;
  return 0;
}

// ---- promise-LPN -> LPGN ----

inline int reduce_promise_lpn_to_lpgn(const Point& q, const Samples& samples, const Oracle& lpgn_oracle,
                                      const RejectionKernelConfig& cfg, Rng& rng) {
  cfg.validate();
  Samples mapped;
  mapped.reserve(samples.size());
  for (const auto& s : samples) mapped.push_back({s.x, rejection_kernel(s.y > 0 ? 1 : -1, cfg, rng)});
  return lpgn_oracle(q, mapped);
}

// ---- LPN -> promise-LPN ----

struct LpnToPromiseConfig {
  int T = 200;
  int n_A = 20;  // samples handed to each oracle call
};

inline int paper_T(int d, double rho) { return static_cast<int>(std::ceil(10000.0 * std::log(static_cast<double>(d)) / (rho * rho))); }

inline int desk_T(int d, double rho) { return std::min(paper_T(d, rho), 500); }

// (d + 1) T (1 + n_A) + n_A: one group per candidate r in {0..d}
inline std::size_t lpn_to_promise_sample_count(int d, const LpnToPromiseConfig& cfg) {
  return static_cast<std::size_t>(d + 1) * static_cast<std::size_t>(cfg.T) * static_cast<std::size_t>(1 + cfg.n_A) +
         static_cast<std::size_t>(cfg.n_A);
}

struct LpnToPromiseResult {
  int answer = 0;
  int r_hat = 0;
  std::vector<double> p_hat;
};

namespace detail {
inline Point pad(const Point& x, const Point& z) {
  Point out = x;
  out.insert(out.end(), z.begin(), z.end());
  return out;
}

inline int prefix_product(const Point& z, int r) {
  int v = 1;
  for (int j = 0; j < r; ++j) v *= z[j];
  return v;
}

inline Samples pad_samples(const Samples& in, std::size_t begin, std::size_t count, int d, int r, Rng& rng) {
  Samples out;
  out.reserve(count);
  for (std::size_t i = begin; i < begin + count; ++i) {
    Point z = random_point(d, rng);
    out.push_back({pad(in[i].x, z), in[i].y * prefix_product(z, r)});
  }
  return out;
}
}  // namespace detail

// Oracle must solve promise-LPN in dimension 2d.
inline LpnToPromiseResult reduce_lpn_to_promise_lpn(const Point& q, const Samples& samples, const Oracle& promise_oracle,
                                                    const LpnToPromiseConfig& cfg, Rng& rng) {
  const int d = static_cast<int>(q.size());
  if (cfg.T < 1 || cfg.n_A < 0) throw std::invalid_argument("LPN reduction needs T >= 1 and n_A >= 0");
  const std::size_t need = lpn_to_promise_sample_count(d, cfg);
  if (samples.size() < need)
    throw std::invalid_argument("LPN reduction needs " + std::to_string(need) + " samples, got " + std::to_string(samples.size()));
  const auto nA = static_cast<std::size_t>(cfg.n_A);
  LpnToPromiseResult res;
  res.p_hat.assign(static_cast<std::size_t>(d + 1), 0.0);
  std::size_t cursor = nA;  // the first n_A samples are kept for the final query
  for (int r = 0; r <= d; ++r) {
    int hits = 0;
    for (int t = 0; t < cfg.T; ++t) {
      Samples padded = detail::pad_samples(samples, cursor, nA, d, r, rng);
      const LabeledSample& held = samples[cursor + nA];
      cursor += nA + 1;
      Point z0 = random_point(d, rng);
      int ans = promise_oracle(detail::pad(held.x, z0), padded) * detail::prefix_product(z0, r);
      if (ans != 0 && ans == (held.y > 0 ? 1 : -1)) ++hits;
    }
    res.p_hat[static_cast<std::size_t>(r)] = static_cast<double>(hits) / cfg.T;
  }
  res.r_hat = static_cast<int>(std::max_element(res.p_hat.begin(), res.p_hat.end()) - res.p_hat.begin());
  Samples final_samples = detail::pad_samples(samples, 0, nA, d, res.r_hat, rng);
  Point zq = random_point(d, rng);
  res.answer = promise_oracle(detail::pad(q, zq), final_samples) * detail::prefix_product(zq, res.r_hat);
  return res;
}

// ---- oracles ----

namespace detail {
inline std::shared_ptr<Rng> oracle_rng(std::uint64_t seed) { return std::make_shared<Rng>(derive_seed(seed, 0x0a)); }

inline int flip_with(double error_rate, int answer, Rng& rng) {
  if (error_rate > 0 && std::bernoulli_distribution(error_rate)(rng)) return -answer;
  return answer;
}

inline double wrap8(double v) {
  double w = std::fmod(v, 8.0);
  if (w <= -4.0) w += 8.0;
  if (w > 4.0) w -= 8.0;
  return w;
}
}  // namespace detail

// Parity oracle that knows a list of candidate secrets. It picks the candidate best correlated with the
// sample labels; if that correlation is below `min_score`, or (with require_promise) the candidate does
// not have size floor(D/2), it answers a fair coin.
inline Oracle make_parity_candidate_oracle(std::vector<Mask> candidates, bool require_promise, std::uint64_t seed,
                                           double error_rate = 0.0, double min_score = 0.3) {
  if (candidates.empty()) throw std::invalid_argument("candidate oracle needs at least one candidate");
  auto rng = detail::oracle_rng(seed);
  return [candidates = std::move(candidates), require_promise, rng, error_rate, min_score](const Point& q, const Samples& samples) {
    const int D = static_cast<int>(q.size());
    Mask best = candidates.front();
    double best_score = samples.empty() ? 1.0 : -2.0;
    if (!samples.empty())
      for (Mask c : candidates) {
        double score = 0.0;
        for (const auto& s : samples) score += s.y * chi(c, s.x);
        score /= static_cast<double>(samples.size());
        if (score > best_score) {
          best_score = score;
          best = c;
        }
      }
    std::bernoulli_distribution coin(0.5);
    if (best_score < min_score || (require_promise && popcount(best) != D / 2)) return coin(*rng) ? 1 : -1;
    return detail::flip_with(error_rate, chi(best, q), *rng);
  };
}

inline Oracle make_parity_cheater(Mask secret, std::uint64_t seed, double error_rate = 0.0) {
  auto rng = detail::oracle_rng(seed);
  return [secret, rng, error_rate](const Point& q, const Samples&) { return detail::flip_with(error_rate, chi(secret, q), *rng); };
}

// SFSM8 oracle that knows candidate flip vectors; it keeps the candidate whose mod-8 residuals are
// smallest and answers f_mod8(q . s), or a uniform residue when no candidate fits (mean |residual| > max_residual).
inline Oracle make_sfsm8_candidate_oracle(std::vector<Point> candidates, std::uint64_t seed, double error_rate = 0.0,
                                          double max_residual = 1.0) {
  if (candidates.empty()) throw std::invalid_argument("candidate oracle needs at least one candidate");
  auto rng = detail::oracle_rng(seed);
  return [candidates = std::move(candidates), rng, error_rate, max_residual](const Point& q, const Samples& samples) {
    const Point* best = &candidates.front();
    double best_res = samples.empty() ? 0.0 : 1e300;
    if (!samples.empty())
      for (const auto& c : candidates) {
        double res = 0.0;
        for (const auto& s : samples) res += std::abs(detail::wrap8(s.y - f_mod8_flipped(s.x, c)));
        res /= static_cast<double>(samples.size());
        if (res < best_res) {
          best_res = res;
          best = &c;
        }
      }
    std::uniform_int_distribution<int> residue(0, 7);
    if (best_res > max_residual) return residue(*rng);
    int ans = f_mod8_flipped(q, *best);
    if (error_rate > 0 && std::bernoulli_distribution(error_rate)(*rng)) ans = mod8_residue(ans + 1 + residue(*rng) % 7);
    return ans;
  };
}

inline Oracle make_sfsm8_cheater(Point flips, std::uint64_t seed, double error_rate = 0.0) {
  return make_sfsm8_candidate_oracle({std::move(flips)}, seed, error_rate, 1e300);
}

// ---- learned solvers ----

enum class Rounding { sign, mod8 };

using Predictor = std::function<double(const Point&)>;
using Trainer = std::function<Predictor(const Samples&)>;

inline Oracle wrap_equivariant_learner_as_solver(Trainer trainer, Rounding rounding) {
  return [trainer = std::move(trainer), rounding](const Point& q, const Samples& samples) {
    double v = trainer(samples)(q);
    if (rounding == Rounding::sign) return v >= 0 ? 1 : -1;
    return mod8_residue(static_cast<int>(std::lround(v)));
  };
}

inline Dataset samples_to_dataset(const Samples& samples, int d) {
  Dataset ds;
  const auto n = static_cast<Eigen::Index>(samples.size());
  ds.X.resize(n, d);
  ds.y.resize(n);
  ds.weight = Eigen::VectorXd::Constant(n, n ? 1.0 / static_cast<double>(n) : 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) ds.X(i, j) = samples[static_cast<std::size_t>(i)].x[static_cast<std::size_t>(j)];
    ds.y(i) = samples[static_cast<std::size_t>(i)].y;
  }
  return ds;
}

// One-pass SGD on a fresh fully connected network with Gaussian first layer and zero second layer.
inline Trainer make_sgd_trainer(int d, int width, Activation act, double init_sigma, double eta, std::uint64_t seed, int epochs = 1) {
  return [=](const Samples& samples) -> Predictor {
    Rng rng = make_rng(seed, 0x5d);
    TwoLayerNet net = init_net(width, d, act, InitSpec::gaussian(init_sigma), InitSpec::gaussian(init_sigma), rng);
    Dataset ds = samples_to_dataset(samples, d);
    for (int e = 0; e < epochs; ++e) net = sgd_run(net, ds, eta).final_net;
    return [net](const Point& x) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
      for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
      return net(v);
    };
  };
}

// ---- pipeline ----

struct PipelineConfig {
  LpnToPromiseConfig lpn;
  RejectionKernelConfig kernel;  // gamma here is the LPGN noise, half the SFSM8 noise
};

// LPN (d) -> promise-LPN (2d) -> LPGN (2d) -> SFSM8 (2d)
inline LpnToPromiseResult pipeline_lpn_to_sfsm8(const LpnInstance& inst, const Oracle& sfsm8_oracle, const PipelineConfig& cfg, Rng& rng) {
  const int D = 2 * inst.d;
  Oracle lpgn = [&](const Point& q, const Samples& s) { return reduce_lpgn_to_sfsm8(q, s, sfsm8_oracle, D / 2); };
  Oracle promise = [&](const Point& q, const Samples& s) { return reduce_promise_lpn_to_lpgn(q, s, lpgn, cfg.kernel, rng); };
  return reduce_lpn_to_promise_lpn(inst.query, inst.samples, promise, cfg.lpn, rng);
}

// Secrets S u {d+1..d+r} for r = 0..d, i.e. every padded secret the LPN reduction can create.
inline std::vector<Mask> padded_secrets(Mask secret, int d) {
  std::vector<Mask> out;
  for (int r = 0; r <= d; ++r) out.push_back(secret | (full_mask(r) << d));
  return out;
}

// ---- trial runners ----

struct TrialRecord {
  std::size_t trial = 0;
  int expected = 0;
  int answer = 0;
  int r_hat = -1;
  int r_star = -1;
  bool success = false;
};

struct TrialSummary {
  std::string stage;
  std::vector<TrialRecord> records;
  BinomialSummary success;
  std::optional<BinomialSummary> r_recovered;
};

namespace detail {
inline TrialSummary summarize(std::string stage, std::vector<TrialRecord> recs, bool with_r) {
  TrialSummary s;
  s.stage = std::move(stage);
  std::size_t ok = 0, rok = 0;
  for (const auto& r : recs) {
    ok += r.success;
    rok += r.r_hat == r.r_star;
  }
  s.success = binomial_summary(ok, recs.size());
  if (with_r) s.r_recovered = binomial_summary(rok, recs.size());
  s.records = std::move(recs);
  return s;
}
}  // namespace detail

// LPGN (d, gamma/2) samples pushed through the reduction to a candidate-checking SFSM8 oracle.
inline TrialSummary run_lpgn_to_sfsm8_trials(int d, double gamma, std::size_t n, std::size_t trials, std::uint64_t seed,
                                             double oracle_error = 0.0, int jobs = 1) {
  std::vector<TrialRecord> recs(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng = make_rng(seed, 0x51, t);
    LpgnInstance inst = gen_lpgn(d, n, gamma / 2.0, rng);
    Oracle oracle = make_sfsm8_candidate_oracle({sign_vector(inst.secret, d)}, derive_seed(seed, 0x52, t), oracle_error);
    int ans = reduce_lpgn_to_sfsm8(inst.query, inst.samples, oracle, d / 2);
    recs[t] = {t, inst.answer(), ans, -1, -1, ans == inst.answer()};
  });
  return detail::summarize("lpgn_to_sfsm8", std::move(recs), false);
}

// Promise-LPN with delta inside the kernel threshold, through the kernel to a candidate-checking LPGN oracle.
inline TrialSummary run_promise_to_lpgn_trials(int d, double gamma, std::size_t n, std::size_t trials, std::uint64_t seed,
                                               double oracle_error = 0.0, int jobs = 1) {
  RejectionKernelConfig cfg = threshold_config(gamma, n);
  std::vector<TrialRecord> recs(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng = make_rng(seed, 0x61, t);
    LpnInstance inst = gen_promise_lpn(d, n, 1.0 - 2.0 * cfg.delta, rng);
    Oracle oracle = make_parity_candidate_oracle({inst.secret}, true, derive_seed(seed, 0x62, t), oracle_error);
    int ans = reduce_promise_lpn_to_lpgn(inst.query, inst.samples, oracle, cfg, rng);
    recs[t] = {t, inst.answer(), ans, -1, -1, ans == inst.answer()};
  });
  return detail::summarize("promise_to_lpgn", std::move(recs), false);
}

inline TrialSummary run_lpn_to_promise_trials(int d, double rho, const LpnToPromiseConfig& cfg, std::size_t trials, std::uint64_t seed,
                                              double oracle_error = 0.0, int jobs = 1) {
  std::vector<TrialRecord> recs(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng = make_rng(seed, 0x71, t);
    LpnInstance inst = gen_lpn(d, lpn_to_promise_sample_count(d, cfg), rho, rng);
    Oracle oracle = make_parity_candidate_oracle(padded_secrets(inst.secret, d), true, derive_seed(seed, 0x72, t), oracle_error);
    auto res = reduce_lpn_to_promise_lpn(inst.query, inst.samples, oracle, cfg, rng);
    recs[t] = {t, inst.answer(), res.answer, res.r_hat, d - popcount(inst.secret), res.answer == inst.answer()};
  });
  return detail::summarize("lpn_to_promise", std::move(recs), true);
}

inline TrialSummary run_pipeline_trials(int d, double rho, double gamma, const LpnToPromiseConfig& lcfg, std::size_t trials,
                                        std::uint64_t seed, double oracle_error = 0.0, int jobs = 1) {
  PipelineConfig cfg;
  cfg.lpn = lcfg;
  cfg.kernel = threshold_config(gamma / 2.0, static_cast<std::size_t>(lcfg.n_A));
  std::vector<TrialRecord> recs(trials);
  parallel_for(trials, jobs, [&](std::size_t t) {
    Rng rng = make_rng(seed, 0x81, t);
    LpnInstance inst = gen_lpn(d, lpn_to_promise_sample_count(d, lcfg), rho, rng);
    std::vector<Point> flips;
    for (Mask s : padded_secrets(inst.secret, d)) flips.push_back(sign_vector(s, 2 * d));
    Oracle oracle = make_sfsm8_candidate_oracle(std::move(flips), derive_seed(seed, 0x82, t), oracle_error);
    auto res = pipeline_lpn_to_sfsm8(inst, oracle, cfg, rng);
    recs[t] = {t, inst.answer(), res.answer, res.r_hat, d - popcount(inst.secret), res.answer == inst.answer()};
  });
  return detail::summarize("pipeline", std::move(recs), true);
}

}  // namespace eqlab
