#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "eqlab/acceptance.hpp"
#include "eqlab/alignment.hpp"
#include "eqlab/boolean_fourier.hpp"
#include "eqlab/gd_engine.hpp"
#include "eqlab/io.hpp"
#include "eqlab/msp.hpp"
#include "eqlab/reductions.hpp"
#include "eqlab/sphere_harmonics.hpp"

using namespace eqlab;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  std::string plot;
};

// Flag-built or file-loaded function input.
struct FunctionInput {
  std::string file;
  std::string builtin;
  int d = 0;
  std::string set;
};

void add_function_options(CLI::App* app, FunctionInput& in) {
  app->add_option("--function", in.file, "function spec JSON file");
  app->add_option("--builtin", in.builtin, "parity | full_parity | half_parity | mod8 | parity_mod4");
  app->add_option("--d", in.d, "dimension for --builtin");
  app->add_option("--set", in.set, "1-indexed set for --builtin parity, e.g. [1,2]");
}

json parse_json_flag(const std::string& text, const std::string& flag) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(flag, std::string("invalid JSON: ") + e.what());
  }
}

HypercubeFunction load_function(const FunctionInput& in, RunManifest& man) {
  if (!in.file.empty() && !in.builtin.empty()) throw SpecError("--function", "give either --function or --builtin, not both");
  if (!in.file.empty()) {
    std::string bytes = read_file(in.file);
    man.input_digests[in.file] = "fnv1a64:" + fnv1a64_hex(bytes);
    json j;
    try {
      j = json::parse(bytes);
    } catch (const json::parse_error& e) {
      throw SpecError(in.file, std::string("invalid JSON: ") + e.what());
    }
    return parse_function_spec(j, in.file);
  }
  if (in.builtin.empty()) throw SpecError("--builtin", "a function is required (--function FILE or --builtin NAME --d D)");
  json j = {{"type", "builtin"}, {"name", in.builtin}, {"d", in.d}};
  if (!in.set.empty()) j["set"] = parse_json_flag(in.set, "--set");
  return parse_function_spec(j, "--builtin");
}

SpherePolynomial load_polynomial(const std::string& file, RunManifest& man) {
  std::string bytes = read_file(file);
  man.input_digests[file] = "fnv1a64:" + fnv1a64_hex(bytes);
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw SpecError(file, std::string("invalid JSON: ") + e.what());
  }
  return parse_polynomial_spec(j, file);
}

std::uint64_t resolve_seed(const Globals& g) {
  if (g.seed) return *g.seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

class Csv {
 public:
  Csv(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw SpecError(path, "cannot open for writing");
    out_ << std::setprecision(17);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }
  template <typename... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << v, first = false), ...);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

std::string set_label(Mask s) {
  std::string out;
  for (int i : mask_to_indices(s)) out += (out.empty() ? "" : " ") + std::to_string(i + 1);
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json binomial_json(const BinomialSummary& s) {
  return {{"successes", s.successes}, {"trials", s.trials}, {"rate", s.rate}, {"std_error", s.std_error},
          {"ci95", {s.ci_low, s.ci_high}}};
}

void emit(const Globals& g, json report, RunManifest& man, std::chrono::steady_clock::time_point t0) {
  man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json doc = {{"schema", kSchema}};
  doc.update(report);
  doc["manifest"] = man.to_json();
  const std::string text = doc.dump(2);
  if (g.out.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw SpecError(g.out, "cannot open for writing");
  f << text << "\n";
}

// ---- fourier ----

json run_fourier(const FunctionInput& in, double tol, const Globals& g, RunManifest& man) {
  HypercubeFunction f = load_function(in, man);
  man.config = {{"d", f.dim()}, {"tolerance", tol}};
  FourierSpectrum spec = wht_forward(f);
  json coeffs = json::array();
  for (std::size_t s = 0; s < spec.size(); ++s)
    if (std::abs(spec[s]) > tol) coeffs.push_back({{"set", set_to_json(s)}, {"value", spec[s]}});
  auto weights = level_weights(spec);
  if (!g.plot.empty()) {
    Csv csv(g.plot, {"set", "level", "coefficient"});
    for (std::size_t s = 0; s < spec.size(); ++s)
      if (std::abs(spec[s]) > tol) csv.row(set_label(s), popcount(s), spec[s]);
  }
  man.steps = {{"coefficients", spec.size()}};
  return {{"d", f.dim()}, {"norm_sq", l2_norm_sq(f)}, {"level_weights", weights}, {"coefficients", coeffs}};
}

// ---- align ----

struct AlignArgs {
  FunctionInput fn;
  std::string group = "sign_perm";
  std::string fixed;
  std::string polynomial;
  bool brute = false;
  std::size_t mc_samples = 10000;
};

json report_json(const AlignmentReport& r) {
  json w = {{"description", r.witness.description}};
  if (r.witness.level >= 0) w["level"] = r.witness.level;
  if (r.witness.set) w["set"] = set_to_json(*r.witness.set);
  json out = {{"value", r.value}, {"witness", w}, {"method", to_string(r.method)}, {"level0_weight", r.level0_weight}};
  if (r.std_error) out["std_error"] = *r.std_error;
  return out;
}

json run_align(const AlignArgs& a, const Globals& g, RunManifest& man) {
  GroupKind kind = group_kind_from_string(a.group);
  man.config = {{"group", a.group}, {"brute_force", a.brute}, {"mc_samples", a.mc_samples}};
  if (kind == GroupKind::rot) {
    if (a.polynomial.empty()) throw SpecError("--polynomial", "the rot group needs a polynomial spec");
    SpherePolynomial p = load_polynomial(a.polynomial, man);
    auto dec = harmonic_decompose(p);
    auto best = rotation_alignment(dec);
    json levels = json::array();
    for (const auto& c : dec.components)
      levels.push_back({{"level", c.degree}, {"norm_sq", c.norm_sq}, {"dim", dim_harmonic(p.dim(), c.degree)}});
    if (!g.plot.empty()) {
      Csv csv(g.plot, {"level", "norm_sq", "dim", "ratio"});
      for (const auto& c : dec.components)
        csv.row(c.degree, c.norm_sq, dim_harmonic(p.dim(), c.degree), c.norm_sq / static_cast<double>(dim_harmonic(p.dim(), c.degree)));
    }
    man.config["d"] = p.dim();
    return {{"value", best.value},
            {"witness", {{"description", "normalized degree-" + std::to_string(best.level) + " harmonic component"}, {"level", best.level}}},
            {"method", "closed_form"},
            {"levels", levels}};
  }
  HypercubeFunction f = load_function(a.fn, man);
  const int d = f.dim();
  man.config["d"] = d;
  FourierSpectrum spec = wht_forward(f);
  Mask fixed = 0;
  if (!a.fixed.empty()) fixed = detail::parse_set(parse_json_flag(a.fixed, "--fixed"), d, "--fixed");
  GroupSpec g_spec(kind, d, fixed);
  const std::uint64_t seed = resolve_seed(g);
  man.seed = seed;
  AlignmentReport rep;
  switch (kind) {
    case GroupKind::sign_perm: rep = sign_perm_alignment(spec); break;
    case GroupKind::sign: rep = sign_alignment(spec); break;
    case GroupKind::perm: rep = perm_subgroup_alignment(spec, 0, seed, a.mc_samples); break;
    case GroupKind::perm_fixing: rep = perm_subgroup_alignment(spec, fixed, seed, a.mc_samples); break;
    case GroupKind::rot: break;
  }
  json out = report_json(rep);
  if (a.brute) out["brute_force"] = report_json(brute_force_alignment(f, g_spec));
  if (!g.plot.empty()) {
    Csv csv(g.plot, {"level", "weight", "binomial", "ratio"});
    auto w = level_weights(spec);
    for (int k = 0; k <= d; ++k) csv.row(k, w[k], binomial(d, k), w[k] / binomial(d, k));
  }
  return out;
}

// ---- msp ----

struct MspArgs {
  std::string support;
  std::string coeffs;
  int P = 0;
  int leap = 1;
  bool exhaustive = false;
  int d = 0;
  double eta = 0.0, R = 0.0, tau = 0.0;
  int k = 0;
};

json run_msp(const MspArgs& a, RunManifest& man) {
  json sets = parse_json_flag(a.support, "--support");
  json coeffs = a.coeffs.empty() ? json() : parse_json_flag(a.coeffs, "--coeffs");
  FourierSupport sup = parse_support(sets, coeffs, a.P, "--support");
  if (a.leap < 1) throw SpecError("--leap", "leap must be at least 1");
  man.config = {{"support", sets}, {"P", sup.P}, {"leap", a.leap}};
  MspReport rep = is_l_msp(sup, a.leap);
  json out = {{"P", sup.P},
              {"leap", rep.leap},
              {"satisfies", rep.satisfies},
              {"ordering", sets_to_json(rep.ordering)},
              {"closure", set_to_json(rep.closure)},
              {"violating_sets", sets_to_json(rep.violating_sets)},
              {"minimal_leap", rep.minimal_leap}};
  if (a.exhaustive) out["exhaustive_agrees"] = is_l_msp_exhaustive(sup, a.leap) == rep.satisfies;
  if (a.d > 0) {
    man.config.update({{"d", a.d}, {"eta", a.eta}, {"R", a.R}, {"tau", a.tau}, {"k", a.k}});
    if (rep.satisfies) {
      out["necessity_bound"] = nullptr;
    } else {
      auto nb = necessity_bound(sup, a.d, a.leap, a.eta, a.R, a.tau, a.k);
      out["necessity_bound"] = {{"probability_bound", nb.probability_bound}, {"direct_bound", nb.direct_bound},
                                {"eps0", nb.eps0},                           {"c_h", nb.c_h},
                                {"C_h", nb.C_h},                             {"C", nb.C},
                                {"alignment_bound", nb.alignment_bound}};
    }
  }
  return out;
}

// ---- train ----

struct TrainArgs {
  std::string config;
  std::optional<double> eta, tau, R;
  std::optional<int> k, stride;
  std::string trace;
  std::string snapshots;
};

InitSpec parse_init(const json& j, const std::string& path, InitSpec fallback) {
  if (j.is_null()) return fallback;
  const std::string kind = detail::need(j, "kind", path).get<std::string>();
  if (kind == "gaussian") return InitSpec::gaussian(j.value("sigma", 1.0));
  if (kind == "three_point") return InitSpec::three_point(j.value("p", 0.5));
  if (kind == "rademacher") return InitSpec::rademacher();
  if (kind == "zero") return InitSpec::zero();
  throw SpecError(path + ".kind", "unknown init kind '" + kind + "'");
}

Dataset sphere_dataset(const SpherePolynomial& p, std::size_t n, double gamma, Rng& rng) {
  const int d = p.dim();
  Dataset ds;
  ds.X.resize(static_cast<Eigen::Index>(n), d);
  ds.y.resize(static_cast<Eigen::Index>(n));
  ds.weight = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  std::normal_distribution<double> noise(0.0, gamma);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    auto x = sample_sphere(d, rng);
    for (int j = 0; j < d; ++j) ds.X(i, j) = x[static_cast<std::size_t>(j)];
    ds.y(i) = p(x) + (gamma > 0 ? noise(rng) : 0.0);
  }
  return ds;
}

Dataset cube_stream(const HypercubeFunction& f, std::size_t n, double gamma, Rng& rng) {
  const int d = f.dim();
  Dataset ds;
  ds.X.resize(static_cast<Eigen::Index>(n), d);
  ds.y.resize(static_cast<Eigen::Index>(n));
  ds.weight = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
  std::uniform_int_distribution<std::size_t> pick(0, f.size() - 1);
  std::normal_distribution<double> noise(0.0, gamma);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    std::size_t x = pick(rng);
    for (int j = 0; j < d; ++j) ds.X(i, j) = coord(x, j);
    ds.y(i) = f[x] + (gamma > 0 ? noise(rng) : 0.0);
  }
  return ds;
}

json run_train(const TrainArgs& a, const Globals& g, RunManifest& man) {
  if (a.config.empty()) throw SpecError("--config", "train needs a JSON config file");
  std::string bytes = read_file(a.config);
  man.input_digests[a.config] = "fnv1a64:" + fnv1a64_hex(bytes);
  json cfg_j;
  try {
    cfg_j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw SpecError(a.config, std::string("invalid JSON: ") + e.what());
  }
  const std::string& path = a.config;
  if (!cfg_j.is_object()) throw SpecError(path, "expected an object");

  // flags > config file > defaults
  const std::string mode = cfg_j.value("mode", "gd");
  if (mode != "gd" && mode != "sgd") throw SpecError(path + ".mode", "expected 'gd' or 'sgd'");
  TrainConfig cfg;
  cfg.eta = a.eta.value_or(cfg_j.value("eta", 0.01));
  cfg.tau = a.tau.value_or(cfg_j.value("tau", 0.0));
  if (a.R) {
    cfg.R = *a.R;
  } else if (cfg_j.contains("R") && !cfg_j["R"].is_null()) {
    cfg.R = detail::need_number(cfg_j["R"], path + ".R");
  }
  cfg.k = a.k.value_or(cfg_j.value("k", 100));
  cfg.stride = a.stride.value_or(cfg_j.value("stride", 1));
  const std::string clip = cfg_j.value("clip", "network_gradient");
  if (clip == "loss_gradient") {
    cfg.clip = ClipMode::loss_gradient;
  } else if (clip != "network_gradient") {
    throw SpecError(path + ".clip", "expected 'network_gradient' or 'loss_gradient'");
  }
  std::uint64_t seed = g.seed ? *g.seed : (cfg_j.contains("seed") ? cfg_j["seed"].get<std::uint64_t>() : resolve_seed(g));
  cfg.seed = derive_seed(seed, 0x7a);
  cfg.validate();

  const int width = cfg_j.value("width", 16);
  const double gamma = cfg_j.value("gamma", 0.0);
  const std::size_t n_samples = cfg_j.value("samples", std::size_t{4096});
  Activation act;
  try {
    act = Activation::parse(cfg_j.value("activation", "tanh"));
  } catch (const std::invalid_argument& e) {
    throw SpecError(path + ".activation", e.what());
  }

  Rng rng = make_rng(seed, 0x7b);
  Dataset ds;
  std::string data_kind;
  if (cfg_j.contains("target")) {
    HypercubeFunction f = parse_function_spec(cfg_j["target"], path + ".target");
    if (mode == "gd") {
      ds = hypercube_dataset(f);
      data_kind = "hypercube_exact";
    } else {
      ds = cube_stream(f, n_samples, gamma, rng);
      data_kind = "hypercube_stream";
    }
  } else if (cfg_j.contains("polynomial")) {
    SpherePolynomial p = parse_polynomial_spec(cfg_j["polynomial"], path + ".polynomial");
    ds = sphere_dataset(p, n_samples, gamma, rng);
    data_kind = "sphere_sampled";
  } else {
    throw SpecError(path, "config needs a 'target' function spec or a 'polynomial' spec");
  }
  const int d = ds.dim();
  InitSpec w_init = parse_init(cfg_j.value("init", json::object()).value("W", json()), path + ".init.W",
                               InitSpec::gaussian(1.0 / std::sqrt(static_cast<double>(d))));
  InitSpec a_init = parse_init(cfg_j.value("init", json::object()).value("a", json()), path + ".init.a",
                               InitSpec::gaussian(1.0 / std::sqrt(static_cast<double>(std::max(width, 1)))));
  TwoLayerNet net0 = init_net(width, d, act, w_init, a_init, rng);

  Trajectory tr = mode == "gd" ? gd_run(net0, ds, cfg) : sgd_run(net0, ds, cfg.eta);

  man.config = {{"mode", mode},  {"data", data_kind}, {"d", d},          {"width", width},     {"activation", act.name()},
                {"eta", cfg.eta}, {"tau", cfg.tau},   {"R", finite_or_null(cfg.R)}, {"k", cfg.k}, {"stride", cfg.stride},
                {"clip", clip},   {"gamma", gamma},   {"samples", ds.size()}};
  man.seed = seed;
  man.steps = {{"steps", mode == "gd" ? cfg.k : static_cast<int>(ds.size())}};

  auto write_trace = [&](const std::string& file) {
    Csv csv(file, {"step", "loss"});
    for (std::size_t t = 0; t < tr.losses.size(); ++t) csv.row(t, tr.losses[t]);
  };
  if (!a.trace.empty()) write_trace(a.trace);
  if (!g.plot.empty()) write_trace(g.plot);
  if (!a.snapshots.empty()) {
    Csv csv(a.snapshots, {"step", "index", "value"});
    for (std::size_t s = 0; s < tr.snapshots.size(); ++s)
      for (Eigen::Index j = 0; j < tr.snapshots[s].size(); ++j) csv.row(tr.snapshot_steps[s], j, tr.snapshots[s](j));
  }
  return {{"loss_initial", tr.losses.front()},
          {"loss_final", tr.losses.back()},
          {"steps", tr.losses.size() - 1},
          {"snapshots", tr.snapshot_steps.size()},
          {"parameter_norm_final", tr.final_net.params().norm()}};
}

// ---- weaklearn ----

struct WeakArgs {
  std::string domain = "boolean";
  FunctionInput fn;
  std::string polynomial;
  int s = 1;
  int l = 1;
  int m = 1000;
  std::optional<double> eta;
  double tau = 0.0;
  double R = std::numeric_limits<double>::infinity();
  int seeds = 1;
  double p = -1.0;
  std::size_t n_w = 0;
  std::size_t samples = 20000;
};

json run_weaklearn(const WeakArgs& a, const Globals& g, RunManifest& man) {
  const std::uint64_t seed = resolve_seed(g);
  man.seed = seed;
  if (a.seeds < 1) throw SpecError("--seeds", "need at least one seed");
  std::vector<WeakLearnReport> reps(static_cast<std::size_t>(a.seeds));
  json out;
  if (a.domain == "boolean") {
    HypercubeFunction f = load_function(a.fn, man);
    const double eta = a.eta.value_or(1.0 / (8.0 * a.m));
    man.config = {{"domain", "boolean"}, {"d", f.dim()}, {"s", a.s}, {"m", a.m}, {"eta", eta}, {"tau", a.tau},
                  {"R", finite_or_null(a.R)}, {"seeds", a.seeds}};
    parallel_for(reps.size(), g.jobs, [&](std::size_t i) { reps[i] = weak_learn_boolean(f, a.s, a.m, eta, a.tau, derive_seed(seed, 0xa1, i), a.R); });
    out["norm_sq"] = l2_norm_sq(f);
    out["bump_correlation_lower_bound"] = bump_correlation_lower_bound(wht_forward(f), a.s);
    if (a.n_w > 0) {
      const double p = a.p >= 0 ? a.p : static_cast<double>(a.s) / f.dim();
      auto est = bump_correlation_moment(f, p, a.n_w, derive_seed(seed, 0xa2));
      out["bump_correlation_moment"] = {{"p", p}, {"value", est.value}, {"std_error", est.std_error}, {"samples", est.samples}};
      man.config["p"] = p;
      man.config["n_w"] = a.n_w;
    }
  } else if (a.domain == "sphere") {
    if (a.polynomial.empty()) throw SpecError("--polynomial", "the sphere domain needs a polynomial spec");
    SpherePolynomial poly = load_polynomial(a.polynomial, man);
    const double eta = a.eta.value_or(1.0 / a.m);
    man.config = {{"domain", "sphere"}, {"d", poly.dim()}, {"l", a.l}, {"m", a.m}, {"eta", eta}, {"tau", a.tau},
                  {"samples", a.samples}, {"seeds", a.seeds}};
    parallel_for(reps.size(), g.jobs, [&](std::size_t i) {
      reps[i] = weak_learn_sphere(poly, a.l, a.m, eta, derive_seed(seed, 0xa3, i), a.samples, a.tau);
    });
    out["norm_sq"] = norm_sq(poly);
    out["rotation_alignment"] = rotation_alignment(poly).value;
  } else {
    throw SpecError("--domain", "expected 'boolean' or 'sphere'");
  }
  json runs = json::array();
  std::size_t drops = 0;
  for (const auto& r : reps) {
    drops += r.loss_after < r.loss_before;
    json one = {{"loss_before", r.loss_before}, {"loss_after", r.loss_after}, {"gradient_norm_sq", r.gradient_norm_sq}};
    if (a.domain == "boolean") one["r_s"] = r.r_s;
    else one["noise_floor"] = r.noise_floor;
    runs.push_back(one);
  }
  if (!g.plot.empty()) {
    Csv csv(g.plot, {"seed_index", "loss_before", "loss_after", "gradient_norm_sq"});
    for (std::size_t i = 0; i < reps.size(); ++i) csv.row(i, reps[i].loss_before, reps[i].loss_after, reps[i].gradient_norm_sq);
  }
  out["runs"] = runs;
  out["loss_decreased"] = binomial_json(binomial_summary(drops, reps.size()));
  man.steps = {{"gd_steps_per_seed", 1}};
  return out;
}

// ---- reduce ----

struct ReduceArgs {
  std::string chain = "lpn,promise,lpgn,sfsm8";
  int d = 10;
  double rho = 0.8;
  double gamma = 0.2;
  std::size_t n = 200;
  std::size_t trials = 100;
  int T = 0;
  int n_A = 20;
  double oracle_error = 0.0;
  std::string log;
};

json run_reduce(const ReduceArgs& a, const Globals& g, RunManifest& man) {
  const std::uint64_t seed = resolve_seed(g);
  man.seed = seed;
  LpnToPromiseConfig lc;
  lc.T = a.T > 0 ? a.T : desk_T(a.d, a.rho);
  lc.n_A = a.n_A;
  TrialSummary s;
  json cfg = {{"chain", a.chain}, {"d", a.d}, {"trials", a.trials}, {"oracle_error", a.oracle_error}};
  if (a.chain == "lpgn,sfsm8") {
    s = run_lpgn_to_sfsm8_trials(a.d, a.gamma, a.n, a.trials, seed, a.oracle_error, g.jobs);
    cfg.update({{"gamma", a.gamma}, {"n", a.n}});
  } else if (a.chain == "promise,lpgn") {
    s = run_promise_to_lpgn_trials(a.d, a.gamma, a.n, a.trials, seed, a.oracle_error, g.jobs);
    auto kc = threshold_config(a.gamma, a.n);
    cfg.update({{"gamma", a.gamma}, {"n", a.n}, {"kernel", {{"delta", kc.delta}, {"N", kc.N}}}});
  } else if (a.chain == "lpn,promise") {
    s = run_lpn_to_promise_trials(a.d, a.rho, lc, a.trials, seed, a.oracle_error, g.jobs);
    cfg.update({{"rho", a.rho}, {"T", lc.T}, {"n_A", lc.n_A}});
  } else if (a.chain == "lpn,promise,lpgn,sfsm8") {
    s = run_pipeline_trials(a.d, a.rho, a.gamma, lc, a.trials, seed, a.oracle_error, g.jobs);
    auto kc = threshold_config(a.gamma / 2.0, static_cast<std::size_t>(lc.n_A));
    cfg.update({{"rho", a.rho}, {"gamma", a.gamma}, {"T", lc.T}, {"n_A", lc.n_A}, {"kernel", {{"delta", kc.delta}, {"N", kc.N}}}});
  } else {
    throw SpecError("--chain", "expected one of lpgn,sfsm8 | promise,lpgn | lpn,promise | lpn,promise,lpgn,sfsm8");
  }
  man.config = cfg;
  man.steps = {{"trials", a.trials}};
  auto write_log = [&](const std::string& file) {
    Csv csv(file, {"trial", "stage", "expected", "answer", "r_hat", "r_star", "success"});
    for (const auto& r : s.records) csv.row(r.trial, s.stage, r.expected, r.answer, r.r_hat, r.r_star, r.success ? 1 : 0);
  };
  if (!a.log.empty()) write_log(a.log);
  if (!g.plot.empty()) write_log(g.plot);
  json out = {{"stage", s.stage}, {"success", binomial_json(s.success)}};
  if (s.r_recovered) out["r_recovered"] = binomial_json(*s.r_recovered);
  return out;
}

// ---- verify ----

int run_verify(const std::string& suite, const Globals& g, RunManifest& man, std::chrono::steady_clock::time_point t0) {
  if (suite != "quick" && suite != "full") throw SpecError("--suite", "expected 'quick' or 'full'");
  man.config = {{"suite", suite}};
  auto results = acceptance::run_all(suite == "full" ? acceptance::Scale::full : acceptance::Scale::quick, g.jobs,
                                     [](const acceptance::CheckResult& r) { std::cerr << acceptance::format_line(r) << std::endl; });
  json checks = json::array();
  std::size_t passed = 0;
  for (const auto& r : results) {
    passed += r.passed;
    checks.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}});
  }
  man.steps = {{"checks", results.size()}};
  const bool ok = passed == results.size();
  std::cerr << passed << "/" << results.size() << " checks passed" << std::endl;
  if (!g.out.empty()) emit(g, {{"suite", suite}, {"passed", ok}, {"checks", checks}}, man, t0);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqlab: equivariant-learning laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "RNG seed (recorded in the manifest; generated when absent)");
  app.add_option("--jobs", g.jobs, "trial-level worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "write the JSON report here instead of stdout");
  app.add_option("--emit-plot-data", g.plot, "write a CSV trace for external plotting");

  FunctionInput fourier_in;
  double fourier_tol = 1e-12;
  auto* fourier = app.add_subcommand("fourier", "Walsh-Hadamard spectrum of a hypercube function");
  fourier->fallthrough();
  add_function_options(fourier, fourier_in);
  fourier->add_option("--tolerance", fourier_tol, "omit coefficients at or below this magnitude");

  AlignArgs align_a;
  auto* align = app.add_subcommand("align", "G-alignment of a function or polynomial");
  align->fallthrough();
  add_function_options(align, align_a.fn);
  align->add_option("--group", align_a.group, "perm | sign | sign_perm | perm_fixing | rot");
  align->add_option("--fixed", align_a.fixed, "fixed coordinates for perm_fixing, e.g. [1,2]");
  align->add_option("--polynomial", align_a.polynomial, "polynomial spec JSON file (rot)");
  align->add_flag("--brute-force", align_a.brute, "also enumerate the group (small d)");
  align->add_option("--mc-samples", align_a.mc_samples, "Monte-Carlo samples for large perm orbits");

  MspArgs msp_a;
  auto* msp = app.add_subcommand("msp", "leap-l merged-staircase analysis of a Fourier support");
  msp->fallthrough();
  msp->add_option("--support", msp_a.support, "JSON list of 1-indexed sets")->required();
  msp->add_option("--coeffs", msp_a.coeffs, "JSON list of coefficients parallel to --support");
  msp->add_option("--P", msp_a.P, "number of relevant coordinates (default: largest index)");
  msp->add_option("--leap", msp_a.leap, "leap l");
  msp->add_flag("--exhaustive", msp_a.exhaustive, "cross-check against the exhaustive ordering search");
  msp->add_option("--d", msp_a.d, "ambient dimension for the necessity bound");
  msp->add_option("--eta", msp_a.eta, "step size for the necessity bound");
  msp->add_option("--R", msp_a.R, "clipping radius for the necessity bound");
  msp->add_option("--tau", msp_a.tau, "noise std for the necessity bound");
  msp->add_option("--k", msp_a.k, "step count for the necessity bound");

  TrainArgs train_a;
  double t_eta = 0, t_tau = 0, t_R = 0;
  int t_k = 0, t_stride = 0;
  auto* train = app.add_subcommand("train", "noisy clipped GD or one-pass SGD on a two-layer network");
  train->fallthrough();
  train->add_option("--config", train_a.config, "run config JSON file")->required();
  auto* o_eta = train->add_option("--eta", t_eta, "override step size");
  auto* o_tau = train->add_option("--tau", t_tau, "override noise std");
  auto* o_R = train->add_option("--R", t_R, "override clipping radius");
  auto* o_k = train->add_option("--k", t_k, "override step count");
  auto* o_stride = train->add_option("--stride", t_stride, "override snapshot stride");
  train->add_option("--trace", train_a.trace, "per-step loss CSV");
  train->add_option("--snapshots", train_a.snapshots, "parameter snapshot CSV");

  WeakArgs weak_a;
  double w_eta = 0;
  auto* weak = app.add_subcommand("weaklearn", "one-step weak-learning constructions");
  weak->fallthrough();
  weak->add_option("--domain", weak_a.domain, "boolean | sphere");
  add_function_options(weak, weak_a.fn);
  weak->add_option("--polynomial", weak_a.polynomial, "polynomial spec JSON file (sphere)");
  weak->add_option("--s", weak_a.s, "parity level for the bump initialization (boolean)");
  weak->add_option("--l", weak_a.l, "monomial activation degree (sphere)");
  weak->add_option("--m", weak_a.m, "network width");
  auto* o_weta = weak->add_option("--eta", w_eta, "step size (default 1/(8m) boolean, 1/m sphere)");
  weak->add_option("--tau", weak_a.tau, "noise std");
  weak->add_option("--R", weak_a.R, "clipping radius (boolean)");
  weak->add_option("--seeds", weak_a.seeds, "independent initializations");
  weak->add_option("--p", weak_a.p, "three-point probability for the moment estimate (default s/d)");
  weak->add_option("--n-w", weak_a.n_w, "Monte-Carlo draws for the bump correlation moment");
  weak->add_option("--samples", weak_a.samples, "sphere samples per expectation");

  ReduceArgs red_a;
  auto* reduce = app.add_subcommand("reduce", "reduction chain trials with cheating oracles");
  reduce->fallthrough();
  reduce->add_option("--chain", red_a.chain, "lpgn,sfsm8 | promise,lpgn | lpn,promise | lpn,promise,lpgn,sfsm8");
  reduce->add_option("--d", red_a.d, "dimension");
  reduce->add_option("--rho", red_a.rho, "LPN correlation");
  reduce->add_option("--gamma", red_a.gamma, "Gaussian noise scale");
  reduce->add_option("--n", red_a.n, "samples per instance (lpgn,sfsm8 and promise,lpgn)");
  reduce->add_option("--trials", red_a.trials, "trial count");
  reduce->add_option("--T", red_a.T, "oracle calls per padding level (default min(10000 log d / rho^2, 500))");
  reduce->add_option("--nA", red_a.n_A, "samples per oracle call");
  reduce->add_option("--oracle-error", red_a.oracle_error, "probability the oracle returns a wrong answer");
  reduce->add_option("--log", red_a.log, "per-trial CSV");

  std::string suite = "quick";
  auto* verify = app.add_subcommand("verify", "run the acceptance suite; nonzero exit on failure");
  verify->fallthrough();
  verify->add_option("--suite", suite, "quick | full");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (seed_opt->count()) g.seed = seed_value;
  if (o_eta->count()) train_a.eta = t_eta;
  if (o_tau->count()) train_a.tau = t_tau;
  if (o_R->count()) train_a.R = t_R;
  if (o_k->count()) train_a.k = t_k;
  if (o_stride->count()) train_a.stride = t_stride;
  if (o_weta->count()) weak_a.eta = w_eta;

  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.subcommand = app.get_subcommands().front()->get_name();
  if (g.seed) man.seed = *g.seed;
  try {
    json report;
    if (fourier->parsed()) report = run_fourier(fourier_in, fourier_tol, g, man);
    else if (align->parsed()) report = run_align(align_a, g, man);
    else if (msp->parsed()) report = run_msp(msp_a, man);
    else if (train->parsed()) report = run_train(train_a, g, man);
    else if (weak->parsed()) report = run_weaklearn(weak_a, g, man);
    else if (reduce->parsed()) report = run_reduce(red_a, g, man);
    else return run_verify(suite, g, man, t0);
    emit(g, report, man, t0);
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  } catch (const SizeError& e) {
    std::cerr << "error: size cap: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
