#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "boolean_fourier.hpp"
#include "common.hpp"
#include "groups.hpp"
#include "msp.hpp"
#include "stats.hpp"

namespace eqlab {

enum class AlignmentMethod { closed_form, eigen, brute_force, monte_carlo_upper_bound, monte_carlo };

inline std::string to_string(AlignmentMethod m) {
  switch (m) {
    case AlignmentMethod::closed_form: return "closed_form";
    case AlignmentMethod::eigen: return "eigen";
    case AlignmentMethod::brute_force: return "brute_force";
    case AlignmentMethod::monte_carlo_upper_bound: return "monte_carlo_upper_bound";
    case AlignmentMethod::monte_carlo: return "monte_carlo";
  }
  return "?";
}

struct AlignmentWitness {
  std::string description;
  int level = -1;                 // parity level, when the witness is a parity
  std::optional<Mask> set;        // parity set, when the witness is a parity
  std::vector<double> spectrum;   // dense witness spectrum (unit norm), when available
};

struct AlignmentReport {
  double value = 0.0;
  AlignmentWitness witness;
  AlignmentMethod method = AlignmentMethod::closed_form;
  std::optional<double> std_error;
  double level0_weight = 0.0;  // squared constant coefficient
};

inline std::string describe_set(Mask s) {
  std::string out = "{";
  bool first = true;
  for (int i : mask_to_indices(s)) {
    if (!first) out += ",";
    out += std::to_string(i + 1);
    first = false;
  }
  return out + "}";
}

// max over k in [d] of C(d,k)^{-1} * (level-k Fourier weight)
inline AlignmentReport sign_perm_alignment(const FourierSpectrum& spec) {
  const int d = spec.dim();
  auto w = level_weights(spec);
  AlignmentReport rep;
  rep.method = AlignmentMethod::closed_form;
  rep.level0_weight = spec[0] * spec[0];
  int best = 1;
  for (int k = 1; k <= d; ++k) {
    double v = w[k] / binomial(d, k);
    if (v > rep.value) {
      rep.value = v;
      best = k;
    }
  }
  Mask s = full_mask(best);
  rep.witness.level = best;
  rep.witness.set = s;
  rep.witness.description = "parity chi_" + describe_set(s) + " (level " + std::to_string(best) + ")";
  return rep;
}

inline AlignmentReport sign_alignment(const FourierSpectrum& spec) {
  AlignmentReport rep;
  rep.method = AlignmentMethod::closed_form;
  rep.level0_weight = spec[0] * spec[0];
  Mask best = 0;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    double v = spec[s] * spec[s];
    if (v > rep.value) {
      rep.value = v;
      best = s;
    }
  }
  rep.witness.set = best;
  rep.witness.level = popcount(best);
  rep.witness.description = "parity chi_" + describe_set(best);
  return rep;
}

namespace detail {
inline AlignmentReport top_eigen(const Eigen::MatrixXd& m, const std::vector<Mask>& index, int d, AlignmentMethod method) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");
  const Eigen::Index top = m.rows() - 1;
  AlignmentReport rep;
  rep.method = method;
  rep.value = std::max(0.0, es.eigenvalues()(top));
  Eigen::VectorXd u = es.eigenvectors().col(top);
  rep.witness.spectrum.assign(std::size_t{1} << d, 0.0);
  Eigen::Index arg = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    rep.witness.spectrum[index[i]] = u(i);
    if (std::abs(u(i)) > std::abs(u(arg))) arg = i;
  }
  rep.witness.description = "top eigenvector (largest coefficient on " + describe_set(index.empty() ? 0 : index[arg]) + ")";
  return rep;
}
}  // namespace detail

// Exact alignment of a finite family under a finite group by enumerating group elements.
inline AlignmentReport brute_force_alignment(const std::vector<HypercubeFunction>& family, const GroupSpec& g) {
  if (family.empty()) throw std::invalid_argument("empty family");
  const int d = family.front().dim();
  if (g.d != d) throw std::invalid_argument("group and function dimensions differ");
  if (!is_finite_group(g)) throw std::invalid_argument("brute force needs a finite group");
  const double rows = group_order(g) * static_cast<double>(family.size());
  if (d > 10 || rows * std::ldexp(1.0, 2 * d) > 4e9)
    throw SizeError("brute-force alignment too large at d = " + std::to_string(d));
  const std::size_t n = std::size_t{1} << d;
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
  Eigen::Index row = 0;
  for (const auto& f : family) {
    if (f.dim() != d) throw std::invalid_argument("family members must share a dimension");
    for_each_element(g, [&](const SignedPermutation& e) {
      auto spec = wht_forward(compose(f, e));
      for (std::size_t s = 0; s < n; ++s) v(row, static_cast<Eigen::Index>(s)) = spec[s];
      ++row;
    });
  }
  Eigen::MatrixXd m = (v.transpose() * v) / static_cast<double>(rows);
  std::vector<Mask> index(n);
  for (std::size_t s = 0; s < n; ++s) index[s] = s;
  auto rep = detail::top_eigen(m, index, d, AlignmentMethod::brute_force);
  double c0 = 0.0;
  for (const auto& f : family) {
    double mean = 0.0;
    for (double x : f.values()) mean += x;
    mean = std::ldexp(mean, -d);
    c0 += mean * mean;
  }
  rep.level0_weight = c0 / static_cast<double>(family.size());
  return rep;
}

inline AlignmentReport brute_force_alignment(const HypercubeFunction& f, const GroupSpec& g) {
  return brute_force_alignment(std::vector<HypercubeFunction>{f}, g);
}

// E_g[<f o g, h>^2] by enumeration; used to re-evaluate witnesses.
inline double alignment_objective(const HypercubeFunction& f, const GroupSpec& g, const HypercubeFunction& h) {
  RunningStats acc;
  for_each_element(g, [&](const SignedPermutation& e) {
    double c = inner(compose(f, e), h);
    acc.add(c * c);
  });
  return acc.mean();
}

// Alignment under permutations fixing T pointwise, using the action on Fourier coefficients.
inline AlignmentReport perm_subgroup_alignment(const FourierSpectrum& spec, Mask t, std::uint64_t seed = 0,
                                               std::size_t mc_samples = 10000) {
  const int d = spec.dim();
  GroupSpec g(GroupKind::perm_fixing, d, t);
  std::vector<Mask> support;
  for (std::size_t s = 0; s < spec.size(); ++s)
    if (spec[s] != 0.0) support.push_back(s);
  AlignmentReport rep;
  rep.level0_weight = spec[0] * spec[0];
  if (support.empty()) {
    rep.method = AlignmentMethod::eigen;
    rep.witness.description = "zero function";
    return rep;
  }
  const bool exact = d - popcount(t) <= 8;

  std::unordered_map<Mask, Eigen::Index> where;
  std::vector<Mask> index;
  std::vector<std::vector<std::pair<Eigen::Index, double>>> rows;
  auto add_element = [&](const SignedPermutation& e) {
    std::vector<std::pair<Eigen::Index, double>> r;
    r.reserve(support.size());
    for (Mask s : support) {
      Mask image = 0;
      for (int i = 0; i < d; ++i)
        if ((s >> i) & 1) image |= Mask{1} << e.perm[i];
      auto [it, inserted] = where.try_emplace(image, static_cast<Eigen::Index>(index.size()));
      if (inserted) index.push_back(image);
      r.emplace_back(it->second, spec[s]);
    }
    rows.push_back(std::move(r));
  };
  if (exact) {
    for_each_element(g, add_element);
  } else {
    Rng rng = make_rng(seed, 0x5eed);
    for (std::size_t i = 0; i < mc_samples; ++i) add_element(sample_element(g, rng));
  }
  const auto k = static_cast<Eigen::Index>(index.size());
  if (k > 8192) throw SizeError("orbit of the support is too large for a dense eigenproblem");
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), k);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (auto [c, val] : rows[r]) v(static_cast<Eigen::Index>(r), c) = val;
  Eigen::MatrixXd m = (v.transpose() * v) / static_cast<double>(rows.size());
  auto method = exact ? AlignmentMethod::eigen : AlignmentMethod::monte_carlo;
  auto out = detail::top_eigen(m, index, d, method);
  out.level0_weight = rep.level0_weight;
  if (!exact) {
    Eigen::VectorXd u(k);
    for (Eigen::Index i = 0; i < k; ++i) u(i) = out.witness.spectrum[index[i]];
    RunningStats acc;
    Eigen::VectorXd proj = v * u;
    for (Eigen::Index r = 0; r < proj.size(); ++r) acc.add(proj(r) * proj(r));
    out.std_error = acc.std_error();
  }
  return out;
}

// 2^{2P} * (weight of sets not inside T) / d^{l+1}
inline double msp_alignment_bound(const FourierSupport& f_minus_alpha, Mask t, int l, int d) {
  if (d < 2 * f_minus_alpha.P) throw std::invalid_argument("alignment bound needs d >= 2P");
  double outside = 0.0;
  for (std::size_t i = 0; i < f_minus_alpha.sets.size(); ++i) {
    Mask s = f_minus_alpha.sets[i];
    if (popcount(s & ~t) <= l)
      throw std::invalid_argument("set " + describe_set(s) + " has at most " + std::to_string(l) +
                                  " coordinates outside T");
    outside += f_minus_alpha.coeff(i) * f_minus_alpha.coeff(i);
  }
  return std::ldexp(outside, 2 * f_minus_alpha.P) / std::pow(static_cast<double>(d), l + 1);
}

struct FunctionFamily {
  int d = 1;
  std::function<HypercubeFunction(Rng&)> sample;
  std::vector<HypercubeFunction> members;  // optional exact enumeration (uniform weights)
};

inline FunctionFamily parity_family(int d, int k) {
  if (k < 0 || k > d) throw std::invalid_argument("parity family needs 0 <= k <= d");
  FunctionFamily fam;
  fam.d = d;
  fam.sample = [d, k](Rng& rng) { return parity(d, random_subset(d, k, rng)); };
  if (binomial(d, k) <= 4096)
    for (Mask s = 0; s < (Mask{1} << d); ++s)
      if (popcount(s) == k) fam.members.push_back(parity(d, s));
  return fam;
}

inline FunctionFamily singleton_family(const HypercubeFunction& f) {
  FunctionFamily fam;
  fam.d = f.dim();
  fam.sample = [f](Rng&) { return f; };
  fam.members = {f};
  return fam;
}

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

// Monte-Carlo E_{f,f',g,g'}[<f o g, f' o g'>^2].
inline Estimate cross_predictability(const FunctionFamily& fam, const GroupSpec& g, std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("cross predictability needs at least 2 samples");
  if (g.d != fam.d) throw std::invalid_argument("group and family dimensions differ");
  Rng rng = make_rng(seed, 0xc905);
  RunningStats acc;
  const bool exact_inner = fam.d <= 14;
  for (std::size_t i = 0; i < n_samples; ++i) {
    HypercubeFunction f = compose(fam.sample(rng), sample_element(g, rng));
    HypercubeFunction h = compose(fam.sample(rng), sample_element(g, rng));
    double c;
    if (exact_inner) {
      c = inner(f, h);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, f.size() - 1);
      double s = 0.0;
      const int nx = 4096;
      for (int j = 0; j < nx; ++j) {
        std::size_t x = pick(rng);
        s += f[x] * h[x];
      }
      c = s / nx;
    }
    acc.add(c * c);
  }
  return {acc.mean(), acc.std_error(), n_samples};
}

inline std::pair<double, double> family_parity_closed_forms(int d, int k) {
  if (k < 0 || k > d) throw std::invalid_argument("need 0 <= k <= d");
  double v = 1.0 / binomial(d, k);
  return {v, v};
}

// E_g[f o g] for a finite signed-permutation group, computed in the Fourier domain.
inline FourierSpectrum invariant_part(const FourierSpectrum& spec, const GroupSpec& g) {
  const int d = spec.dim();
  FourierSpectrum out(d);
  switch (g.kind) {
    case GroupKind::sign:
    case GroupKind::sign_perm:
    case GroupKind::rot:
      out[0] = spec[0];
      return out;
    case GroupKind::perm: {
      auto w = std::vector<double>(d + 1, 0.0);
      for (std::size_t s = 0; s < spec.size(); ++s) w[popcount(s)] += spec[s];
      for (std::size_t s = 0; s < spec.size(); ++s) out[s] = w[popcount(s)] / binomial(d, popcount(s));
      return out;
    }
    case GroupKind::perm_fixing: {
      double orbits = 0.0;
      for_each_element(g, [&](const SignedPermutation& e) {
        orbits += 1.0;
        for (std::size_t s = 0; s < spec.size(); ++s) {
          if (spec[s] == 0.0) continue;
          Mask image = 0;
          for (int i = 0; i < d; ++i)
            if ((s >> i) & 1) image |= Mask{1} << e.perm[i];
          out[image] += spec[s];
        }
      });
      for (std::size_t s = 0; s < out.size(); ++s) out[s] /= orbits;
      return out;
    }
  }
  return out;
}

// Baseline alpha for junk trajectories: constant term for sign-containing groups, the part
// supported inside T for perm_fixing(T), the symmetric part for perm.
inline FourierSpectrum default_baseline(const FourierSpectrum& spec, const GroupSpec& g) {
  if (g.kind != GroupKind::perm_fixing) return invariant_part(spec, g);
  FourierSpectrum out(spec.dim());
  for (std::size_t s = 0; s < spec.size(); ++s)
    if ((s & ~g.fixed) == 0) out[s] = spec[s];
  return out;
}

}  // namespace eqlab
