#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "common.hpp"

namespace eqlab {

struct FourierSupport {
  int P = 0;
  std::vector<Mask> sets;
  std::vector<double> coeffs;  // empty means all coefficients are 1

  FourierSupport() = default;
  FourierSupport(int p, std::vector<Mask> s, std::vector<double> c = {}) : P(p), sets(std::move(s)), coeffs(std::move(c)) {
    validate();
  }

  void validate() const {
    if (P < 0 || P > 63) throw std::invalid_argument("support needs 0 <= P <= 63");
    if (!coeffs.empty() && coeffs.size() != sets.size())
      throw std::invalid_argument("support has " + std::to_string(sets.size()) + " sets but " +
                                  std::to_string(coeffs.size()) + " coefficients");
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (sets[i] & ~full_mask(P)) throw std::invalid_argument("support set outside [P]");
      if (!coeffs.empty() && coeffs[i] == 0.0) throw std::invalid_argument("support coefficients must be nonzero");
      for (std::size_t j = 0; j < i; ++j)
        if (sets[i] == sets[j]) throw std::invalid_argument("support lists a set twice");
    }
  }

  double coeff(std::size_t i) const { return coeffs.empty() ? 1.0 : coeffs[i]; }
};

struct MspReport {
  int leap = 1;
  bool satisfies = false;
  std::vector<Mask> ordering;
  Mask closure = 0;
  std::vector<Mask> violating_sets;
  int minimal_leap = 1;
};

namespace detail {
struct GreedyResult {
  std::vector<Mask> ordering;
  Mask covered = 0;
  std::vector<Mask> rest;
};

inline GreedyResult msp_greedy(const FourierSupport& support, int l) {
  std::vector<Mask> pending = support.sets;
  std::sort(pending.begin(), pending.end());
  GreedyResult r;
  bool progress = true;
  while (progress) {
    progress = false;
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      if (popcount(*it & ~r.covered) <= l) {
        r.ordering.push_back(*it);
        r.covered |= *it;
        pending.erase(it);
        progress = true;
        break;
      }
    }
  }
  r.rest = std::move(pending);
  return r;
}
}  // namespace detail

inline int minimal_leap(const FourierSupport& support) {
  if (support.sets.empty()) throw std::invalid_argument("minimal_leap needs a nonempty support");
  int max_size = 1;
  for (Mask s : support.sets) max_size = std::max(max_size, popcount(s));
  for (int l = 1; l < max_size; ++l)
    if (detail::msp_greedy(support, l).rest.empty()) return l;
  return max_size;
}

inline MspReport is_l_msp(const FourierSupport& support, int l) {
  if (l < 1) throw std::invalid_argument("leap must be at least 1");
  support.validate();
  auto g = detail::msp_greedy(support, l);
  MspReport rep;
  rep.leap = l;
  rep.satisfies = g.rest.empty();
  rep.ordering = std::move(g.ordering);
  rep.closure = g.covered;
  rep.violating_sets = std::move(g.rest);
  rep.minimal_leap = support.sets.empty() ? 1 : minimal_leap(support);
  return rep;
}

// Reference decision by trying every ordering of the sets.
inline bool is_l_msp_exhaustive(const FourierSupport& support, int l) {
  std::vector<Mask> sets = support.sets;
  std::sort(sets.begin(), sets.end());
  do {
    Mask covered = 0;
    bool ok = true;
    for (Mask s : sets) {
      if (popcount(s & ~covered) > l) {
        ok = false;
        break;
      }
      covered |= s;
    }
    if (ok) return true;
  } while (std::next_permutation(sets.begin(), sets.end()));
  return false;
}

struct NecessityBound {
  double probability_bound = 0.0;  // analytic bound, clamped to [0, 1]
  double direct_bound = 0.0;       // before folding constants, clamped to [0, 1]
  double eps0 = 0.0;
  double c_h = 0.0;                // min nonzero |coefficient|^2
  double C_h = 0.0;                // 2^{2P} * sum of squared coefficients
  double C = 0.0;                  // folded constant
  double alignment_bound = 0.0;    // 2^{2P} * sum over sets outside the closure / d^{l+1}
  Mask closure = 0;
};

inline NecessityBound necessity_bound(const FourierSupport& h, int d, int l, double eta, double R, double tau, int k) {
  if (h.sets.empty()) throw std::invalid_argument("necessity bound needs a nonempty support");
  if (d < 2 * h.P) throw std::invalid_argument("necessity bound needs d >= 2P");
  if (eta < 0 || R < 0 || tau < 0 || k < 0) throw std::invalid_argument("eta, R, tau, k must be nonnegative");
  MspReport rep = is_l_msp(h, l);
  if (rep.satisfies) throw std::domain_error("support satisfies the " + std::to_string(l) + "-MSP; the bound does not apply");

  NecessityBound b;
  b.closure = rep.closure;
  double total = 0.0, outside = 0.0;
  b.c_h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < h.sets.size(); ++i) {
    double c2 = h.coeff(i) * h.coeff(i);
    total += c2;
    b.c_h = std::min(b.c_h, c2);
    if (h.sets[i] & ~rep.closure) outside += c2;
  }
  const double scale = std::ldexp(1.0, 2 * h.P);
  const double dl = std::pow(static_cast<double>(d), l + 1);
  b.C_h = scale * total;
  b.eps0 = b.c_h / 2.0;
  b.alignment_bound = scale * outside / dl;
  b.C = std::max(std::sqrt(b.C_h), 2.0 * b.C_h / b.c_h);

  auto clamp01 = [](double v) { return std::isnan(v) ? 1.0 : std::clamp(v, 0.0, 1.0); };
  auto drift = [&](double c) {
    if (k == 0 || eta == 0 || R == 0 || c == 0) return 0.0;
    if (tau == 0) return std::numeric_limits<double>::infinity();
    return eta * R / (2.0 * tau) * std::sqrt(k * c);
  };
  b.direct_bound = clamp01(drift(b.alignment_bound) + b.alignment_bound / b.eps0);
  double first = (k == 0 || eta == 0 || R == 0) ? 0.0
                 : tau == 0                      ? std::numeric_limits<double>::infinity()
                                                 : b.C * eta * R / (2.0 * tau) * std::sqrt(k / dl);
  b.probability_bound = clamp01(first + b.C / dl);
  return b;
}

}  // namespace eqlab
