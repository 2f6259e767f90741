#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "boolean_fourier.hpp"
#include "common.hpp"

namespace eqlab {

enum class GroupKind { perm, sign, sign_perm, perm_fixing, rot };

inline std::string to_string(GroupKind k) {
  switch (k) {
    case GroupKind::perm: return "perm";
    case GroupKind::sign: return "sign";
    case GroupKind::sign_perm: return "sign_perm";
    case GroupKind::perm_fixing: return "perm_fixing";
    case GroupKind::rot: return "rot";
  }
  return "?";
}

inline GroupKind group_kind_from_string(const std::string& s) {
  if (s == "perm") return GroupKind::perm;
  if (s == "sign") return GroupKind::sign;
  if (s == "sign_perm") return GroupKind::sign_perm;
  if (s == "perm_fixing") return GroupKind::perm_fixing;
  if (s == "rot") return GroupKind::rot;
  throw std::invalid_argument("unknown group '" + s + "'");
}

struct GroupSpec {
  GroupKind kind = GroupKind::sign_perm;
  int d = 1;
  Mask fixed = 0;  // only for perm_fixing

  GroupSpec() = default;
  GroupSpec(GroupKind k, int dim, Mask t = 0) : kind(k), d(dim), fixed(t) {
    if (dim < 1) throw std::invalid_argument("group dimension must be positive");
    if (t & ~full_mask(dim)) throw std::invalid_argument("fixed set T must lie inside [d]");
    if (k != GroupKind::perm_fixing && t != 0) throw std::invalid_argument("fixed set only applies to perm_fixing");
  }
};

// g(x)_i = sign[i] * x_{perm[i]}
struct SignedPermutation {
  std::vector<int> perm;
  std::vector<int> sign;

  static SignedPermutation identity(int d) {
    SignedPermutation g;
    g.perm.resize(d);
    std::iota(g.perm.begin(), g.perm.end(), 0);
    g.sign.assign(d, 1);
    return g;
  }

  int dim() const { return static_cast<int>(perm.size()); }

  std::size_t apply(std::size_t point) const {
    std::size_t out = 0;
    for (int i = 0; i < dim(); ++i) {
      std::size_t bit = (point >> perm[i]) & 1u;
      if (sign[i] < 0) bit ^= 1u;
      out |= bit << i;
    }
    return out;
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> out(x.size());
    for (int i = 0; i < dim(); ++i) out[i] = sign[i] * x[perm[i]];
    return out;
  }

  Eigen::MatrixXd matrix() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) m(i, perm[i]) = sign[i];
    return m;
  }
};

// (f o g)(x) = f(g(x))
inline HypercubeFunction compose(const HypercubeFunction& f, const SignedPermutation& g) {
  if (g.dim() != f.dim()) throw std::invalid_argument("group element dimension mismatch");
  HypercubeFunction out(f.dim());
  for (std::size_t x = 0; x < f.size(); ++x) out[x] = f[g.apply(x)];
  return out;
}

inline bool is_finite_group(const GroupSpec& g) { return g.kind != GroupKind::rot; }

inline double group_order(const GroupSpec& g) {
  auto fact = [](int n) {
    double r = 1;
    for (int i = 2; i <= n; ++i) r *= i;
    return r;
  };
  switch (g.kind) {
    case GroupKind::perm: return fact(g.d);
    case GroupKind::sign: return std::ldexp(1.0, g.d);
    case GroupKind::sign_perm: return fact(g.d) * std::ldexp(1.0, g.d);
    case GroupKind::perm_fixing: return fact(g.d - popcount(g.fixed));
    case GroupKind::rot: break;
  }
  throw std::invalid_argument("rotation group is infinite");
}

namespace detail {
inline std::vector<int> free_coords(const GroupSpec& g) {
  std::vector<int> out;
  for (int i = 0; i < g.d; ++i)
    if (g.kind != GroupKind::perm_fixing || !((g.fixed >> i) & 1)) out.push_back(i);
  return out;
}
}  // namespace detail

// Calls visit(g) for every element of a finite signed-permutation group.
template <typename Visit>
void for_each_element(const GroupSpec& g, Visit&& visit, double max_elements = 5e6) {
  if (!is_finite_group(g)) throw std::invalid_argument("cannot enumerate the rotation group");
  if (group_order(g) > max_elements)
    throw SizeError("group " + to_string(g.kind) + " at d = " + std::to_string(g.d) + " has too many elements to enumerate");
  const bool perms = g.kind != GroupKind::sign;
  const bool signs = g.kind == GroupKind::sign || g.kind == GroupKind::sign_perm;
  std::vector<int> free = detail::free_coords(g);
  std::vector<int> order = free;
  SignedPermutation e = SignedPermutation::identity(g.d);
  do {
    for (std::size_t i = 0; i < free.size(); ++i) e.perm[free[i]] = order[i];
    const std::size_t nsign = signs ? (std::size_t{1} << g.d) : 1;
    for (std::size_t s = 0; s < nsign; ++s) {
      for (int i = 0; i < g.d; ++i) e.sign[i] = (s >> i) & 1u ? -1 : 1;
      visit(static_cast<const SignedPermutation&>(e));
    }
  } while (perms && std::next_permutation(order.begin(), order.end()));
}

inline SignedPermutation sample_element(const GroupSpec& g, Rng& rng) {
  if (!is_finite_group(g)) throw std::invalid_argument("rotation elements are not signed permutations; use haar_rotation");
  SignedPermutation e = SignedPermutation::identity(g.d);
  if (g.kind != GroupKind::sign) {
    std::vector<int> free = detail::free_coords(g);
    std::vector<int> order = free;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < free.size(); ++i) e.perm[free[i]] = order[i];
  }
  if (g.kind == GroupKind::sign || g.kind == GroupKind::sign_perm) {
    std::bernoulli_distribution coin(0.5);
    for (int i = 0; i < g.d; ++i) e.sign[i] = coin(rng) ? -1 : 1;
  }
  return e;
}

// Haar-distributed element of SO(d): QR of a Gaussian matrix with sign fix.
inline Eigen::MatrixXd haar_rotation(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n01(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline bool is_orthogonal(const Eigen::MatrixXd& m, double tol = 1e-10) {
  if (m.rows() != m.cols()) return false;
  return ((m.transpose() * m) - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace eqlab
