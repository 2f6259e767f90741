#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "groups.hpp"
#include "stats.hpp"

namespace eqlab {

inline constexpr int kMaxSphereDegree = 8;
inline constexpr int kMaxSphereDim = 12;

using Exponent = std::vector<int>;

class SpherePolynomial {
 public:
  SpherePolynomial() = default;
  explicit SpherePolynomial(int d) : d_(d) {
    if (d < 2) throw std::invalid_argument("sphere dimension must be at least 2");
  }

  static SpherePolynomial constant(int d, double c) {
    SpherePolynomial p(d);
    p.add_term(Exponent(d, 0), c);
    return p;
  }
  static SpherePolynomial coordinate(int d, int i, int power = 1) {
    SpherePolynomial p(d);
    Exponent a(d, 0);
    a.at(i) = power;
    p.add_term(a, 1.0);
    return p;
  }
  // |x|^2
  static SpherePolynomial radius_sq(int d) {
    SpherePolynomial p(d);
    for (int i = 0; i < d; ++i) p += coordinate(d, i, 2);
    return p;
  }

  int dim() const { return d_; }
  const std::map<Exponent, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponent& alpha, double coeff) {
    if (static_cast<int>(alpha.size()) != d_) throw std::invalid_argument("exponent length must equal d");
    for (int a : alpha)
      if (a < 0) throw std::invalid_argument("exponents must be nonnegative");
    if (coeff == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(alpha, coeff);
    if (!inserted) {
      it->second += coeff;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  int degree() const {
    int deg = 0;
    for (const auto& [a, c] : terms_) deg = std::max(deg, total(a));
    return deg;
  }

  SpherePolynomial homogeneous_part(int m) const {
    SpherePolynomial out(d_);
    for (const auto& [a, c] : terms_)
      if (total(a) == m) out.terms_.emplace(a, c);
    return out;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [a, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  double operator()(const std::vector<double>& x) const {
    double acc = 0.0;
    for (const auto& [a, c] : terms_) {
      double t = c;
      for (int i = 0; i < d_; ++i)
        for (int k = 0; k < a[i]; ++k) t *= x[i];
      acc += t;
    }
    return acc;
  }

  SpherePolynomial& operator+=(const SpherePolynomial& o) {
    check(o);
    for (const auto& [a, c] : o.terms_) add_term(a, c);
    return *this;
  }
  SpherePolynomial& operator-=(const SpherePolynomial& o) {
    check(o);
    for (const auto& [a, c] : o.terms_) add_term(a, -c);
    return *this;
  }
  SpherePolynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [a, c] : terms_) c *= s;
    return *this;
  }
  friend SpherePolynomial operator+(SpherePolynomial a, const SpherePolynomial& b) { return a += b; }
  friend SpherePolynomial operator-(SpherePolynomial a, const SpherePolynomial& b) { return a -= b; }
  friend SpherePolynomial operator*(SpherePolynomial a, double s) { return a *= s; }
  friend SpherePolynomial operator*(double s, SpherePolynomial a) { return a *= s; }
  friend SpherePolynomial operator*(const SpherePolynomial& p, const SpherePolynomial& q) {
    p.check(q);
    SpherePolynomial out(p.d_);
    Exponent e(p.d_);
    for (const auto& [a, c] : p.terms_)
      for (const auto& [b, k] : q.terms_) {
        for (int i = 0; i < p.d_; ++i) e[i] = a[i] + b[i];
        out.add_term(e, c * k);
      }
    return out;
  }

  static int total(const Exponent& a) {
    int s = 0;
    for (int v : a) s += v;
    return s;
  }

 private:
  void check(const SpherePolynomial& o) const {
    if (o.d_ != d_) throw std::invalid_argument("polynomial dimension mismatch");
  }

  int d_ = 2;
  std::map<Exponent, double> terms_;
};

inline SpherePolynomial laplacian(const SpherePolynomial& p) {
  SpherePolynomial out(p.dim());
  for (const auto& [a, c] : p.terms()) {
    for (int i = 0; i < p.dim(); ++i) {
      if (a[i] < 2) continue;
      Exponent b = a;
      b[i] -= 2;
      out.add_term(b, c * a[i] * (a[i] - 1));
    }
  }
  return out;
}

// E over the uniform measure on S^{d-1} of prod x_i^{alpha_i}
inline double monomial_moment(const Exponent& alpha, int d) {
  if (d < 2) throw std::invalid_argument("sphere dimension must be at least 2");
  int half = 0;
  double num = 1.0;
  for (int a : alpha) {
    if (a % 2) return 0.0;
    for (int k = a - 1; k > 1; k -= 2) num *= k;
    half += a / 2;
  }
  double den = 1.0;
  for (int j = 0; j < half; ++j) den *= d + 2 * j;
  return num / den;
}

inline double inner_product(const SpherePolynomial& p, const SpherePolynomial& q) {
  if (p.dim() != q.dim()) throw std::invalid_argument("polynomial dimension mismatch");
  const int d = p.dim();
  double acc = 0.0;
  Exponent e(d);
  for (const auto& [a, c] : p.terms())
    for (const auto& [b, k] : q.terms()) {
      for (int i = 0; i < d; ++i) e[i] = a[i] + b[i];
      acc += c * k * monomial_moment(e, d);
    }
  return acc;
}

inline double norm_sq(const SpherePolynomial& p) { return inner_product(p, p); }

// (p o M)(x) = p(Mx)
inline SpherePolynomial compose_linear(const SpherePolynomial& p, const Eigen::MatrixXd& m) {
  const int d = p.dim();
  if (m.rows() != d || m.cols() != d) throw std::invalid_argument("matrix shape must be d x d");
  std::vector<SpherePolynomial> rows;
  for (int i = 0; i < d; ++i) {
    SpherePolynomial r(d);
    for (int j = 0; j < d; ++j) {
      Exponent a(d, 0);
      a[j] = 1;
      r.add_term(a, m(i, j));
    }
    rows.push_back(std::move(r));
  }
  SpherePolynomial out(d);
  for (const auto& [a, c] : p.terms()) {
    SpherePolynomial t = SpherePolynomial::constant(d, c);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < a[i]; ++k) t = t * rows[i];
    out += t;
  }
  return out;
}

inline std::uint64_t dim_harmonic(int d, int l) {
  if (l < 0) throw std::invalid_argument("degree must be nonnegative");
  if (d < 2) throw std::invalid_argument("sphere dimension must be at least 2");
  if (l == 0) return 1;
  return static_cast<std::uint64_t>(2 * l + d - 2) * binomial_u64(l + d - 3, l - 1) / static_cast<std::uint64_t>(l);
}

// ---- homogeneous spaces and the Laplacian as a matrix ----

inline std::vector<Exponent> homogeneous_monomials(int d, int l) {
  std::vector<Exponent> out;
  Exponent a(d, 0);
  auto rec = [&](auto&& self, int i, int left) -> void {
    if (i == d - 1) {
      a[i] = left;
      out.push_back(a);
      return;
    }
    for (int v = left; v >= 0; --v) {
      a[i] = v;
      self(self, i + 1, left - v);
    }
  };
  if (l >= 0) rec(rec, 0, l);
  return out;
}

inline Eigen::MatrixXd laplacian_matrix(int d, int l) {
  auto src = homogeneous_monomials(d, l);
  auto dst = homogeneous_monomials(d, l - 2);
  std::map<Exponent, Eigen::Index> row;
  for (std::size_t i = 0; i < dst.size(); ++i) row[dst[i]] = static_cast<Eigen::Index>(i);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dst.size()), static_cast<Eigen::Index>(src.size()));
  for (std::size_t j = 0; j < src.size(); ++j) {
    SpherePolynomial p(d);
    p.add_term(src[j], 1.0);
    const SpherePolynomial lap = laplacian(p);
    for (const auto& [a, c] : lap.terms()) m(row.at(a), static_cast<Eigen::Index>(j)) = c;
  }
  return m;
}

// dim Hom_l - rank(Laplacian: Hom_l -> Hom_{l-2})
inline std::uint64_t laplacian_kernel_dim(int d, int l) {
  auto n = homogeneous_monomials(d, l).size();
  if (l < 2) return n;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(laplacian_matrix(d, l));
  return n - static_cast<std::uint64_t>(lu.rank());
}

inline std::vector<SpherePolynomial> harmonic_basis(int d, int l) {
  auto mons = homogeneous_monomials(d, l);
  std::vector<SpherePolynomial> out;
  if (l < 2) {
    for (const auto& a : mons) {
      SpherePolynomial p(d);
      p.add_term(a, 1.0);
      out.push_back(std::move(p));
    }
    return out;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(laplacian_matrix(d, l));
  Eigen::MatrixXd ker = lu.kernel();
  for (Eigen::Index c = 0; c < ker.cols(); ++c) {
    SpherePolynomial p(d);
    for (Eigen::Index r = 0; r < ker.rows(); ++r)
      if (std::abs(ker(r, c)) > 1e-14) p.add_term(mons[static_cast<std::size_t>(r)], ker(r, c));
    out.push_back(std::move(p));
  }
  return out;
}

// Projection onto V_{d,l} through the Gram matrix of a kernel basis.
inline SpherePolynomial project_via_gram(const SpherePolynomial& p, int l) {
  auto basis = harmonic_basis(p.dim(), l);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd g(n, n);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i) = inner_product(basis[i], p);
    for (Eigen::Index j = 0; j <= i; ++j) g(i, j) = g(j, i) = inner_product(basis[i], basis[j]);
  }
  Eigen::VectorXd c = g.ldlt().solve(b);
  SpherePolynomial out(p.dim());
  for (Eigen::Index i = 0; i < n; ++i) out += basis[i] * c(i);
  return out;
}

// ---- decomposition ----

struct HarmonicComponent {
  int degree = 0;
  SpherePolynomial h;
  double norm_sq = 0.0;
};

struct HarmonicDecomposition {
  int d = 2;
  std::vector<HarmonicComponent> components;  // one per degree 0..deg(p)

  double norm_at(int l) const {
    for (const auto& c : components)
      if (c.degree == l) return c.norm_sq;
    return 0.0;
  }
};

namespace detail {
inline void check_sphere_caps(const SpherePolynomial& p) {
  if (p.dim() > kMaxSphereDim)
    throw SizeError("sphere dimension " + std::to_string(p.dim()) + " exceeds cap of " + std::to_string(kMaxSphereDim));
  if (p.degree() > kMaxSphereDegree)
    throw SizeError("polynomial degree " + std::to_string(p.degree()) + " exceeds cap of " + std::to_string(kMaxSphereDegree));
}

// Harmonic part of a homogeneous polynomial q of degree k.
inline SpherePolynomial harmonic_part(const SpherePolynomial& q, int k) {
  const int d = q.dim();
  const SpherePolynomial r2 = SpherePolynomial::radius_sq(d);
  SpherePolynomial out = q;
  SpherePolynomial lap = q;
  SpherePolynomial rpow = SpherePolynomial::constant(d, 1.0);
  double a = 1.0;
  for (int i = 0;; ++i) {
    lap = laplacian(lap);
    if (lap.is_zero()) break;
    a = -a / (2.0 * (i + 1) * (d + 2 * k - 4 - 2 * i));
    rpow = rpow * r2;
    out += (rpow * lap) * a;
  }
  return out;
}
}  // namespace detail

inline HarmonicDecomposition harmonic_decompose(const SpherePolynomial& p) {
  detail::check_sphere_caps(p);
  const int d = p.dim();
  const int deg = p.degree();
  HarmonicDecomposition out;
  out.d = d;
  std::vector<SpherePolynomial> h(deg + 1, SpherePolynomial(d));
  for (int m = 0; m <= deg; ++m) {
    SpherePolynomial pm = p.homogeneous_part(m);
    if (pm.is_zero()) continue;
    SpherePolynomial lap = pm;
    for (int j = 0; 2 * j <= m; ++j) {
      if (j > 0) lap = laplacian(lap);
      if (lap.is_zero()) break;
      const int k = m - 2 * j;
      // Laplacian^j (|x|^{2j} h_k) = c h_k
      double c = 1.0;
      for (int i = 1; i <= j; ++i) c *= 2.0 * i * (2 * i + d - 2 + 2 * k);
      h[k] += detail::harmonic_part(lap, k) * (1.0 / c);
    }
  }
  for (int l = 0; l <= deg; ++l) out.components.push_back({l, h[l], norm_sq(h[l])});
  return out;
}

struct RotationAlignment {
  double value = 0.0;
  int level = 0;
};

inline RotationAlignment rotation_alignment(const HarmonicDecomposition& dec) {
  RotationAlignment best;
  for (const auto& c : dec.components) {
    double v = c.norm_sq / static_cast<double>(dim_harmonic(dec.d, c.degree));
    if (v > best.value) best = {v, c.degree};
  }
  return best;
}

inline RotationAlignment rotation_alignment(const SpherePolynomial& p) { return rotation_alignment(harmonic_decompose(p)); }

inline bool weak_learnable_sphere_verdict(const SpherePolynomial& p, double c) {
  auto dec = harmonic_decompose(p);
  double low = 0.0;
  for (const auto& comp : dec.components)
    if (comp.degree <= c) low += comp.norm_sq;
  return low >= std::pow(static_cast<double>(p.dim()), -c);
}

inline std::vector<double> sample_sphere(int d, Rng& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> x(d);
  double r = 0.0;
  do {
    r = 0.0;
    for (double& v : x) {
      v = n01(rng);
      r += v * v;
    }
  } while (r == 0.0);
  r = std::sqrt(r);
  for (double& v : x) v /= r;
  return x;
}

struct MonteCarloAlignment {
  double value = 0.0;
  double std_error = 0.0;
  int level = 0;
  std::size_t rotations = 0;
};

// E_{g ~ Haar}[<p o g, h>^2] with h the normalized top-level component.
inline MonteCarloAlignment rotation_alignment_monte_carlo(const SpherePolynomial& p, std::size_t n_rotations, std::uint64_t seed) {
  auto dec = harmonic_decompose(p);
  auto top = rotation_alignment(dec);
  MonteCarloAlignment out;
  out.level = top.level;
  out.rotations = n_rotations;
  const auto& comp = dec.components.at(static_cast<std::size_t>(top.level));
  if (comp.norm_sq == 0.0) return out;
  SpherePolynomial h = comp.h * (1.0 / std::sqrt(comp.norm_sq));
  RunningStats acc;
  Rng rng = make_rng(seed, 0x50d);
  for (std::size_t i = 0; i < n_rotations; ++i) {
    double c = inner_product(compose_linear(p, haar_rotation(p.dim(), rng)), h);
    acc.add(c * c);
  }
  out.value = acc.mean();
  out.std_error = acc.std_error();
  return out;
}

}  // namespace eqlab
