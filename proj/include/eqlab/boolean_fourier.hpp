#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace eqlab {

inline constexpr int kMaxHypercubeDim = 20;

inline void check_hypercube_dim(int d) {
  if (d < 1) throw std::invalid_argument("hypercube dimension must be positive, got " + std::to_string(d));
  if (d > kMaxHypercubeDim)
    throw SizeError("hypercube dimension " + std::to_string(d) + " exceeds dense cap of " +
                    std::to_string(kMaxHypercubeDim));
}

// Point codes: bit i clear means x_i = +1, bit i set means x_i = -1.
inline int coord(std::size_t point, int i) { return (point >> i) & 1u ? -1 : 1; }

inline double chi(Mask s, std::size_t point) { return popcount(s & point) & 1 ? -1.0 : 1.0; }

inline std::size_t point_code(std::span<const int> x) {
  std::size_t code = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == -1)
      code |= std::size_t{1} << i;
    else if (x[i] != 1)
      throw std::invalid_argument("hypercube coordinates must be +1 or -1");
  }
  return code;
}

inline std::vector<int> point_coords(std::size_t point, int d) {
  std::vector<int> x(d);
  for (int i = 0; i < d; ++i) x[i] = coord(point, i);
  return x;
}

class HypercubeFunction {
 public:
  HypercubeFunction() = default;
  explicit HypercubeFunction(int d) : d_(d) {
    check_hypercube_dim(d);
    values_.assign(std::size_t{1} << d, 0.0);
  }
  HypercubeFunction(int d, std::vector<double> values) : d_(d), values_(std::move(values)) {
    check_hypercube_dim(d);
    if (values_.size() != (std::size_t{1} << d))
      throw std::invalid_argument("truth table length " + std::to_string(values_.size()) + " != 2^" +
                                  std::to_string(d));
  }

  int dim() const { return d_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t point) const { return values_[point]; }
  double& operator[](std::size_t point) { return values_[point]; }
  double operator()(std::span<const int> x) const { return values_[point_code(x)]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  int d_ = 0;
  std::vector<double> values_;
};

class FourierSpectrum {
 public:
  FourierSpectrum() = default;
  explicit FourierSpectrum(int d) : d_(d) {
    check_hypercube_dim(d);
    coeffs_.assign(std::size_t{1} << d, 0.0);
  }
  FourierSpectrum(int d, std::vector<double> coeffs) : d_(d), coeffs_(std::move(coeffs)) {
    check_hypercube_dim(d);
    if (coeffs_.size() != (std::size_t{1} << d))
      throw std::invalid_argument("spectrum length " + std::to_string(coeffs_.size()) + " != 2^" +
                                  std::to_string(d));
  }

  int dim() const { return d_; }
  std::size_t size() const { return coeffs_.size(); }
  double operator[](Mask s) const { return coeffs_[s]; }
  double& operator[](Mask s) { return coeffs_[s]; }
  const std::vector<double>& coeffs() const { return coeffs_; }

 private:
  int d_ = 0;
  std::vector<double> coeffs_;
};

namespace detail {
inline void butterfly(std::vector<double>& v) {
  const std::size_t n = v.size();
  for (std::size_t h = 1; h < n; h <<= 1)
    for (std::size_t i = 0; i < n; i += h << 1)
      for (std::size_t j = i; j < i + h; ++j) {
        double a = v[j], b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
}
}  // namespace detail

inline FourierSpectrum wht_forward(const HypercubeFunction& f) {
  std::vector<double> v = f.values();
  detail::butterfly(v);
  const double scale = std::ldexp(1.0, -f.dim());
  for (double& c : v) c *= scale;
  return FourierSpectrum(f.dim(), std::move(v));
}

inline HypercubeFunction wht_inverse(const FourierSpectrum& spec) {
  std::vector<double> v = spec.coeffs();
  detail::butterfly(v);
  return HypercubeFunction(spec.dim(), std::move(v));
}

// O(4^d) reference transform.
inline FourierSpectrum wht_forward_naive(const HypercubeFunction& f) {
  FourierSpectrum out(f.dim());
  const double scale = std::ldexp(1.0, -f.dim());
  for (std::size_t s = 0; s < f.size(); ++s) {
    double acc = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) acc += f[x] * chi(s, x);
    out[s] = acc * scale;
  }
  return out;
}

inline double l2_norm_sq(const HypercubeFunction& f) {
  double acc = 0.0;
  for (double v : f.values()) acc += v * v;
  return std::ldexp(acc, -f.dim());
}

inline double inner(const HypercubeFunction& f, const HypercubeFunction& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("dimension mismatch in inner product");
  double acc = 0.0;
  for (std::size_t x = 0; x < f.size(); ++x) acc += f[x] * g[x];
  return std::ldexp(acc, -f.dim());
}

inline std::vector<double> level_weights(const FourierSpectrum& spec) {
  std::vector<double> w(spec.dim() + 1, 0.0);
  for (std::size_t s = 0; s < spec.size(); ++s) w[popcount(s)] += spec[s] * spec[s];
  return w;
}

inline double evaluate(const FourierSpectrum& spec, std::size_t point) {
  double acc = 0.0;
  for (std::size_t s = 0; s < spec.size(); ++s) acc += spec[s] * chi(s, point);
  return acc;
}

inline HypercubeFunction tabulate(int d, const std::function<double(std::size_t)>& fn) {
  HypercubeFunction f(d);
  for (std::size_t x = 0; x < f.size(); ++x) f[x] = fn(x);
  return f;
}

inline HypercubeFunction operator-(const HypercubeFunction& f, const HypercubeFunction& g) {
  if (f.dim() != g.dim()) throw std::invalid_argument("dimension mismatch");
  HypercubeFunction out = f;
  for (std::size_t x = 0; x < f.size(); ++x) out[x] -= g[x];
  return out;
}

// ---- builtins ----

inline HypercubeFunction parity(int d, Mask s) {
  check_hypercube_dim(d);
  if (s & ~full_mask(d)) throw std::invalid_argument("parity set outside [d]");
  return tabulate(d, [s](std::size_t x) { return chi(s, x); });
}

inline HypercubeFunction full_parity(int d) { return parity(d, full_mask(d)); }

inline HypercubeFunction half_parity(int d) { return parity(d, full_mask(d / 2)); }

// (sum_i x_i) mod 8 in {0,...,7}
inline int mod8_value(std::size_t point, int d) {
  int sum = d - 2 * popcount(point);
  return ((sum % 8) + 8) % 8;
}

inline HypercubeFunction mod8(int d) {
  check_hypercube_dim(d);
  return tabulate(d, [d](std::size_t x) { return static_cast<double>(mod8_value(x, d)); });
}

// 0 if #{j : x_j = +1} is even, +1 if it is 1 mod 4, -1 if it is 3 mod 4.
inline HypercubeFunction parity_mod4(int d) {
  check_hypercube_dim(d);
  return tabulate(d, [d](std::size_t x) {
    int plus = d - popcount(x);
    switch (plus % 4) {
      case 1: return 1.0;
      case 3: return -1.0;
      default: return 0.0;
    }
  });
}

// Embeds h on {+-1}^P into coordinates `embedding` of {+-1}^d.
inline HypercubeFunction junta(const HypercubeFunction& h, int d, std::vector<int> embedding = {}) {
  const int p = h.dim();
  check_hypercube_dim(d);
  if (p > d) throw std::invalid_argument("junta has P = " + std::to_string(p) + " > d = " + std::to_string(d));
  if (embedding.empty())
    for (int i = 0; i < p; ++i) embedding.push_back(i);
  if (static_cast<int>(embedding.size()) != p) throw std::invalid_argument("junta embedding must list P coordinates");
  Mask seen = 0;
  for (int c : embedding) {
    if (c < 0 || c >= d) throw std::invalid_argument("junta embedding coordinate out of range");
    if (seen & (Mask{1} << c)) throw std::invalid_argument("junta embedding repeats a coordinate");
    seen |= Mask{1} << c;
  }
  return tabulate(d, [&](std::size_t x) {
    std::size_t local = 0;
    for (int i = 0; i < p; ++i)
      if ((x >> embedding[i]) & 1u) local |= std::size_t{1} << i;
    return h[local];
  });
}

}  // namespace eqlab
