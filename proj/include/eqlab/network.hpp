#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "boolean_fourier.hpp"
#include "common.hpp"

namespace eqlab {

enum class ActivationKind { bump, monomial, relu, tanh };

struct Activation {
  ActivationKind kind = ActivationKind::tanh;
  int degree = 1;  // monomial only

  static Activation bump() { return {ActivationKind::bump, 0}; }
  static Activation monomial(int l) {
    if (l < 0) throw std::invalid_argument("monomial degree must be nonnegative");
    return {ActivationKind::monomial, l};
  }
  static Activation linear() { return monomial(1); }
  static Activation relu() { return {ActivationKind::relu, 0}; }
  static Activation tanh() { return {ActivationKind::tanh, 0}; }

  static Activation parse(const std::string& s) {
    if (s == "bump") return bump();
    if (s == "relu") return relu();
    if (s == "tanh") return tanh();
    if (s == "linear") return linear();
    if (s.rfind("monomial", 0) == 0) {
      auto colon = s.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("monomial activation needs a degree, e.g. monomial:3");
      return monomial(std::stoi(s.substr(colon + 1)));
    }
    throw std::invalid_argument("unknown activation '" + s + "'");
  }

  std::string name() const {
    switch (kind) {
      case ActivationKind::bump: return "bump";
      case ActivationKind::monomial: return "monomial:" + std::to_string(degree);
      case ActivationKind::relu: return "relu";
      case ActivationKind::tanh: return "tanh";
    }
    return "?";
  }

  double operator()(double z) const {
    switch (kind) {
      case ActivationKind::bump: return (z >= -0.5 && z <= 1.5) ? 1.0 : 0.0;
      case ActivationKind::monomial: return std::pow(z, degree);
      case ActivationKind::relu: return z > 0 ? z : 0.0;
      case ActivationKind::tanh: return std::tanh(z);
    }
    return 0.0;
  }

  // Almost-everywhere derivative; the bump is piecewise constant.
  double derivative(double z) const {
    switch (kind) {
      case ActivationKind::bump: return 0.0;
      case ActivationKind::monomial: return degree == 0 ? 0.0 : degree * std::pow(z, degree - 1);
      case ActivationKind::relu: return z > 0 ? 1.0 : 0.0;
      case ActivationKind::tanh: {
        double t = std::tanh(z);
        return 1.0 - t * t;
      }
    }
    return 0.0;
  }
};

// f(x) = a^T sigma(W x); parameters flatten as [W row-major, a].
struct TwoLayerNet {
  Eigen::MatrixXd W;
  Eigen::VectorXd a;
  Activation act;

  TwoLayerNet() = default;
  TwoLayerNet(Eigen::MatrixXd w, Eigen::VectorXd out, Activation s) : W(std::move(w)), a(std::move(out)), act(s) {
    if (W.rows() != a.size()) throw std::invalid_argument("W has " + std::to_string(W.rows()) + " rows but a has " +
                                                         std::to_string(a.size()) + " entries");
  }

  int width() const { return static_cast<int>(W.rows()); }
  int dim() const { return static_cast<int>(W.cols()); }
  Eigen::Index num_params() const { return W.size() + a.size(); }

  Eigen::VectorXd params() const {
    Eigen::VectorXd theta(num_params());
    for (int i = 0; i < width(); ++i)
      for (int j = 0; j < dim(); ++j) theta(i * dim() + j) = W(i, j);
    theta.tail(a.size()) = a;
    return theta;
  }

  void set_params(const Eigen::VectorXd& theta) {
    if (theta.size() != num_params()) throw std::invalid_argument("parameter vector has the wrong length");
    for (int i = 0; i < width(); ++i)
      for (int j = 0; j < dim(); ++j) W(i, j) = theta(i * dim() + j);
    a = theta.tail(a.size());
  }

  template <typename Vec>
  double operator()(const Vec& x) const {
    double out = 0.0;
    for (int i = 0; i < width(); ++i) {
      double z = 0.0;
      for (int j = 0; j < dim(); ++j) z += W(i, j) * x[j];
      out += a(i) * act(z);
    }
    return out;
  }

  // Gradient of f(x; theta) with respect to theta.
  template <typename Vec>
  Eigen::VectorXd gradient(const Vec& x) const {
    Eigen::VectorXd g(num_params());
    const int d = dim();
    for (int i = 0; i < width(); ++i) {
      double z = 0.0;
      for (int j = 0; j < d; ++j) z += W(i, j) * x[j];
      double u = a(i) * act.derivative(z);
      for (int j = 0; j < d; ++j) g(i * d + j) = u * x[j];
      g(W.size() + i) = act(z);
    }
    return g;
  }
};

enum class InitKind { gaussian, three_point, rademacher, zero };

struct InitSpec {
  InitKind kind = InitKind::gaussian;
  double param = 1.0;  // sigma for gaussian, p for three_point

  static InitSpec gaussian(double sigma) { return {InitKind::gaussian, sigma}; }
  static InitSpec three_point(double p) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("three_point probability must lie in [0, 1]");
    return {InitKind::three_point, p};
  }
  static InitSpec rademacher() { return {InitKind::rademacher, 1.0}; }
  static InitSpec zero() { return {InitKind::zero, 0.0}; }

  double draw(Rng& rng) const {
    switch (kind) {
      case InitKind::gaussian: return std::normal_distribution<double>(0.0, param)(rng);
      case InitKind::three_point: {
        double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        if (u >= param) return 0.0;
        return u < param / 2 ? 1.0 : -1.0;
      }
      case InitKind::rademacher: return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
      case InitKind::zero: return 0.0;
    }
    return 0.0;
  }
};

inline TwoLayerNet init_net(int m, int d, Activation act, const InitSpec& w_init, const InitSpec& a_init, Rng& rng) {
  if (m < 0 || d < 1) throw std::invalid_argument("network needs m >= 0 and d >= 1");
  Eigen::MatrixXd w(m, d);
  Eigen::VectorXd a(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) w(i, j) = w_init.draw(rng);
  for (int i = 0; i < m; ++i) a(i) = a_init.draw(rng);
  return TwoLayerNet(std::move(w), std::move(a), act);
}

// Finite weighted point set with labels; rows of X are inputs.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  Eigen::VectorXd weight;

  Eigen::Index size() const { return X.rows(); }
  int dim() const { return static_cast<int>(X.cols()); }
};

inline Dataset hypercube_dataset(const HypercubeFunction& f) {
  const int d = f.dim();
  if (d > 16) throw SizeError("exact hypercube expectations are limited to d <= 16");
  const auto n = static_cast<Eigen::Index>(f.size());
  Dataset ds;
  ds.X.resize(n, d);
  ds.y.resize(n);
  ds.weight = Eigen::VectorXd::Constant(n, std::ldexp(1.0, -d));
  for (Eigen::Index x = 0; x < n; ++x) {
    for (int i = 0; i < d; ++i) ds.X(x, i) = coord(static_cast<std::size_t>(x), i);
    ds.y(x) = f[static_cast<std::size_t>(x)];
  }
  return ds;
}

inline Dataset with_labels(Dataset ds, const Eigen::VectorXd& y) {
  if (y.size() != ds.size()) throw std::invalid_argument("label count mismatch");
  ds.y = y;
  return ds;
}

// Points x -> M x, labels unchanged.
inline Dataset transform_points(const Dataset& ds, const Eigen::MatrixXd& m) {
  Dataset out = ds;
  out.X = ds.X * m.transpose();
  return out;
}

// Labels rounded to multiples of 2^{-bits}.
inline Dataset quantize_labels(Dataset ds, int bits) {
  if (bits < 0) throw std::invalid_argument("quantization bits must be nonnegative");
  const double scale = std::ldexp(1.0, bits);
  for (Eigen::Index i = 0; i < ds.y.size(); ++i) ds.y(i) = std::round(ds.y(i) * scale) / scale;
  return ds;
}

inline double population_loss(const TwoLayerNet& net, const Dataset& ds) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    double r = ds.y(i) - net(ds.X.row(i));
    acc += ds.weight(i) * r * r;
  }
  return acc;
}

}  // namespace eqlab
