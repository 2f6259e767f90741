#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "boolean_fourier.hpp"
#include "msp.hpp"
#include "sphere_harmonics.hpp"

namespace eqlab {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kSchema = 1;

// Malformed input, with a JSON-pointer-like location.
class SpecError : public std::invalid_argument {
 public:
  SpecError(const std::string& path, const std::string& reason)
      : std::invalid_argument(path + ": " + reason), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

namespace detail {
inline const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SpecError(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SpecError(path, "missing field '" + key + "'");
  return *it;
}

inline int need_int(const json& j, const std::string& key, const std::string& path) {
  const json& v = need(j, key, path);
  if (!v.is_number_integer()) throw SpecError(path + "." + key, "expected an integer");
  return v.get<int>();
}

inline double need_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw SpecError(path, "expected a number");
  return v.get<double>();
}

// 1-indexed coordinate list -> mask
inline Mask parse_set(const json& v, int d, const std::string& path) {
  if (!v.is_array()) throw SpecError(path, "expected an array of 1-indexed coordinates");
  Mask m = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!v[i].is_number_integer()) throw SpecError(p, "expected an integer coordinate");
    int c = v[i].get<int>();
    if (c < 1 || c > d) throw SpecError(p, "coordinate " + std::to_string(c) + " outside [1, " + std::to_string(d) + "]");
    if (m & (Mask{1} << (c - 1))) throw SpecError(p, "coordinate " + std::to_string(c) + " repeated");
    m |= Mask{1} << (c - 1);
  }
  return m;
}

inline int checked_dim(const json& j, const std::string& path) {
  int d = need_int(j, "d", path);
  try {
    check_hypercube_dim(d);
  } catch (const std::exception& e) {
    throw SpecError(path + ".d", e.what());
  }
  return d;
}
}  // namespace detail

inline HypercubeFunction parse_function_spec(const json& j, const std::string& path = "$") {
  const json& type = detail::need(j, "type", path);
  if (!type.is_string()) throw SpecError(path + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "table") {
    int d = detail::checked_dim(j, path);
    const json& vals = detail::need(j, "values", path);
    if (!vals.is_array() || vals.size() != (std::size_t{1} << d))
      throw SpecError(path + ".values", "expected an array of 2^" + std::to_string(d) + " numbers");
    std::vector<double> v(vals.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = detail::need_number(vals[i], path + ".values[" + std::to_string(i) + "]");
    return HypercubeFunction(d, std::move(v));
  }
  if (t == "spectrum") {
    int d = detail::checked_dim(j, path);
    const json& cs = detail::need(j, "coeffs", path);
    if (!cs.is_array()) throw SpecError(path + ".coeffs", "expected an array");
    FourierSpectrum spec(d);
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string p = path + ".coeffs[" + std::to_string(i) + "]";
      Mask s = detail::parse_set(detail::need(cs[i], "set", p), d, p + ".set");
      spec[s] += detail::need_number(detail::need(cs[i], "value", p), p + ".value");
    }
    return wht_inverse(spec);
  }
  if (t == "builtin") {
    const json& name = detail::need(j, "name", path);
    if (!name.is_string()) throw SpecError(path + ".name", "expected a string");
    const std::string n = name.get<std::string>();
    int d = detail::checked_dim(j, path);
    if (n == "parity") return parity(d, detail::parse_set(detail::need(j, "set", path), d, path + ".set"));
    if (n == "full_parity") return full_parity(d);
    if (n == "half_parity") return half_parity(d);
    if (n == "mod8") return mod8(d);
    if (n == "parity_mod4") return parity_mod4(d);
    if (n == "junta") {
      HypercubeFunction h = parse_function_spec(detail::need(j, "h", path), path + ".h");
      std::vector<int> emb;
      if (j.contains("embedding")) {
        Mask seen = detail::parse_set(j["embedding"], d, path + ".embedding");
        (void)seen;
        for (const auto& c : j["embedding"]) emb.push_back(c.get<int>() - 1);
      }
      try {
        return junta(h, d, emb);
      } catch (const std::invalid_argument& e) {
        throw SpecError(path, e.what());
      }
    }
    throw SpecError(path + ".name", "unknown builtin '" + n + "'");
  }
  throw SpecError(path + ".type", "unknown function type '" + t + "'");
}

inline SpherePolynomial parse_polynomial_spec(const json& j, const std::string& path = "$") {
  int d = detail::need_int(j, "d", path);
  if (d < 2) throw SpecError(path + ".d", "sphere dimension must be at least 2");
  if (d > kMaxSphereDim) throw SpecError(path + ".d", "sphere dimension exceeds cap of " + std::to_string(kMaxSphereDim));
  const json& terms = detail::need(j, "terms", path);
  if (!terms.is_array()) throw SpecError(path + ".terms", "expected an array");
  SpherePolynomial p(d);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = path + ".terms[" + std::to_string(i) + "]";
    const json& alpha = detail::need(terms[i], "alpha", tp);
    if (!alpha.is_array() || static_cast<int>(alpha.size()) != d)
      throw SpecError(tp + ".alpha", "expected " + std::to_string(d) + " exponents");
    Exponent a(d);
    for (int k = 0; k < d; ++k) {
      if (!alpha[k].is_number_integer() || alpha[k].get<int>() < 0)
        throw SpecError(tp + ".alpha[" + std::to_string(k) + "]", "expected a nonnegative integer");
      a[k] = alpha[k].get<int>();
    }
    p.add_term(a, detail::need_number(detail::need(terms[i], "coeff", tp), tp + ".coeff"));
  }
  if (p.degree() > kMaxSphereDegree) throw SpecError(path + ".terms", "degree exceeds cap of " + std::to_string(kMaxSphereDegree));
  return p;
}

// [[1,2],[1,2,3]] with optional parallel coefficient list; P defaults to the largest coordinate.
inline FourierSupport parse_support(const json& sets, const json& coeffs = json(), int P = 0, const std::string& path = "$") {
  if (!sets.is_array()) throw SpecError(path, "expected an array of sets");
  int maxc = 0;
  for (const auto& s : sets) {
    if (!s.is_array()) throw SpecError(path, "each set must be an array of 1-indexed coordinates");
    for (const auto& c : s)
      if (c.is_number_integer()) maxc = std::max(maxc, c.get<int>());
  }
  if (P == 0) P = maxc;
  if (P > 63) throw SpecError(path, "P must be at most 63");
  FourierSupport sup;
  sup.P = P;
  for (std::size_t i = 0; i < sets.size(); ++i) sup.sets.push_back(detail::parse_set(sets[i], P, path + "[" + std::to_string(i) + "]"));
  if (!coeffs.is_null()) {
    if (!coeffs.is_array() || coeffs.size() != sets.size()) throw SpecError(path, "coefficient list must match the set list");
    for (std::size_t i = 0; i < coeffs.size(); ++i) sup.coeffs.push_back(detail::need_number(coeffs[i], "coeffs[" + std::to_string(i) + "]"));
  }
  try {
    sup.validate();
  } catch (const std::invalid_argument& e) {
    throw SpecError(path, e.what());
  }
  return sup;
}

inline json load_json_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw SpecError(file, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SpecError(file, std::string("invalid JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw SpecError(file, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

inline json sets_to_json(const std::vector<Mask>& sets) {
  json out = json::array();
  for (Mask s : sets) {
    json one = json::array();
    for (int i : mask_to_indices(s)) one.push_back(i + 1);
    out.push_back(one);
  }
  return out;
}

inline json set_to_json(Mask s) { return sets_to_json({s}).at(0); }

struct RunManifest {
  std::string subcommand;
  json config = json::object();
  std::uint64_t seed = 0;
  json input_digests = json::object();
  double wall_seconds = 0.0;
  json steps = json::object();

  json to_json() const {
    return {{"subcommand", subcommand}, {"config", config},          {"seed", seed},   {"version", kVersion},
            {"input_digests", input_digests}, {"wall_clock_seconds", wall_seconds}, {"steps", steps}};
  }
};

}  // namespace eqlab
