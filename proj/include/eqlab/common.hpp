#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqlab {

using Mask = std::uint64_t;
using Rng = std::mt19937_64;

// Raised when a request exceeds a dense-representation cap.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline int popcount(Mask m) { return std::popcount(m); }

inline Mask full_mask(int d) { return d >= 64 ? ~Mask{0} : ((Mask{1} << d) - 1); }

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(seed, a, b));
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

inline std::vector<int> mask_to_indices(Mask m) {
  std::vector<int> out;
  for (int i = 0; m; ++i, m >>= 1)
    if (m & 1) out.push_back(i);
  return out;
}

inline Mask indices_to_mask(const std::vector<int>& idx, int d) {
  Mask m = 0;
  for (int i : idx) {
    if (i < 0 || i >= d) throw std::out_of_range("coordinate " + std::to_string(i + 1) + " outside [1, " + std::to_string(d) + "]");
    m |= Mask{1} << i;
  }
  return m;
}

// Uniformly random subset of [d] of the given size.
inline Mask random_subset(int d, int size, Rng& rng) {
  std::vector<int> idx(d);
  for (int i = 0; i < d; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Mask m = 0;
  for (int i = 0; i < size; ++i) m |= Mask{1} << idx[i];
  return m;
}

}  // namespace eqlab
