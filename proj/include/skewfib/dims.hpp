#pragma once

// Hurwitz-Radon arithmetic and the dimension tables for skew fibrations of
// R^n by affine k-planes and for great-sphere fibrations of S^n.

#include <bit>
#include <cstdint>
#include <vector>

#include "skewfib/error.hpp"

namespace skewfib::dims {

struct DimPair {
  int k = 0;
  int n = 1;

  bool valid() const { return k >= 0 && n > k; }
};

/// Hurwitz-Radon number: for q = odd * 2^(4a+b), 0 <= b <= 3, rho(q) = 2^b + 8a.
inline int rho(std::int64_t q) {
  require(q >= 1, ErrorCode::invalid_input, "rho is defined for q >= 1");
  const int c = std::countr_zero(static_cast<std::uint64_t>(q));
  const int a = c / 4;
  const int b = c % 4;
  return (1 << b) + 8 * a;
}

/// R^n admits a fibration by pairwise skew affine k-planes iff k <= rho(n-k) - 1.
inline bool admissible_skew(DimPair p) {
  if (!p.valid()) return false;
  return p.k <= rho(p.n - p.k) - 1;
}

/// Smallest q with rho(q) >= k + 1; admissible n are exactly k + a_k * m.
inline std::int64_t a_k(int k) {
  require(k >= 1, ErrorCode::invalid_input, "a_k is defined for k >= 1");
  require(k <= 32, ErrorCode::invalid_input, "a_k search limited to k <= 32");
  std::int64_t q = 1;
  while (rho(q) < k + 1) ++q;
  return q;
}

/// Great k-sphere fibrations of S^n exist only for k = 0 (all n), k = 1 (n odd),
/// k = 3 (n = 3 mod 4) and k = 7 (n = 15).
inline bool admissible_sphere(DimPair p) {
  if (!p.valid()) return false;
  switch (p.k) {
    case 0: return true;
    case 1: return p.n % 2 == 1;
    case 3: return p.n % 4 == 3;
    case 7: return p.n == 15;
    default: return false;
  }
}

/// Admissible fiber dimensions k >= 1 for a given n, in decreasing order
/// (the column layout of the classic table).
inline std::vector<int> skew_column(int n) {
  std::vector<int> out;
  for (int k = n - 1; k >= 1; --k)
    if (admissible_skew({k, n})) out.push_back(k);
  return out;
}

}  // namespace skewfib::dims
