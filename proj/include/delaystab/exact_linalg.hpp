#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "delaystab/rational.hpp"

namespace delaystab {

using RationalMatrix = std::vector<std::vector<Rational>>;

/// Reduced row echelon form in place; returns the pivot columns.
inline std::vector<std::size_t> rref(RationalMatrix& a) {
  std::vector<std::size_t> pivots;
  if (a.empty()) return pivots;
  const std::size_t rows = a.size(), cols = a.front().size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    Rational inv = 1 / a[r][c];
    for (auto& v : a[r]) v *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      Rational f = a[i][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivots.push_back(c);
    ++r;
  }
  return pivots;
}

inline std::size_t exact_rank(RationalMatrix a) { return rref(a).size(); }

/// Integer basis of {v : A v = 0}, each vector primitive (gcd 1) with a
/// positive leading entry.
inline std::vector<std::vector<mpz_class>> integer_nullspace(RationalMatrix a, std::size_t cols) {
  std::vector<std::vector<mpz_class>> basis;
  if (a.empty()) {
    for (std::size_t f = 0; f < cols; ++f) {
      std::vector<mpz_class> v(cols, 0);
      v[f] = 1;
      basis.push_back(std::move(v));
    }
    return basis;
  }
  auto pivots = rref(a);
  std::vector<bool> is_pivot(cols, false);
  for (auto c : pivots) is_pivot[c] = true;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<Rational> v(cols, 0);
    v[free] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][free];
    mpz_class lcm = 1;
    for (const auto& x : v) lcm = ::lcm(lcm, mpz_class(x.get_den()));
    std::vector<mpz_class> iv(cols);
    mpz_class g = 0;
    for (std::size_t i = 0; i < cols; ++i) {
      Rational scaled = v[i] * lcm;
      iv[i] = scaled.get_num();
      g = gcd(g, iv[i]);
    }
    if (g != 0 && g != 1)
      for (auto& x : iv) x /= g;
    for (const auto& x : iv) {
      if (x == 0) continue;
      if (x < 0)
        for (auto& y : iv) y = -y;
      break;
    }
    basis.push_back(std::move(iv));
  }
  return basis;
}

}  // namespace delaystab
