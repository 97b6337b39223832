#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "delaystab/polynomial.hpp"

namespace delaystab {

/// Square matrix of polynomials over a shared variable universe.
class SymbolicMatrix {
 public:
  SymbolicMatrix() = default;
  SymbolicMatrix(std::size_t n, std::size_t nvars) : n_(n), nvars_(nvars), entries_(n * n, Polynomial(nvars)) {}

  std::size_t dim() const { return n_; }
  std::size_t nvars() const { return nvars_; }

  Polynomial& operator()(std::size_t i, std::size_t j) { return entries_.at(i * n_ + j); }
  const Polynomial& operator()(std::size_t i, std::size_t j) const { return entries_.at(i * n_ + j); }

  const std::vector<Polynomial>& entries() const { return entries_; }

  friend SymbolicMatrix operator-(SymbolicMatrix m) {
    for (auto& e : m.entries_) e = -e;
    return m;
  }
  SymbolicMatrix& operator+=(const SymbolicMatrix& o) {
    if (o.n_ != n_) throw std::invalid_argument("matrix dimension mismatch");
    for (std::size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
    return *this;
  }
  friend SymbolicMatrix operator+(SymbolicMatrix a, const SymbolicMatrix& b) { return a += b; }
  friend bool operator==(const SymbolicMatrix& a, const SymbolicMatrix& b) {
    return a.n_ == b.n_ && a.entries_ == b.entries_;
  }

  /// Principal submatrix on the given (sorted) indices.
  SymbolicMatrix principal(const std::vector<std::size_t>& idx) const {
    SymbolicMatrix s(idx.size(), nvars_);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = (*this)(idx[a], idx[b]);
    return s;
  }

  /// Row-major numeric image at a full variable assignment.
  template <typename T>
  std::vector<T> evaluate(std::span<const T> point) const {
    std::vector<T> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(delaystab::evaluate<T>(e, point));
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::size_t nvars_ = 0;
  std::vector<Polynomial> entries_;
};

/// Memoized Laplace expansion over (row-set, column-set) bitmasks.
///
/// A minor on rows R and columns C (|R| = |C|) expands along the highest row
/// of R, so all principal minors of a matrix share their sub-minors through
/// the memo. The full determinant touches only 2^n column subsets.
template <typename T>
class MinorExpander {
 public:
  MinorExpander(std::vector<T> entries, std::size_t n, T zero, T one)
      : entries_(std::move(entries)), n_(n), zero_(std::move(zero)), one_(std::move(one)) {
    if (n_ > 31) throw std::invalid_argument("minor expansion supports at most 31 rows");
    if (entries_.size() != n_ * n_) throw std::invalid_argument("entry count does not match dimension");
  }

  std::size_t dim() const { return n_; }

  const T& minor(std::uint32_t rows, std::uint32_t cols) {
    if (std::popcount(rows) != std::popcount(cols)) throw std::invalid_argument("minor needs equal row and column counts");
    if (rows == 0) return one_;
    std::uint64_t key = (std::uint64_t(rows) << 32) | cols;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    unsigned r = 31 - std::countl_zero(rows);
    std::uint32_t sub_rows = rows & ~(1u << r);
    bool row_sign_odd = (std::popcount(rows) - 1) % 2 == 1;
    T acc = zero_;
    unsigned pos = 0;
    for (unsigned j = 0; j < n_; ++j) {
      if (!(cols & (1u << j))) continue;
      const T& a = entries_[r * n_ + j];
      bool odd = row_sign_odd != (pos % 2 == 1);
      ++pos;
      if (is_zero(a)) continue;
      const T& sub = minor(sub_rows, cols & ~(1u << j));
      if (is_zero(sub)) continue;
      if (odd) {
        acc -= a * sub;
      } else {
        acc += a * sub;
      }
    }
    return memo_.emplace(key, std::move(acc)).first->second;
  }

  const T& principal(std::uint32_t set) { return minor(set, set); }
  const T& determinant() { return principal(n_ == 0 ? 0u : (n_ == 32 ? ~0u : ((1u << n_) - 1))); }

  std::size_t memo_size() const { return memo_.size(); }

 private:
  static bool is_zero(const T& v) {
    if constexpr (std::is_same_v<T, Polynomial>) {
      return v.is_zero();
    } else {
      return v == T(0);
    }
  }

  std::vector<T> entries_;
  std::size_t n_;
  T zero_, one_;
  std::unordered_map<std::uint64_t, T> memo_;
};

inline MinorExpander<Polynomial> make_expander(const SymbolicMatrix& m) {
  return MinorExpander<Polynomial>(m.entries(), m.dim(), Polynomial(m.nvars()),
                                   Polynomial::constant(m.nvars(), Rational(1)));
}

/// Exact determinant by memoized expansion over column subsets.
inline Polynomial determinant(const SymbolicMatrix& m) {
  if (m.dim() == 0) return Polynomial::constant(m.nvars(), Rational(1));
  auto ex = make_expander(m);
  return ex.determinant();
}

/// Exact determinant by fraction-free (Bareiss) elimination with exact
/// polynomial division.
inline Polynomial bareiss_determinant(const SymbolicMatrix& m) {
  const std::size_t n = m.dim();
  if (n == 0) return Polynomial::constant(m.nvars(), Rational(1));
  std::vector<std::vector<Polynomial>> a(n, std::vector<Polynomial>(n, Polynomial(m.nvars())));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] = m(i, j);
  Polynomial prev = Polynomial::constant(m.nvars(), Rational(1));
  bool negate = false;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a[k][k].is_zero()) {
      std::size_t swap_row = k + 1;
      while (swap_row < n && a[swap_row][k].is_zero()) ++swap_row;
      if (swap_row == n) return Polynomial(m.nvars());
      std::swap(a[k], a[swap_row]);
      negate = !negate;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        Polynomial num = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        auto q = divide_exact(std::move(num), prev);
        if (!q) throw std::logic_error("Bareiss step produced a non-exact division");
        a[i][j] = std::move(*q);
      }
      a[i][k] = Polynomial(m.nvars());
    }
    prev = a[k][k];
  }
  return negate ? -a[n - 1][n - 1] : a[n - 1][n - 1];
}

}  // namespace delaystab
