#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "delaystab/rational.hpp"

namespace delaystab {

/// Dense exponent vector; one slot per variable of the universe.
using Exponents = std::vector<std::uint8_t>;

inline unsigned total_degree(const Exponents& e) {
  return std::accumulate(e.begin(), e.end(), 0u);
}

/// Graded lexicographic order, largest first. Iterating a term map keyed
/// with this comparator yields the canonical term order.
struct GradedLexGreater {
  bool operator()(const Exponents& a, const Exponents& b) const {
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

/// Ordered variable names of a polynomial universe.
class VariableSet {
 public:
  VariableSet() = default;
  explicit VariableSet(std::vector<std::string> names) : names_(std::move(names)) {}

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  std::optional<std::size_t> index_of(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
  }

 private:
  std::vector<std::string> names_;
};

/// Sparse multivariate polynomial with exact rational coefficients.
/// Zero coefficients are never stored.
class Polynomial {
 public:
  using TermMap = std::map<Exponents, Rational, GradedLexGreater>;

  explicit Polynomial(std::size_t nvars = 0) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const Rational& c) {
    Polynomial p(nvars);
    p.add_term(Exponents(nvars, 0), c);
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t index, unsigned power = 1) {
    if (index >= nvars) throw std::out_of_range("variable index outside universe");
    Exponents e(nvars, 0);
    e[index] = static_cast<std::uint8_t>(power);
    Polynomial p(nvars);
    p.add_term(std::move(e), Rational(1));
    return p;
  }

  static Polynomial monomial(Exponents e, const Rational& c) {
    Polynomial p(e.size());
    p.add_term(std::move(e), c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }

  void add_term(const Exponents& e, const Rational& c) {
    if (e.size() != nvars_) throw std::invalid_argument("exponent vector length mismatch");
    if (c == 0) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  Rational coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  unsigned degree() const { return terms_.empty() ? 0 : total_degree(terms_.begin()->first); }

  Polynomial& operator+=(const Polynomial& o) {
    check_universe(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_universe(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator-(Polynomial a) {
    for (auto& [e, c] : a.terms_) c = -c;
    return a;
  }
  friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
  friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_universe(b);
    Polynomial out(a.nvars_);
    if (a.is_zero() || b.is_zero()) return out;
    Exponents e(a.nvars_);
    Rational prod;
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) {
          unsigned s = unsigned(ea[i]) + eb[i];
          if (s > 255) throw std::overflow_error("exponent exceeds 255");
          e[i] = static_cast<std::uint8_t>(s);
        }
        prod = ca * cb;
        out.add_term(e, prod);
      }
    }
    return out;
  }
  Polynomial& operator*=(const Polynomial& o) { return *this = *this * o; }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  /// Partial derivative with respect to variable `var`.
  Polynomial derivative(std::size_t var) const {
    Polynomial out(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponents d = e;
      --d[var];
      out.add_term(d, c * e[var]);
    }
    return out;
  }

  bool all_coefficients_positive() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second > 0; });
  }
  bool all_coefficients_negative() const {
    return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t.second < 0; });
  }

 private:
  void check_universe(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw std::invalid_argument("polynomials live in different variable universes");
  }

  std::size_t nvars_;
  TermMap terms_;
};

/// Exact quotient a / b, or nullopt when b does not divide a.
inline std::optional<Polynomial> divide_exact(Polynomial a, const Polynomial& b) {
  if (b.is_zero()) throw std::domain_error("division by the zero polynomial");
  Polynomial q(a.nvars());
  const auto& [lead_e, lead_c] = *b.terms().begin();
  while (!a.is_zero()) {
    const auto& [ae, ac] = *a.terms().begin();
    Exponents qe(ae.size());
    for (std::size_t i = 0; i < ae.size(); ++i) {
      if (ae[i] < lead_e[i]) return std::nullopt;
      qe[i] = static_cast<std::uint8_t>(ae[i] - lead_e[i]);
    }
    Polynomial step = Polynomial::monomial(qe, ac / lead_c);
    q += step;
    a -= step * b;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Canonical text

inline std::string to_string(const Polynomial& p, const VariableSet& vars) {
  if (p.is_zero()) return "0";
  if (vars.size() != p.nvars()) throw std::invalid_argument("variable set does not match polynomial universe");
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    Rational mag = abs(c);
    if (first) {
      if (c < 0) os << '-';
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    first = false;
    bool constant = total_degree(e) == 0;
    bool wrote = false;
    if (constant || mag != 1) {
      os << mag.get_str();
      wrote = true;
    }
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      if (wrote) os << '*';
      os << vars.name(i);
      if (e[i] > 1) os << '^' << unsigned(e[i]);
      wrote = true;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Evaluation

template <typename T>
T coefficient_as(const Rational& c) {
  if constexpr (std::is_same_v<T, Rational>) {
    return c;
  } else {
    return T(c.get_d());
  }
}

template <typename T>
T power(const T& base, unsigned exp) {
  T r(1);
  for (unsigned i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Direct term-by-term evaluation at a point given for every variable.
template <typename T>
T evaluate(const Polynomial& p, std::span<const T> point) {
  if (point.size() != p.nvars()) throw std::invalid_argument("point dimension does not match polynomial universe");
  T sum(0);
  for (const auto& [e, c] : p.terms()) {
    T term = coefficient_as<T>(c);
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) term *= power(point[i], e[i]);
    sum += term;
  }
  return sum;
}

template <typename T>
T evaluate(const Polynomial& p, const std::vector<T>& point) {
  return evaluate<T>(p, std::span<const T>(point));
}

/// Evaluation from named assignments. Throws when a variable in the support
/// of `p` has no value.
template <typename T>
T evaluate(const Polynomial& p, const VariableSet& vars, const std::map<std::string, T>& values) {
  std::vector<bool> used(p.nvars(), false);
  for (const auto& [e, c] : p.terms())
    for (std::size_t i = 0; i < e.size(); ++i)
      if (e[i] != 0) used[i] = true;
  std::vector<T> point(p.nvars(), T(0));
  for (std::size_t i = 0; i < p.nvars(); ++i) {
    auto it = values.find(vars.name(i));
    if (it != values.end()) {
      point[i] = it->second;
    } else if (used[i]) {
      throw std::invalid_argument("no value assigned to variable '" + vars.name(i) + "'");
    }
  }
  return evaluate<T>(p, std::span<const T>(point));
}

/// Flattened polynomial for fast repeated double evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p) : nvars_(p.nvars()) {
    for (const auto& [e, c] : p.terms()) {
      Term t{c.get_d(), {}};
      for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] != 0) t.factors.emplace_back(static_cast<std::uint32_t>(i), e[i]);
      terms_.push_back(std::move(t));
    }
  }

  double operator()(std::span<const double> point) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
      double v = t.coefficient;
      for (auto [i, k] : t.factors) v *= power(point[i], k);
      sum += v;
    }
    return sum;
  }

  /// Sum of absolute term values; the natural scale for cancellation checks.
  double magnitude(std::span<const double> point) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
      double v = std::abs(t.coefficient);
      for (auto [i, k] : t.factors) v *= power(point[i], k);
      sum += v;
    }
    return sum;
  }

  std::size_t nvars() const { return nvars_; }
  bool empty() const { return terms_.empty(); }

 private:
  struct Term {
    double coefficient;
    std::vector<std::pair<std::uint32_t, std::uint8_t>> factors;
  };
  std::size_t nvars_ = 0;
  std::vector<Term> terms_;
};

}  // namespace delaystab
