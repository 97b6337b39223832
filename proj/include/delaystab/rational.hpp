#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace delaystab {

using Rational = mpq_class;

/// Parses `p/q`, integers, and decimal literals (`0.25`, `1e-3`) into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw std::invalid_argument("empty numeric literal");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational r;
    if (r.set_str(s, 10) != 0 || r.get_den() == 0)
      throw std::invalid_argument("malformed rational literal '" + s + "'");
    r.canonicalize();
    return r;
  }

  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  std::string digits;
  long exponent = 0;
  bool seen_digit = false, seen_point = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) --exponent;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed numeric literal '" + s + "'");
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("malformed numeric literal '" + s + "'");
    ++i;
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(s.substr(i), &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed exponent in '" + s + "'");
    }
    if (i + used != s.size()) throw std::invalid_argument("malformed numeric literal '" + s + "'");
    exponent += e;
  }
  mpz_class mantissa(digits, 10);
  if (negative) mantissa = -mantissa;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exponent)));
  Rational r = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
  r.canonicalize();
  return r;
}

/// Exact rational value of a finite double.
inline Rational exact_rational(double v) {
  if (!std::isfinite(v)) throw std::invalid_argument("non-finite value has no rational form");
  return Rational(v);
}

inline std::string to_string(const Rational& r) { return r.get_str(10); }

}  // namespace delaystab
