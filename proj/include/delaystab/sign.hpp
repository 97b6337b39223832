#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "delaystab/polynomial.hpp"

namespace delaystab {

enum class SignVerdict { StrictlyPositive, StrictlyNegative, IdenticallyZero, Nonnegative, Nonpositive, Indeterminate };

inline std::string to_string(SignVerdict v) {
  switch (v) {
    case SignVerdict::StrictlyPositive: return "StrictlyPositive";
    case SignVerdict::StrictlyNegative: return "StrictlyNegative";
    case SignVerdict::IdenticallyZero: return "IdenticallyZero";
    case SignVerdict::Nonnegative: return "Nonnegative";
    case SignVerdict::Nonpositive: return "Nonpositive";
    case SignVerdict::Indeterminate: return "Indeterminate";
  }
  return "?";
}

/// A positive point together with the sign the polynomial takes there.
/// The sign is confirmed by exact rational evaluation.
struct SignWitness {
  std::vector<double> point;
  double value = 0.0;
  int sign = 0;
};

struct SignCertificate {
  SignVerdict verdict = SignVerdict::Indeterminate;
  std::optional<SignWitness> positive;
  std::optional<SignWitness> negative;
  std::size_t samples = 0;

  bool has_sign_change() const { return positive.has_value() && negative.has_value(); }
};

struct SamplerConfig {
  std::size_t budget = 256;
  std::uint64_t seed = 20190713;
  double log10_min = -3.0;
  double log10_max = 3.0;
};

namespace detail {

inline std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * double(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

}  // namespace detail

/// Deterministic low-discrepancy points spread log-uniformly over a box in
/// the positive orthant (randomly shifted Halton sequence, fixed seed).
class PositiveSampler {
 public:
  PositiveSampler(std::size_t dim, const SamplerConfig& cfg) : cfg_(cfg), primes_(detail::first_primes(dim)), shift_(dim) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& s : shift_) s = u(rng);
  }

  std::vector<double> point(std::uint64_t index) const {
    std::vector<double> p(shift_.size());
    for (std::size_t d = 0; d < p.size(); ++d) {
      double v = detail::radical_inverse(index + 1, primes_[d]) + shift_[d];
      v -= std::floor(v);
      p[d] = std::pow(10.0, cfg_.log10_min + (cfg_.log10_max - cfg_.log10_min) * v);
    }
    return p;
  }

 private:
  SamplerConfig cfg_;
  std::vector<unsigned> primes_;
  std::vector<double> shift_;
};

/// Exact sign of `p` at a double point (interpreted as exact dyadic rationals).
inline int exact_sign_at(const Polynomial& p, const std::vector<double>& point) {
  std::vector<Rational> q;
  q.reserve(point.size());
  for (double v : point) q.push_back(exact_rational(v));
  return sgn(evaluate<Rational>(p, std::span<const Rational>(q)));
}

/// Sign of a polynomial on the open positive orthant.
///
/// Same-sign coefficients certify the sign. Mixed signs are only ever
/// reported as Indeterminate; sampling can attach witnesses of either sign
/// but never promotes to a certificate.
inline SignCertificate sign_on_positive_orthant(const Polynomial& p, const SamplerConfig& cfg = {}) {
  SignCertificate cert;
  if (p.is_zero()) {
    cert.verdict = SignVerdict::IdenticallyZero;
    return cert;
  }
  if (p.all_coefficients_positive()) {
    cert.verdict = SignVerdict::StrictlyPositive;
    return cert;
  }
  if (p.all_coefficients_negative()) {
    cert.verdict = SignVerdict::StrictlyNegative;
    return cert;
  }
  cert.verdict = SignVerdict::Indeterminate;
  CompiledPolynomial fast(p);
  PositiveSampler sampler(p.nvars(), cfg);
  for (std::size_t s = 0; s < cfg.budget && !cert.has_sign_change(); ++s) {
    auto pt = sampler.point(s);
    ++cert.samples;
    double v = fast(pt);
    double scale = fast.magnitude(pt);
    if (!(std::abs(v) > 1e-9 * scale)) continue;
    auto& slot = v > 0 ? cert.positive : cert.negative;
    if (slot) continue;
    int exact = exact_sign_at(p, pt);
    if (exact == 0) continue;
    auto& confirmed = exact > 0 ? cert.positive : cert.negative;
    if (!confirmed) confirmed = SignWitness{pt, v, exact};
  }
  return cert;
}

}  // namespace delaystab
