#pragma once

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "delaystab/jacobians.hpp"
#include "delaystab/params.hpp"
#include "delaystab/sign.hpp"

namespace delaystab {

/// Certified: every hypothesis holds. Refuted: some hypothesis fails with a
/// concrete counter-witness. Inconclusive: neither. The criterion is only
/// sufficient, so nothing here ever claims instability.
enum class Verdict { Certified, Refuted, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "Certified";
    case Verdict::Refuted: return "Refuted";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

/// Principal minor of -J~ on `subset` (0-based species indices, sorted).
struct MinorEvidence {
  std::vector<std::size_t> subset;
  Polynomial polynomial;
  SignCertificate sign;
};

/// Variable point at which a checked quantity takes a violating value.
struct PointWitness {
  std::string description;
  std::vector<double> point;
  double value = 0.0;
};

/// A sign condition still open after the sign test: the full polynomial and
/// the sign-ambiguous coefficient groups extracted from it.
struct ResidualCondition {
  std::string source;
  Polynomial polynomial;
  std::vector<Polynomial> ambiguous_groups;
};

struct CertificateOutcome {
  Verdict verdict = Verdict::Certified;
  std::vector<std::string> failing_checks;
  std::vector<MinorEvidence> evidence;
  std::vector<PointWitness> witnesses;
  std::vector<ResidualCondition> residuals;
  std::vector<std::string> notes;
};

struct HypothesisResult {
  std::string name;
  CertificateOutcome outcome;
  /// Numeric values behind a point-mode check (e.g. minors, diagonal entries).
  std::vector<std::pair<std::string, double>> values;
};

struct DelayStabilityReport {
  std::string network;
  std::string mode;  // "symbolic" or "point"
  std::vector<HypothesisResult> hypotheses;
  CertificateOutcome overall;
  std::vector<std::vector<std::size_t>> blocks;
  double seconds = 0.0;

  std::vector<std::string> residual_conditions(const VariableSet& vars) const {
    std::vector<std::string> out;
    auto add = [&](const std::string& s) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const auto& h : hypotheses)
      for (const auto& r : h.outcome.residuals) {
        for (const auto& g : r.ambiguous_groups) add(to_string(g, vars));
        add(to_string(r.polynomial, vars));
      }
    return out;
  }
};

struct CertificateOptions {
  SamplerConfig sampler;
  std::optional<std::size_t> max_order;
  bool block_reduction = true;
  /// Blocks larger than this need max_order (2^n minors).
  std::size_t max_full_dimension = 12;
};

inline Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Refuted || b == Verdict::Refuted) return Verdict::Refuted;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Certified;
}

// ---------------------------------------------------------------------------
// Residual extraction

/// Groups of terms around each negative term t: for a variable v dividing t,
/// collect all terms of the form (t / v) * w and return sum coef * w.
/// Rate-constant variables (the first `preferred` variables) are tried first.
inline std::vector<Polynomial> sign_ambiguous_groups(const Polynomial& p, std::size_t preferred) {
  std::vector<Polynomial> groups;
  const std::size_t nv = p.nvars();
  for (const auto& [e, c] : p.terms()) {
    if (c >= 0) continue;
    std::optional<Polynomial> best;
    std::size_t best_pos = 0;
    auto try_range = [&](std::size_t lo, std::size_t hi) {
      for (std::size_t v = lo; v < hi; ++v) {
        if (e[v] == 0) continue;
        Exponents base = e;
        --base[v];
        Polynomial g(nv);
        std::size_t positives = 0;
        for (const auto& [f, fc] : p.terms()) {
          if (total_degree(f) != total_degree(e)) continue;
          std::optional<std::size_t> extra;
          bool ok = true;
          for (std::size_t i = 0; i < nv && ok; ++i) {
            if (f[i] == base[i]) continue;
            if (f[i] == base[i] + 1 && !extra) {
              extra = i;
            } else {
              ok = false;
            }
          }
          if (!ok || !extra) continue;
          g += Polynomial::monomial([&] {
            Exponents w(nv, 0);
            w[*extra] = 1;
            return w;
          }(), fc);
          if (fc > 0) ++positives;
        }
        if (positives > best_pos) {
          best_pos = positives;
          best = std::move(g);
        }
      }
    };
    try_range(0, std::min(preferred, nv));
    if (!best) try_range(std::min(preferred, nv), nv);
    if (best && std::find(groups.begin(), groups.end(), *best) == groups.end()) groups.push_back(std::move(*best));
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Block structure

/// Strongly connected components of the off-diagonal pattern (i -> k when
/// entry (i, k) is non-zero), listed so that the matrix is block lower
/// triangular in this order. Indices within a block are sorted.
template <typename IsNonzero>
std::vector<std::vector<std::size_t>> irreducible_blocks(std::size_t n, IsNonzero nonzero) {
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  int counter = 0;
  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < n; ++w) {
      if (w == v || !nonzero(v, w)) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  // Tarjan emits sinks first: a component only depends on earlier ones.
  return comps;
}

inline std::vector<std::vector<std::size_t>> irreducible_blocks(const SymbolicMatrix& m) {
  return irreducible_blocks(m.dim(), [&](std::size_t i, std::size_t k) { return !m(i, k).is_zero(); });
}

// ---------------------------------------------------------------------------
// Principal minors

inline std::vector<std::uint32_t> subsets_by_size(std::size_t n, std::size_t max_order) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t s = 1; s < (1u << n); ++s)
    if (std::size_t(std::popcount(s)) <= max_order) out.push_back(s);
  std::stable_sort(out.begin(), out.end(), [](std::uint32_t a, std::uint32_t b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    // lexicographic order of sorted index lists
    for (std::uint32_t x = a, y = b; x && y; x &= x - 1, y &= y - 1) {
      int ia = std::countr_zero(x), ib = std::countr_zero(y);
      if (ia != ib) return ia < ib;
    }
    return false;
  });
  return out;
}

inline std::vector<std::size_t> mask_to_indices(std::uint32_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask; ++i, mask >>= 1)
    if (mask & 1u) out.push_back(i);
  return out;
}

/// All principal minors of `m` (up to `max_order`), in size-then-lex order,
/// with memoized expansion shared across subsets.
inline std::vector<MinorEvidence> principal_minors(const SymbolicMatrix& m, std::optional<std::size_t> max_order = std::nullopt,
                                                   const SamplerConfig& sampler = {}) {
  std::vector<MinorEvidence> out;
  auto ex = make_expander(m);
  for (auto s : subsets_by_size(m.dim(), max_order.value_or(m.dim()))) {
    const Polynomial& p = ex.principal(s);
    out.push_back(MinorEvidence{mask_to_indices(s), p, sign_on_positive_orthant(p, sampler)});
  }
  return out;
}

inline PointWitness all_ones_witness(const Polynomial& p, std::string description) {
  std::vector<double> ones(p.nvars(), 1.0);
  return PointWitness{std::move(description), ones, evaluate<double>(p, ones)};
}

inline std::string subset_label(const std::vector<std::size_t>& subset) {
  std::string s = "{";
  for (std::size_t i = 0; i < subset.size(); ++i) s += (i ? "," : "") + std::to_string(subset[i] + 1);
  return s + "}";
}

/// Is `m` (here: -J~) a P0-matrix for every positive assignment of its variables?
///
/// Refuted needs a minor that is negative everywhere (all coefficients
/// negative). Mixed-sign minors leave the verdict Inconclusive and are
/// reported as residual conditions, with sampled witnesses attached.
inline CertificateOutcome p0_certificate(const SymbolicMatrix& m, const CertificateOptions& opt = {},
                                         std::size_t preferred_vars = 0) {
  CertificateOutcome out;
  std::vector<std::vector<std::size_t>> blocks;
  if (opt.block_reduction) {
    blocks = irreducible_blocks(m);
  } else {
    std::vector<std::size_t> all(m.dim());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    blocks.push_back(all);
  }
  if (blocks.size() > 1)
    out.notes.push_back("matrix is reducible into " + std::to_string(blocks.size()) +
                        " diagonal blocks; it is P0 iff every diagonal block is P0");

  bool truncated = false;
  for (const auto& block : blocks) {
    std::size_t order = opt.max_order.value_or(block.size());
    if (!opt.max_order && block.size() > opt.max_full_dimension)
      throw std::invalid_argument("diagonal block of size " + std::to_string(block.size()) +
                                  " is too large for full minor enumeration; set a maximum order");
    if (order < block.size()) truncated = true;
    auto sub = m.principal(block);
    for (auto& ev : principal_minors(sub, order, opt.sampler)) {
      for (auto& i : ev.subset) i = block[i];
      out.evidence.push_back(std::move(ev));
    }
  }
  std::stable_sort(out.evidence.begin(), out.evidence.end(), [](const auto& a, const auto& b) {
    if (a.subset.size() != b.subset.size()) return a.subset.size() < b.subset.size();
    return a.subset < b.subset;
  });

  out.verdict = Verdict::Certified;
  for (const auto& ev : out.evidence) {
    switch (ev.sign.verdict) {
      case SignVerdict::StrictlyPositive:
      case SignVerdict::Nonnegative:
      case SignVerdict::IdenticallyZero:
        break;
      case SignVerdict::StrictlyNegative:
      case SignVerdict::Nonpositive:
        out.verdict = Verdict::Refuted;
        out.failing_checks.push_back("principal minor " + subset_label(ev.subset) + " is negative for all positive values");
        out.witnesses.push_back(all_ones_witness(ev.polynomial, "principal minor " + subset_label(ev.subset)));
        break;
      case SignVerdict::Indeterminate:
        out.verdict = combine(out.verdict, Verdict::Inconclusive);
        out.failing_checks.push_back("principal minor " + subset_label(ev.subset) + " has coefficients of both signs");
        if (ev.sign.negative)
          out.witnesses.push_back({"principal minor " + subset_label(ev.subset) + " negative at sampled point",
                                   ev.sign.negative->point, ev.sign.negative->value});
        out.residuals.push_back({"principal minor " + subset_label(ev.subset), ev.polynomial,
                                 sign_ambiguous_groups(ev.polynomial, preferred_vars)});
        break;
    }
  }
  if (truncated) {
    out.verdict = combine(out.verdict, Verdict::Inconclusive);
    out.failing_checks.push_back("minors above order " + std::to_string(*opt.max_order) + " were not examined");
  }
  return out;
}

/// Sign of det J over the positive orthant (uses the block structure of J~ when
/// enabled; J shares the zero pattern of J~ off the diagonal).
inline CertificateOutcome det_j_certificate(const SymbolicModel& model, const CertificateOptions& opt = {}) {
  CertificateOutcome out;
  const auto& J = model.jacobian();
  Polynomial det = Polynomial::constant(J.nvars(), Rational(1));
  if (opt.block_reduction) {
    for (const auto& b : irreducible_blocks(model.modified_jacobian())) det *= determinant(J.principal(b));
  } else {
    det = determinant(J);
  }
  auto sign = sign_on_positive_orthant(det, opt.sampler);
  out.evidence.push_back(MinorEvidence{{}, det, sign});
  for (std::size_t i = 0; i < J.dim(); ++i) out.evidence.back().subset.push_back(i);
  switch (sign.verdict) {
    case SignVerdict::StrictlyPositive:
    case SignVerdict::StrictlyNegative:
      out.verdict = Verdict::Certified;
      break;
    case SignVerdict::IdenticallyZero:
      out.verdict = Verdict::Refuted;
      out.failing_checks.push_back("det J is identically zero (conservation relation)");
      out.witnesses.push_back(all_ones_witness(det, "det J"));
      break;
    default:
      out.verdict = Verdict::Inconclusive;
      out.failing_checks.push_back("det J has coefficients of both signs and may vanish");
      if (sign.positive) out.witnesses.push_back({"det J positive at sampled point", sign.positive->point, sign.positive->value});
      if (sign.negative) out.witnesses.push_back({"det J negative at sampled point", sign.negative->point, sign.negative->value});
      out.residuals.push_back({"det J", det, sign_ambiguous_groups(det, model.network().num_reactions())});
      break;
  }
  return out;
}

inline CertificateOutcome det_j_certificate(const ReactionNetwork& net, const CertificateOptions& opt = {}) {
  return det_j_certificate(SymbolicModel(net), opt);
}

inline CertificateOutcome autocatalysis_check(const ReactionNetwork& net) {
  CertificateOutcome out;
  for (auto r : autocatalytic_reactions(net)) {
    out.verdict = Verdict::Refuted;
    out.failing_checks.push_back("reaction " + std::to_string(r + 1) + " (rate " + net.reaction(r).rate + ") is autocatalytic");
  }
  return out;
}

inline CertificateOutcome diagonal_check(const SymbolicModel& model, const SamplerConfig& sampler) {
  CertificateOutcome out;
  const auto& Jt = model.modified_jacobian();
  for (std::size_t i = 0; i < Jt.dim(); ++i) {
    const auto& d = Jt(i, i);
    auto sign = sign_on_positive_orthant(d, sampler);
    out.evidence.push_back(MinorEvidence{{i}, d, sign});
    auto label = "diagonal entry of J~ for species " + model.network().species_name(i);
    switch (sign.verdict) {
      case SignVerdict::StrictlyNegative:
        break;
      case SignVerdict::Indeterminate:
        out.verdict = combine(out.verdict, Verdict::Inconclusive);
        out.failing_checks.push_back(label + " has coefficients of both signs");
        out.residuals.push_back({label, -d, sign_ambiguous_groups(-d, model.network().num_reactions())});
        break;
      default:
        out.verdict = Verdict::Refuted;
        out.failing_checks.push_back(label + " is never negative");
        out.witnesses.push_back(all_ones_witness(d, label));
        break;
    }
  }
  return out;
}

/// Runs the delay-stability hypotheses symbolically: non-autocatalysis,
/// negative J~ diagonal, det J != 0, and -J~ being P0, all for every
/// positive x and k. A non-autocatalysis failure stops the pipeline since
/// the remaining hypotheses presuppose it.
inline DelayStabilityReport delay_stability_certificate(const SymbolicModel& model, const CertificateOptions& opt = {}) {
  auto start = std::chrono::steady_clock::now();
  DelayStabilityReport rep;
  rep.network = model.network().name();
  rep.mode = "symbolic";

  rep.hypotheses.push_back({"non_autocatalytic", autocatalysis_check(model.network()), {}});
  if (rep.hypotheses.back().outcome.verdict == Verdict::Certified) {
    rep.hypotheses.push_back({"modified_jacobian_diagonal_negative", diagonal_check(model, opt.sampler), {}});
    rep.hypotheses.push_back({"det_jacobian_nonzero", det_j_certificate(model, opt), {}});
    auto neg = -model.modified_jacobian();
    rep.blocks = opt.block_reduction ? irreducible_blocks(neg) : std::vector<std::vector<std::size_t>>{};
    rep.hypotheses.push_back({"negated_modified_jacobian_p0", p0_certificate(neg, opt, model.network().num_reactions()), {}});
  }

  rep.overall.verdict = Verdict::Certified;
  for (const auto& h : rep.hypotheses) {
    rep.overall.verdict = combine(rep.overall.verdict, h.outcome.verdict);
    for (const auto& f : h.outcome.failing_checks) rep.overall.failing_checks.push_back(h.name + ": " + f);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

inline DelayStabilityReport delay_stability_certificate(const ReactionNetwork& net, const CertificateOptions& opt = {}) {
  return delay_stability_certificate(SymbolicModel(net), opt);
}

// ---------------------------------------------------------------------------
// Point mode

class PointCheckError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PointTolerances {
  double equilibrium = 1e-9;  ///< ||rhs(x*)||_inf <= tol * (1 + ||x*||_inf)
  double minor = 1e-10;       ///< scaled non-negativity slack for minors and det J
};

inline double mass_action_residual(const SymbolicModel& model, const std::vector<double>& pt) {
  double r = 0.0;
  for (const auto& f : model.rhs()) r = std::max(r, std::abs(CompiledPolynomial(f)(pt)));
  return r;
}

/// Numeric check of the same hypotheses at one equilibrium. Certified means
/// every root of the characteristic equation at this equilibrium has negative
/// real part for every choice of delays.
inline DelayStabilityReport point_stability_check(const SymbolicModel& model, const std::vector<double>& x,
                                                  const ParameterAssignment& params, const PointTolerances& tol = {}) {
  auto start = std::chrono::steady_clock::now();
  const auto& net = model.network();
  const std::size_t n = net.num_species();
  if (x.size() != n) throw PointCheckError("state has " + std::to_string(x.size()) + " components, expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i)
    if (!(x[i] > 0)) throw PointCheckError("state component " + net.species_name(i) + " is not positive");
  auto pt = model.point(rate_vector(net, params), x);
  double xmax = *std::max_element(x.begin(), x.end());
  double res = mass_action_residual(model, pt);
  if (res > tol.equilibrium * (1.0 + xmax))
    throw PointCheckError("state is not an equilibrium (max |rhs| = " + std::to_string(res) + ")");

  DelayStabilityReport rep;
  rep.network = net.name();
  rep.mode = "point";
  rep.hypotheses.push_back({"non_autocatalytic", autocatalysis_check(net), {}});

  if (rep.hypotheses.back().outcome.verdict == Verdict::Certified) {
    std::vector<double> Jt(n * n), J(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        Jt[i * n + j] = CompiledPolynomial(model.modified_jacobian()(i, j))(pt);
        J[i * n + j] = CompiledPolynomial(model.jacobian()(i, j))(pt);
      }

    HypothesisResult diag{"modified_jacobian_diagonal_negative", {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      double d = Jt[i * n + i];
      diag.values.emplace_back(net.species_name(i), d);
      if (!(d < 0)) {
        diag.outcome.verdict = Verdict::Refuted;
        diag.outcome.failing_checks.push_back("J~ diagonal entry for " + net.species_name(i) + " is not negative");
        diag.outcome.witnesses.push_back({"J~(" + std::to_string(i + 1) + "," + std::to_string(i + 1) + ")", pt, d});
      }
    }
    rep.hypotheses.push_back(std::move(diag));

    auto row_scale = [&](const std::vector<double>& M, std::uint32_t set) {
      double s = 1.0;
      for (auto i : mask_to_indices(set)) {
        double r = 0.0;
        for (auto j : mask_to_indices(set)) r += std::abs(M[i * n + j]);
        s *= r;
      }
      return s;
    };
    std::uint32_t full = n == 0 ? 0u : ((1u << n) - 1);

    HypothesisResult detj{"det_jacobian_nonzero", {}, {}};
    MinorExpander<double> jex(J, n, 0.0, 1.0);
    double det = jex.determinant();
    detj.values.emplace_back("det J", det);
    if (!(std::abs(det) > tol.minor * row_scale(J, full))) {
      detj.outcome.verdict = Verdict::Refuted;
      detj.outcome.failing_checks.push_back("det J vanishes at this equilibrium");
      detj.outcome.witnesses.push_back({"det J", pt, det});
    }
    rep.hypotheses.push_back(std::move(detj));

    HypothesisResult p0{"negated_modified_jacobian_p0", {}, {}};
    std::vector<double> neg(Jt.size());
    std::transform(Jt.begin(), Jt.end(), neg.begin(), [](double v) { return -v; });
    MinorExpander<double> ex(neg, n, 0.0, 1.0);
    for (auto s : subsets_by_size(n, n)) {
      double v = ex.principal(s);
      auto label = subset_label(mask_to_indices(s));
      p0.values.emplace_back(label, v);
      if (v < -tol.minor * row_scale(neg, s)) {
        p0.outcome.verdict = Verdict::Refuted;
        p0.outcome.failing_checks.push_back("principal minor " + label + " of -J~ is negative");
        p0.outcome.witnesses.push_back({"principal minor " + label, pt, v});
      }
    }
    rep.hypotheses.push_back(std::move(p0));
  }

  rep.overall.verdict = Verdict::Certified;
  for (const auto& h : rep.hypotheses) {
    rep.overall.verdict = combine(rep.overall.verdict, h.outcome.verdict);
    for (const auto& f : h.outcome.failing_checks) rep.overall.failing_checks.push_back(h.name + ": " + f);
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace delaystab
