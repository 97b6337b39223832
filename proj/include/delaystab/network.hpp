#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "delaystab/exact_linalg.hpp"

namespace delaystab {

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-negative integer combination of species; only coefficients >= 1 are stored.
class Complex {
 public:
  Complex() = default;
  explicit Complex(std::map<std::size_t, unsigned> coefficients) {
    for (auto [s, c] : coefficients)
      if (c > 0) coefficients_[s] = c;
  }

  unsigned operator[](std::size_t species) const {
    auto it = coefficients_.find(species);
    return it == coefficients_.end() ? 0u : it->second;
  }
  bool empty() const { return coefficients_.empty(); }
  const std::map<std::size_t, unsigned>& coefficients() const { return coefficients_; }

  std::vector<std::size_t> support() const {
    std::vector<std::size_t> s;
    for (const auto& kv : coefficients_) s.push_back(kv.first);
    return s;
  }

  friend bool operator==(const Complex&, const Complex&) = default;

 private:
  std::map<std::size_t, unsigned> coefficients_;
};

/// One delay for every product species. An empty symbol means no delay.
struct UniformDelay {
  std::optional<std::string> symbol;
  friend bool operator==(const UniformDelay&, const UniformDelay&) = default;
};

/// Per-product-species delays; product species absent from the map are undelayed.
struct PerProductDelay {
  std::map<std::size_t, std::string> symbols;
  friend bool operator==(const PerProductDelay&, const PerProductDelay&) = default;
};

using DelaySpec = std::variant<UniformDelay, PerProductDelay>;

/// Delay symbol attached to product species `species`, if any.
inline std::optional<std::string> delay_for_product(const DelaySpec& d, std::size_t species) {
  if (const auto* u = std::get_if<UniformDelay>(&d)) return u->symbol;
  const auto& m = std::get<PerProductDelay>(d).symbols;
  auto it = m.find(species);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

inline bool has_delay(const DelaySpec& d) {
  if (const auto* u = std::get_if<UniformDelay>(&d)) return u->symbol.has_value();
  return !std::get<PerProductDelay>(d).symbols.empty();
}

struct Reaction {
  Complex source;
  Complex target;
  std::string rate;
  DelaySpec delay = UniformDelay{};

  bool is_inflow() const { return source.empty(); }
  bool is_outflow() const { return target.empty(); }
  friend bool operator==(const Reaction&, const Reaction&) = default;
};

/// Species-indexed reaction network. Immutable after construction.
class ReactionNetwork {
 public:
  ReactionNetwork() = default;

  /// Checks the structural invariants. The inflow/outflow delay rule is left
  /// to validate_network() so that offending networks can still be reported.
  ReactionNetwork(std::string name, std::vector<std::string> species, std::vector<Reaction> reactions)
      : name_(std::move(name)), species_(std::move(species)), reactions_(std::move(reactions)) {
    std::set<std::string> seen;
    for (const auto& s : species_)
      if (!seen.insert(s).second) throw NetworkError("duplicate species '" + s + "'");

    for (auto& rx : reactions_)
      if (const auto* pp = std::get_if<PerProductDelay>(&rx.delay); pp && pp->symbols.empty()) rx.delay = UniformDelay{};

    std::set<std::string> rates;
    std::vector<bool> referenced(species_.size(), false);
    for (std::size_t r = 0; r < reactions_.size(); ++r) {
      const auto& rx = reactions_[r];
      auto where = " in reaction " + std::to_string(r + 1) + " (rate " + rx.rate + ")";
      for (const auto* c : {&rx.source, &rx.target})
        for (auto [s, k] : c->coefficients()) {
          if (s >= species_.size()) throw NetworkError("species index out of range" + where);
          referenced[s] = true;
        }
      if (rx.source.empty() && rx.target.empty()) throw NetworkError("reaction 0 -> 0 is not allowed" + where);
      if (rx.source == rx.target) throw NetworkError("source and target complexes coincide" + where);
      if (rx.rate.empty()) throw NetworkError("missing rate symbol" + where);
      if (!rates.insert(rx.rate).second) throw NetworkError("duplicate rate symbol '" + rx.rate + "'");
      if (const auto* pp = std::get_if<PerProductDelay>(&rx.delay))
        for (const auto& [s, sym] : pp->symbols)
          if (rx.target[s] == 0)
            throw NetworkError("per-product delay on species '" + species_name(s) + "' which is not a product" + where);
    }
    for (std::size_t s = 0; s < species_.size(); ++s)
      if (!referenced[s]) throw NetworkError("species '" + species_[s] + "' appears in no reaction");
    for (const auto& d : delay_symbols())
      if (rates.count(d)) throw NetworkError("symbol '" + d + "' used both as rate and delay");
    for (const auto& r : rates)
      for (std::size_t i = 0; i < species_.size(); ++i)
        if (r == species_variable(i)) throw NetworkError("rate symbol '" + r + "' collides with state variable name");
  }

  const std::string& name() const { return name_; }
  std::size_t num_species() const { return species_.size(); }
  std::size_t num_reactions() const { return reactions_.size(); }
  const std::vector<std::string>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const Reaction& reaction(std::size_t r) const { return reactions_.at(r); }

  const std::string& species_name(std::size_t i) const { return species_.at(i); }
  /// Name of the concentration variable of species i in symbolic output (x1, x2, ...).
  static std::string species_variable(std::size_t i) { return "x" + std::to_string(i + 1); }

  std::optional<std::size_t> species_index(const std::string& name) const {
    auto it = std::find(species_.begin(), species_.end(), name);
    if (it == species_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - species_.begin());
  }

  std::vector<std::string> rate_symbols() const {
    std::vector<std::string> out;
    for (const auto& r : reactions_) out.push_back(r.rate);
    return out;
  }

  /// Distinct delay symbols in order of first appearance.
  std::vector<std::string> delay_symbols() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& s) {
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    };
    for (const auto& r : reactions_) {
      if (const auto* u = std::get_if<UniformDelay>(&r.delay)) {
        if (u->symbol) add(*u->symbol);
      } else {
        for (const auto& [s, sym] : std::get<PerProductDelay>(r.delay).symbols) add(sym);
      }
    }
    return out;
  }

  friend bool operator==(const ReactionNetwork& a, const ReactionNetwork& b) {
    return a.species_ == b.species_ && a.reactions_ == b.reactions_;
  }

 private:
  std::string name_;
  std::vector<std::string> species_;
  std::vector<Reaction> reactions_;
};

// ---------------------------------------------------------------------------
// Structural queries

/// Reactions sharing a species between source and target with a strictly
/// larger product coefficient on every shared species.
inline std::vector<std::size_t> autocatalytic_reactions(const ReactionNetwork& net) {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < net.num_reactions(); ++r) {
    const auto& rx = net.reaction(r);
    bool shared = false, all_grow = true;
    for (auto [s, y] : rx.source.coefficients()) {
      unsigned yp = rx.target[s];
      if (yp == 0) continue;
      shared = true;
      if (!(yp > y)) all_grow = false;
    }
    if (shared && all_grow) out.push_back(r);
  }
  return out;
}

/// n x R matrix with columns y' - y.
inline RationalMatrix stoichiometric_matrix(const ReactionNetwork& net) {
  RationalMatrix s(net.num_species(), std::vector<Rational>(net.num_reactions(), 0));
  for (std::size_t r = 0; r < net.num_reactions(); ++r) {
    const auto& rx = net.reaction(r);
    for (std::size_t i = 0; i < net.num_species(); ++i)
      s[i][r] = Rational(long(rx.target[i])) - Rational(long(rx.source[i]));
  }
  return s;
}

inline std::size_t stoichiometric_rank(const ReactionNetwork& net) {
  if (net.num_reactions() == 0) return 0;
  return exact_rank(stoichiometric_matrix(net));
}

/// Integer basis of the orthogonal complement of the stoichiometric subspace.
inline std::vector<std::vector<mpz_class>> conservation_basis(const ReactionNetwork& net) {
  auto s = stoichiometric_matrix(net);
  RationalMatrix st(net.num_reactions(), std::vector<Rational>(net.num_species(), 0));
  for (std::size_t i = 0; i < net.num_species(); ++i)
    for (std::size_t r = 0; r < net.num_reactions(); ++r) st[r][i] = s[i][r];
  return integer_nullspace(std::move(st), net.num_species());
}

struct ValidationReport {
  std::vector<std::size_t> autocatalytic;
  std::size_t rank = 0;
  bool rank_deficient = false;
  std::vector<std::vector<mpz_class>> conservation_laws;
  std::vector<std::size_t> species_without_inflow;
  std::vector<std::size_t> species_without_outflow;
  bool fully_open = false;
  /// Inflow or outflow reactions that carry a delay (hard violation).
  std::vector<std::size_t> delayed_flow_violations;

  bool has_hard_violations() const { return !delayed_flow_violations.empty(); }
};

inline ValidationReport validate_network(const ReactionNetwork& net) {
  ValidationReport rep;
  rep.autocatalytic = autocatalytic_reactions(net);
  rep.rank = stoichiometric_rank(net);
  rep.rank_deficient = rep.rank < net.num_species();
  if (rep.rank_deficient) rep.conservation_laws = conservation_basis(net);

  std::vector<bool> inflow(net.num_species(), false), outflow(net.num_species(), false);
  for (std::size_t r = 0; r < net.num_reactions(); ++r) {
    const auto& rx = net.reaction(r);
    auto single = [](const Complex& c) -> std::optional<std::size_t> {
      if (c.coefficients().size() == 1 && c.coefficients().begin()->second == 1) return c.coefficients().begin()->first;
      return std::nullopt;
    };
    if (rx.is_inflow())
      if (auto s = single(rx.target)) inflow[*s] = true;
    if (rx.is_outflow())
      if (auto s = single(rx.source)) outflow[*s] = true;
    if ((rx.is_inflow() || rx.is_outflow()) && has_delay(rx.delay)) rep.delayed_flow_violations.push_back(r);
  }
  for (std::size_t i = 0; i < net.num_species(); ++i) {
    if (!inflow[i]) rep.species_without_inflow.push_back(i);
    if (!outflow[i]) rep.species_without_outflow.push_back(i);
  }
  rep.fully_open = rep.species_without_inflow.empty() && rep.species_without_outflow.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// Text form

inline std::string to_dsl(const Complex& c, const ReactionNetwork& net) {
  if (c.empty()) return "0";
  std::string out;
  for (auto [s, k] : c.coefficients()) {
    if (!out.empty()) out += " + ";
    if (k != 1) out += std::to_string(k) + " ";
    out += net.species_name(s);
  }
  return out;
}

/// Serializes a network in the DSL accepted by parse_network().
inline std::string to_dsl(const ReactionNetwork& net) {
  std::ostringstream os;
  os << "species";
  for (const auto& s : net.species()) os << ' ' << s;
  os << '\n';
  for (const auto& rx : net.reactions()) {
    os << "reaction " << to_dsl(rx.source, net) << " -> " << to_dsl(rx.target, net) << " rate " << rx.rate;
    if (const auto* u = std::get_if<UniformDelay>(&rx.delay)) {
      if (u->symbol) os << " delay " << *u->symbol;
    } else {
      const auto& m = std::get<PerProductDelay>(rx.delay).symbols;
      os << " delay {";
      bool first = true;
      for (const auto& [s, sym] : m) {
        os << (first ? " " : ", ") << net.species_name(s) << ": " << sym;
        first = false;
      }
      os << " }";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace delaystab
