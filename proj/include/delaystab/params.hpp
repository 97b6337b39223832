#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaystab/network.hpp"
#include "delaystab/parser.hpp"

namespace delaystab {

/// Rate constants (> 0), delays (>= 0) and optionally a state, keyed by symbol.
struct ParameterAssignment {
  std::map<std::string, Rational> rates;
  std::map<std::string, Rational> delays;
  /// Species name -> concentration (point mode only).
  std::map<std::string, Rational> state;
};

class ParameterError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorts a key/value table into rates, delays and state for `net`.
/// Unknown keys are rejected. Missing delays default to 0 only when
/// `require_delays` is false.
inline ParameterAssignment bind_parameters(const ReactionNetwork& net, const std::map<std::string, Rational>& table,
                                           bool require_delays = true) {
  ParameterAssignment out;
  auto rates = net.rate_symbols();
  auto delays = net.delay_symbols();
  auto contains = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  for (const auto& [key, value] : table) {
    bool is_rate = contains(rates, key), is_delay = contains(delays, key);
    bool is_species = net.species_index(key).has_value();
    if (int(is_rate) + int(is_delay) + int(is_species) > 1)
      throw ParameterError("key '" + key + "' is ambiguous (names both a species and a parameter)");
    if (is_rate) {
      if (value <= 0) throw ParameterError("rate constant '" + key + "' must be positive");
      out.rates[key] = value;
    } else if (is_delay) {
      if (value < 0) throw ParameterError("delay '" + key + "' must be non-negative");
      out.delays[key] = value;
    } else if (is_species) {
      out.state[key] = value;
    } else {
      throw ParameterError("unknown parameter '" + key + "'");
    }
  }
  for (const auto& r : rates)
    if (!out.rates.count(r)) throw ParameterError("missing rate constant '" + r + "'");
  for (const auto& d : delays) {
    if (out.delays.count(d)) continue;
    if (require_delays) throw ParameterError("missing delay '" + d + "'");
    out.delays[d] = 0;
  }
  return out;
}

inline ParameterAssignment load_parameters(const ReactionNetwork& net, const std::string& path, bool require_delays = true) {
  return bind_parameters(net, parse_key_values(read_text_file(path)), require_delays);
}

/// Rate constants as doubles in reaction order.
inline std::vector<double> rate_vector(const ReactionNetwork& net, const ParameterAssignment& p) {
  std::vector<double> k;
  for (const auto& r : net.reactions()) {
    auto it = p.rates.find(r.rate);
    if (it == p.rates.end()) throw ParameterError("missing rate constant '" + r.rate + "'");
    if (it->second <= 0) throw ParameterError("rate constant '" + r.rate + "' must be positive");
    k.push_back(it->second.get_d());
  }
  return k;
}

inline double delay_value(const ParameterAssignment& p, const std::optional<std::string>& symbol) {
  if (!symbol) return 0.0;
  auto it = p.delays.find(*symbol);
  if (it == p.delays.end()) throw ParameterError("missing delay '" + *symbol + "'");
  if (it->second < 0) throw ParameterError("delay '" + *symbol + "' must be non-negative");
  return it->second.get_d();
}

/// State vector from the assignment (species order); nullopt when incomplete.
inline std::optional<std::vector<double>> state_vector(const ReactionNetwork& net, const ParameterAssignment& p) {
  std::vector<double> x;
  for (const auto& s : net.species()) {
    auto it = p.state.find(s);
    if (it == p.state.end()) return std::nullopt;
    x.push_back(it->second.get_d());
  }
  return x;
}

}  // namespace delaystab
