#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "delaystab/network.hpp"
#include "delaystab/rational.hpp"

namespace delaystab {

/// Syntax or semantic error in DSL or parameter text, with a 1-based position.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

namespace detail {

struct Token {
  enum Kind { Ident, Number, Symbol, End } kind = End;
  std::string text;
  std::size_t column = 0;
};

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::vector<Token> tokenize(std::string_view line, std::size_t line_no) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    Token t;
    t.column = i + 1;
    if (ident_start(c)) {
      t.kind = Token::Ident;
      while (i < line.size() && ident_char(line[i])) t.text.push_back(line[i++]);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      t.kind = Token::Number;
      while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '.' || line[i] == '/'))
        t.text.push_back(line[i++]);
    } else if (line.substr(i, 3) == "<->") {
      t = {Token::Symbol, "<->", i + 1};
      i += 3;
    } else if (line.substr(i, 2) == "->") {
      t = {Token::Symbol, "->", i + 1};
      i += 2;
    } else if (c == '+' || c == '{' || c == '}' || c == ':' || c == ',' || c == '-' || c == '=') {
      t = {Token::Symbol, std::string(1, c), i + 1};
      ++i;
    } else {
      throw ParseError(line_no, i + 1, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  out.push_back(Token{Token::End, "", line.size() + 1});
  return out;
}

inline bool is_keyword(const std::string& s) {
  return s == "species" || s == "reaction" || s == "rate" || s == "delay";
}

/// Splits a numeric token like "2A1" into its integer prefix and identifier tail.
inline std::pair<std::string, std::string> split_number_prefix(const std::string& s) {
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  return {s.substr(0, i), s.substr(i)};
}

class LineParser {
 public:
  LineParser(std::vector<Token> toks, std::size_t line_no) : toks_(std::move(toks)), line_(line_no) {}

  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  bool at_end() const { return peek().kind == Token::End; }
  bool peek_symbol(std::string_view s) const { return peek().kind == Token::Symbol && peek().text == s; }

  [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(line_, t.column, msg); }

  void expect_symbol(std::string_view s) {
    const auto& t = next();
    if (t.kind != Token::Symbol || t.text != s) fail(t, "expected '" + std::string(s) + "'");
  }
  std::string expect_ident(const std::string& what) {
    const auto& t = next();
    if (t.kind != Token::Ident) fail(t, "expected " + what);
    if (is_keyword(t.text)) fail(t, "keyword '" + t.text + "' cannot be used as " + what);
    return t.text;
  }
  void expect_keyword(const std::string& kw) {
    const auto& t = next();
    if (t.kind != Token::Ident || t.text != kw) fail(t, "expected '" + kw + "'");
  }

  struct Term {
    unsigned coefficient;
    std::string species;
    std::size_t column;
  };

  /// `0` or term ('+' term)*; an empty list stands for the zero complex.
  std::vector<Term> complex() {
    std::vector<Term> terms;
    if (peek().kind == Token::Number && peek().text == "0") {
      std::size_t save = pos_;
      next();
      if (peek().kind != Token::Ident || is_keyword(peek().text)) return terms;
      pos_ = save;
    }
    while (true) {
      terms.push_back(term());
      if (!peek_symbol("+")) break;
      next();
    }
    return terms;
  }

 private:
  Term term() {
    const auto& t = peek();
    if (t.kind == Token::Symbol && t.text == "-") fail(t, "negative stoichiometric coefficient");
    if (t.kind == Token::Number) {
      next();
      if (t.text.find_first_of("./") != std::string::npos) fail(t, "fractional stoichiometric coefficient '" + t.text + "'");
      auto [digits, tail] = split_number_prefix(t.text);
      if (tail.find_first_of("eE") == 0 && tail.size() > 1 && std::isdigit(static_cast<unsigned char>(tail[1])))
        fail(t, "fractional stoichiometric coefficient '" + t.text + "'");
      unsigned long k = std::stoul(digits);
      if (k == 0) fail(t, "zero stoichiometric coefficient");
      if (k > 255) fail(t, "stoichiometric coefficient too large");
      if (!tail.empty()) {
        if (!ident_start(tail[0])) fail(t, "malformed term '" + t.text + "'");
        return {static_cast<unsigned>(k), tail, t.column + digits.size()};
      }
      std::size_t col = peek().column;
      return {static_cast<unsigned>(k), expect_ident("species name"), col};
    }
    std::size_t col = t.column;
    return {1u, expect_ident("species name"), col};
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace detail

/// Parses the network DSL:
///
///     species A1 A2 A3                                  (optional, fixes order)
///     reaction A1 + A2 -> A3 rate k1 delay tau1
///     reaction A5 -> A2 + A5 rate k8 delay { A2: tau2, A5: tau5 }
///     reaction A1 <-> 0 rate k4                         (k4_fwd, k4_rev)
///
/// The result is fully validated; delays on inflow/outflow reactions are rejected.
inline ReactionNetwork parse_network(std::string_view text, std::string name = "network") {
  std::vector<std::string> species;
  bool species_fixed = false;
  std::vector<Reaction> reactions;
  std::vector<std::size_t> reaction_lines;
  std::map<std::string, std::size_t> rate_lines;

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    detail::LineParser p(detail::tokenize(raw, line_no), line_no);
    if (p.at_end()) continue;
    const auto& head = p.next();
    if (head.kind != detail::Token::Ident) p.fail(head, "expected 'species' or 'reaction'");

    if (head.text == "species") {
      if (species_fixed) p.fail(head, "duplicate species directive");
      if (!reactions.empty()) p.fail(head, "species directive must precede reactions");
      species_fixed = true;
      while (!p.at_end()) {
        const auto& tok = p.peek();
        auto s = p.expect_ident("species name");
        if (std::find(species.begin(), species.end(), s) != species.end()) p.fail(tok, "duplicate species '" + s + "'");
        species.push_back(s);
      }
      if (species.empty()) p.fail(head, "species directive lists no species");
      continue;
    }
    if (head.text != "reaction") p.fail(head, "unknown statement '" + head.text + "'");

    auto resolve = [&](const detail::LineParser::Term& t) -> std::size_t {
      auto it = std::find(species.begin(), species.end(), t.species);
      if (it != species.end()) return static_cast<std::size_t>(it - species.begin());
      if (species_fixed) throw ParseError(line_no, t.column, "species '" + t.species + "' not declared");
      species.push_back(t.species);
      return species.size() - 1;
    };
    auto build = [&](const std::vector<detail::LineParser::Term>& terms) {
      std::map<std::size_t, unsigned> m;
      for (const auto& t : terms) m[resolve(t)] += t.coefficient;
      return Complex(m);
    };

    Complex source = build(p.complex());
    const auto& arrow = p.next();
    if (arrow.kind != detail::Token::Symbol || (arrow.text != "->" && arrow.text != "<->")) p.fail(arrow, "expected '->' or '<->'");
    bool reversible = arrow.text == "<->";
    Complex target = build(p.complex());
    p.expect_keyword("rate");
    const auto& rate_tok = p.peek();
    std::string rate = p.expect_ident("rate symbol");

    DelaySpec delay = UniformDelay{};
    if (!p.at_end()) {
      const auto& kw = p.peek();
      p.expect_keyword("delay");
      if (reversible) p.fail(kw, "delays are not allowed on reversible '<->' reactions");
      auto delay_value = [&]() -> std::optional<std::string> {
        const auto& t = p.peek();
        if (t.kind == detail::Token::Number) {
          p.next();
          if (t.text != "0") p.fail(t, "delay must be a symbol or the literal 0");
          return std::nullopt;
        }
        return p.expect_ident("delay symbol");
      };
      if (p.peek_symbol("{")) {
        p.next();
        PerProductDelay pp;
        while (true) {
          const auto& st = p.peek();
          auto sp = p.expect_ident("species name");
          auto idx = std::find(species.begin(), species.end(), sp);
          if (idx == species.end() || target[static_cast<std::size_t>(idx - species.begin())] == 0)
            p.fail(st, "per-product delay names '" + sp + "', which is not a product of this reaction");
          p.expect_symbol(":");
          auto sym = delay_value();
          auto key = static_cast<std::size_t>(idx - species.begin());
          if (pp.symbols.count(key)) p.fail(st, "duplicate delay entry for '" + sp + "'");
          if (sym) pp.symbols[key] = *sym;
          if (p.peek_symbol(",")) {
            p.next();
            continue;
          }
          p.expect_symbol("}");
          break;
        }
        delay = pp;
      } else {
        delay = UniformDelay{delay_value()};
      }
      if ((source.empty() || target.empty()) && has_delay(delay))
        p.fail(kw, "inflow and outflow reactions cannot be delayed");
    }
    if (!p.at_end()) p.fail(p.peek(), "unexpected trailing input");
    if (source == target) p.fail(arrow, "source and target complexes coincide");
    if (source.empty() && target.empty()) p.fail(arrow, "reaction 0 -> 0 is not allowed");

    auto add = [&](Complex s, Complex t, std::string r, DelaySpec d) {
      if (rate_lines.count(r)) p.fail(rate_tok, "duplicate rate symbol '" + r + "' (first used on line " + std::to_string(rate_lines[r]) + ")");
      rate_lines[r] = line_no;
      reactions.push_back(Reaction{std::move(s), std::move(t), std::move(r), std::move(d)});
      reaction_lines.push_back(line_no);
    };
    if (reversible) {
      add(source, target, rate + "_fwd", UniformDelay{});
      add(target, source, rate + "_rev", UniformDelay{});
    } else {
      add(std::move(source), std::move(target), rate, delay);
    }
  }

  try {
    ReactionNetwork net(std::move(name), std::move(species), std::move(reactions));
    auto rep = validate_network(net);
    if (rep.has_hard_violations()) {
      auto r = rep.delayed_flow_violations.front();
      throw ParseError(reaction_lines[r], 1, "inflow and outflow reactions cannot be delayed");
    }
    return net;
  } catch (const NetworkError& e) {
    throw ParseError(line_no, 1, e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = base.find_last_of('.');
  return dot == std::string::npos || dot == 0 ? base : base.substr(0, dot);
}

inline ReactionNetwork load_network(const std::string& path) {
  return parse_network(read_text_file(path), file_stem(path));
}

// ---------------------------------------------------------------------------
// Parameter files

/// Raw `key = value` table; values are exact rationals.
inline std::map<std::string, Rational> parse_key_values(std::string_view text) {
  std::map<std::string, Rational> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw.substr(0, raw.find('#'));
    if (detail::trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(line_no, 1, "expected 'key = value'");
    auto key = detail::trim(line.substr(0, eq));
    auto value = detail::trim(line.substr(eq + 1));
    if (key.empty() || !detail::ident_start(key[0]) ||
        !std::all_of(key.begin(), key.end(), [](char c) { return detail::ident_char(c); }))
      throw ParseError(line_no, 1, "malformed key '" + key + "'");
    if (out.count(key)) throw ParseError(line_no, 1, "duplicate key '" + key + "'");
    try {
      out.emplace(key, parse_rational(value));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, eq + 2, e.what());
    }
  }
  return out;
}

}  // namespace delaystab
