#pragma once

#include <string>
#include <vector>

#include "delaystab/matrix.hpp"
#include "delaystab/network.hpp"

namespace delaystab {

/// Coefficient matrix of the linearization multiplying exp(-lambda * tau) for one delay symbol.
struct DelayBlock {
  std::string symbol;
  SymbolicMatrix coefficients;
};

/// J = undelayed + sum of delayed blocks; J_lambda weights each block by exp(-lambda tau).
struct DelayBlockDecomposition {
  SymbolicMatrix undelayed;
  std::vector<DelayBlock> delayed;
};

/// Symbolic objects of a network, built once.
///
/// Variable universe: the rate constants in reaction order, followed by the
/// concentrations x1..xn.
class SymbolicModel {
 public:
  explicit SymbolicModel(ReactionNetwork net) : net_(std::move(net)) {
    const std::size_t n = net_.num_species(), R = net_.num_reactions();
    std::vector<std::string> names = net_.rate_symbols();
    for (std::size_t i = 0; i < n; ++i) names.push_back(ReactionNetwork::species_variable(i));
    vars_ = VariableSet(std::move(names));
    const std::size_t nv = vars_.size();

    rhs_.assign(n, Polynomial(nv));
    jac_ = SymbolicMatrix(n, nv);
    mod_ = SymbolicMatrix(n, nv);
    blocks_.undelayed = SymbolicMatrix(n, nv);
    for (const auto& d : net_.delay_symbols()) blocks_.delayed.push_back({d, SymbolicMatrix(n, nv)});
    auto block_for = [&](const std::optional<std::string>& sym) -> SymbolicMatrix& {
      if (!sym) return blocks_.undelayed;
      for (auto& b : blocks_.delayed)
        if (b.symbol == *sym) return b.coefficients;
      throw std::logic_error("unknown delay symbol");
    };

    for (std::size_t r = 0; r < R; ++r) {
      const auto& rx = net_.reaction(r);
      // k_r x^y
      Exponents e(nv, 0);
      e[r] = 1;
      for (auto [s, y] : rx.source.coefficients()) e[R + s] = static_cast<std::uint8_t>(y);
      Polynomial rate = Polynomial::monomial(e, Rational(1));

      for (std::size_t j = 0; j < n; ++j) {
        long net_change = long(rx.target[j]) - long(rx.source[j]);
        if (net_change != 0) rhs_[j] += rate * Rational(net_change);
      }

      // Column i collects k x^y (y_i / x_i) times a column vector.
      for (auto [i, yi] : rx.source.coefficients()) {
        Exponents d = e;
        --d[R + i];
        Polynomial partial = Polynomial::monomial(d, Rational(long(yi)));
        for (std::size_t j = 0; j < n; ++j) {
          long y = rx.source[j], yp = rx.target[j];
          if (yp - y != 0) jac_(j, i) += partial * Rational(yp - y);
          long tilde = j == i ? yp - y : yp + y;
          if (tilde != 0) mod_(j, i) += partial * Rational(tilde);
          if (yp != 0) block_for(delay_for_product(rx.delay, j))(j, i) += partial * Rational(yp);
          if (y != 0) blocks_.undelayed(j, i) -= partial * Rational(y);
        }
      }
    }
  }

  const ReactionNetwork& network() const { return net_; }
  const VariableSet& variables() const { return vars_; }
  std::size_t num_variables() const { return vars_.size(); }
  std::size_t rate_variable(std::size_t reaction) const { return reaction; }
  std::size_t species_variable(std::size_t species) const { return net_.num_reactions() + species; }

  const std::vector<Polynomial>& rhs() const { return rhs_; }
  const SymbolicMatrix& jacobian() const { return jac_; }
  const SymbolicMatrix& modified_jacobian() const { return mod_; }
  const DelayBlockDecomposition& delay_blocks() const { return blocks_; }

  /// Full variable point from rate constants (reaction order) and state.
  std::vector<double> point(const std::vector<double>& rates, const std::vector<double>& x) const {
    if (rates.size() != net_.num_reactions() || x.size() != net_.num_species())
      throw std::invalid_argument("point dimension mismatch");
    std::vector<double> p = rates;
    p.insert(p.end(), x.begin(), x.end());
    return p;
  }

  std::string text(const Polynomial& p) const { return to_string(p, vars_); }

 private:
  ReactionNetwork net_;
  VariableSet vars_;
  std::vector<Polynomial> rhs_;
  SymbolicMatrix jac_, mod_;
  DelayBlockDecomposition blocks_;
};

/// Mass-action right-hand side, component i = sum_r k_r x^y (y'_i - y_i).
inline std::vector<Polynomial> rhs_polynomials(const ReactionNetwork& net) { return SymbolicModel(net).rhs(); }
inline SymbolicMatrix jacobian(const ReactionNetwork& net) { return SymbolicModel(net).jacobian(); }
inline SymbolicMatrix modified_jacobian(const ReactionNetwork& net) { return SymbolicModel(net).modified_jacobian(); }
inline DelayBlockDecomposition delay_blocks(const ReactionNetwork& net) { return SymbolicModel(net).delay_blocks(); }

}  // namespace delaystab
