#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "delaystab/jacobians.hpp"
#include "delaystab/params.hpp"

namespace delaystab {

using cplx = std::complex<double>;

inline Eigen::MatrixXd evaluate_matrix(const SymbolicMatrix& m, const std::vector<double>& point) {
  Eigen::MatrixXd out(m.dim(), m.dim());
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = 0; j < m.dim(); ++j) out(i, j) = CompiledPolynomial(m(i, j))(point);
  return out;
}

/// Linearization at a positive state for given rates and delays:
/// J_lambda = undelayed + sum_d A_d exp(-lambda tau_d).
class CharacteristicFunction {
 public:
  CharacteristicFunction(const SymbolicModel& model, const std::vector<double>& x, const ParameterAssignment& params) {
    auto pt = model.point(rate_vector(model.network(), params), x);
    undelayed_ = evaluate_matrix(model.delay_blocks().undelayed, pt);
    for (const auto& b : model.delay_blocks().delayed) {
      double tau = delay_value(params, b.symbol);
      Eigen::MatrixXd a = evaluate_matrix(b.coefficients, pt);
      if (tau == 0.0) {
        undelayed_ += a;
      } else {
        delays_.push_back(tau);
        blocks_.push_back(std::move(a));
      }
    }
    jacobian_ = undelayed_;
    for (const auto& a : blocks_) jacobian_ += a;
    Eigen::MatrixXd absum = undelayed_.cwiseAbs();
    for (const auto& a : blocks_) absum += a.cwiseAbs();
    row_abs_ = absum.rowwise().sum();
  }

  std::size_t dim() const { return static_cast<std::size_t>(undelayed_.rows()); }

  Eigen::MatrixXcd matrix(cplx lambda) const {
    Eigen::MatrixXcd m = undelayed_.cast<cplx>();
    for (std::size_t d = 0; d < blocks_.size(); ++d) m += blocks_[d].cast<cplx>() * std::exp(-lambda * delays_[d]);
    m.diagonal().array() -= lambda;
    return m;
  }

  /// det(J_lambda - lambda I).
  cplx operator()(cplx lambda) const {
    if (dim() == 0) return cplx(1.0);
    return matrix(lambda).partialPivLu().determinant();
  }

  /// Hadamard bound on |char(lambda)|: product of row sums of entry magnitudes.
  /// Residual tolerances are relative to it.
  double scale(cplx lambda) const {
    Eigen::ArrayXd rows = undelayed_.cwiseAbs().rowwise().sum().array();
    for (std::size_t d = 0; d < blocks_.size(); ++d)
      rows += std::exp(-lambda.real() * delays_[d]) * blocks_[d].cwiseAbs().rowwise().sum().array();
    rows += std::abs(lambda);
    return rows.prod();
  }

  /// Every root with Re(lambda) >= 0 satisfies |lambda| <= this bound (|exp(-lambda tau)| <= 1 there).
  double right_half_plane_bound() const { return row_abs_.size() == 0 ? 0.0 : row_abs_.maxCoeff(); }

  double max_delay() const { return delays_.empty() ? 0.0 : *std::max_element(delays_.begin(), delays_.end()); }
  const std::vector<double>& delays() const { return delays_; }
  const Eigen::MatrixXd& jacobian() const { return jacobian_; }
  const Eigen::MatrixXd& undelayed() const { return undelayed_; }
  const std::vector<Eigen::MatrixXd>& delayed_blocks() const { return blocks_; }

 private:
  Eigen::MatrixXd undelayed_, jacobian_;
  std::vector<double> delays_;
  std::vector<Eigen::MatrixXd> blocks_;
  Eigen::VectorXd row_abs_;
};

/// det(J_lambda(x*, k, tau) - lambda I) at a single lambda.
inline cplx char_function(const ReactionNetwork& net, const std::vector<double>& x, const ParameterAssignment& params,
                          cplx lambda) {
  SymbolicModel model(net);
  return CharacteristicFunction(model, x, params)(lambda);
}

}  // namespace delaystab
