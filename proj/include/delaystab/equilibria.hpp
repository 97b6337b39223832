#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "delaystab/jacobians.hpp"
#include "delaystab/params.hpp"
#include "delaystab/sign.hpp"

namespace delaystab {

struct Equilibrium {
  std::vector<double> x;
  double residual = 0.0;     ///< max |rhs(x)|
  std::vector<double> seed;  ///< starting point that converged here
};

struct EquilibriumOptions {
  std::size_t starts = 20;
  std::uint64_t seed = 20190713;
  double log10_min = -3.0;
  double log10_max = 3.0;
  /// Accept when max|rhs| <= tolerance * (1 + max x).
  double tolerance = 1e-9;
  double merge_distance = 1e-6;
  std::size_t max_iterations = 200;
  unsigned threads = 1;
  /// Tried before the sampled starts.
  std::vector<std::vector<double>> guesses;
};

/// Numeric mass-action right-hand side and Jacobian for fixed rate constants.
class MassActionField {
 public:
  MassActionField(const SymbolicModel& model, std::vector<double> rates) : rates_(std::move(rates)) {
    const auto& net = model.network();
    n_ = net.num_species();
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
      Term t;
      t.k = rates_.at(r);
      for (auto [s, y] : net.reaction(r).source.coefficients()) t.source.emplace_back(s, y);
      for (std::size_t i = 0; i < n_; ++i) {
        long d = long(net.reaction(r).target[i]) - long(net.reaction(r).source[i]);
        if (d != 0) t.change.emplace_back(i, double(d));
      }
      terms_.push_back(std::move(t));
    }
  }

  std::size_t dim() const { return n_; }

  Eigen::VectorXd rhs(const Eigen::VectorXd& x) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(Eigen::Index(n_));
    for (const auto& t : terms_) {
      double v = t.k;
      for (auto [s, y] : t.source) v *= std::pow(x(Eigen::Index(s)), double(y));
      for (auto [i, d] : t.change) f(Eigen::Index(i)) += d * v;
    }
    return f;
  }

  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(Eigen::Index(n_), Eigen::Index(n_));
    for (const auto& t : terms_) {
      for (auto [s, y] : t.source) {
        double v = t.k * double(y);
        for (auto [s2, y2] : t.source) v *= std::pow(x(Eigen::Index(s2)), double(s2 == s ? y2 - 1 : y2));
        for (auto [i, d] : t.change) J(Eigen::Index(i), Eigen::Index(s)) += d * v;
      }
    }
    return J;
  }

 private:
  struct Term {
    double k = 0.0;
    std::vector<std::pair<std::size_t, unsigned>> source;
    std::vector<std::pair<std::size_t, double>> change;
  };
  std::size_t n_ = 0;
  std::vector<double> rates_;
  std::vector<Term> terms_;
};

namespace detail {

inline bool accepted(const Eigen::VectorXd& x, const Eigen::VectorXd& f, double tol) {
  return f.lpNorm<Eigen::Infinity>() <= tol * (1.0 + x.lpNorm<Eigen::Infinity>());
}

/// Damped Newton with a Levenberg–Marquardt fallback when the Newton direction
/// cannot be damped into a decrease (singular or badly conditioned J).
inline std::optional<Eigen::VectorXd> newton_solve(const MassActionField& field, Eigen::VectorXd x,
                                                   const EquilibriumOptions& opt) {
  Eigen::VectorXd f = field.rhs(x);
  double fnorm = f.norm();
  double mu = 1e-3;
  std::size_t accepted_streak = 0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    if (detail::accepted(x, f, opt.tolerance)) {
      // A few extra steps push the residual toward machine precision.
      if (++accepted_streak > 3 || fnorm == 0.0) return x;
    }
    Eigen::MatrixXd J = field.jacobian(x);
    Eigen::VectorXd dx = J.completeOrthogonalDecomposition().solve(-f);
    bool moved = false;
    double step = 1.0;
    for (int halving = 0; halving <= 40; ++halving, step *= 0.5) {
      Eigen::VectorXd trial = x + step * dx;
      if ((trial.array() <= 0).any()) continue;
      Eigen::VectorXd ft = field.rhs(trial);
      if (ft.norm() < fnorm) {
        x = trial;
        f = ft;
        fnorm = ft.norm();
        moved = true;
        break;
      }
    }
    if (!moved) {
      Eigen::MatrixXd JtJ = J.transpose() * J;
      Eigen::VectorXd g = J.transpose() * f;
      for (int attempt = 0; attempt < 30 && !moved; ++attempt, mu *= 10) {
        Eigen::MatrixXd A = JtJ;
        A.diagonal().array() += mu * (1.0 + JtJ.diagonal().array());
        Eigen::VectorXd d = A.ldlt().solve(-g);
        Eigen::VectorXd trial = x + d;
        if ((trial.array() <= 0).any()) continue;
        Eigen::VectorXd ft = field.rhs(trial);
        if (ft.norm() < fnorm) {
          x = trial;
          f = ft;
          fnorm = ft.norm();
          moved = true;
          mu = std::max(mu / 100, 1e-12);
        }
      }
    }
    if (!moved) break;
  }
  if (detail::accepted(x, f, opt.tolerance)) return x;
  return std::nullopt;
}

}  // namespace detail

/// Positive equilibria of the mass-action system by multi-start damped Newton.
/// Starts are log-uniform low-discrepancy points in [10^min, 10^max]^n.
/// Results are merged at relative distance `merge_distance` and sorted
/// lexicographically. An empty result means no start converged.
inline std::vector<Equilibrium> find_equilibria(const SymbolicModel& model, const ParameterAssignment& params,
                                                const EquilibriumOptions& opt = {}) {
  const auto& net = model.network();
  MassActionField field(model, rate_vector(net, params));
  const std::size_t n = net.num_species();
  SamplerConfig sc;
  sc.seed = opt.seed;
  sc.log10_min = opt.log10_min;
  sc.log10_max = opt.log10_max;
  PositiveSampler sampler(n, sc);

  for (const auto& g : opt.guesses)
    if (g.size() != n || std::any_of(g.begin(), g.end(), [](double v) { return !(v > 0); }))
      throw std::invalid_argument("initial guesses must be positive vectors of the network's dimension");
  const std::size_t total = opt.guesses.size() + opt.starts;
  std::vector<std::optional<Equilibrium>> found(total);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t s = begin; s < total; s += stride) {
      auto seed = s < opt.guesses.size() ? opt.guesses[s] : sampler.point(s - opt.guesses.size());
      Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(seed.data(), Eigen::Index(n));
      if (auto x = detail::newton_solve(field, x0, opt)) {
        Equilibrium e;
        e.x.assign(x->data(), x->data() + n);
        e.residual = field.rhs(*x).lpNorm<Eigen::Infinity>();
        e.seed = seed;
        found[s] = std::move(e);
      }
    }
  };
  unsigned threads = std::max(1u, std::min<unsigned>(opt.threads, unsigned(total)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& t : pool) t.join();
  }

  std::vector<Equilibrium> out;
  for (auto& f : found) {
    if (!f) continue;
    bool duplicate = false;
    for (auto& e : out) {
      double dist = 0.0, mag = 1.0;
      for (std::size_t i = 0; i < n; ++i) {
        dist = std::max(dist, std::abs(e.x[i] - f->x[i]));
        mag = std::max(mag, std::abs(e.x[i]));
      }
      if (dist <= opt.merge_distance * mag) {
        if (f->residual < e.residual) e = *f;
        duplicate = true;
        break;
      }
    }
    if (!duplicate) out.push_back(std::move(*f));
  }
  std::sort(out.begin(), out.end(), [](const Equilibrium& a, const Equilibrium& b) { return a.x < b.x; });
  return out;
}

inline std::vector<Equilibrium> find_equilibria(const ReactionNetwork& net, const ParameterAssignment& params,
                                                const EquilibriumOptions& opt = {}) {
  return find_equilibria(SymbolicModel(net), params, opt);
}

}  // namespace delaystab
