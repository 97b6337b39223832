#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "delaystab/exact_linalg.hpp"
#include "delaystab/network.hpp"
#include "delaystab/params.hpp"

namespace delaystab {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the integrator produces a non-positive concentration.
class NonPositiveState : public SimulationError {
 public:
  NonPositiveState(double t, std::size_t component, double value)
      : SimulationError("non-positive state x" + std::to_string(component + 1) + " = " + std::to_string(value) +
                        " at t = " + std::to_string(t)),
        time(t),
        component(component),
        value(value) {}
  double time;
  std::size_t component;
  double value;
};

inline double hermite(double t0, double t1, double y0, double y1, double d0, double d1, double t) {
  double h = t1 - t0;
  double s = (t - t0) / h;
  double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * d1;
}

/// Initial data on [-tau_max, 0]: a constant vector, or a monotone
/// piecewise-cubic interpolant through samples (Fritsch–Carlson slopes).
class HistoryFunction {
 public:
  enum class Kind { Constant, PiecewiseCubic };

  static HistoryFunction constant(std::vector<double> value) {
    HistoryFunction h;
    h.kind_ = Kind::Constant;
    for (double v : value)
      if (!(v > 0)) throw std::invalid_argument("history must be strictly positive");
    h.values_ = {std::move(value)};
    return h;
  }

  /// `times` strictly increasing and ending at 0; values[k] is the state at times[k].
  static HistoryFunction piecewise_cubic(std::vector<double> times, std::vector<std::vector<double>> values) {
    if (times.size() < 2 || times.size() != values.size()) throw std::invalid_argument("history needs at least two samples");
    if (times.back() != 0.0) throw std::invalid_argument("history samples must end at t = 0");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw std::invalid_argument("history times must increase");
    const std::size_t n = values.front().size();
    for (const auto& v : values) {
      if (v.size() != n) throw std::invalid_argument("history samples differ in dimension");
      for (double x : v)
        if (!(x > 0)) throw std::invalid_argument("history must be strictly positive");
    }
    HistoryFunction h;
    h.kind_ = Kind::PiecewiseCubic;
    h.times_ = std::move(times);
    h.values_ = std::move(values);
    const std::size_t m = h.times_.size();
    h.slopes_.assign(m, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<double> delta(m - 1);
      for (std::size_t i = 0; i + 1 < m; ++i)
        delta[i] = (h.values_[i + 1][c] - h.values_[i][c]) / (h.times_[i + 1] - h.times_[i]);
      h.slopes_[0][c] = delta[0];
      h.slopes_[m - 1][c] = delta[m - 2];
      for (std::size_t i = 1; i + 1 < m; ++i) h.slopes_[i][c] = delta[i - 1] * delta[i] > 0 ? (delta[i - 1] + delta[i]) / 2 : 0.0;
      for (std::size_t i = 0; i + 1 < m; ++i) {
        if (delta[i] == 0.0) {
          h.slopes_[i][c] = h.slopes_[i + 1][c] = 0.0;
          continue;
        }
        double a = h.slopes_[i][c] / delta[i], b = h.slopes_[i + 1][c] / delta[i];
        double r = a * a + b * b;
        if (r > 9.0) {
          double t = 3.0 / std::sqrt(r);
          h.slopes_[i][c] = t * a * delta[i];
          h.slopes_[i + 1][c] = t * b * delta[i];
        }
      }
    }
    return h;
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return values_.empty() ? 0 : values_.front().size(); }
  /// Earliest time covered (-inf for constants).
  double start() const { return kind_ == Kind::Constant ? -std::numeric_limits<double>::infinity() : times_.front(); }

  void evaluate(double t, double* out) const {
    const std::size_t n = dim();
    if (kind_ == Kind::Constant) {
      std::copy(values_[0].begin(), values_[0].end(), out);
      return;
    }
    if (t < times_.front() - 1e-12 || t > 1e-12) throw std::out_of_range("history queried outside its interval");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    std::size_t k = it == times_.begin() ? 0 : std::size_t(it - times_.begin()) - 1;
    k = std::min(k, times_.size() - 2);
    for (std::size_t c = 0; c < n; ++c)
      out[c] = hermite(times_[k], times_[k + 1], values_[k][c], values_[k + 1][c], slopes_[k][c], slopes_[k + 1][c], t);
  }

  std::vector<double> operator()(double t) const {
    std::vector<double> v(dim());
    evaluate(t, v.data());
    return v;
  }

 private:
  Kind kind_ = Kind::Constant;
  std::vector<double> times_;
  std::vector<std::vector<double>> values_, slopes_;
};

/// Mesh states and derivatives on [0, t_end] with cubic Hermite dense output;
/// earlier times are served by the history.
class Trajectory {
 public:
  Trajectory(HistoryFunction history, std::size_t n) : history_(std::move(history)), n_(n) {}

  std::size_t dim() const { return n_; }
  const std::vector<double>& times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  const double* state(std::size_t k) const { return &states_[k * n_]; }
  const double* derivative(std::size_t k) const { return &derivs_[k * n_]; }
  double t_end() const { return times_.empty() ? 0.0 : times_.back(); }
  const std::vector<double>& discontinuity_ladder() const { return ladder_; }
  const HistoryFunction& history() const { return history_; }

  /// Dense output at t; `cursor` caches the last segment for monotone queries.
  void evaluate(double t, double* out, std::size_t& cursor) const {
    if (t < 0.0 || times_.empty()) {
      history_.evaluate(std::min(t, 0.0), out);
      return;
    }
    if (t > times_.back() + 1e-12 * (1.0 + times_.back())) throw std::out_of_range("trajectory queried beyond its end");
    const std::size_t last = times_.size() - 1;
    if (last == 0) {
      std::copy(state(0), state(0) + n_, out);
      return;
    }
    std::size_t k = std::min(cursor, last - 1);
    if (times_[k] <= t && t <= times_[k + 1]) {
      // cached
    } else if (t > times_[k + 1] && k + 2 <= last && t <= times_[k + 2]) {
      ++k;
    } else {
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      k = it == times_.begin() ? 0 : std::size_t(it - times_.begin()) - 1;
      k = std::min(k, last - 1);
    }
    cursor = k;
    const double *y0 = state(k), *y1 = state(k + 1), *d0 = derivative(k), *d1 = derivative(k + 1);
    for (std::size_t c = 0; c < n_; ++c) out[c] = hermite(times_[k], times_[k + 1], y0[c], y1[c], d0[c], d1[c], t);
  }

  std::vector<double> operator()(double t) const {
    std::vector<double> v(n_);
    std::size_t cursor = 0;
    evaluate(t, v.data(), cursor);
    return v;
  }

  void push(double t, const double* x, const double* dx) {
    times_.push_back(t);
    states_.insert(states_.end(), x, x + n_);
    derivs_.insert(derivs_.end(), dx, dx + n_);
  }
  void set_derivative(std::size_t k, const double* dx) { std::copy(dx, dx + n_, &derivs_[k * n_]); }
  void set_ladder(std::vector<double> l) { ladder_ = std::move(l); }

 private:
  HistoryFunction history_;
  std::size_t n_;
  std::vector<double> times_, states_, derivs_, ladder_;
};

/// Right-hand side of the delay mass-action system: consumption uses x(t),
/// production of species i by a reaction uses x(t - tau) for that product's delay.
class DelayField {
 public:
  DelayField(const ReactionNetwork& net, const ParameterAssignment& params) : n_(net.num_species()) {
    auto k = rate_vector(net, params);
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
      const auto& rx = net.reaction(r);
      Term t;
      t.k = k[r];
      for (auto [s, y] : rx.source.coefficients()) t.source.emplace_back(s, y);
      for (auto [s, y] : rx.source.coefficients()) t.consumption.emplace_back(s, double(y));
      for (auto [s, y] : rx.target.coefficients()) {
        double tau = delay_value(params, delay_for_product(rx.delay, s));
        std::size_t slot = 0;
        if (tau > 0) {
          auto it = std::find(delays_.begin(), delays_.end(), tau);
          slot = std::size_t(it - delays_.begin()) + 1;
          if (it == delays_.end()) delays_.push_back(tau);
        }
        t.production.push_back({s, double(y), slot});
      }
      terms_.push_back(std::move(t));
    }
  }

  std::size_t dim() const { return n_; }
  /// Distinct positive delays; slot d + 1 in production terms refers to delays()[d].
  const std::vector<double>& delays() const { return delays_; }

  /// states[0] = x(t); states[d + 1] = x(t - delays()[d]).
  void operator()(const std::vector<const double*>& states, double* out) const {
    std::fill(out, out + n_, 0.0);
    for (const auto& t : terms_) {
      double now = t.k * monomial(states[0], t.source);
      for (auto [s, y] : t.consumption) out[s] -= y * now;
      for (const auto& p : t.production) out[p.species] += p.coef * (p.slot == 0 ? now : t.k * monomial(states[p.slot], t.source));
    }
  }

 private:
  static double monomial(const double* x, const std::vector<std::pair<std::size_t, unsigned>>& e) {
    double v = 1.0;
    for (auto [s, y] : e) {
      double b = x[s];
      for (unsigned i = 0; i < y; ++i) v *= b;
    }
    return v;
  }
  struct Product {
    std::size_t species;
    double coef;
    std::size_t slot;
  };
  struct Term {
    double k = 0.0;
    std::vector<std::pair<std::size_t, unsigned>> source;
    std::vector<std::pair<std::size_t, double>> consumption;
    std::vector<Product> production;
  };
  std::size_t n_;
  std::vector<double> delays_;
  std::vector<Term> terms_;
};

/// Sums m_1 d_1 + ... with 1 <= sum m_i <= depth, inside (0, t_end).
inline std::vector<double> discontinuity_ladder(const std::vector<double>& delays, double t_end, int depth = 3) {
  std::set<double> points;
  std::vector<double> frontier{0.0};
  for (int level = 0; level < depth; ++level) {
    std::vector<double> next;
    for (double base : frontier)
      for (double d : delays) {
        double t = base + d;
        if (t < t_end && points.insert(t).second) next.push_back(t);
      }
    frontier = std::move(next);
  }
  return {points.begin(), points.end()};
}

struct SimulationOptions {
  double t_end = 100.0;
  double h = 0.01;
  int ladder_depth = 3;
};

/// Method of steps with classical RK4 and cubic Hermite dense output for the
/// delayed states. Ladder points are mesh points, and each inter-ladder
/// interval is split into equal steps no longer than h. With all delays zero
/// this is plain RK4 on the mass-action ODE.
inline Trajectory simulate_dde(const ReactionNetwork& net, const ParameterAssignment& params, const HistoryFunction& history,
                               const SimulationOptions& opt) {
  if (!(opt.t_end > 0)) throw SimulationError("t_end must be positive");
  if (!(opt.h > 0)) throw SimulationError("step size must be positive");
  DelayField field(net, params);
  const std::size_t n = field.dim();
  if (history.dim() != n) throw SimulationError("history dimension does not match the network");
  const auto& delays = field.delays();
  if (!delays.empty()) {
    double dmin = *std::min_element(delays.begin(), delays.end());
    double dmax = *std::max_element(delays.begin(), delays.end());
    if (opt.h > dmin / 4 * (1 + 1e-12))
      throw SimulationError("step size " + std::to_string(opt.h) + " exceeds a quarter of the smallest delay");
    if (history.start() > -dmax + 1e-12) throw SimulationError("history does not cover [-max delay, 0]");
  }

  Trajectory traj(history, n);
  auto ladder = discontinuity_ladder(delays, opt.t_end, opt.ladder_depth);
  traj.set_ladder(ladder);
  std::vector<double> marks = ladder;
  marks.push_back(opt.t_end);

  const std::size_t nd = delays.size();
  std::vector<std::size_t> cursors(nd, 0);
  std::vector<std::vector<double>> lag(nd, std::vector<double>(n));
  std::vector<const double*> states(nd + 1);
  for (std::size_t d = 0; d < nd; ++d) states[d + 1] = lag[d].data();

  auto eval = [&](double t, const double* x, double* out) {
    states[0] = x;
    for (std::size_t d = 0; d < nd; ++d) traj.evaluate(t - delays[d], lag[d].data(), cursors[d]);
    field(states, out);
  };

  std::vector<double> x = history(0.0), k1(n), k2(n), k3(n), k4(n), tmp(n), f0(n);
  eval(0.0, x.data(), f0.data());
  traj.push(0.0, x.data(), f0.data());

  double t = 0.0;
  for (double mark : marks) {
    double len = mark - t;
    if (len <= 0) continue;
    auto steps = static_cast<std::size_t>(std::ceil(len / opt.h - 1e-9));
    steps = std::max<std::size_t>(steps, 1);
    double h = len / double(steps);
    double t0 = t;
    for (std::size_t s = 0; s < steps; ++s) {
      double tc = t0 + h * double(s);
      // k1 reuses the derivative stored at the current mesh point.
      std::copy(traj.derivative(traj.size() - 1), traj.derivative(traj.size() - 1) + n, k1.begin());
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      eval(tc + 0.5 * h, tmp.data(), k2.data());
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      eval(tc + 0.5 * h, tmp.data(), k3.data());
      for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
      eval(tc + h, tmp.data(), k4.data());
      for (std::size_t i = 0; i < n; ++i) x[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      double tn = s + 1 == steps ? mark : t0 + h * double(s + 1);
      for (std::size_t i = 0; i < n; ++i)
        if (!(x[i] > 0)) throw NonPositiveState(tn, i, x[i]);
      // Derivative at the new point; lookups at tn - d never reach past tn - 4h.
      eval(tn, x.data(), f0.data());
      traj.push(tn, x.data(), f0.data());
    }
    t = mark;
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Conservation diagnostics

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double eps, int depth = 30) {
  auto simpson = [&](double fa, double fm, double fb, double l, double r) { return (r - l) / 6 * (fa + 4 * fm + fb); };
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double l, double r, double fl, double fm, double fr, double whole, double e, int d) {
        double m = (l + r) / 2, lm = (l + m) / 2, rm = (m + r) / 2;
        double flm = f(lm), frm = f(rm);
        double left = simpson(fl, flm, fm, l, m), right = simpson(fm, frm, fr, m, r);
        if (d <= 0 || std::abs(left + right - whole) <= 15 * e) return left + right + (left + right - whole) / 15;
        return rec(l, m, fl, flm, fm, left, e / 2, d - 1) + rec(m, r, fm, frm, fr, right, e / 2, d - 1);
      };
  if (a == b) return 0.0;
  double fa = f(a), fb = f(b), fm = f((a + b) / 2);
  return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), eps, depth);
}

struct ConservationSeries {
  std::vector<std::vector<mpz_class>> laws;
  std::vector<double> times;
  std::vector<double> max_residual;  ///< max over laws of |I_c(t) - I_c(0)|
  std::string note;
};

/// For each integer c orthogonal to the stoichiometric subspace,
///   I_c(t) = c.x(t) + sum_r k_r sum_i c_i y'_i * integral_{t - tau_ri}^{t} x(s)^y ds
/// is constant along exact solutions. Integrals use the dense output,
/// split at mesh points, with adaptive Simpson on each piece.
inline ConservationSeries conservation_residual(const ReactionNetwork& net, const Trajectory& traj,
                                                const ParameterAssignment& params, const std::vector<double>& times) {
  ConservationSeries out;
  out.laws = conservation_basis(net);
  if (out.laws.empty()) {
    out.note = "stoichiometric subspace has full rank; no conservation relations";
    return out;
  }
  auto k = rate_vector(net, params);
  struct Piece {
    double weight;  // k c_i y'_i, per law
    double tau;
    std::size_t reaction;
  };
  std::vector<std::vector<Piece>> pieces(out.laws.size());
  for (std::size_t l = 0; l < out.laws.size(); ++l)
    for (std::size_t r = 0; r < net.num_reactions(); ++r) {
      const auto& rx = net.reaction(r);
      for (auto [s, y] : rx.target.coefficients()) {
        double tau = delay_value(params, delay_for_product(rx.delay, s));
        double w = k[r] * out.laws[l][s].get_d() * double(y);
        if (tau > 0 && w != 0) pieces[l].push_back({w, tau, r});
      }
    }

  const std::size_t n = traj.dim();
  std::vector<double> buf(n);
  std::size_t cursor = 0;
  auto rate_monomial = [&](std::size_t r, double s) {
    traj.evaluate(s, buf.data(), cursor);
    double v = 1.0;
    for (auto [sp, y] : net.reaction(r).source.coefficients()) v *= std::pow(buf[sp], double(y));
    return v;
  };
  const auto& mesh = traj.times();
  auto integral = [&](std::size_t r, double a, double b) {
    std::vector<double> cuts{a};
    if (a < 0) cuts.push_back(std::min(0.0, b));
    auto lo = std::upper_bound(mesh.begin(), mesh.end(), std::max(a, 0.0));
    for (auto it = lo; it != mesh.end() && *it < b; ++it) cuts.push_back(*it);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] <= cuts[i]) continue;
      total += adaptive_simpson([&](double s) { return rate_monomial(r, s); }, cuts[i], cuts[i + 1], 1e-13, 12);
    }
    return total;
  };
  auto invariant = [&](std::size_t l, double t) {
    auto x = traj(t);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += out.laws[l][i].get_d() * x[i];
    for (const auto& p : pieces[l]) v += p.weight * integral(p.reaction, t - p.tau, t);
    return v;
  };
  std::vector<double> initial(out.laws.size());
  for (std::size_t l = 0; l < out.laws.size(); ++l) initial[l] = invariant(l, 0.0);
  for (double t : times) {
    double worst = 0.0;
    for (std::size_t l = 0; l < out.laws.size(); ++l) worst = std::max(worst, std::abs(invariant(l, t) - initial[l]));
    out.times.push_back(t);
    out.max_residual.push_back(worst);
  }
  return out;
}

}  // namespace delaystab
