#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "delaystab/characteristic.hpp"

namespace delaystab {

/// Rectangle [sigma_min, sigma_max] x [-omega_max, omega_max] in the complex plane.
struct RootRegion {
  double sigma_min = 0.0;
  double sigma_max = 1.0;
  double omega_max = 1.0;
};

struct RefinedRoot {
  cplx lambda;
  double residual = 0.0;  ///< |char(lambda)| / scale(lambda)
  bool converged = false;
  int iterations = 0;
};

struct RootCount {
  RootRegion region;
  std::optional<long> count;  ///< nullopt: budget exhausted or contour could not be resolved
  double winding = 0.0;       ///< accumulated argument / 2 pi before rounding
  std::vector<RefinedRoot> roots;
  std::size_t evaluations = 0;
  int contour_retries = 0;
  std::string status;
  /// J singular at the equilibrium: lambda = 0 is a root. The left edge then
  /// sits just right of the imaginary axis and the zero root's multiplicity
  /// is counted separately.
  bool origin_excluded = false;
  long zero_roots = 0;

  bool conclusive() const { return count.has_value(); }
};

struct RootOptions {
  std::size_t budget = 400000;       ///< characteristic-function evaluations
  std::size_t initial_segments = 64;  ///< per rectangle edge
  double integrality = 1e-3;
  double near_root = 1e-15;           ///< |char| / scale below this marks the contour as touching a root
  int max_retries = 3;
  double expansion = 1e-6;
  bool refine = true;
  double box_size = 1e-3;             ///< quadrisection stops below this edge length
  /// Largest delay; edges start with at least one segment per radian of exp(-lambda tau) phase.
  double max_delay = 0.0;
};

using CharEvaluator = std::function<cplx(cplx)>;
using CharScale = std::function<double(cplx)>;

/// Complex secant iteration from lambda0. Converged when
/// |f(lambda)| <= tolerance * scale(lambda).
inline RefinedRoot refine_root(const CharEvaluator& f, cplx lambda0, const CharScale& scale = nullptr, int max_iterations = 60,
                               double tolerance = 1e-10) {
  auto sc = [&](cplx z) { return scale ? scale(z) : 1.0; };
  RefinedRoot out;
  cplx z0 = lambda0;
  cplx z1 = lambda0 + cplx(1e-4 * (1.0 + std::abs(lambda0)), 1e-4 * (1.0 + std::abs(lambda0)));
  cplx f0 = f(z0), f1 = f(z1);
  if (std::abs(f0) < std::abs(f1)) {
    std::swap(z0, z1);
    std::swap(f0, f1);
  }
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    if (!std::isfinite(std::abs(f1))) break;
    if (std::abs(f1) <= tolerance * sc(z1)) {
      out.converged = true;
      break;
    }
    cplx denom = f1 - f0;
    if (std::abs(denom) == 0.0) break;
    cplx z2 = z1 - f1 * (z1 - z0) / denom;
    z0 = z1;
    f0 = f1;
    z1 = z2;
    f1 = f(z1);
  }
  out.lambda = z1;
  out.residual = std::abs(f1) / sc(z1);
  if (!out.converged && std::abs(f1) <= tolerance * sc(z1)) out.converged = true;
  return out;
}

namespace detail {

class ContourWalker {
 public:
  ContourWalker(const CharEvaluator& f, const CharScale& scale, const RootOptions& opt, std::size_t& evaluations)
      : f_(f), scale_(scale), opt_(opt), evals_(evaluations) {}

  struct Result {
    double winding = 0.0;
    bool touched_root = false;
    bool exhausted = false;
  };

  Result winding(const RootRegion& r) {
    Result res;
    cplx corners[4] = {{r.sigma_min, -r.omega_max}, {r.sigma_max, -r.omega_max}, {r.sigma_max, r.omega_max}, {r.sigma_min, r.omega_max}};
    double total = 0.0;
    for (int e = 0; e < 4 && !res.touched_root && !res.exhausted; ++e) {
      cplx a = corners[e], b = corners[(e + 1) % 4];
      double len = std::abs(b - a);
      auto segs = std::max(opt_.initial_segments, static_cast<std::size_t>(std::ceil(len * opt_.max_delay)));
      cplx fa = eval(a, res);
      for (std::size_t s = 0; s < segs && !res.touched_root && !res.exhausted; ++s) {
        cplx p = a + (b - a) * (double(s) / double(segs));
        cplx q = a + (b - a) * (double(s + 1) / double(segs));
        cplx fq = eval(q, res);
        total += segment(p, q, fa, fq, res, 0);
        fa = fq;
      }
    }
    res.winding = total / (2 * std::numbers::pi);
    return res;
  }

 private:
  cplx eval(cplx z, Result& res) {
    if (evals_ >= opt_.budget) {
      res.exhausted = true;
      return cplx(1.0);
    }
    ++evals_;
    cplx v = f_(z);
    if (!(std::abs(v) > opt_.near_root * scale_(z))) res.touched_root = true;
    return v;
  }

  // Argument increment along [p, q]. A piece is accepted when f changes by
  // less than half its modulus across it, which keeps the argument change
  // below pi/6 and forces fine sampling where a root approaches the contour.
  double segment(cplx p, cplx q, cplx fp, cplx fq, Result& res, int depth) {
    if (res.touched_root || res.exhausted) return 0.0;
    cplx m = 0.5 * (p + q);
    cplx fm = eval(m, res);
    auto smooth = [](cplx a, cplx b) { return std::abs(b - a) < 0.5 * std::min(std::abs(a), std::abs(b)); };
    if ((smooth(fp, fm) && smooth(fm, fq)) || depth > 50) return std::arg(fm / fp) + std::arg(fq / fm);
    return segment(p, m, fp, fm, res, depth + 1) + segment(m, q, fm, fq, res, depth + 1);
  }

  const CharEvaluator& f_;
  const CharScale& scale_;
  const RootOptions& opt_;
  std::size_t& evals_;
};

}  // namespace detail

/// Number of roots of f inside `region` by the argument principle, with
/// quadrisection and secant refinement of the enclosed roots.
inline RootCount count_roots(const CharEvaluator& f, const CharScale& scale, RootRegion region, const RootOptions& opt = {}) {
  RootCount out;
  detail::ContourWalker walker(f, scale, opt, out.evaluations);

  auto resolve = [&](RootRegion& r, long& count, double& raw) -> std::string {
    for (int attempt = 0;; ++attempt) {
      auto res = walker.winding(r);
      if (res.exhausted) return "evaluation budget exhausted";
      if (res.touched_root) {
        if (attempt >= opt.max_retries) return "root on or near the contour";
        double grow = opt.expansion * (1.0 + std::max({std::abs(r.sigma_min), std::abs(r.sigma_max), r.omega_max}));
        r.sigma_min -= grow;
        r.sigma_max += grow;
        r.omega_max += grow;
        ++out.contour_retries;
        continue;
      }
      raw = res.winding;
      if (std::abs(raw - std::round(raw)) > opt.integrality) return "winding number not integral";
      count = std::lround(raw);
      return "";
    }
  };

  long count = 0;
  double raw = 0.0;
  auto status = resolve(region, count, raw);
  out.region = region;
  out.winding = raw;
  if (!status.empty()) {
    out.status = status;
    return out;
  }
  out.count = count;
  out.status = "ok";
  if (!opt.refine || count <= 0) return out;

  // Quadrisection: split boxes that hold roots until small, then polish.
  struct Rect {
    double s0, s1, w0, w1;
    long count;
  };
  // Sub-rectangles must tile their parent exactly, so a root on a split line
  // fails the count and the split is retried at another offset.
  auto rect_count = [&](const Rect& r, long& c) {
    // The walker takes rectangles symmetric about the real axis; shift by i*mid.
    double mid = 0.5 * (r.w0 + r.w1);
    CharEvaluator shifted = [&](cplx z) { return f(z + cplx(0.0, mid)); };
    CharScale shifted_scale = [&](cplx z) { return scale(z + cplx(0.0, mid)); };
    detail::ContourWalker sub(shifted, shifted_scale, opt, out.evaluations);
    auto res = sub.winding(RootRegion{r.s0, r.s1, 0.5 * (r.w1 - r.w0)});
    if (res.exhausted || res.touched_root) return false;
    if (std::abs(res.winding - std::round(res.winding)) > opt.integrality) return false;
    c = std::lround(res.winding);
    return true;
  };
  // Secant from the box centre; the polished root must stay in the box.
  auto polish = [&](const Rect& r, bool force) {
    cplx centre(0.5 * (r.s0 + r.s1), 0.5 * (r.w0 + r.w1));
    auto root = refine_root(f, centre, scale);
    double slack = 1e-9 * (1.0 + std::abs(centre));
    bool inside = root.lambda.real() >= r.s0 - slack && root.lambda.real() <= r.s1 + slack &&
                  root.lambda.imag() >= r.w0 - slack && root.lambda.imag() <= r.w1 + slack;
    if (!root.converged || !inside) {
      if (!force) return false;
      root.lambda = centre;
      root.residual = std::abs(f(centre)) / scale(centre);
      root.converged = false;
    }
    for (long c = 0; c < r.count; ++c) out.roots.push_back(root);
    return true;
  };

  static constexpr double offsets[] = {0.5, 0.5 + 0.0377, 0.5 - 0.0611, 0.5 + 0.0913};
  std::vector<Rect> work{{region.sigma_min, region.sigma_max, -region.omega_max, region.omega_max, count}};
  while (!work.empty()) {
    Rect r = work.back();
    work.pop_back();
    bool small = std::max(r.s1 - r.s0, r.w1 - r.w0) < opt.box_size;
    if (small || (r.count == 1 && polish(r, false))) {
      if (small) polish(r, true);
      continue;
    }
    bool split = false;
    for (double off : offsets) {
      double sm = r.s0 + off * (r.s1 - r.s0), wm = r.w0 + off * (r.w1 - r.w0);
      Rect quads[4] = {{r.s0, sm, r.w0, wm, 0}, {sm, r.s1, r.w0, wm, 0}, {r.s0, sm, wm, r.w1, 0}, {sm, r.s1, wm, r.w1, 0}};
      long found = 0;
      bool ok = true;
      for (auto& q : quads) {
        if (!(ok = rect_count(q, q.count))) break;
        found += q.count;
      }
      if (!ok || found != r.count) continue;
      for (auto& q : quads)
        if (q.count > 0) work.push_back(q);
      split = true;
      break;
    }
    if (!split) polish(r, true);
  }
  std::sort(out.roots.begin(), out.roots.end(), [](const RefinedRoot& a, const RefinedRoot& b) {
    if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
    return a.lambda.imag() < b.lambda.imag();
  });
  return out;
}

/// Region covering every root with Re(lambda) >= 0: the right edge sits past
/// the bound max_i sum_j (|B_ij| + sum_d |A_d,ij|), the half-height defaults
/// to four times that bound.
inline RootRegion right_half_plane_region(const CharacteristicFunction& f, std::optional<double> sigma_max = std::nullopt,
                                          std::optional<double> omega_max = std::nullopt) {
  double bound = f.right_half_plane_bound();
  RootRegion r;
  r.sigma_min = 0.0;
  r.sigma_max = sigma_max.value_or(bound + 1.0);
  r.omega_max = omega_max.value_or(std::max(4.0 * bound, 1.0));
  if (r.sigma_max < bound) throw std::invalid_argument("sigma_max is below the a-priori bound on unstable roots");
  return r;
}

inline RootCount count_roots(const CharacteristicFunction& f, const RootRegion& region, RootOptions opt = {}) {
  opt.max_delay = std::max(opt.max_delay, f.max_delay());
  return count_roots([&](cplx z) { return f(z); }, [&](cplx z) { return f.scale(z); }, region, opt);
}

/// Roots of det(J_lambda - lambda I) with Re(lambda) >= 0 at one equilibrium.
/// With the default region and a singular J, the strip 0 <= Re < gap is
/// excluded so that the structural zero roots are not counted as unstable.
inline RootCount count_unstable_roots(const SymbolicModel& model, const std::vector<double>& x, const ParameterAssignment& params,
                                      std::optional<RootRegion> region = std::nullopt, const RootOptions& opt = {},
                                      double origin_gap = 1e-6) {
  CharacteristicFunction f(model, x, params);
  RootRegion r = region.value_or(right_half_plane_region(f));
  bool singular = std::abs(f(cplx(0.0))) <= 1e-10 * f.scale(cplx(0.0));
  long zero_roots = 0;
  if (singular) {
    double gap = origin_gap * (1.0 + f.right_half_plane_bound());
    RootOptions small = opt;
    small.refine = false;
    auto z = count_roots(f, RootRegion{-gap, gap, gap}, small);
    zero_roots = z.count.value_or(0);
    if (!region) r.sigma_min = gap;
  }
  auto out = count_roots(f, r, opt);
  out.origin_excluded = singular && !region;
  out.zero_roots = zero_roots;
  return out;
}

}  // namespace delaystab
