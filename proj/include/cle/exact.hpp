#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cle/flux.hpp"
#include "cle/profiles.hpp"
#include "cle/schemes.hpp"
#include "cle/targets.hpp"

namespace cle {

struct UnsupportedFluxError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

// The variational solver below hard-codes the quadratic Legendre transform of
// f(u) = u^2/2; reject anything else.
inline void require_burgers(const FluxModel& f) {
  for (const double u : {-2.3, -1.0, -0.37, 0.0, 0.5, 1.0, 1.9}) {
    if (std::abs(f.eval(u) - 0.5 * u * u) > 1e-12 * std::max(1.0, u * u) ||
        std::abs(f.d1(u) - u) > 1e-12 * std::max(1.0, std::abs(u))) {
      throw UnsupportedFluxError(
          "exact solver supports only the quadratic (Burgers) flux");
    }
  }
}

}  // namespace detail

/// Variational evaluator for the entropy solution of u_t + (u^2/2)_x = 0 from
/// a piecewise-affine datum d:
///   u(t,x) = (x - y*)/t,  y* = argmin_y U0(y) + (x-y)^2/(2t),
/// with U0 the primitive of d. The objective is piecewise quadratic, so the
/// minimum is attained on the finite candidate set made of the breakpoints,
/// the per-piece interior stationary points, and y = x outside the support.
/// Non-uniqueness is resolved toward the smallest minimizer, which makes the
/// evaluation the one-sided limit from the left at shock positions.
class LaxOleinik {
 public:
  LaxOleinik(ContinuousDatum datum, double time, const FluxModel& f)
      : d_(std::move(datum)), t_(time) {
    if (!(t_ > 0.0)) throw std::invalid_argument("LaxOleinik: time must be positive");
    detail::require_burgers(f);
    if (d_.zero()) return;
    U_ = d_.primitive_at_breaks();
    amp_ = d_.linf_norm();
  }

  double time() const { return t_; }
  const ContinuousDatum& datum() const { return d_; }

  double eval(double x) const {
    std::size_t hint = 0;
    return eval_hinted(x, hint);
  }

  /// Evaluation with a piece hint for ascending query sequences: the smallest
  /// minimizer is nondecreasing in x, so candidates below the previous
  /// minimizer's piece never need rescanning.
  double eval_hinted(double x, std::size_t& hint) const {
    if (d_.zero()) return 0.0;
    const double x0 = d_.xs.front(), xK = d_.xs.back();

    double best_y = 0.0;
    double best_g = std::numeric_limits<double>::infinity();
    auto consider = [&](double y, double g) {
      if (g < best_g) {
        best_g = g;
        best_y = y;
      }
    };

    // Outside-support candidates: U0 is flat there, so the penalty minimum
    // y = x is stationary whenever x lies outside [x0, xK].
    if (x <= x0) consider(x, 0.0);
    if (x >= xK) consider(x, U_.back());
    {
      const double yc = std::clamp(x, x0, xK);
      consider(yc, objective(yc, x));
    }

    // The objective derivative d(y) - (x-y)/t is negative for y < x - t*sup|d|
    // and positive for y > x + t*sup|d|, so the global minimum lies in that
    // window and only pieces meeting it need scanning.
    const double radius = t_ * amp_ * (1.0 + 1e-12) + 1e-300;
    const double y_lo = x - radius, y_hi = x + radius;
    std::size_t i = std::max(hint, piece_below(y_lo));
    for (; i < d_.pieces(); ++i) {
      const double xl = d_.xs[i], xr = d_.xs[i + 1];
      if (xl > y_hi) break;
      consider(xl, U_[i] + penalty(xl, x));
      const double denom = d_.b[i] + 1.0 / t_;
      if (denom > 0.0) {
        const double yr = (x / t_ - d_.a[i]) / denom;
        if (yr > xl && yr < xr) consider(yr, primitive(i, yr) + penalty(yr, x));
      }
    }
    if (xK <= y_hi) consider(xK, U_.back() + penalty(xK, x));

    hint = best_y <= x0 ? 0 : piece_below(best_y);
    return (x - best_y) / t_;
  }

  /// Evaluates at an ascending list of points in one sweep.
  std::vector<double> eval_sorted(const std::vector<double>& xs) const {
    std::vector<double> out(xs.size());
    std::size_t hint = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = eval_hinted(xs[i], hint);
    return out;
  }

 private:
  double primitive(std::size_t piece, double y) const {
    return U_[piece] + d_.a[piece] * (y - d_.xs[piece]) +
           0.5 * d_.b[piece] * (y * y - d_.xs[piece] * d_.xs[piece]);
  }

  double penalty(double y, double x) const { return (x - y) * (x - y) / (2.0 * t_); }

  double objective(double y, double x) const {
    if (y <= d_.xs.front()) return penalty(y, x);
    if (y >= d_.xs.back()) return U_.back() + penalty(y, x);
    auto it = std::upper_bound(d_.xs.begin(), d_.xs.end(), y);
    const std::size_t i = static_cast<std::size_t>(it - d_.xs.begin()) - 1;
    return primitive(std::min(i, d_.pieces() - 1), y) + penalty(y, x);
  }

  // Index of the last piece whose left end is <= y (0 when y precedes all).
  std::size_t piece_below(double y) const {
    auto it = std::upper_bound(d_.xs.begin(), d_.xs.end(), y);
    if (it == d_.xs.begin()) return 0;
    const std::size_t i = static_cast<std::size_t>(it - d_.xs.begin()) - 1;
    return std::min(i, d_.pieces() - 1);
  }

  ContinuousDatum d_;
  double t_ = 0.0;
  std::vector<double> U_;
  double amp_ = 0.0;  // sup |d|
};

/// Entropy solution at a fixed time, evaluable pointwise. At time zero the
/// datum itself is reproduced (at its continuity points).
struct ExactSolution {
  ContinuousDatum datum;
  double time = 0.0;
  std::shared_ptr<const LaxOleinik> solver;  // null at time == 0

  static ExactSolution at(ContinuousDatum d, double t, const FluxModel& f) {
    ExactSolution s;
    s.datum = d;
    s.time = t;
    if (t < 0.0) throw std::invalid_argument("ExactSolution: negative time");
    if (t > 0.0) s.solver = std::make_shared<LaxOleinik>(std::move(d), t, f);
    return s;
  }

  double eval(double x) const { return solver ? solver->eval(x) : datum.eval(x); }
};

/// Pointwise entropy solution value at (t, x). One-shot convenience around
/// the LaxOleinik evaluator; build the evaluator directly for repeated calls.
inline double lax_oleinik_eval(const ContinuousDatum& d, double t, double x,
                               const FluxModel& f) {
  return LaxOleinik(d, t, f).eval(x);
}

/// Samples the entropy solution at the grid's cell centers and reconstructs
/// piecewise-linearly. This is a sampling of the exact solution, not an exact
/// L1 representation: the gap is O(dx * TV).
inline PiecewiseLinear exact_profile(const ContinuousDatum& d, double t,
                                     const GridSpec& grid, const FluxModel& f) {
  if (!(t > 0.0)) throw std::invalid_argument("exact_profile: time must be positive");
  if (d.zero()) return PiecewiseLinear{};
  const double speed = f.max_wave_speed(d.linf_norm());
  const double reach = d.support_radius + t * speed;
  const auto need_lo = static_cast<std::int64_t>(std::floor(-reach / grid.dx)) - 1;
  const auto need_hi = static_cast<std::int64_t>(std::ceil(reach / grid.dx)) + 1;
  if (grid.j_min > need_lo || grid.j_max < need_hi) {
    std::ostringstream os;
    os << "exact_profile: window [" << grid.j_min << "," << grid.j_max
       << "] does not cover the solution support range [" << need_lo << ","
       << need_hi << "]";
    throw WindowError(os.str(), need_lo, need_hi);
  }
  LaxOleinik sol(d, t, f);
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(need_hi - need_lo + 1));
  for (std::int64_t j = need_lo; j <= need_hi; ++j) xs.push_back(grid.x(j));
  const std::vector<double> ys = sol.eval_sorted(xs);
  // Trim exact zeros at the edges, keeping one zero node per side.
  std::size_t lo = 0, hi = ys.size();
  while (lo < ys.size() && ys[lo] == 0.0) ++lo;
  while (hi > lo && ys[hi - 1] == 0.0) --hi;
  if (lo == hi) return PiecewiseLinear{};
  lo = lo > 0 ? lo - 1 : lo;
  hi = hi < ys.size() ? hi + 1 : hi;
  return PiecewiseLinear(std::vector<double>(xs.begin() + lo, xs.begin() + hi),
                         std::vector<double>(ys.begin() + lo, ys.begin() + hi));
}

struct ClassMembershipError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrecursorRecord {
  PiecewiseLinear target;     // v, the admissible profile to hit at time T
  ContinuousDatum precursor;  // d with S^T(d) = v up to the sampling error
  double tv = 0.0;
  double verification_error = 0.0;  // ||S^T(d) - v||_1 on the fine grid
};

namespace detail {

inline PiecewiseLinear reflect(const PiecewiseLinear& f) {
  if (f.zero()) return f;
  std::vector<double> xs(f.xs.size()), ys(f.ys.size());
  for (std::size_t i = 0; i < f.xs.size(); ++i) {
    xs[i] = -f.xs[f.xs.size() - 1 - i];
    ys[i] = f.ys[f.ys.size() - 1 - i];
  }
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

// Ascending sample points k*dx covering [-reach, reach].
inline std::vector<double> sample_axis(double reach, double dx) {
  const auto j_lo = static_cast<std::int64_t>(std::floor(-reach / dx)) - 1;
  const auto j_hi = static_cast<std::int64_t>(std::ceil(reach / dx)) + 1;
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(j_hi - j_lo + 1));
  for (std::int64_t j = j_lo; j <= j_hi; ++j) xs.push_back(static_cast<double>(j) * dx);
  return xs;
}

inline PiecewiseLinear trim_zeros(const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
  std::size_t lo = 0, hi = ys.size();
  while (lo < ys.size() && ys[lo] == 0.0) ++lo;
  while (hi > lo && ys[hi - 1] == 0.0) --hi;
  if (lo == hi) return PiecewiseLinear{};
  lo = lo > 0 ? lo - 1 : lo;
  hi = hi < ys.size() ? hi + 1 : hi;
  return PiecewiseLinear(std::vector<double>(xs.begin() + lo, xs.begin() + hi),
                         std::vector<double>(ys.begin() + lo, ys.begin() + hi));
}

}  // namespace detail

/// Builds an initial datum whose entropy solution at time spec.T is the
/// admissible profile v, by the reflected forward flow: solve forward from
/// the reflection v(-x) for time T and reflect the result,
/// d(x) = w(T, -x). Valid for the even quadratic flux; the admissibility
/// constraints of the class (support, L1, sup norm, one-sided slope) keep the
/// forward flow shock-free on [0, T], so the construction inverts the flow
/// exactly up to the fine-grid sampling. verification_error re-solves forward
/// from d and measures the exact L1 gap to v on the same fine grid.
inline PrecursorRecord build_precursor(const PiecewiseLinear& v,
                                       const TargetClassSpec& cls, const FluxModel& f,
                                       double fine_dx) {
  if (!(fine_dx > 0.0))
    throw std::invalid_argument("build_precursor: fine_dx must be positive");
  detail::require_burgers(f);

  const Measures mv = measures(v);
  const double tol = 1e-9;
  if (!v.zero() &&
      (v.xs.front() < -cls.L_T * (1.0 + tol) - tol || v.xs.back() > cls.L_T * (1.0 + tol) + tol))
    throw ClassMembershipError("build_precursor: target support exceeds [-L_T, L_T]");
  if (mv.l1 > cls.L * cls.h * (1.0 + tol))
    throw ClassMembershipError("build_precursor: target L1 norm exceeds L*h");
  if (mv.linf > cls.h * (1.0 + tol))
    throw ClassMembershipError("build_precursor: target sup norm exceeds h");
  if (mv.oslc_plus > cls.slope_bound() * (1.0 + tol))
    throw ClassMembershipError(
        "build_precursor: target upward slope exceeds 1/(2 T |f''(0)|)");

  PrecursorRecord rec;
  rec.target = v;
  if (v.zero()) {
    rec.precursor = ContinuousDatum::zero_datum(cls.L, cls.m, cls.M);
    return rec;
  }

  const double T = cls.T;
  const double reach = cls.L + T * f.max_wave_speed(cls.h) + 2.0 * fine_dx;
  const std::vector<double> axis = detail::sample_axis(reach, fine_dx);

  const PiecewiseLinear v_reflected = detail::reflect(v);
  const ContinuousDatum back_datum = ContinuousDatum::piecewise_linear(
      v_reflected, cls.L_T, cls.L * cls.h, cls.h);
  LaxOleinik backward(back_datum, T, f);
  const PiecewiseLinear w_T = detail::trim_zeros(axis, backward.eval_sorted(axis));

  const PiecewiseLinear d_profile = detail::reflect(w_T);
  rec.precursor = ContinuousDatum::piecewise_linear(d_profile, cls.L, cls.m, cls.M);
  rec.tv = rec.precursor.tv();

  LaxOleinik forward(rec.precursor, T, f);
  const PiecewiseLinear v_back = detail::trim_zeros(axis, forward.eval_sorted(axis));
  rec.verification_error = l1_distance(v_back, v);
  return rec;
}

/// Entropy solution at time t sampled piecewise-linearly at spacing dx over
/// the whole solution support (sampling error O(dx * TV)).
inline PiecewiseLinear exact_sampled(const ContinuousDatum& d, double t, double dx,
                                     const FluxModel& f) {
  if (d.zero()) return PiecewiseLinear{};
  const double reach = d.support_radius + t * f.max_wave_speed(d.linf_norm()) + dx;
  const std::vector<double> axis = detail::sample_axis(reach, dx);
  LaxOleinik sol(d, t, f);
  return detail::trim_zeros(axis, sol.eval_sorted(axis));
}

struct ErrorReport {
  std::vector<double> per_datum;  // ||S^T(d) - I(S^N(P d))||_1 per datum
  double delta = 0.0;             // max over the batch
  double dx = 0.0;
};

/// Forward numerical error over a batch: evolve each projected datum with the
/// scheme, reconstruct, and compare in exact L1 against the entropy solution
/// sampled on a grid at least 8x finer.
inline ErrorReport measure_delta(const std::vector<ContinuousDatum>& batch,
                                 const NumericalFlux& flux, const GridSpec& grid,
                                 const FluxModel& f) {
  ErrorReport report;
  report.dx = grid.dx;
  report.per_datum.reserve(batch.size());
  const double T = grid.t(grid.n_steps);
  const double ref_dx = grid.dx / 8.0;
  for (const ContinuousDatum& d : batch) {
    const DiscreteProfile u0 = cell_average(d, grid);
    const Trajectory traj = evolve(u0, flux, grid);
    const PiecewiseLinear numerical = interpolate(traj.final_state());
    const PiecewiseLinear reference = exact_sampled(d, T, ref_dx, f);
    const double err = l1_distance(numerical, reference);
    report.per_datum.push_back(err);
    report.delta = std::max(report.delta, err);
  }
  return report;
}

}  // namespace cle
