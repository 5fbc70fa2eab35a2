#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cle {

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Uniform space-time grid: cell centers x_j = j*dx, time levels t^n = n*dt.
/// lambda is stored redundantly and must equal dt/dx to 1e-15 relative.
struct GridSpec {
  double dx = 0.0;
  double dt = 0.0;
  double lambda = 0.0;
  std::int64_t j_min = 0;
  std::int64_t j_max = 0;
  std::int64_t n_steps = 0;

  static GridSpec make(double dx, double dt, std::int64_t j_min,
                       std::int64_t j_max, std::int64_t n_steps) {
    if (!(dx > 0.0) || !(dt > 0.0))
      throw std::invalid_argument("GridSpec: dx and dt must be positive");
    if (j_min > j_max) throw std::invalid_argument("GridSpec: j_min > j_max");
    if (n_steps < 0) throw std::invalid_argument("GridSpec: n_steps < 0");
    GridSpec g;
    g.dx = dx;
    g.dt = dt;
    g.lambda = dt / dx;
    g.j_min = j_min;
    g.j_max = j_max;
    g.n_steps = n_steps;
    return g;
  }

  bool consistent() const {
    return std::abs(lambda - dt / dx) <= 1e-15 * std::abs(lambda);
  }

  double x(std::int64_t j) const { return static_cast<double>(j) * dx; }
  double t(std::int64_t n) const { return static_cast<double>(n) * dt; }
  std::int64_t size() const { return j_max - j_min + 1; }
};

// ---------------------------------------------------------------------------
// Discrete profiles
// ---------------------------------------------------------------------------

/// Grid cell values u_j for j in [grid.j_min, grid.j_max], zero outside the
/// tracked support window [support_lo, support_hi]. An all-zero profile has
/// support_lo > support_hi.
struct DiscreteProfile {
  GridSpec grid;
  std::vector<double> values;  // size grid.size()
  std::int64_t support_lo = 1;
  std::int64_t support_hi = 0;

  static DiscreteProfile zeros(const GridSpec& g) {
    DiscreteProfile p;
    p.grid = g;
    p.values.assign(static_cast<std::size_t>(g.size()), 0.0);
    return p;
  }

  double value(std::int64_t j) const {
    if (j < grid.j_min || j > grid.j_max) return 0.0;
    return values[static_cast<std::size_t>(j - grid.j_min)];
  }

  double& at(std::int64_t j) {
    return values[static_cast<std::size_t>(j - grid.j_min)];
  }

  bool empty_support() const { return support_lo > support_hi; }

  void recompute_support() {
    std::int64_t lo = grid.j_min, hi = grid.j_max;
    while (lo <= hi && values[static_cast<std::size_t>(lo - grid.j_min)] == 0.0) ++lo;
    while (hi >= lo && values[static_cast<std::size_t>(hi - grid.j_min)] == 0.0) --hi;
    support_lo = lo;
    support_hi = hi;
  }

  double mass() const {
    double s = 0.0;
    for (std::int64_t j = support_lo; j <= support_hi; ++j) s += value(j);
    return s * grid.dx;
  }

  /// Discrete L1 norm with weight dx (Riemann-sum convention).
  double l1() const {
    double s = 0.0;
    for (std::int64_t j = support_lo; j <= support_hi; ++j) s += std::abs(value(j));
    return s * grid.dx;
  }

  double linf() const {
    double s = 0.0;
    for (std::int64_t j = support_lo; j <= support_hi; ++j)
      s = std::max(s, std::abs(value(j)));
    return s;
  }

  /// max_j (u_{j+1} - u_j)_+ / dx, the one-sided discrete slope. Includes the
  /// boundary differences against the zero extension.
  double oslc_plus() const {
    if (empty_support()) return 0.0;
    double m = 0.0;
    for (std::int64_t j = support_lo - 1; j <= support_hi; ++j)
      m = std::max(m, value(j + 1) - value(j));
    return m / grid.dx;
  }
};

// ---------------------------------------------------------------------------
// Piecewise-linear functions with exact L1 geometry
// ---------------------------------------------------------------------------

/// Continuous piecewise-linear function given by nodes with strictly
/// increasing abscissae; extends by zero outside [xs.front(), xs.back()].
/// An empty node list is the zero function.
struct PiecewiseLinear {
  std::vector<double> xs;
  std::vector<double> ys;

  PiecewiseLinear() = default;
  PiecewiseLinear(std::vector<double> x, std::vector<double> y)
      : xs(std::move(x)), ys(std::move(y)) {
    if (xs.size() != ys.size())
      throw std::invalid_argument("PiecewiseLinear: node size mismatch");
    for (std::size_t i = 1; i < xs.size(); ++i)
      if (!(xs[i] > xs[i - 1]))
        throw std::invalid_argument("PiecewiseLinear: abscissae not increasing");
  }

  bool zero() const { return xs.empty(); }
  std::size_t size() const { return xs.size(); }

  double eval(double x) const {
    if (xs.empty() || x < xs.front() || x > xs.back()) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
  }
};

namespace detail {

// Exact integral of |affine| over a width-w segment with endpoint values
// d0, d1: trapezoid when no sign change, two triangles split at the root
// otherwise. Closed form, no quadrature.
inline double abs_affine_area(double d0, double d1, double w) {
  if (d0 >= 0.0 && d1 >= 0.0) return 0.5 * (d0 + d1) * w;
  if (d0 <= 0.0 && d1 <= 0.0) return -0.5 * (d0 + d1) * w;
  const double denom = std::abs(d0) + std::abs(d1);
  return 0.5 * w * (d0 * d0 + d1 * d1) / denom;
}

// Cursor over the segments of a PiecewiseLinear along a merged breakpoint
// sweep; yields exact one-sided endpoint values per merged segment.
class SegmentCursor {
 public:
  explicit SegmentCursor(const PiecewiseLinear& f) : f_(f) {}

  // Values of f at the endpoints of [x0, x1]; the merged grid contains all of
  // f's nodes, so f is affine (or identically zero) on (x0, x1).
  void endpoint_values(double x0, double x1, double& y0, double& y1) {
    if (f_.zero() || x1 <= f_.xs.front() || x0 >= f_.xs.back()) {
      y0 = y1 = 0.0;
      return;
    }
    while (piece_ + 2 < f_.xs.size() && f_.xs[piece_ + 1] <= x0) ++piece_;
    const double xa = f_.xs[piece_], xb = f_.xs[piece_ + 1];
    const double ya = f_.ys[piece_], yb = f_.ys[piece_ + 1];
    const double slope = (yb - ya) / (xb - xa);
    y0 = ya + slope * (x0 - xa);
    y1 = ya + slope * (x1 - xa);
  }

 private:
  const PiecewiseLinear& f_;
  std::size_t piece_ = 0;
};

inline std::vector<double> merge_breakpoints(const PiecewiseLinear& a,
                                             const PiecewiseLinear& b) {
  std::vector<double> m;
  m.reserve(a.xs.size() + b.xs.size());
  std::merge(a.xs.begin(), a.xs.end(), b.xs.begin(), b.xs.end(),
             std::back_inserter(m));
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

}  // namespace detail

/// Exact integral of |a - b| over the real line: merged breakpoints, each
/// segment split at the sign change of the affine difference, trapezoid and
/// triangle areas in closed form.
inline double l1_distance(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  const std::vector<double> m = detail::merge_breakpoints(a, b);
  if (m.size() < 2) return 0.0;
  detail::SegmentCursor ca(a), cb(b);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double x0 = m[i], x1 = m[i + 1];
    const double w = x1 - x0;
    if (w <= 0.0) continue;
    double a0, a1, b0, b1;
    ca.endpoint_values(x0, x1, a0, a1);
    cb.endpoint_values(x0, x1, b0, b1);
    total += detail::abs_affine_area(a0 - b0, a1 - b1, w);
  }
  return total;
}

inline double l1_norm(const PiecewiseLinear& a) {
  return l1_distance(a, PiecewiseLinear{});
}

/// Pointwise ca*a + cb*b on the merged node set. Exact for continuous
/// operands (compactly supported reconstructions have zero boundary nodes);
/// boundary jumps of either operand are flattened into the merged nodes.
inline PiecewiseLinear linear_combination(double ca, const PiecewiseLinear& a,
                                          double cb, const PiecewiseLinear& b) {
  const std::vector<double> m = detail::merge_breakpoints(a, b);
  if (m.empty()) return PiecewiseLinear{};
  std::vector<double> ys(m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    ys[i] = ca * a.eval(m[i]) + cb * b.eval(m[i]);
  return PiecewiseLinear(std::vector<double>(m), std::move(ys));
}

struct Measures {
  double l1 = 0.0;
  double linf = 0.0;
  double tv = 0.0;
  double oslc_plus = 0.0;  // max positive segment slope, 0 if nonincreasing
};

/// Exact L1 / Linf / TV / one-sided slope of a reconstruction. TV includes
/// the two boundary jumps of the zero extension; oslc_plus ranges over the
/// finite segment slopes only (reconstructions of compactly supported grids
/// carry zero boundary nodes, so there are no boundary jumps to count).
inline Measures measures(const PiecewiseLinear& a) {
  Measures r;
  if (a.zero()) return r;
  r.l1 = l1_norm(a);
  r.tv = std::abs(a.ys.front()) + std::abs(a.ys.back());
  for (std::size_t i = 0; i < a.size(); ++i)
    r.linf = std::max(r.linf, std::abs(a.ys[i]));
  for (std::size_t i = 0; i + 1 < a.size(); ++i) {
    const double dy = a.ys[i + 1] - a.ys[i];
    r.tv += std::abs(dy);
    r.oslc_plus = std::max(r.oslc_plus, dy / (a.xs[i + 1] - a.xs[i]));
  }
  r.oslc_plus = std::max(r.oslc_plus, 0.0);
  return r;
}

// ---------------------------------------------------------------------------
// Continuous data (elements of the admissible class)
// ---------------------------------------------------------------------------

struct DatumClassReport {
  bool ok = false;
  bool support_ok = false, l1_ok = false, linf_ok = false, tv_ok = true;
  double l1 = 0.0, linf = 0.0, tv = 0.0;
  std::string detail;
};

/// A piecewise-affine function of compact support: on [xs[i], xs[i+1]) the
/// value is a[i] + b[i]*x, zero outside [xs.front(), xs.back()]. Covers both
/// the piecewise-constant and the continuous piecewise-linear data the
/// admissible class is sampled from. Carries its declared class budgets
/// (support radius L, L1 budget m, sup budget M, optional TV bound).
/// All integrals are closed form.
struct ContinuousDatum {
  std::vector<double> xs;  // k+1 breakpoints, strictly increasing
  std::vector<double> a;   // k intercepts
  std::vector<double> b;   // k slopes
  double support_radius = 0.0;  // L
  double l1_budget = 0.0;       // m
  double linf_budget = 0.0;     // M
  std::optional<double> tv_bound;

  bool zero() const { return xs.size() < 2; }
  std::size_t pieces() const { return zero() ? 0 : xs.size() - 1; }

  static ContinuousDatum zero_datum(double L, double m, double M) {
    ContinuousDatum d;
    d.support_radius = L;
    d.l1_budget = m;
    d.linf_budget = M;
    return d;
  }

  /// Step function: value vals[i] on [breaks[i], breaks[i+1]).
  static ContinuousDatum steps(std::vector<double> breaks,
                               const std::vector<double>& vals, double L,
                               double m, double M) {
    if (breaks.size() != vals.size() + 1)
      throw std::invalid_argument("ContinuousDatum::steps: size mismatch");
    ContinuousDatum d;
    d.xs = std::move(breaks);
    for (std::size_t i = 1; i < d.xs.size(); ++i)
      if (!(d.xs[i] > d.xs[i - 1]))
        throw std::invalid_argument("ContinuousDatum::steps: breaks not increasing");
    d.a = vals;
    d.b.assign(vals.size(), 0.0);
    d.support_radius = L;
    d.l1_budget = m;
    d.linf_budget = M;
    return d;
  }

  /// Continuous piecewise-linear datum from node lists.
  static ContinuousDatum piecewise_linear(const PiecewiseLinear& f, double L,
                                          double m, double M) {
    ContinuousDatum d;
    d.support_radius = L;
    d.l1_budget = m;
    d.linf_budget = M;
    if (f.zero()) return d;
    d.xs = f.xs;
    d.a.resize(f.size() - 1);
    d.b.resize(f.size() - 1);
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
      d.b[i] = (f.ys[i + 1] - f.ys[i]) / (f.xs[i + 1] - f.xs[i]);
      d.a[i] = f.ys[i] - d.b[i] * f.xs[i];
    }
    return d;
  }

  double eval(double x) const {
    if (zero() || x < xs.front() || x >= xs.back()) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const std::size_t p = std::min(i, pieces() - 1);
    return a[p] + b[p] * x;
  }

  /// Primitive values at the breakpoints: P[0] = 0, P[i] = integral up to xs[i].
  std::vector<double> primitive_at_breaks() const {
    std::vector<double> P(xs.size(), 0.0);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const double x0 = xs[i], x1 = xs[i + 1];
      P[i + 1] = P[i] + a[i] * (x1 - x0) + 0.5 * b[i] * (x1 * x1 - x0 * x0);
    }
    return P;
  }

  /// Exact integral over [lo, hi].
  double integral(double lo, double hi) const {
    if (zero() || hi <= xs.front() || lo >= xs.back() || hi <= lo) return 0.0;
    const std::vector<double> P = primitive_at_breaks();
    auto prim = [&](double x) {
      if (x <= xs.front()) return 0.0;
      if (x >= xs.back()) return P.back();
      auto it = std::upper_bound(xs.begin(), xs.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
      return P[i] + a[i] * (x - xs[i]) + 0.5 * b[i] * (x * x - xs[i] * xs[i]);
    };
    return prim(hi) - prim(lo);
  }

  /// Exact integral of |d| (pieces split at their sign changes).
  double l1_norm() const {
    double total = 0.0;
    for (std::size_t i = 0; i < pieces(); ++i) {
      const double x0 = xs[i], x1 = xs[i + 1];
      total += detail::abs_affine_area(a[i] + b[i] * x0, a[i] + b[i] * x1, x1 - x0);
    }
    return total;
  }

  double linf_norm() const {
    double s = 0.0;
    for (std::size_t i = 0; i < pieces(); ++i) {
      s = std::max(s, std::abs(a[i] + b[i] * xs[i]));
      s = std::max(s, std::abs(a[i] + b[i] * xs[i + 1]));
    }
    return s;
  }

  /// Total variation on the line: within-piece variation plus interior jumps
  /// plus the two jumps of the zero extension.
  double tv() const {
    if (zero()) return 0.0;
    double total = std::abs(a[0] + b[0] * xs[0]);  // jump up from 0 at the left
    for (std::size_t i = 0; i < pieces(); ++i) {
      total += std::abs(b[i]) * (xs[i + 1] - xs[i]);
      const double right = a[i] + b[i] * xs[i + 1];
      if (i + 1 < pieces()) {
        const double next_left = a[i + 1] + b[i + 1] * xs[i + 1];
        total += std::abs(next_left - right);
      } else {
        total += std::abs(right);  // jump down to 0 at the right
      }
    }
    return total;
  }

  DatumClassReport validate(double tol = 1e-12) const {
    DatumClassReport r;
    r.l1 = l1_norm();
    r.linf = linf_norm();
    r.tv = tv();
    r.support_ok = zero() || (xs.front() >= -support_radius - tol &&
                              xs.back() <= support_radius + tol);
    r.l1_ok = r.l1 <= l1_budget * (1.0 + tol) + tol;
    r.linf_ok = r.linf <= linf_budget * (1.0 + tol) + tol;
    if (tv_bound) r.tv_ok = r.tv <= *tv_bound * (1.0 + tol) + tol;
    r.ok = r.support_ok && r.l1_ok && r.linf_ok && r.tv_ok;
    std::ostringstream os;
    os << "l1=" << r.l1 << "/" << l1_budget << " linf=" << r.linf << "/"
       << linf_budget << " tv=" << r.tv;
    if (!r.support_ok) os << " [support exceeds radius]";
    if (!r.l1_ok) os << " [l1 over budget]";
    if (!r.linf_ok) os << " [linf over budget]";
    if (!r.tv_ok) os << " [tv over bound]";
    r.detail = os.str();
    return r;
  }
};

/// Exact integral of |d1 - d2| for piecewise-affine data (discontinuities
/// allowed: the merged breakpoints align every jump with a segment boundary).
inline double l1_distance(const ContinuousDatum& d1, const ContinuousDatum& d2) {
  std::vector<double> m;
  m.reserve(d1.xs.size() + d2.xs.size());
  std::merge(d1.xs.begin(), d1.xs.end(), d2.xs.begin(), d2.xs.end(),
             std::back_inserter(m));
  m.erase(std::unique(m.begin(), m.end()), m.end());
  if (m.size() < 2) return 0.0;
  auto segment_values = [](const ContinuousDatum& d, double x0, double x1,
                           std::size_t& piece, double& y0, double& y1) {
    if (d.zero() || x1 <= d.xs.front() || x0 >= d.xs.back()) {
      y0 = y1 = 0.0;
      return;
    }
    while (piece + 1 < d.pieces() && d.xs[piece + 1] <= x0) ++piece;
    y0 = d.a[piece] + d.b[piece] * x0;
    y1 = d.a[piece] + d.b[piece] * x1;
  };
  std::size_t p1 = 0, p2 = 0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const double x0 = m[i], x1 = m[i + 1];
    if (!(x1 > x0)) continue;
    double a0, a1, b0, b1;
    segment_values(d1, x0, x1, p1, a0, a1);
    segment_values(d2, x0, x1, p2, b0, b1);
    total += detail::abs_affine_area(a0 - b0, a1 - b1, x1 - x0);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Projection and reconstruction
// ---------------------------------------------------------------------------

struct WindowError : std::runtime_error {
  WindowError(const std::string& msg, std::int64_t need_lo, std::int64_t need_hi)
      : std::runtime_error(msg), required_lo(need_lo), required_hi(need_hi) {}
  std::int64_t required_lo;
  std::int64_t required_hi;
};

/// Cell averaging projection: (P d)_j = (1/dx) * integral of d over
/// [(j-1/2)dx, (j+1/2)dx]. Exact for piecewise-affine d.
inline DiscreteProfile cell_average(const ContinuousDatum& d, const GridSpec& g) {
  const double L = d.support_radius;
  const std::int64_t need_lo =
      static_cast<std::int64_t>(std::floor(-L / g.dx - 0.5)) ;
  const std::int64_t need_hi =
      static_cast<std::int64_t>(std::ceil(L / g.dx + 0.5));
  if (g.j_min > need_lo || g.j_max < need_hi) {
    std::ostringstream os;
    os << "cell_average: window [" << g.j_min << "," << g.j_max
       << "] does not cover required index range [" << need_lo << "," << need_hi
       << "]";
    throw WindowError(os.str(), need_lo, need_hi);
  }
  DiscreteProfile p = DiscreteProfile::zeros(g);
  if (d.zero()) return p;
  const std::vector<double> P = d.primitive_at_breaks();
  auto prim = [&](double x) {
    if (x <= d.xs.front()) return 0.0;
    if (x >= d.xs.back()) return P.back();
    auto it = std::upper_bound(d.xs.begin(), d.xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - d.xs.begin()) - 1;
    return P[i] + d.a[i] * (x - d.xs[i]) + 0.5 * d.b[i] * (x * x - d.xs[i] * d.xs[i]);
  };
  const std::int64_t j_lo =
      static_cast<std::int64_t>(std::floor(d.xs.front() / g.dx - 0.5));
  const std::int64_t j_hi =
      static_cast<std::int64_t>(std::ceil(d.xs.back() / g.dx + 0.5));
  for (std::int64_t j = std::max(j_lo, g.j_min); j <= std::min(j_hi, g.j_max); ++j) {
    const double lo = (static_cast<double>(j) - 0.5) * g.dx;
    const double hi = (static_cast<double>(j) + 0.5) * g.dx;
    p.at(j) = (prim(hi) - prim(lo)) / g.dx;
  }
  p.recompute_support();
  return p;
}

/// Piecewise-linear reconstruction through the cell-center values. The node
/// list is trimmed to the support hull plus one zero node per side; as an
/// element of L1 this equals the interpolant over the full window.
inline PiecewiseLinear interpolate(const DiscreteProfile& u) {
  if (u.empty_support()) return PiecewiseLinear{};
  const std::int64_t lo = std::max(u.support_lo - 1, u.grid.j_min);
  const std::int64_t hi = std::min(u.support_hi + 1, u.grid.j_max);
  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(hi - lo + 1));
  ys.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (std::int64_t j = lo; j <= hi; ++j) {
    xs.push_back(u.grid.x(j));
    ys.push_back(u.value(j));
  }
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

}  // namespace cle
