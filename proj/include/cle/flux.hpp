#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

namespace cle {

/// Scalar flux f supplied pointwise: f, f', f'' plus the two structural
/// constants the estimates depend on (uniform convexity lower bound c and
/// |f''(0)|). Nothing is differentiated symbolically; models are closures.
///
/// Standing assumptions on admissible models: f'' >= convexity_c > 0 on the
/// working range and f'(0) = 0 (so the sonic point sits at the origin).
struct FluxModel {
  std::function<double(double)> eval;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
  double convexity_c = 0.0;
  double second_deriv_at_zero = 0.0;

  /// max |f'| over [-m, m]. Valid for convex f (f' is increasing, so the
  /// extremes sit at the endpoints). This is the CFL speed bound.
  double max_wave_speed(double m) const {
    return std::max(std::abs(d1(-m)), std::abs(d1(m)));
  }
};

/// Canonical model: f(u) = u^2/2, f' = u, f'' = 1, c = 1, |f''(0)| = 1.
inline FluxModel burgers() {
  FluxModel f;
  f.eval = [](double u) { return 0.5 * u * u; };
  f.d1 = [](double u) { return u; };
  f.d2 = [](double) { return 1.0; };
  f.convexity_c = 1.0;
  f.second_deriv_at_zero = 1.0;
  return f;
}

struct FluxValidation {
  bool pass = false;
  bool convexity_ok = false;       // sampled f'' >= c > 0
  bool normalization_ok = false;   // f'(0) = 0
  bool derivative_consistent = false;  // f' matches central differences of f
  bool d1_increasing = false;      // sampled f' strictly increasing
  double min_d2 = 0.0;
  double max_wave_speed = 0.0;     // max |f'| on the sampled range
  double d1_at_zero = 0.0;
  std::string detail;
};

/// Samples the model on [lo, hi] and reports whether the structural
/// assumptions hold to tolerance 1e-8. Violations are reported, not thrown.
inline FluxValidation validate_flux(const FluxModel& f, double lo, double hi,
                                    int samples) {
  if (samples < 3) throw std::invalid_argument("validate_flux: samples < 3");
  if (!(lo < hi)) throw std::invalid_argument("validate_flux: empty range");
  constexpr double kTol = 1e-8;

  FluxValidation r;
  r.d1_at_zero = f.d1(0.0);
  r.normalization_ok = std::abs(r.d1_at_zero) <= kTol;

  r.min_d2 = std::numeric_limits<double>::infinity();
  r.max_wave_speed = 0.0;
  r.derivative_consistent = true;
  r.d1_increasing = true;
  double prev_d1 = 0.0;
  const double fd_delta = 1e-5;
  for (int i = 0; i < samples; ++i) {
    const double u = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    r.min_d2 = std::min(r.min_d2, f.d2(u));
    r.max_wave_speed = std::max(r.max_wave_speed, std::abs(f.d1(u)));
    const double fd = (f.eval(u + fd_delta) - f.eval(u - fd_delta)) / (2 * fd_delta);
    if (std::abs(f.d1(u) - fd) > 1e-6 * std::max(1.0, std::abs(f.d1(u))))
      r.derivative_consistent = false;
    if (i > 0 && !(f.d1(u) > prev_d1)) r.d1_increasing = false;
    prev_d1 = f.d1(u);
  }
  r.convexity_ok = r.min_d2 >= f.convexity_c - kTol && f.convexity_c > 0.0;
  r.pass = r.convexity_ok && r.normalization_ok && r.derivative_consistent &&
           r.d1_increasing;

  std::ostringstream os;
  os << "min f''=" << r.min_d2 << " max|f'|=" << r.max_wave_speed
     << " f'(0)=" << r.d1_at_zero;
  if (!r.convexity_ok) os << " [convexity violated]";
  if (!r.normalization_ok) os << " [f'(0) != 0]";
  if (!r.derivative_consistent) os << " [f' inconsistent with f]";
  if (!r.d1_increasing) os << " [f' not increasing]";
  r.detail = os.str();
  return r;
}

}  // namespace cle
