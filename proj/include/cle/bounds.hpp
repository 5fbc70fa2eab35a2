#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "cle/entropy.hpp"

namespace cle {

struct UpperBoundResult {
  double gamma_plus = 0.0;
  double eps_max_upper = 0.0;
  double L_N = 0.0;
  double t_N = 0.0;
};

/// Upper-bound constant for the reconstructed solution set:
///   gamma_plus = 4 S^2/(beta t^N) + 4 S sqrt(2m/(beta t^N)),  S = 2 L^N + dx,
/// valid for 0 < eps <= (S/6) (S/(beta t^N) + sqrt(2m/(beta t^N))).
inline UpperBoundResult gamma_plus(double L, std::int64_t N, double dx, double dt,
                                   double m, double beta) {
  if (!(L > 0) || N <= 0 || !(dx > 0) || !(dt > 0) || !(m > 0) || !(beta > 0))
    throw std::invalid_argument("gamma_plus: inputs must be positive");
  UpperBoundResult r;
  r.L_N = L + static_cast<double>(N) * dx;
  r.t_N = static_cast<double>(N) * dt;
  const double S = 2.0 * r.L_N + dx;
  const double bt = beta * r.t_N;
  const double root = std::sqrt(2.0 * m / bt);
  r.gamma_plus = 4.0 * S * S / bt + 4.0 * S * root;
  r.eps_max_upper = (S / 6.0) * (S / bt + root);
  return r;
}

struct LowerBoundResult {
  double gamma_tilde_minus = 0.0;
  double gamma_minus = 0.0;  // gamma_tilde_minus / (1 + 2 alpha)
  double eps_min_lower = 0.0;
  double eps_max_lower = 0.0;
  bool window_empty = false;
};

/// Lower-bound constant and validity window:
///   gamma_tilde_minus = L^2 / (48 ln2 t^N |f''(0)|),
///   gamma_minus       = gamma_tilde_minus / (1 + 2 alpha),
///   window            = [delta/alpha, L/(8(1+2a)) min{M, m/(2L), L/(8 t^N |f''(0)|)}].
inline LowerBoundResult gamma_minus(double L, double t_N, double f2_at_zero,
                                    double alpha, double delta, double m, double M) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("gamma_minus: alpha must lie in (0, 1]");
  if (!(L > 0) || !(t_N > 0) || !(f2_at_zero > 0) || !(m > 0) || !(M > 0) ||
      delta < 0)
    throw std::invalid_argument("gamma_minus: invalid inputs");
  LowerBoundResult r;
  r.gamma_tilde_minus = L * L / (48.0 * std::log(2.0) * t_N * f2_at_zero);
  r.gamma_minus = r.gamma_tilde_minus / (1.0 + 2.0 * alpha);
  r.eps_min_lower = delta / alpha;
  r.eps_max_lower =
      L / (8.0 * (1.0 + 2.0 * alpha)) *
      std::min(M, std::min(m / (2.0 * L), L / (8.0 * t_N * f2_at_zero)));
  r.window_empty = r.eps_min_lower > r.eps_max_lower;
  return r;
}

/// Error lower bound from mismatched entropy scalings
///   H_eps(exact) >= C1 eps^-a,  H_eps(numerical) <= C2 eps^-b,  a > b > 0
/// which force delta >= (C1 / (2^a C2))^(1/(a-b)).
inline double error_lower_bound(double C1, double alpha_exp, double C2,
                                double beta_exp) {
  if (!(C1 > 0) || !(C2 > 0))
    throw std::invalid_argument("error_lower_bound: constants must be positive");
  if (!(alpha_exp > beta_exp) || !(beta_exp > 0))
    throw std::invalid_argument(
        "error_lower_bound: requires alpha_exp > beta_exp > 0");
  return std::pow(C1 / (std::pow(2.0, alpha_exp) * C2), 1.0 / (alpha_exp - beta_exp));
}

struct TransferSpec {
  double family_size_log2 = 0.0;  // log2 of the separated-family cardinality
                                  // at scale (1+2 alpha) eps
  double delta_star = 0.0;        // uniform approximation error on the precursors
  double alpha = 1.0;
  double eps0 = 0.0;              // separation threshold scale
};

struct TransferCertificate {
  bool window_ok = false;
  std::optional<double> asserted_bits;
  std::string reason;
};

/// Transfer principle certificate: the lower bound family_size_log2 applies
/// to the numerical solution set at scale eps iff
///   delta_star / alpha <= eps <= eps0 / (1 + 2 alpha).
inline TransferCertificate transfer_certificate(const TransferSpec& spec, double eps) {
  TransferCertificate c;
  const double lo = spec.delta_star / spec.alpha;
  const double hi = spec.eps0 / (1.0 + 2.0 * spec.alpha);
  const double tol = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (eps < lo - tol) {
    c.reason = "eps below delta_star/alpha";
    return c;
  }
  if (eps > hi + tol) {
    c.reason = "eps above eps0/(1+2 alpha)";
    return c;
  }
  c.window_ok = true;
  c.asserted_bits = spec.family_size_log2;
  return c;
}

enum class Resolution { high, low, inconclusive };

inline const char* to_string(Resolution r) {
  switch (r) {
    case Resolution::high: return "high";
    case Resolution::low: return "low";
    default: return "inconclusive";
  }
}

/// high: exponents agree within tol and both fits have r^2 >= 0.9;
/// low: the numerical exponent falls short by more than tol;
/// inconclusive otherwise.
inline Resolution classify_resolution(const ScalingFit& exact_fit,
                                      const ScalingFit& numerical_fit,
                                      double tol = 0.15) {
  if (exact_fit.points.size() < 3 || numerical_fit.points.size() < 3)
    throw std::invalid_argument("classify_resolution: fits need >= 3 points");
  if (std::abs(exact_fit.exponent - numerical_fit.exponent) <= tol &&
      exact_fit.r_squared >= 0.9 && numerical_fit.r_squared >= 0.9)
    return Resolution::high;
  if (numerical_fit.exponent < exact_fit.exponent - tol) return Resolution::low;
  return Resolution::inconclusive;
}

/// One-stop report of every constant a run's acceptance checks read, with all
/// inputs echoed. eps_max_lower_proof carries the alternative window edge
/// L_T h / (6 (1+2 alpha)) when the amplitude h is known.
struct BoundsReport {
  // inputs
  double L = 0, m = 0, M = 0;
  std::int64_t N = 0;
  double dx = 0, dt = 0, beta = 0, t_N = 0, L_N = 0, f2_at_zero = 0, delta = 0;
  double alpha = 1.0;
  std::optional<double> h;
  // derived
  double gamma_plus = 0, eps_max_upper = 0;
  double gamma_tilde_minus = 0, gamma_minus = 0;
  double eps_min_lower = 0, eps_max_lower = 0;
  bool lower_window_empty = false;
  std::optional<double> eps_max_lower_proof;
};

inline BoundsReport make_bounds_report(double L, double m, double M, std::int64_t N,
                                       double dx, double dt, double beta,
                                       double f2_at_zero, double delta, double alpha,
                                       std::optional<double> h = std::nullopt) {
  BoundsReport r;
  r.L = L;
  r.m = m;
  r.M = M;
  r.N = N;
  r.dx = dx;
  r.dt = dt;
  r.beta = beta;
  r.f2_at_zero = f2_at_zero;
  r.delta = delta;
  r.alpha = alpha;
  r.h = h;
  const UpperBoundResult up = gamma_plus(L, N, dx, dt, m, beta);
  r.L_N = up.L_N;
  r.t_N = up.t_N;
  r.gamma_plus = up.gamma_plus;
  r.eps_max_upper = up.eps_max_upper;
  const LowerBoundResult lo = gamma_minus(L, r.t_N, f2_at_zero, alpha, delta, m, M);
  r.gamma_tilde_minus = lo.gamma_tilde_minus;
  r.gamma_minus = lo.gamma_minus;
  r.eps_min_lower = lo.eps_min_lower;
  r.eps_max_lower = lo.eps_max_lower;
  r.lower_window_empty = lo.window_empty;
  if (h) {
    const double L_T = L - 2.0 * r.t_N * f2_at_zero * *h;
    r.eps_max_lower_proof = L_T * *h / (6.0 * (1.0 + 2.0 * alpha));
  }
  return r;
}

}  // namespace cle
