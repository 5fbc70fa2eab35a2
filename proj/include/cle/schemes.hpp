#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cle/flux.hpp"
#include "cle/profiles.hpp"

namespace cle {

/// Two-point numerical flux g(a, b, lambda) in conservative form, where
/// a is the right state u_{j+1} and b is the left state u_j. Carries the
/// physical flux it approximates (needed for CFL speed bounds).
struct NumericalFlux {
  std::string name;
  FluxModel model;
  std::function<double(double, double, double)> g;
};

struct CflError : std::runtime_error {
  CflError(double cfl, const std::string& msg)
      : std::runtime_error(msg), cfl_number(cfl) {}
  double cfl_number;
};

/// g(a,b,lambda) = (f(a)+f(b))/2 - (a-b)/(2 lambda). Monotone under
/// lambda * sup|f'| <= 1.
inline NumericalFlux lax_friedrichs(FluxModel f = burgers()) {
  NumericalFlux nf;
  nf.name = "lax_friedrichs";
  nf.model = f;
  auto flux = nf.model;
  nf.g = [flux](double a, double b, double lambda) {
    return 0.5 * (flux.eval(a) + flux.eval(b)) - (a - b) / (2.0 * lambda);
  };
  return nf;
}

/// Exact Riemann flux for a convex model with sonic point at the origin
/// (f'(0) = 0): with left state b and right state a,
///   b >= a : max of f over [a, b]  (shock side; reduces to max(f(a), f(b)))
///   b <  a : min of f over [b, a]  (f(0) when the sonic point is interior).
/// The tie b = a returns f(a).
inline NumericalFlux godunov(FluxModel f = burgers()) {
  NumericalFlux nf;
  nf.name = "godunov";
  nf.model = f;
  auto flux = nf.model;
  nf.g = [flux](double a, double b, double /*lambda*/) {
    if (b >= a) return std::max(flux.eval(a), flux.eval(b));
    if (b <= 0.0 && 0.0 <= a) return flux.eval(0.0);
    return std::min(flux.eval(a), flux.eval(b));
  };
  return nf;
}

/// One conservative update u_j' = u_j - lambda [g(u_{j+1},u_j) - g(u_j,u_{j-1})]
/// over the support plus one cell per side. Throws CflError when the state
/// violates lambda * max|f'| <= 1, and WindowError when the support would
/// outgrow the index window.
inline DiscreteProfile step(const DiscreteProfile& u, const NumericalFlux& flux,
                            const GridSpec& grid) {
  const double sup = u.linf();
  const double speed = flux.model.max_wave_speed(sup);
  const double cfl = grid.lambda * speed;
  if (cfl > 1.0 + 1e-12) {
    std::ostringstream os;
    os << flux.name << ": CFL violation, lambda*max|f'| = " << cfl;
    throw CflError(cfl, os.str());
  }
  DiscreteProfile out = DiscreteProfile::zeros(grid);
  if (u.empty_support()) return out;
  if (u.support_lo - 1 < grid.j_min || u.support_hi + 1 > grid.j_max) {
    throw WindowError("step: support reached the window boundary",
                      u.support_lo - 1, u.support_hi + 1);
  }
  for (std::int64_t j = u.support_lo - 1; j <= u.support_hi + 1; ++j) {
    const double gr = flux.g(u.value(j + 1), u.value(j), grid.lambda);
    const double gl = flux.g(u.value(j), u.value(j - 1), grid.lambda);
    out.at(j) = u.value(j) - grid.lambda * (gr - gl);
  }
  out.recompute_support();
  return out;
}

struct OslcDiagnostics {
  std::vector<double> oslc;   // l^+(u^n) for n = 0..N
  std::vector<double> mass;   // sum_j u_j^n dx for n = 0..N
  double beta_hat = std::numeric_limits<double>::infinity();
  double cfl_margin = 1.0;    // 1 - max CFL number over the run

  bool beta_unbounded() const { return !std::isfinite(beta_hat); }
};

struct Trajectory {
  GridSpec grid;
  std::vector<DiscreteProfile> states;  // u^0 .. u^N
  OslcDiagnostics diagnostics;

  const DiscreteProfile& final_state() const { return states.back(); }
};

/// Runs n_steps updates and collects the one-sided-Lipschitz diagnostics.
/// beta_hat is the tightest constant with l^+(u^n) <= 1/(beta_hat t^n) over
/// n >= 1, infinity when every l^+ vanishes.
inline Trajectory evolve(const DiscreteProfile& u0, const NumericalFlux& flux,
                         const GridSpec& grid) {
  Trajectory traj;
  traj.grid = grid;
  traj.states.reserve(static_cast<std::size_t>(grid.n_steps) + 1);
  traj.states.push_back(u0);
  traj.diagnostics.oslc.push_back(u0.oslc_plus());
  traj.diagnostics.mass.push_back(u0.mass());
  double max_cfl = 0.0;
  double beta = std::numeric_limits<double>::infinity();
  for (std::int64_t n = 0; n < grid.n_steps; ++n) {
    const DiscreteProfile& cur = traj.states.back();
    max_cfl = std::max(max_cfl, grid.lambda * flux.model.max_wave_speed(cur.linf()));
    DiscreteProfile next;
    try {
      next = step(cur, flux, grid);
    } catch (const CflError& e) {
      std::ostringstream os;
      os << "evolve: step " << n + 1 << ": " << e.what();
      throw CflError(e.cfl_number, os.str());
    }
    const double lp = next.oslc_plus();
    traj.diagnostics.oslc.push_back(lp);
    traj.diagnostics.mass.push_back(next.mass());
    if (lp > 0.0) beta = std::min(beta, 1.0 / (grid.t(n + 1) * lp));
    traj.states.push_back(std::move(next));
  }
  traj.diagnostics.beta_hat = beta;
  traj.diagnostics.cfl_margin = 1.0 - max_cfl;
  return traj;
}

struct MonotoneReport {
  bool pass = false;
  bool monotone_ok = false;
  bool consistent_ok = false;
  double worst_d1 = 0.0;       // max sampled dg/da (should be <= 0)
  double worst_d2 = 0.0;       // min sampled dg/db (should be >= 0)
  double worst_consistency = 0.0;  // max |g(u,u) - f(u)|
  double cfl_number = 0.0;
  std::string detail;
};

/// Samples one-sided finite differences of g on [-M, M]^2 and reports the
/// worst-case signs together with the CFL number lambda * max|f'|.
inline MonotoneReport check_monotone(const NumericalFlux& flux, const FluxModel& f,
                                     double M, double lambda, int samples) {
  if (samples < 2) throw std::invalid_argument("check_monotone: samples < 2");
  MonotoneReport r;
  r.cfl_number = lambda * f.max_wave_speed(M);
  const double delta = 2.0 * M / (8.0 * samples);
  double worst_d1 = -std::numeric_limits<double>::infinity();
  double worst_d2 = std::numeric_limits<double>::infinity();
  double worst_cons = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double a = -M + 2.0 * M * i / (samples - 1);
    worst_cons = std::max(worst_cons, std::abs(flux.g(a, a, lambda) - f.eval(a)));
    for (int k = 0; k < samples; ++k) {
      const double b = -M + 2.0 * M * k / (samples - 1);
      const double da =
          (flux.g(a + delta, b, lambda) - flux.g(a - delta, b, lambda)) / (2 * delta);
      const double db =
          (flux.g(a, b + delta, lambda) - flux.g(a, b - delta, lambda)) / (2 * delta);
      worst_d1 = std::max(worst_d1, da);
      worst_d2 = std::min(worst_d2, db);
    }
  }
  r.worst_d1 = worst_d1;
  r.worst_d2 = worst_d2;
  r.worst_consistency = worst_cons;
  constexpr double kSlack = 1e-9;
  r.monotone_ok = worst_d1 <= kSlack && worst_d2 >= -kSlack;
  r.consistent_ok = worst_cons <= 1e-12;
  r.pass = r.monotone_ok && r.consistent_ok;
  std::ostringstream os;
  os << flux.name << ": max dg/da=" << worst_d1 << " min dg/db=" << worst_d2
     << " |g(u,u)-f(u)|<=" << worst_cons << " cfl=" << r.cfl_number;
  r.detail = os.str();
  return r;
}

}  // namespace cle
