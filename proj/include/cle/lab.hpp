#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cle/bounds.hpp"
#include "cle/entropy.hpp"
#include "cle/exact.hpp"
#include "cle/flux.hpp"
#include "cle/io.hpp"
#include "cle/profiles.hpp"
#include "cle/rng.hpp"
#include "cle/schemes.hpp"
#include "cle/targets.hpp"

namespace cle {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  std::string flux = "burgers";
  std::string scheme = "godunov";
  double L = 1.0;
  double m = 1.0;
  double M = 1.0;
  double T = 1.0;
  double cfl_target = 0.9;                  // lambda * max|f'| aimed below 1
  std::vector<double> dx_ladder = {0.01, 0.005, 0.0025, 0.00125};
  std::vector<double> eps_ladder;           // empty: derived per pipeline
  double alpha = 1.0;
  int sample_count = 200;
  std::uint64_t seed = 7;
  std::string out_dir;                      // empty: no artifacts written
  double h = 0.0;                           // 0: use the maximal amplitude
  int family_cap = 64;
  double fine_dx = 1e-4;                    // precursor construction grid
  double eps_lower = 0.0;                   // 0: gamma_tilde_minus / 6

  double working_dx() const {
    if (dx_ladder.empty())
      throw std::invalid_argument("ExperimentConfig: dx_ladder must be nonempty");
    return dx_ladder.front();
  }
};

inline void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"flux", c.flux},
           {"scheme", c.scheme},
           {"L", c.L},
           {"m", c.m},
           {"M", c.M},
           {"T", c.T},
           {"cfl_target", c.cfl_target},
           {"dx_ladder", c.dx_ladder},
           {"eps_ladder", c.eps_ladder},
           {"alpha", c.alpha},
           {"sample_count", c.sample_count},
           {"seed", c.seed},
           {"out_dir", c.out_dir},
           {"h", c.h},
           {"family_cap", c.family_cap},
           {"fine_dx", c.fine_dx},
           {"eps_lower", c.eps_lower}};
}

inline void from_json(const json& j, ExperimentConfig& c) {
  c.flux = j.value("flux", c.flux);
  c.scheme = j.value("scheme", c.scheme);
  c.L = j.value("L", c.L);
  c.m = j.value("m", c.m);
  c.M = j.value("M", c.M);
  c.T = j.value("T", c.T);
  c.cfl_target = j.value("cfl_target", c.cfl_target);
  c.dx_ladder = j.value("dx_ladder", c.dx_ladder);
  c.eps_ladder = j.value("eps_ladder", c.eps_ladder);
  c.alpha = j.value("alpha", c.alpha);
  c.sample_count = j.value("sample_count", c.sample_count);
  c.seed = j.value("seed", c.seed);
  c.out_dir = j.value("out_dir", c.out_dir);
  c.h = j.value("h", c.h);
  c.family_cap = j.value("family_cap", c.family_cap);
  c.fine_dx = j.value("fine_dx", c.fine_dx);
  c.eps_lower = j.value("eps_lower", c.eps_lower);
}

inline FluxModel flux_by_name(const std::string& name) {
  if (name == "burgers") return burgers();
  throw std::invalid_argument("unknown flux model: " + name +
                              " (custom models enter through the library API)");
}

inline NumericalFlux scheme_by_name(const std::string& name, const FluxModel& f) {
  if (name == "godunov") return godunov(f);
  if (name == "lax_friedrichs") return lax_friedrichs(f);
  throw std::invalid_argument("unknown scheme: " + name);
}

// ---------------------------------------------------------------------------
// Data-class sampling
// ---------------------------------------------------------------------------

/// Seeded piecewise-constant data in the admissible class: a random partition
/// of [-L, L] into 5..40 pieces with values in [-M s, M s], where the
/// per-sample amplitude s is log-uniform in [1e-2, 1] so the ensemble spans
/// well-separated L1 distance scales. Samples are rescaled when the L1 norm
/// exceeds m and certified against all three constraints.
inline std::vector<ContinuousDatum> sample_data_class(double L, double m, double M,
                                                      int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("sample_data_class: count < 1");
  Rng rng(seed);
  std::vector<ContinuousDatum> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const int pieces = static_cast<int>(rng.uniform_int(5, 40));
    std::vector<double> breaks = rng.sorted_points(pieces - 1, -L, L);
    breaks.insert(breaks.begin(), -L);
    breaks.push_back(L);
    const double amp = std::pow(10.0, rng.uniform(-2.0, 0.0));
    std::vector<double> vals(static_cast<std::size_t>(pieces));
    for (auto& v : vals) v = rng.uniform(-M * amp, M * amp);
    ContinuousDatum d = ContinuousDatum::steps(std::move(breaks), vals, L, m, M);
    const double l1 = d.l1_norm();
    if (l1 > m) {
      const double scale = m / l1 * (1.0 - 1e-12);
      for (auto& av : d.a) av *= scale;
    }
    const DatumClassReport rep = d.validate();
    if (!rep.ok)
      throw std::logic_error("sample_data_class: generated sample failed its class "
                             "certificate: " + rep.detail);
    out.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble evolution
// ---------------------------------------------------------------------------

/// Time step from the CFL policy: dt = cfl_target * dx / max|f'|, then
/// adjusted so N * dt hits T exactly (N rounded up, so the CFL only improves).
inline GridSpec make_run_grid(double dx, double T, double cfl_target,
                              double speed_bound, double support_radius) {
  if (!(speed_bound > 0.0))
    throw std::invalid_argument("make_run_grid: speed bound must be positive");
  const double dt0 = cfl_target * dx / speed_bound;
  const auto N = static_cast<std::int64_t>(std::ceil(T / dt0 - 1e-12));
  const double dt = T / static_cast<double>(N);
  const auto half = static_cast<std::int64_t>(std::ceil(support_radius / dx)) + N + 2;
  return GridSpec::make(dx, dt, -half, half, N);
}

struct EvolvedEnsemble {
  GridSpec grid;
  std::vector<PiecewiseLinear> reconstructions;
  std::vector<double> beta_hats;  // per trajectory; +inf when unbounded
  double beta_ens = std::numeric_limits<double>::infinity();  // min over batch
  double max_mass_drift = 0.0;    // relative, over the batch
  double chain_slack = -std::numeric_limits<double>::infinity();
  // chain_slack = max over batch of ||u^N||_inf - sqrt(2 m /(beta_hat t^N));
  // nonpositive (up to rounding) when the sup-norm decay chain holds.
};

inline EvolvedEnsemble evolve_ensemble(const std::vector<ContinuousDatum>& batch,
                                       const NumericalFlux& flux, double dx, double T,
                                       double cfl_target, double class_m,
                                       double speed_bound) {
  double support = 0.0;
  for (const auto& d : batch) support = std::max(support, d.support_radius);
  EvolvedEnsemble ens;
  ens.grid = make_run_grid(dx, T, cfl_target, speed_bound, support);
  const double t_N = ens.grid.t(ens.grid.n_steps);
  for (const ContinuousDatum& d : batch) {
    const DiscreteProfile u0 = cell_average(d, ens.grid);
    const Trajectory traj = evolve(u0, flux, ens.grid);
    const double beta = traj.diagnostics.beta_hat;
    ens.beta_hats.push_back(beta);
    ens.beta_ens = std::min(ens.beta_ens, beta);
    const double m0 = traj.diagnostics.mass.front();
    const double mN = traj.diagnostics.mass.back();
    ens.max_mass_drift = std::max(
        ens.max_mass_drift, std::abs(mN - m0) / std::max(std::abs(m0), 1e-300));
    const double cap = std::isfinite(beta)
                           ? std::sqrt(2.0 * class_m / (beta * t_N))
                           : 0.0;
    ens.chain_slack =
        std::max(ens.chain_slack, traj.final_state().linf() - cap);
    ens.reconstructions.push_back(interpolate(traj.final_state()));
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Manifests
// ---------------------------------------------------------------------------

struct StageResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct ArtifactRecord {
  std::string path;    // relative to the manifest's directory
  std::string digest;  // fnv1a64 of the file bytes
};

struct RunManifest {
  json config_echo;
  std::string timestamp;
  std::vector<StageResult> stages;
  std::vector<ArtifactRecord> artifacts;
  json measurements = json::object();  // beta_hat, delta_hat, windows, constants
  bool all_pass = true;

  void add_stage(StageResult s) {
    all_pass = all_pass && s.pass;
    stages.push_back(std::move(s));
  }
};

inline void to_json(json& j, const StageResult& s) {
  j = json{{"name", s.name}, {"pass", s.pass}, {"seconds", s.seconds},
           {"detail", s.detail}};
}

inline void to_json(json& j, const ArtifactRecord& a) {
  j = json{{"path", a.path}, {"digest", a.digest}};
}

inline void to_json(json& j, const RunManifest& m) {
  j = json{{"config", m.config_echo},
           {"timestamp", m.timestamp},
           {"stages", m.stages},
           {"artifacts", m.artifacts},
           {"measurements", m.measurements},
           {"all_pass", m.all_pass}};
}

/// Manifest with timing fields removed: reruns with the same seed must agree
/// on everything else byte for byte.
inline json strip_timing(json manifest) {
  manifest.erase("timestamp");
  for (auto& stage : manifest.at("stages")) stage.erase("seconds");
  return manifest;
}

namespace detail {

inline std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Runs a stage body, recording wall clock and converting exceptions into
// failed stages so the manifest always names the failing stage.
inline void run_stage(RunManifest& man, const std::string& name,
                      const std::function<std::pair<bool, std::string>()>& body) {
  StageTimer timer;
  StageResult s;
  s.name = name;
  try {
    auto [pass, detail] = body();
    s.pass = pass;
    s.detail = detail;
  } catch (const std::exception& e) {
    s.pass = false;
    s.detail = std::string("exception: ") + e.what();
  }
  s.seconds = timer.seconds();
  man.add_stage(std::move(s));
}

inline void write_artifact(RunManifest& man, const std::string& out_dir,
                           const std::string& name, const std::string& content) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/" + name;
  write_text_file(path, content);
  man.artifacts.push_back({name, fnv1a64_hex(content)});
}

}  // namespace detail

inline void write_manifest(const RunManifest& man, const std::string& out_dir) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  json j;
  to_json(j, man);
  write_text_file(out_dir + "/manifest.json", j.dump(2) + "\n");
}

/// Re-reads every artifact referenced by a manifest and checks its digest.
inline bool verify_manifest(const std::string& manifest_path) {
  const json j = json::parse(read_text_file(manifest_path));
  const std::filesystem::path dir =
      std::filesystem::path(manifest_path).parent_path();
  for (const auto& a : j.at("artifacts")) {
    const std::string rel = a.at("path").get<std::string>();
    const std::filesystem::path p = dir / rel;
    if (!std::filesystem::exists(p)) return false;
    if (fnv1a64_hex(read_text_file(p.string())) != a.at("digest").get<std::string>())
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Upper-bound pipeline
// ---------------------------------------------------------------------------

/// Samples the data class, evolves every sample, and checks the sampled
/// covering bits of the reconstructed ensemble against gamma_plus/eps on an
/// eps ladder inside the upper validity window. The ensemble beta_hat is the
/// minimum over trajectories (the most conservative constant).
inline RunManifest run_upper_experiment(const ExperimentConfig& config) {
  RunManifest man;
  to_json(man.config_echo, config);
  man.timestamp = detail::now_iso8601();
  const FluxModel f = flux_by_name(config.flux);
  const NumericalFlux scheme = scheme_by_name(config.scheme, f);

  std::vector<ContinuousDatum> data;
  detail::run_stage(man, "sample", [&] {
    data = sample_data_class(config.L, config.m, config.M, config.sample_count,
                             config.seed);
    return std::make_pair(true, "samples=" + std::to_string(data.size()));
  });
  if (!man.all_pass) return man;

  EvolvedEnsemble ens;
  detail::run_stage(man, "evolve", [&] {
    ens = evolve_ensemble(data, scheme, config.working_dx(), config.T,
                          config.cfl_target, config.m,
                          f.max_wave_speed(config.M));
    std::ostringstream os;
    os << "beta_hat=" << ens.beta_ens << " mass_drift=" << ens.max_mass_drift;
    return std::make_pair(ens.max_mass_drift <= 1e-12, os.str());
  });
  if (!man.all_pass) return man;

  detail::run_stage(man, "supnorm_chain", [&] {
    std::ostringstream os;
    os << "max slack=" << ens.chain_slack;
    return std::make_pair(ens.chain_slack <= 1e-10, os.str());
  });

  detail::run_stage(man, "covering_vs_bound", [&] {
    const double t_N = ens.grid.t(ens.grid.n_steps);
    double gp = 0.0, eps_max = 0.0;
    if (std::isfinite(ens.beta_ens)) {
      const UpperBoundResult ub =
          gamma_plus(config.L, ens.grid.n_steps, ens.grid.dx, ens.grid.dt, config.m,
                     ens.beta_ens);
      gp = ub.gamma_plus;
      eps_max = ub.eps_max_upper;
    }
    std::vector<double> ladder = config.eps_ladder;
    if (ladder.empty()) {
      const double top = eps_max > 0.0 ? eps_max : 0.1;
      for (int k = 0; k < 6; ++k) ladder.push_back(top * std::pow(0.5, k));
    }
    const DistanceMatrix dm = pairwise_distances(ens.reconstructions);
    bool ok = true;
    std::ostringstream csv;
    csv << "eps,covering_count,h_upper_bits,bound_bits\n";
    json per_eps = json::array();
    for (const double eps : ladder) {
      const EntropyEstimate est = estimate_entropy(dm, eps);
      const double bound = eps > 0.0 ? gp / eps : 0.0;
      ok = ok && est.h_upper_bits <= bound + 1e-12;
      csv << format_double(eps) << "," << est.covering_count << ","
          << format_double(est.h_upper_bits) << "," << format_double(bound) << "\n";
      json je;
      to_json(je, est);
      je["bound_bits"] = bound;
      per_eps.push_back(je);
    }
    man.measurements["upper"] = {
        {"beta_hat", std::isfinite(ens.beta_ens) ? json(ens.beta_ens)
                                                 : json("unbounded")},
        {"gamma_plus", gp},
        {"eps_max_upper", eps_max},
        {"t_N", t_N},
        {"per_eps", per_eps}};
    detail::write_artifact(man, config.out_dir, "upper_estimates.csv", csv.str());
    detail::write_artifact(man, config.out_dir, "upper_report.json",
                           man.measurements["upper"].dump(2) + "\n");
    std::ostringstream os;
    os << "gamma_plus=" << gp << " eps_max=" << eps_max << " ladder=" << ladder.size();
    return std::make_pair(ok, os.str());
  });
  return man;
}

// ---------------------------------------------------------------------------
// Lower-bound pipeline
// ---------------------------------------------------------------------------

/// Builds the separated target family at scale (1+2 alpha) eps, constructs
/// precursors, refines dx until the measured forward error delta_hat is at
/// most alpha*eps, and certifies that the numerical images remain pairwise
/// more than 2 eps apart, so their packing bits dominate log2 |F|.
inline RunManifest run_lower_experiment(const ExperimentConfig& config) {
  RunManifest man;
  to_json(man.config_echo, config);
  man.timestamp = detail::now_iso8601();
  const FluxModel f = flux_by_name(config.flux);
  const NumericalFlux scheme = scheme_by_name(config.scheme, f);
  const double alpha = config.alpha;

  const double h_cls = config.h > 0.0
                           ? config.h
                           : TargetClassSpec::h_max(config.L, config.m, config.M,
                                                    config.T, f.second_deriv_at_zero);
  TargetClassSpec cls;
  SeparatedFamily fam;
  double eps = 0.0;
  detail::run_stage(man, "targets", [&] {
    cls = TargetClassSpec::make(config.L, config.m, config.M, config.T,
                                f.second_deriv_at_zero, h_cls);
    const double gtm = config.L * config.L /
                       (48.0 * std::log(2.0) * config.T * f.second_deriv_at_zero);
    eps = config.eps_lower > 0.0 ? config.eps_lower : gtm / 6.0;
    const double eps_tilde = (1.0 + 2.0 * alpha) * eps;
    fam = make_separated_targets(cls, eps_tilde, config.seed,
                                 static_cast<std::size_t>(config.family_cap));
    json jf;
    to_json(jf, fam);
    detail::write_artifact(man, config.out_dir, "family.json", jf.dump(2) + "\n");
    std::ostringstream os;
    os << "|F|=" << fam.members.size() << " eps_tilde=" << eps_tilde
       << " min_pairwise=" << fam.min_pairwise_distance;
    return std::make_pair(fam.members.size() >= 2, os.str());
  });
  if (!man.all_pass) return man;

  std::vector<PrecursorRecord> precursors;
  detail::run_stage(man, "precursors", [&] {
    double max_tv = 0.0, max_err = 0.0;
    json jp = json::array();
    for (const FamilyMember& mem : fam.members) {
      PrecursorRecord rec = build_precursor(mem.profile, fam.spec, f, config.fine_dx);
      max_tv = std::max(max_tv, rec.tv);
      max_err = std::max(max_err, rec.verification_error);
      json jr;
      to_json(jr, rec.precursor);
      jr["tv"] = rec.tv;
      jr["verification_error"] = rec.verification_error;
      jp.push_back(jr);
      precursors.push_back(std::move(rec));
    }
    const double c_bv = 1.5 * max_tv;
    man.measurements["precursors"] = {{"max_tv", max_tv},
                                      {"c_bv", c_bv},
                                      {"max_verification_error", max_err},
                                      {"fine_dx", config.fine_dx}};
    detail::write_artifact(man, config.out_dir, "precursors.json",
                           json{{"c_bv", c_bv}, {"records", jp}}.dump(2) + "\n");
    std::ostringstream os;
    os << "max_tv=" << max_tv << " max_verification_error=" << max_err;
    return std::make_pair(true, os.str());
  });
  if (!man.all_pass) return man;

  std::vector<PiecewiseLinear> images;
  double delta_hat = std::numeric_limits<double>::infinity();
  double used_dx = 0.0;
  detail::run_stage(man, "refine", [&] {
    double sup = 0.0;
    std::vector<ContinuousDatum> batch;
    for (const auto& rec : precursors) {
      batch.push_back(rec.precursor);
      sup = std::max(sup, rec.precursor.linf_norm());
    }
    std::ostringstream os;
    for (const double dx : config.dx_ladder) {
      EvolvedEnsemble ens = evolve_ensemble(batch, scheme, dx, config.T,
                                            config.cfl_target, config.m,
                                            f.max_wave_speed(sup));
      double dh = 0.0;
      for (std::size_t i = 0; i < precursors.size(); ++i)
        dh = std::max(dh, l1_distance(ens.reconstructions[i],
                                      precursors[i].target));
      os << "dx=" << dx << " delta_hat=" << dh << "; ";
      if (dh < delta_hat) {
        delta_hat = dh;
        images = std::move(ens.reconstructions);
        used_dx = dx;
      }
      if (delta_hat <= alpha * eps) break;
    }
    man.measurements["lower"] = {{"eps", eps},
                                 {"alpha", alpha},
                                 {"delta_hat", delta_hat},
                                 {"dx", used_dx}};
    if (delta_hat > alpha * eps) {
      os << "window empty: delta_hat > alpha*eps";
      return std::make_pair(false, os.str());
    }
    return std::make_pair(true, os.str());
  });
  if (!man.all_pass) return man;

  detail::run_stage(man, "separation", [&] {
    double min_pair = std::numeric_limits<double>::infinity();
    std::size_t bad_i = 0, bad_j = 0;
    for (std::size_t i = 0; i < images.size(); ++i)
      for (std::size_t j = i + 1; j < images.size(); ++j) {
        const double d = l1_distance(images[i], images[j]);
        if (d < min_pair) {
          min_pair = d;
          bad_i = i;
          bad_j = j;
        }
      }
    std::ostringstream os;
    if (!(min_pair > 2.0 * eps)) {
      os << "separation failure: pair (" << bad_i << "," << bad_j
         << ") at distance " << min_pair << " <= 2*eps = " << 2.0 * eps;
      return std::make_pair(false, os.str());
    }
    os << "min numerical pairwise=" << min_pair << " > 2*eps=" << 2.0 * eps;
    man.measurements["lower"]["min_numerical_pairwise"] = min_pair;
    return std::make_pair(true, os.str());
  });
  if (!man.all_pass) return man;

  detail::run_stage(man, "packing_vs_family", [&] {
    const std::size_t packing = packing_count(images, eps);
    const double bits = std::log2(static_cast<double>(packing));
    const double family_bits = fam.log2_cardinality();
    const LowerBoundResult lb = gamma_minus(config.L, config.T,
                                            f.second_deriv_at_zero, alpha, delta_hat,
                                            config.m, config.M);
    const TransferCertificate cert = transfer_certificate(
        TransferSpec{family_bits, delta_hat, alpha,
                     fam.spec.L * fam.spec.h / 8.0},
        eps);
    man.measurements["lower"]["packing_bits"] = bits;
    man.measurements["lower"]["family_bits"] = family_bits;
    man.measurements["lower"]["gamma_minus_over_eps"] = lb.gamma_minus / eps;
    man.measurements["lower"]["eps_min_lower"] = lb.eps_min_lower;
    man.measurements["lower"]["eps_max_lower"] = lb.eps_max_lower;
    man.measurements["lower"]["transfer_window_ok"] = cert.window_ok;
    detail::write_artifact(man, config.out_dir, "lower_report.json",
                           man.measurements["lower"].dump(2) + "\n");
    std::ostringstream os;
    os << "packing_bits=" << bits << " family_bits=" << family_bits
       << " gamma_minus/eps=" << lb.gamma_minus / eps;
    return std::make_pair(bits >= family_bits - 1e-12, os.str());
  });
  return man;
}

// ---------------------------------------------------------------------------
// Cover-transfer pipeline
// ---------------------------------------------------------------------------

/// Pairs exact and numerical solutions over a sampled batch, measures the
/// worst pairing gap delta_hat, and certifies constructively that the
/// delta_hat-radius numerical cover transfers to a 2*delta_hat cover of the
/// exact sample. A negative control corrupts one numerical sample by a
/// 3*delta_hat bump and must fail the certificate by name.
inline RunManifest run_lax_check(const ExperimentConfig& config) {
  RunManifest man;
  to_json(man.config_echo, config);
  man.timestamp = detail::now_iso8601();
  const FluxModel f = flux_by_name(config.flux);
  const NumericalFlux scheme = scheme_by_name(config.scheme, f);

  std::vector<ContinuousDatum> data;
  std::vector<PiecewiseLinear> numerical, exact;
  double delta_hat = 0.0;
  detail::run_stage(man, "pair", [&] {
    data = sample_data_class(config.L, config.m, config.M, config.sample_count,
                             config.seed);
    EvolvedEnsemble ens =
        evolve_ensemble(data, scheme, config.working_dx(), config.T,
                        config.cfl_target, config.m, f.max_wave_speed(config.M));
    numerical = std::move(ens.reconstructions);
    const double t_N = ens.grid.t(ens.grid.n_steps);
    for (const auto& d : data)
      exact.push_back(exact_sampled(d, t_N, ens.grid.dx / 8.0, f));
    for (std::size_t i = 0; i < data.size(); ++i)
      delta_hat = std::max(delta_hat, l1_distance(exact[i], numerical[i]));
    man.measurements["lax"] = {{"delta_hat", delta_hat},
                               {"samples", data.size()}};
    std::ostringstream os;
    os << "delta_hat=" << delta_hat;
    return std::make_pair(true, os.str());
  });
  if (!man.all_pass) return man;

  std::vector<std::size_t> centers;
  detail::run_stage(man, "transfer", [&] {
    const DistanceMatrix dm = pairwise_distances(numerical);
    centers = covering_centers(dm, delta_hat);
    const CoverTransferResult ct =
        cover_transfer(exact, numerical, centers, delta_hat);
    std::ostringstream os;
    if (!ct.ok) {
      os << "certification failed at sample " << ct.failures.front().sample << ": "
         << ct.failures.front().reason;
      return std::make_pair(false, os.str());
    }
    // The transferred centers cover the exact sample at radius 2*delta_hat,
    // so the exact-side covering estimate never exceeds the numerical one.
    const DistanceMatrix de = pairwise_distances(exact);
    const std::size_t exact_greedy = covering_centers(de, 2.0 * delta_hat).size();
    const std::size_t exact_count = std::min(exact_greedy, centers.size());
    const double exact_bits = std::log2(static_cast<double>(exact_count));
    const double numerical_bits = std::log2(static_cast<double>(centers.size()));
    man.measurements["lax"]["numerical_cover"] = centers.size();
    man.measurements["lax"]["exact_cover"] = exact_count;
    man.measurements["lax"]["exact_bits"] = exact_bits;
    man.measurements["lax"]["numerical_bits"] = numerical_bits;
    detail::write_artifact(man, config.out_dir, "lax_report.json",
                           man.measurements["lax"].dump(2) + "\n");
    os << "covers: exact(2d)=" << exact_count << " <= numerical(d)=" << centers.size();
    return std::make_pair(exact_bits <= numerical_bits + 1e-12, os.str());
  });
  if (!man.all_pass) return man;

  detail::run_stage(man, "negative_control", [&] {
    const std::size_t k = numerical.size() / 2;
    const double width = 0.25;
    const double height = 3.0 * delta_hat / width;  // tent area w*h = 3 delta_hat
    const PiecewiseLinear bump({-width, 0.0, width}, {0.0, height, 0.0});
    std::vector<PiecewiseLinear> corrupted = numerical;
    corrupted[k] = linear_combination(1.0, numerical[k], 1.0, bump);
    const CoverTransferResult ct =
        cover_transfer(exact, corrupted, centers, delta_hat);
    std::ostringstream os;
    bool named = false;
    for (const auto& fail : ct.failures) named = named || fail.sample == k;
    os << "corrupted sample " << k << ", failures=" << ct.failures.size();
    return std::make_pair(!ct.ok && named, os.str());
  });
  return man;
}

// ---------------------------------------------------------------------------
// Convergence-rate and resolution stages
// ---------------------------------------------------------------------------

inline double log_log_slope(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("log_log_slope: need matching sequences of >= 2");
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(ys[i]) - my);
  }
  return sxy / sxx;
}

struct RateResult {
  std::vector<double> dxs;
  std::vector<double> deltas;
  double slope = 0.0;
};

/// Worst-case forward error over a shock-bearing batch across the dx ladder,
/// with the fitted log-log convergence slope.
inline RateResult measure_rate(const ExperimentConfig& config,
                               const std::vector<ContinuousDatum>& batch) {
  const FluxModel f = flux_by_name(config.flux);
  const NumericalFlux scheme = scheme_by_name(config.scheme, f);
  RateResult r;
  double support = 0.0;
  for (const auto& d : batch) support = std::max(support, d.support_radius);
  for (const double dx : config.dx_ladder) {
    const GridSpec grid = make_run_grid(dx, config.T, config.cfl_target,
                                        f.max_wave_speed(config.M), support);
    const ErrorReport rep = measure_delta(batch, scheme, grid, f);
    r.dxs.push_back(dx);
    r.deltas.push_back(rep.delta);
  }
  r.slope = log_log_slope(r.dxs, r.deltas);
  return r;
}

struct ResolutionResult {
  ScalingFit exact_fit;
  ScalingFit numerical_fit;
  Resolution label = Resolution::inconclusive;
  std::vector<double> eps_ladder;
};

/// Covering-bit scaling of the exact and the reconstructed solution sets over
/// a shared eps ladder (quantiles of the numerical pairwise distances), fitted
/// and classified.
inline ResolutionResult classify_ensemble_resolution(const ExperimentConfig& config,
                                                     double tol = 0.15) {
  const FluxModel f = flux_by_name(config.flux);
  const NumericalFlux scheme = scheme_by_name(config.scheme, f);
  const std::vector<ContinuousDatum> data = sample_data_class(
      config.L, config.m, config.M, config.sample_count, config.seed);
  EvolvedEnsemble ens =
      evolve_ensemble(data, scheme, config.working_dx(), config.T, config.cfl_target,
                      config.m, f.max_wave_speed(config.M));
  const double t_N = ens.grid.t(ens.grid.n_steps);
  std::vector<PiecewiseLinear> exact;
  for (const auto& d : data)
    exact.push_back(exact_sampled(d, t_N, ens.grid.dx / 4.0, f));

  const DistanceMatrix dn = pairwise_distances(ens.reconstructions);
  const DistanceMatrix de = pairwise_distances(exact);

  ResolutionResult r;
  if (!config.eps_ladder.empty()) {
    r.eps_ladder = config.eps_ladder;
  } else {
    // ladder from the distance quantiles: below q05 the covering counts
    // saturate at the sample size, above ~q60 they collapse to a handful
    std::vector<double> dists;
    for (std::size_t i = 0; i < dn.n; ++i)
      for (std::size_t j = i + 1; j < dn.n; ++j)
        if (dn.at(i, j) > 0.0) dists.push_back(dn.at(i, j));
    std::sort(dists.begin(), dists.end());
    const double lo = 0.5 * dists[static_cast<std::size_t>(0.05 * dists.size())];
    const double hi = 0.5 * dists[static_cast<std::size_t>(0.60 * dists.size())];
    for (int k = 0; k < 8; ++k)
      r.eps_ladder.push_back(lo * std::pow(hi / lo, k / 7.0));
  }

  std::vector<std::pair<double, double>> pe, pn;
  for (const double eps : r.eps_ladder) {
    const EntropyEstimate ee = estimate_entropy(de, eps);
    const EntropyEstimate en = estimate_entropy(dn, eps);
    if (ee.h_upper_bits > 0.0 && en.h_upper_bits > 0.0) {
      pe.push_back({eps, ee.h_upper_bits});
      pn.push_back({eps, en.h_upper_bits});
    }
  }
  r.exact_fit = fit_scaling(pe);
  r.numerical_fit = fit_scaling(pn);
  r.label = classify_resolution(r.exact_fit, r.numerical_fit, tol);
  return r;
}

// ---------------------------------------------------------------------------
// Full pipeline
// ---------------------------------------------------------------------------

/// Upper, lower, and cover-transfer pipelines plus the convergence-rate and
/// resolution-classification stages, merged into one manifest written (with
/// all artifacts) under config.out_dir.
inline RunManifest run_experiment(const ExperimentConfig& config) {
  RunManifest man;
  to_json(man.config_echo, config);
  man.timestamp = detail::now_iso8601();

  auto absorb = [&man](const RunManifest& sub, const std::string& prefix) {
    for (const StageResult& s : sub.stages) {
      StageResult cp = s;
      cp.name = prefix + "/" + s.name;
      man.add_stage(std::move(cp));
    }
    for (const ArtifactRecord& a : sub.artifacts) man.artifacts.push_back(a);
    for (auto it = sub.measurements.begin(); it != sub.measurements.end(); ++it)
      man.measurements[it.key()] = it.value();
  };

  absorb(run_upper_experiment(config), "upper");
  absorb(run_lower_experiment(config), "lower");
  {
    ExperimentConfig lax_cfg = config;
    lax_cfg.sample_count = std::min(config.sample_count, 40);
    absorb(run_lax_check(lax_cfg), "lax");
  }

  detail::run_stage(man, "rate", [&] {
    const std::vector<ContinuousDatum> batch =
        sample_data_class(config.L, config.m, config.M, 10, config.seed + 101);
    const FluxModel f = flux_by_name(config.flux);
    const NumericalFlux scheme = scheme_by_name(config.scheme, f);
    double support = 0.0;
    for (const auto& d : batch) support = std::max(support, d.support_radius);
    RateResult r;
    json reports = json::array();
    for (const double dx : config.dx_ladder) {
      const GridSpec grid = make_run_grid(dx, config.T, config.cfl_target,
                                          f.max_wave_speed(config.M), support);
      const ErrorReport rep = measure_delta(batch, scheme, grid, f);
      r.dxs.push_back(dx);
      r.deltas.push_back(rep.delta);
      json jr;
      to_json(jr, rep);
      reports.push_back(jr);
    }
    r.slope = log_log_slope(r.dxs, r.deltas);
    std::ostringstream csv;
    csv << "dx,delta\n";
    for (std::size_t i = 0; i < r.dxs.size(); ++i)
      csv << format_double(r.dxs[i]) << "," << format_double(r.deltas[i]) << "\n";
    detail::write_artifact(man, config.out_dir, "rate.csv", csv.str());
    detail::write_artifact(man, config.out_dir, "rate_reports.json",
                           reports.dump(2) + "\n");
    man.measurements["rate"] = {{"slope", r.slope},
                                {"dxs", r.dxs},
                                {"deltas", r.deltas}};
    std::ostringstream os;
    os << "slope=" << r.slope;
    return std::make_pair(r.slope >= 0.4, os.str());
  });

  detail::run_stage(man, "resolution", [&] {
    ExperimentConfig cls_cfg = config;
    cls_cfg.seed = config.seed + 202;
    cls_cfg.sample_count = std::min(config.sample_count, 120);
    const ResolutionResult r = classify_ensemble_resolution(cls_cfg);
    man.measurements["resolution"] = {
        {"label", to_string(r.label)},
        {"exact_exponent", r.exact_fit.exponent},
        {"numerical_exponent", r.numerical_fit.exponent},
        {"exact_r2", r.exact_fit.r_squared},
        {"numerical_r2", r.numerical_fit.r_squared}};
    std::ostringstream os;
    os << "label=" << to_string(r.label) << " exact_exp=" << r.exact_fit.exponent
       << " num_exp=" << r.numerical_fit.exponent;
    return std::make_pair(r.label == Resolution::high, os.str());
  });

  detail::run_stage(man, "bounds_report", [&] {
    const double beta =
        man.measurements.contains("upper") &&
                man.measurements["upper"]["beta_hat"].is_number()
            ? man.measurements["upper"]["beta_hat"].get<double>()
            : 1.0;
    const double delta =
        man.measurements.contains("lower") &&
                man.measurements["lower"].contains("delta_hat")
            ? man.measurements["lower"]["delta_hat"].get<double>()
            : 0.0;
    const FluxModel f = flux_by_name(config.flux);
    const double dx = config.working_dx();
    const GridSpec grid = make_run_grid(dx, config.T, config.cfl_target,
                                        f.max_wave_speed(config.M), config.L);
    const double h_cls =
        config.h > 0.0 ? config.h
                       : TargetClassSpec::h_max(config.L, config.m, config.M,
                                                config.T, f.second_deriv_at_zero);
    const BoundsReport rep = make_bounds_report(
        config.L, config.m, config.M, grid.n_steps, grid.dx, grid.dt, beta,
        f.second_deriv_at_zero, delta, config.alpha, h_cls);
    json jr;
    to_json(jr, rep);
    detail::write_artifact(man, config.out_dir, "bounds.json", jr.dump(2) + "\n");
    man.measurements["bounds"] = jr;
    return std::make_pair(true, "gamma_plus=" + format_double(rep.gamma_plus));
  });

  write_manifest(man, config.out_dir);
  return man;
}

}  // namespace cle
