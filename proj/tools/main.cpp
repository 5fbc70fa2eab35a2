// Command-line front end: solve a single datum, sample ensembles, build
// separated target families and their precursors, estimate entropy, evaluate
// the closed-form bounds, and drive the full experiment pipelines.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cle/lab.hpp"

using namespace cle;

namespace {

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig cfg;
  if (!path.empty()) from_json(json::parse(read_text_file(path)), cfg);
  return cfg;
}

ContinuousDatum datum_from_file(const std::string& path, double L, double m,
                                double M) {
  if (path.size() > 5 && path.substr(path.size() - 5) == ".json") {
    return json::parse(read_text_file(path)).get<ContinuousDatum>();
  }
  const PiecewiseLinear nodes = profile_from_csv(read_text_file(path));
  return ContinuousDatum::piecewise_linear(nodes, L, m, M);
}

int print_stages(const RunManifest& man) {
  for (const StageResult& s : man.stages)
    std::printf("[%s] %-22s %s (%.1fs)\n", s.pass ? "PASS" : "FAIL",
                s.name.c_str(), s.detail.c_str(), s.seconds);
  return man.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monotone-scheme entropy laboratory for scalar conservation laws"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override it)")
      ->check(CLI::ExistingFile);

  // ---- solve ----
  auto* solve = app.add_subcommand("solve", "evolve one datum and dump the trajectory");
  std::string solve_flux = "burgers", solve_scheme = "godunov", solve_datum,
              solve_out = "traj.csv", solve_diag;
  double solve_dx = 0.01, solve_cfl = 0.9, solve_T = 1.0;
  double solve_L = 1.0, solve_m = 1.0, solve_M = 1.0;
  solve->add_option("--flux", solve_flux, "flux model name");
  solve->add_option("--scheme", solve_scheme, "godunov or lax_friedrichs");
  solve->add_option("--dx", solve_dx, "mesh size")->check(CLI::PositiveNumber);
  solve->add_option("--cfl", solve_cfl, "CFL target in (0,1]");
  solve->add_option("--T", solve_T, "final time")->check(CLI::PositiveNumber);
  solve->add_option("--datum", solve_datum, "datum file (CSV nodes or JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  solve->add_option("--L", solve_L, "declared support radius");
  solve->add_option("--m", solve_m, "declared L1 budget");
  solve->add_option("--M", solve_M, "declared sup budget");
  solve->add_option("--out", solve_out, "trajectory CSV path");
  solve->add_option("--diagnostics", solve_diag, "diagnostics JSON path");

  // ---- ensemble ----
  auto* ensemble = app.add_subcommand("ensemble", "sample the admissible data class");
  int ens_count = 200;
  std::uint64_t ens_seed = 7;
  double ens_L = 1.0, ens_m = 1.0, ens_M = 1.0;
  std::string ens_out = "ensemble.json";
  ensemble->add_option("--count", ens_count)->check(CLI::PositiveNumber);
  ensemble->add_option("--seed", ens_seed);
  ensemble->add_option("--L", ens_L);
  ensemble->add_option("--m", ens_m);
  ensemble->add_option("--M", ens_M);
  ensemble->add_option("--out", ens_out);

  // ---- targets ----
  auto* targets = app.add_subcommand("targets", "build a separated target family");
  double tg_L = 1.0, tg_m = 1.0, tg_M = 1.0, tg_T = 1.0, tg_f2 = 1.0, tg_h = 0.0,
         tg_eps = 0.01;
  std::uint64_t tg_seed = 7;
  int tg_cap = 4096;
  std::string tg_out = "family.json";
  targets->add_option("--L", tg_L);
  targets->add_option("--m", tg_m);
  targets->add_option("--M", tg_M);
  targets->add_option("--T", tg_T);
  targets->add_option("--f2", tg_f2, "|f''(0)|");
  targets->add_option("--amplitude", tg_h, "class amplitude (default: maximal)");
  targets->add_option("--eps", tg_eps)->required();
  targets->add_option("--seed", tg_seed);
  targets->add_option("--max-members", tg_cap);
  targets->add_option("--out", tg_out);

  // ---- precursors ----
  auto* precursors =
      app.add_subcommand("precursors", "build initial data hitting a target family");
  std::string pc_family, pc_out = "precursors.json";
  double pc_fine_dx = 1e-4, pc_T = 0.0;
  precursors->add_option("--targets", pc_family, "family JSON")
      ->required()
      ->check(CLI::ExistingFile);
  precursors->add_option("--T", pc_T, "override the family's horizon");
  precursors->add_option("--fine-dx", pc_fine_dx)->check(CLI::PositiveNumber);
  precursors->add_option("--out", pc_out);

  // ---- entropy ----
  auto* entropy = app.add_subcommand("entropy", "packing/covering estimate of a family");
  std::string en_family, en_mode = "both", en_out = "estimate.json";
  double en_eps = 0.02;
  entropy->add_option("--family", en_family, "family JSON")
      ->required()
      ->check(CLI::ExistingFile);
  entropy->add_option("--eps", en_eps)->required();
  entropy->add_option("--mode", en_mode, "packing, covering, or both");
  entropy->add_option("--out", en_out);

  // ---- bounds ----
  auto* bounds = app.add_subcommand("bounds", "closed-form constants and windows");
  std::string bd_out = "bounds.json";
  double bd_L = 1, bd_m = 1, bd_M = 1, bd_dx = 0.01, bd_dt = 0.009, bd_beta = 1.0,
         bd_f2 = 1.0, bd_delta = 0.0, bd_alpha = 1.0, bd_h = 0.0;
  std::int64_t bd_N = 112;
  bounds->add_option("--L", bd_L);
  bounds->add_option("--m", bd_m);
  bounds->add_option("--M", bd_M);
  bounds->add_option("--N", bd_N);
  bounds->add_option("--dx", bd_dx);
  bounds->add_option("--dt", bd_dt);
  bounds->add_option("--beta", bd_beta);
  bounds->add_option("--f2", bd_f2);
  bounds->add_option("--delta", bd_delta);
  bounds->add_option("--alpha", bd_alpha);
  bounds->add_option("--amplitude", bd_h, "amplitude for the proof-level window edge");
  bounds->add_option("--out", bd_out);

  // ---- pipelines ----
  auto* upper = app.add_subcommand("upper", "upper-bound pipeline");
  auto* lower = app.add_subcommand("lower", "lower-bound pipeline");
  auto* lax = app.add_subcommand("lax", "cover-transfer pipeline");
  auto* run = app.add_subcommand("run", "full pipeline with manifest");
  auto* verify = app.add_subcommand("verify", "run the acceptance pipelines");
  std::string out_dir = "out";
  for (CLI::App* sub : {upper, lower, lax, run, verify})
    sub->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) {
      const FluxModel f = flux_by_name(solve_flux);
      const NumericalFlux scheme = scheme_by_name(solve_scheme, f);
      const ContinuousDatum d = datum_from_file(solve_datum, solve_L, solve_m, solve_M);
      const GridSpec grid = make_run_grid(solve_dx, solve_T, solve_cfl,
                                          f.max_wave_speed(solve_M), d.support_radius);
      const Trajectory traj = evolve(cell_average(d, grid), scheme, grid);
      write_text_file(solve_out, trajectory_to_csv(traj));
      if (!solve_diag.empty()) {
        json jd;
        to_json(jd, traj.diagnostics);
        jd["cfl_number"] = grid.lambda * f.max_wave_speed(solve_M);
        jd["mass_drift"] = std::abs(traj.diagnostics.mass.back() -
                                    traj.diagnostics.mass.front());
        write_text_file(solve_diag, jd.dump(2) + "\n");
      }
      std::printf("wrote %s (N=%lld states)\n", solve_out.c_str(),
                  static_cast<long long>(traj.states.size()));
      return 0;
    }

    if (ensemble->parsed()) {
      const auto data = sample_data_class(ens_L, ens_m, ens_M, ens_count, ens_seed);
      json arr = json::array();
      for (const auto& d : data) {
        json jd;
        to_json(jd, d);
        arr.push_back(jd);
      }
      write_text_file(ens_out, json{{"seed", ens_seed}, {"data", arr}}.dump(2) + "\n");
      std::printf("wrote %s (%zu samples)\n", ens_out.c_str(), data.size());
      return 0;
    }

    if (targets->parsed()) {
      const double h = tg_h > 0 ? tg_h
                                : TargetClassSpec::h_max(tg_L, tg_m, tg_M, tg_T, tg_f2);
      const TargetClassSpec cls = TargetClassSpec::make(tg_L, tg_m, tg_M, tg_T, tg_f2, h);
      const SeparatedFamily fam = make_separated_targets(
          cls, tg_eps, tg_seed, static_cast<std::size_t>(tg_cap));
      json j;
      to_json(j, fam);
      write_text_file(tg_out, j.dump(2) + "\n");
      std::printf("wrote %s (|F|=%zu, min pairwise=%g > 2 eps=%g)\n", tg_out.c_str(),
                  fam.members.size(), fam.min_pairwise_distance, 2 * tg_eps);
      return 0;
    }

    if (precursors->parsed()) {
      const auto fam = json::parse(read_text_file(pc_family)).get<SeparatedFamily>();
      const FluxModel f = burgers();
      const TargetClassSpec cls =
          pc_T > 0.0 ? TargetClassSpec::make(fam.spec.L, fam.spec.m, fam.spec.M,
                                             pc_T, fam.spec.f2_at_zero, fam.spec.h)
                     : fam.spec;
      json records = json::array();
      double max_tv = 0.0, max_err = 0.0;
      for (const FamilyMember& mem : fam.members) {
        const PrecursorRecord rec = build_precursor(mem.profile, cls, f, pc_fine_dx);
        json jr;
        to_json(jr, rec.precursor);
        jr["tv"] = rec.tv;
        jr["verification_error"] = rec.verification_error;
        records.push_back(jr);
        max_tv = std::max(max_tv, rec.tv);
        max_err = std::max(max_err, rec.verification_error);
      }
      write_text_file(pc_out, json{{"c_bv", 1.5 * max_tv},
                                   {"max_verification_error", max_err},
                                   {"records", records}}
                                  .dump(2) +
                                  "\n");
      std::printf("wrote %s (%zu precursors, C_BV=%g, max err=%g)\n", pc_out.c_str(),
                  fam.members.size(), 1.5 * max_tv, max_err);
      return 0;
    }

    if (entropy->parsed()) {
      const json jf = json::parse(read_text_file(en_family));
      std::vector<PiecewiseLinear> family;
      const json& members = jf.contains("members") ? jf.at("members") : jf;
      for (const auto& mj : members) {
        PiecewiseLinear p;
        json nodes{{"nodes", mj.contains("nodes") ? mj.at("nodes") : mj}};
        from_json(nodes, p);
        family.push_back(std::move(p));
      }
      const EntropyEstimate est = estimate_entropy(family, en_eps);
      json j;
      to_json(j, est);
      j["mode"] = en_mode;
      write_text_file(en_out, j.dump(2) + "\n");
      std::printf("packing=%zu covering=%zu (h_lower=%g h_upper=%g bits)\n",
                  est.packing_count, est.covering_count, est.h_lower_bits,
                  est.h_upper_bits);
      return 0;
    }

    if (bounds->parsed()) {
      const BoundsReport rep = make_bounds_report(
          bd_L, bd_m, bd_M, bd_N, bd_dx, bd_dt, bd_beta, bd_f2, bd_delta, bd_alpha,
          bd_h > 0 ? std::optional<double>(bd_h) : std::nullopt);
      json j;
      to_json(j, rep);
      write_text_file(bd_out, j.dump(2) + "\n");
      std::printf("gamma_plus=%g (eps<=%g), gamma_minus=%g (window [%g, %g]%s)\n",
                  rep.gamma_plus, rep.eps_max_upper, rep.gamma_minus,
                  rep.eps_min_lower, rep.eps_max_lower,
                  rep.lower_window_empty ? ", empty" : "");
      return 0;
    }

    ExperimentConfig cfg = load_config(config_path);
    cfg.out_dir = out_dir;
    if (upper->parsed()) return print_stages(run_upper_experiment(cfg));
    if (lower->parsed()) return print_stages(run_lower_experiment(cfg));
    if (lax->parsed()) return print_stages(run_lax_check(cfg));
    if (run->parsed()) {
      const RunManifest man = run_experiment(cfg);
      const int rc = print_stages(man);
      std::printf("manifest: %s/manifest.json (verified: %s)\n", cfg.out_dir.c_str(),
                  verify_manifest(cfg.out_dir + "/manifest.json") ? "yes" : "NO");
      return rc;
    }
    if (verify->parsed()) {
      std::printf("acceptance pipelines (see also the cle_acceptance binary)\n");
      RunManifest u = run_upper_experiment(cfg);
      int rc = print_stages(u);
      RunManifest l = run_lower_experiment(cfg);
      rc += print_stages(l);
      RunManifest x = run_lax_check(cfg);
      rc += print_stages(x);
      return rc;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
