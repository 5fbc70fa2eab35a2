#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cle/bounds.hpp"
#include "cle/exact.hpp"
#include "cle/profiles.hpp"
#include "cle/schemes.hpp"
#include "cle/targets.hpp"

namespace cle {

using json = nlohmann::json;

// 17 significant digits: decimal round-trips bit-exactly for doubles.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// FNV-1a 64-bit content digest, hex-encoded. Used for manifest integrity.
inline std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline std::string profile_to_csv(const PiecewiseLinear& f) {
  std::ostringstream os;
  os << "x,y\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    os << format_double(f.xs[i]) << "," << format_double(f.ys[i]) << "\n";
  return os.str();
}

inline PiecewiseLinear profile_from_csv(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  std::vector<double> xs, ys;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("profile_from_csv: malformed line: " + line);
    xs.push_back(std::stod(line.substr(0, comma)));
    ys.push_back(std::stod(line.substr(comma + 1)));
  }
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

inline std::string trajectory_to_csv(const Trajectory& traj) {
  std::ostringstream os;
  os << "n,t,j,x,u\n";
  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    const DiscreteProfile& u = traj.states[n];
    const std::int64_t lo = u.empty_support() ? 0 : u.support_lo;
    const std::int64_t hi = u.empty_support() ? -1 : u.support_hi;
    for (std::int64_t j = lo; j <= hi; ++j) {
      os << n << "," << format_double(traj.grid.t(static_cast<std::int64_t>(n)))
         << "," << j << "," << format_double(traj.grid.x(j)) << ","
         << format_double(u.value(j)) << "\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// JSON (nlohmann ADL hooks)
// ---------------------------------------------------------------------------

inline void to_json(json& j, const GridSpec& g) {
  j = json{{"dx", g.dx},       {"dt", g.dt},       {"lambda", g.lambda},
           {"j_min", g.j_min}, {"j_max", g.j_max}, {"n_steps", g.n_steps}};
}

inline void from_json(const json& j, GridSpec& g) {
  g = GridSpec::make(j.at("dx").get<double>(), j.at("dt").get<double>(),
                     j.at("j_min").get<std::int64_t>(),
                     j.at("j_max").get<std::int64_t>(),
                     j.at("n_steps").get<std::int64_t>());
}

inline void to_json(json& j, const DiscreteProfile& p) {
  j = json{{"grid", p.grid}, {"values", p.values}};
}

inline void from_json(const json& j, DiscreteProfile& p) {
  p.grid = j.at("grid").get<GridSpec>();
  p.values = j.at("values").get<std::vector<double>>();
  if (p.values.size() != static_cast<std::size_t>(p.grid.size()))
    throw std::runtime_error("DiscreteProfile: value count does not match window");
  p.recompute_support();
}

inline void to_json(json& j, const PiecewiseLinear& f) {
  json nodes = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) nodes.push_back({f.xs[i], f.ys[i]});
  j = json{{"nodes", nodes}};
}

inline void from_json(const json& j, PiecewiseLinear& f) {
  std::vector<double> xs, ys;
  for (const auto& node : j.at("nodes")) {
    xs.push_back(node.at(0).get<double>());
    ys.push_back(node.at(1).get<double>());
  }
  f = PiecewiseLinear(std::move(xs), std::move(ys));
}

inline void to_json(json& j, const ContinuousDatum& d) {
  j = json{{"xs", d.xs},
           {"a", d.a},
           {"b", d.b},
           {"support_radius", d.support_radius},
           {"l1_budget", d.l1_budget},
           {"linf_budget", d.linf_budget}};
  if (d.tv_bound) j["tv_bound"] = *d.tv_bound;
}

inline void from_json(const json& j, ContinuousDatum& d) {
  d.xs = j.at("xs").get<std::vector<double>>();
  d.a = j.at("a").get<std::vector<double>>();
  d.b = j.at("b").get<std::vector<double>>();
  d.support_radius = j.at("support_radius").get<double>();
  d.l1_budget = j.at("l1_budget").get<double>();
  d.linf_budget = j.at("linf_budget").get<double>();
  if (j.contains("tv_bound")) d.tv_bound = j.at("tv_bound").get<double>();
}

inline void to_json(json& j, const TargetClassSpec& s) {
  j = json{{"L", s.L}, {"m", s.m},   {"M", s.M},    {"T", s.T},
           {"f2_at_zero", s.f2_at_zero}, {"h", s.h}, {"L_T", s.L_T}};
}

inline void from_json(const json& j, TargetClassSpec& s) {
  s = TargetClassSpec::make(j.at("L").get<double>(), j.at("m").get<double>(),
                            j.at("M").get<double>(), j.at("T").get<double>(),
                            j.at("f2_at_zero").get<double>(), j.at("h").get<double>());
}

inline void to_json(json& j, const SeparatedFamily& f) {
  json members = json::array();
  for (const FamilyMember& mem : f.members) {
    json nodes;
    to_json(nodes, mem.profile);
    members.push_back({{"iota", mem.iota}, {"nodes", nodes.at("nodes")}});
  }
  j = json{{"spec", f.spec},
           {"n", f.n},
           {"eps", f.epsilon},
           {"members", members},
           {"min_pairwise_distance", f.min_pairwise_distance},
           {"gamma_tilde_minus", f.gamma_tilde_minus},
           {"benchmark_log2_cardinality", f.benchmark_log2_cardinality},
           {"sampled", f.sampled},
           {"capped", f.capped}};
}

inline void from_json(const json& j, SeparatedFamily& f) {
  f.spec = j.at("spec").get<TargetClassSpec>();
  f.n = j.at("n").get<std::int64_t>();
  f.epsilon = j.at("eps").get<double>();
  f.min_pairwise_distance = j.at("min_pairwise_distance").get<double>();
  f.gamma_tilde_minus = j.at("gamma_tilde_minus").get<double>();
  f.benchmark_log2_cardinality = j.at("benchmark_log2_cardinality").get<double>();
  f.sampled = j.value("sampled", false);
  f.capped = j.value("capped", false);
  f.members.clear();
  for (const auto& mj : j.at("members")) {
    FamilyMember mem;
    mem.iota = mj.at("iota").get<std::vector<std::int8_t>>();
    json nodes{{"nodes", mj.at("nodes")}};
    from_json(nodes, mem.profile);
    f.members.push_back(std::move(mem));
  }
}

inline void to_json(json& j, const EntropyEstimate& e) {
  j = json{{"eps", e.eps},
           {"packing_count", e.packing_count},
           {"covering_count", e.covering_count},
           {"h_lower_bits", e.h_lower_bits},
           {"h_upper_bits", e.h_upper_bits}};
}

inline void from_json(const json& j, EntropyEstimate& e) {
  e.eps = j.at("eps").get<double>();
  e.packing_count = j.at("packing_count").get<std::size_t>();
  e.covering_count = j.at("covering_count").get<std::size_t>();
  e.h_lower_bits = j.at("h_lower_bits").get<double>();
  e.h_upper_bits = j.at("h_upper_bits").get<double>();
}

inline void to_json(json& j, const ScalingFit& f) {
  json pts = json::array();
  for (const auto& [eps, bits] : f.points) pts.push_back({eps, bits});
  j = json{{"points", pts},
           {"exponent", f.exponent},
           {"constant", f.constant},
           {"r_squared", f.r_squared}};
}

inline void to_json(json& j, const ErrorReport& r) {
  j = json{{"dx", r.dx}, {"delta", r.delta}, {"per_datum", r.per_datum}};
}

inline void to_json(json& j, const OslcDiagnostics& d) {
  j = json{{"oslc", d.oslc},
           {"mass", d.mass},
           {"cfl_margin", d.cfl_margin}};
  if (d.beta_unbounded())
    j["beta_hat"] = "unbounded";
  else
    j["beta_hat"] = d.beta_hat;
}

inline void to_json(json& j, const BoundsReport& r) {
  j = json{{"L", r.L},
           {"m", r.m},
           {"M", r.M},
           {"N", r.N},
           {"dx", r.dx},
           {"dt", r.dt},
           {"beta", r.beta},
           {"t_N", r.t_N},
           {"L_N", r.L_N},
           {"f2_at_zero", r.f2_at_zero},
           {"delta", r.delta},
           {"alpha", r.alpha},
           {"gamma_plus", r.gamma_plus},
           {"eps_max_upper", r.eps_max_upper},
           {"gamma_tilde_minus", r.gamma_tilde_minus},
           {"gamma_minus", r.gamma_minus},
           {"eps_min_lower", r.eps_min_lower},
           {"eps_max_lower", r.eps_max_lower},
           {"lower_window_empty", r.lower_window_empty}};
  if (r.h) j["h"] = *r.h;
  if (r.eps_max_lower_proof) j["eps_max_lower_proof"] = *r.eps_max_lower_proof;
}

}  // namespace cle
