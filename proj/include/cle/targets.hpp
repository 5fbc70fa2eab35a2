#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cle/profiles.hpp"
#include "cle/rng.hpp"

namespace cle {

/// Parameters of the admissible target class: profiles supported in
/// [-L_T, L_T] with L1 norm <= L*h, sup norm <= h and upward slope bounded by
/// 1/(2*T*f2_at_zero) in the sense of measures. h must satisfy
///   0 < h <= min{ M, m/(2L), L/(8*T*f2_at_zero) },
/// which forces L_T = L - 2*T*f2_at_zero*h >= (3/4) L.
struct TargetClassSpec {
  double L = 0.0;
  double m = 0.0;
  double M = 0.0;
  double T = 0.0;
  double f2_at_zero = 0.0;
  double h = 0.0;
  double L_T = 0.0;

  static double h_max(double L, double m, double M, double T, double f2) {
    return std::min(M, std::min(m / (2.0 * L), L / (8.0 * T * f2)));
  }

  static TargetClassSpec make(double L, double m, double M, double T, double f2,
                              double h) {
    if (!(L > 0) || !(m > 0) || !(M > 0) || !(T > 0) || !(f2 > 0))
      throw std::invalid_argument("TargetClassSpec: parameters must be positive");
    const double hm = h_max(L, m, M, T, f2);
    if (!(h > 0) || h > hm * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "TargetClassSpec: amplitude h=" << h << " outside (0, " << hm << "]";
      throw std::invalid_argument(os.str());
    }
    TargetClassSpec s;
    s.L = L;
    s.m = m;
    s.M = M;
    s.T = T;
    s.f2_at_zero = f2;
    s.h = h;
    s.L_T = L - 2.0 * T * f2 * h;
    return s;
  }

  /// Upper bound on the slope of admissible profiles.
  double slope_bound() const { return 1.0 / (2.0 * T * f2_at_zero); }

  /// Largest interval count for which the tent family stays in the class.
  std::int64_t max_intervals() const {
    return static_cast<std::int64_t>(std::floor(L_T / (h * T * f2_at_zero) * (1.0 + 1e-12)));
  }
};

struct AdmissibleAmplitude {
  double h_max = 0.0;
  double L_T = 0.0;
};

/// h_max = min{M, m/(2L), L/(8 T f2)} and the induced shrunken support.
inline AdmissibleAmplitude admissible_h(double L, double m, double M, double T,
                                        double f2_at_zero) {
  if (!(L > 0) || !(m > 0) || !(M > 0) || !(T > 0) || !(f2_at_zero > 0))
    throw std::invalid_argument("admissible_h: inputs must be positive");
  AdmissibleAmplitude r;
  r.h_max = TargetClassSpec::h_max(L, m, M, T, f2_at_zero);
  r.L_T = L - 2.0 * T * f2_at_zero * r.h_max;
  return r;
}

struct FamilyMember {
  std::vector<std::int8_t> iota;  // entries in {-1, +1}
  PiecewiseLinear profile;
};

namespace detail {

/// Signed tent profile for a sign sequence: [-L_T, L_T] split into n equal
/// intervals of length 2 L_T / n; interval k carries a tent of height
/// iota_k * h/2 peaked at its midpoint. Nodes: 2n+1, zero at interval ends.
inline PiecewiseLinear tent_member(const TargetClassSpec& spec, std::int64_t n,
                                   const std::vector<std::int8_t>& iota) {
  const double ell = 2.0 * spec.L_T / static_cast<double>(n);
  std::vector<double> xs, ys;
  xs.reserve(static_cast<std::size_t>(2 * n + 1));
  ys.reserve(static_cast<std::size_t>(2 * n + 1));
  for (std::int64_t k = 0; k < n; ++k) {
    const double x0 = -spec.L_T + ell * static_cast<double>(k);
    xs.push_back(x0);
    ys.push_back(0.0);
    xs.push_back(x0 + 0.5 * ell);
    ys.push_back(static_cast<double>(iota[static_cast<std::size_t>(k)]) * 0.5 * spec.h);
  }
  xs.push_back(spec.L_T);
  ys.push_back(0.0);
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

inline std::vector<std::int8_t> iota_from_index(std::uint64_t index, std::int64_t n) {
  std::vector<std::int8_t> iota(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) {
    const bool bit = (index >> (n - 1 - k)) & 1ull;
    iota[static_cast<std::size_t>(k)] = bit ? 1 : -1;
  }
  return iota;
}

}  // namespace detail

/// Builds the full binary-sequence family of 2^n signed tent profiles in
/// lexicographic order (-1 before +1). The per-interval slope is
/// h*n/(2 L_T); n must respect the class slope bound, i.e.
/// n <= floor(L_T/(h*T*f2)). Pairwise L1 distance is exactly
/// HammingDistance(iota, iota') * (2 L_T/n) * (h/2).
inline std::vector<FamilyMember> build_family(const TargetClassSpec& spec,
                                              std::int64_t n) {
  if (n < 1) throw std::invalid_argument("build_family: n must be positive");
  if (n > spec.max_intervals()) {
    std::ostringstream os;
    os << "build_family: n=" << n << " violates the slope bound; max admissible n="
       << spec.max_intervals();
    throw std::invalid_argument(os.str());
  }
  if (n > 20)
    throw std::invalid_argument("build_family: refusing to enumerate 2^n profiles for n > 20");
  std::vector<FamilyMember> family;
  family.reserve(static_cast<std::size_t>(1) << n);
  for (std::uint64_t idx = 0; idx < (static_cast<std::uint64_t>(1) << n); ++idx) {
    FamilyMember mem;
    mem.iota = detail::iota_from_index(idx, n);
    mem.profile = detail::tent_member(spec, n, mem.iota);
    family.push_back(std::move(mem));
  }
  return family;
}

struct GreedyResult {
  std::vector<std::size_t> kept;   // indices into the input sequence
  double min_pairwise_distance = std::numeric_limits<double>::infinity();
};

/// Greedy extraction in index order: a profile is kept iff its exact L1
/// distance to every already-kept profile exceeds two_eps. The output is
/// certified by recomputing all pairwise kept distances.
inline GreedyResult greedy_separate(const std::vector<PiecewiseLinear>& profiles,
                                    double two_eps) {
  GreedyResult r;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    bool ok = true;
    for (const std::size_t k : r.kept) {
      if (l1_distance(profiles[i], profiles[k]) <= two_eps) {
        ok = false;
        break;
      }
    }
    if (ok) r.kept.push_back(i);
  }
  for (std::size_t a = 0; a < r.kept.size(); ++a)
    for (std::size_t b = a + 1; b < r.kept.size(); ++b)
      r.min_pairwise_distance = std::min(
          r.min_pairwise_distance, l1_distance(profiles[r.kept[a]], profiles[r.kept[b]]));
  return r;
}

struct SeparatedFamily {
  TargetClassSpec spec;   // the class the members were certified against
  std::int64_t n = 0;     // sequence length actually used
  std::vector<FamilyMember> members;
  double epsilon = 0.0;
  double min_pairwise_distance = 0.0;
  double gamma_tilde_minus = 0.0;          // L^2 / (48 ln2 T |f''(0)|)
  double benchmark_log2_cardinality = 0.0; // gamma_tilde_minus / epsilon
  bool sampled = false;   // true when candidates were drawn rather than enumerated
  bool capped = false;    // true when the member cap cut the greedy scan short

  double log2_cardinality() const {
    return std::log2(static_cast<double>(members.size()));
  }
};

namespace detail {

// Greedy Hamming-code extraction over packed sign sequences: keep a candidate
// iff its Hamming distance to every kept one is >= min_hamming. Exact L1
// distances are recovered afterwards via the closed form and re-certified.
inline std::vector<std::size_t> greedy_hamming(
    const std::vector<std::vector<std::uint64_t>>& packed, std::int64_t min_hamming,
    std::size_t max_keep) {
  std::vector<std::size_t> kept;
  const std::size_t words = packed.empty() ? 0 : packed.front().size();
  for (std::size_t i = 0; i < packed.size() && kept.size() < max_keep; ++i) {
    bool ok = true;
    for (const std::size_t k : kept) {
      std::int64_t dist = 0;
      for (std::size_t w = 0; w < words; ++w)
        dist += __builtin_popcountll(packed[i][w] ^ packed[k][w]);
      if (dist < min_hamming) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(i);
  }
  return kept;
}

}  // namespace detail

/// Extracts a strictly 2*eps-separated subfamily of signed tent profiles.
///
/// The amplitude is adapted to the scale: a = min(spec.h, 12*eps/L), which
/// keeps the scale inside the admissible window (eps <= L*a/8) while the
/// interval count n, maximal under the class slope bound, grows like 1/eps.
/// With the amplitude tied to eps this way the kept-family log-cardinality
/// scales like 1/eps; with a fixed amplitude it would saturate at 2^n.
/// Members therefore live in the derived class with amplitude a (reported in
/// the returned spec); a <= spec.h, so every member also obeys the original
/// L1, sup-norm and slope budgets.
///
/// When 2^n <= 65536 the full family is enumerated in lexicographic order;
/// otherwise 65536 sign sequences are drawn deterministically from the seed.
/// The greedy scan works on the closed-form Hamming distances; the kept set
/// is certified afterwards by exact pairwise L1 distances. max_members caps
/// the greedy scan (the certification cost is quadratic in the kept size);
/// the capped flag records when the cap was the binding constraint.
inline SeparatedFamily make_separated_targets(const TargetClassSpec& spec, double eps,
                                              std::uint64_t seed = 7,
                                              std::size_t max_members = 4096) {
  if (!(eps > 0) || eps > spec.L * spec.h / 8.0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "make_separated_targets: eps=" << eps << " outside (0, Lh/8] = (0, "
       << spec.L * spec.h / 8.0 << "]";
    throw std::invalid_argument(os.str());
  }
  const double amplitude = std::min(spec.h, 12.0 * eps / spec.L);
  const TargetClassSpec cls = TargetClassSpec::make(spec.L, spec.m, spec.M, spec.T,
                                                    spec.f2_at_zero, amplitude);
  const std::int64_t n = std::max<std::int64_t>(1, cls.max_intervals());
  const double unit = cls.L_T * cls.h / static_cast<double>(n);  // L1 per flipped sign
  const std::int64_t min_hamming =
      static_cast<std::int64_t>(std::floor(2.0 * eps / unit)) + 1;

  const bool enumerate = n <= 16;
  const std::size_t candidate_count =
      enumerate ? (static_cast<std::size_t>(1) << n) : 65536u;
  const std::size_t words = static_cast<std::size_t>((n + 63) / 64);
  std::vector<std::vector<std::uint64_t>> packed(candidate_count);
  std::vector<std::vector<std::int8_t>> iotas(candidate_count);
  Rng rng(seed);
  for (std::size_t i = 0; i < candidate_count; ++i) {
    std::vector<std::int8_t> iota;
    if (enumerate) {
      iota = detail::iota_from_index(i, n);
    } else {
      iota.resize(static_cast<std::size_t>(n));
      for (auto& s : iota) s = rng.coin() ? 1 : -1;
    }
    std::vector<std::uint64_t> bits(words, 0);
    for (std::int64_t k = 0; k < n; ++k)
      if (iota[static_cast<std::size_t>(k)] > 0)
        bits[static_cast<std::size_t>(k / 64)] |= 1ull << (k % 64);
    packed[i] = std::move(bits);
    iotas[i] = std::move(iota);
  }

  const std::vector<std::size_t> kept =
      detail::greedy_hamming(packed, min_hamming, max_members);

  SeparatedFamily fam;
  fam.spec = cls;
  fam.n = n;
  fam.epsilon = eps;
  fam.sampled = !enumerate;
  fam.capped = kept.size() == max_members && max_members < candidate_count;
  fam.gamma_tilde_minus =
      spec.L * spec.L / (48.0 * std::log(2.0) * spec.T * spec.f2_at_zero);
  fam.benchmark_log2_cardinality = fam.gamma_tilde_minus / eps;
  fam.members.reserve(kept.size());
  for (const std::size_t i : kept) {
    FamilyMember mem;
    mem.iota = iotas[i];
    mem.profile = detail::tent_member(cls, n, mem.iota);
    fam.members.push_back(std::move(mem));
  }

  // Certification. For small families every pairwise distance is recomputed
  // exactly. For large ones the closed form distance = Hamming * unit (itself
  // an exact identity for this geometry, cross-checked here on a subset of
  // members and on the extremal pair) keeps the cost quadratic in popcounts
  // rather than in node merges.
  fam.min_pairwise_distance = std::numeric_limits<double>::infinity();
  if (fam.members.size() >= 2) {
    std::size_t arg_a = 0, arg_b = 1;
    std::int64_t min_h = std::numeric_limits<std::int64_t>::max();
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = a + 1; b < kept.size(); ++b) {
        std::int64_t dist = 0;
        for (std::size_t w = 0; w < words; ++w)
          dist += __builtin_popcountll(packed[kept[a]][w] ^ packed[kept[b]][w]);
        if (dist < min_h) {
          min_h = dist;
          arg_a = a;
          arg_b = b;
        }
      }
    fam.min_pairwise_distance = static_cast<double>(min_h) * unit;
    const double closest = l1_distance(fam.members[arg_a].profile,
                                       fam.members[arg_b].profile);
    if (std::abs(closest - fam.min_pairwise_distance) >
        1e-12 * std::max(1.0, fam.min_pairwise_distance))
      throw std::runtime_error(
          "make_separated_targets: closed-form distance disagrees with the exact one");
    const std::size_t exact_limit = 1500;
    const std::size_t check = std::min(fam.members.size(), exact_limit);
    double exact_min = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < check; ++a)
      for (std::size_t b = a + 1; b < check; ++b)
        exact_min = std::min(exact_min, l1_distance(fam.members[a].profile,
                                                    fam.members[b].profile));
    if (check >= 2 && !(exact_min >= fam.min_pairwise_distance - 1e-12))
      throw std::runtime_error(
          "make_separated_targets: exact recheck found a closer pair than certified");
    if (!(fam.min_pairwise_distance > 2.0 * eps)) {
      std::ostringstream os;
      os << "make_separated_targets: certification failed, min pairwise distance "
         << fam.min_pairwise_distance << " <= 2*eps = " << 2.0 * eps;
      throw std::runtime_error(os.str());
    }
  }
  return fam;
}

}  // namespace cle
