#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cle/profiles.hpp"

namespace cle {

/// Symmetric pairwise L1 distance matrix, computed once and shared by the
/// packing and covering estimators (the O(n^2) exact distances dominate).
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;  // row-major n x n, symmetric, zero diagonal

  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

inline DistanceMatrix pairwise_distances(const std::vector<PiecewiseLinear>& family) {
  DistanceMatrix m;
  m.n = family.size();
  m.d.assign(m.n * m.n, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = i + 1; j < m.n; ++j) {
      const double dist = l1_distance(family[i], family[j]);
      m.d[i * m.n + j] = dist;
      m.d[j * m.n + i] = dist;
    }
  }
  return m;
}

struct EntropyEstimate {
  double eps = 0.0;
  std::size_t packing_count = 0;   // greedy 2eps-separated subset size
  std::size_t covering_count = 0;  // greedy member-centered eps-ball cover size
  double h_lower_bits = 0.0;       // log2(packing_count)
  double h_upper_bits = 0.0;       // log2(covering_count)
};

/// Greedy packing in index order: keep an element iff its distance to every
/// kept element exceeds 2*eps. The kept set is 2eps-separated, so its size is
/// a certified lower bound on the covering number of any superset.
inline std::vector<std::size_t> packing_subset(const DistanceMatrix& m, double eps) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < m.n; ++i) {
    bool ok = true;
    for (const std::size_t k : kept) {
      if (m.at(i, k) <= 2.0 * eps) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(i);
  }
  return kept;
}

/// Greedy set cover with centers restricted to family members: repeatedly
/// pick the member whose radius-eps ball covers the most uncovered members
/// (lowest index on ties). Upper-bounds the minimal member-centered cover.
inline std::vector<std::size_t> covering_centers(const DistanceMatrix& m, double eps) {
  std::vector<std::size_t> centers;
  std::vector<char> covered(m.n, 0);
  std::size_t remaining = m.n;
  while (remaining > 0) {
    std::size_t best = m.n;
    std::size_t best_count = 0;
    for (std::size_t c = 0; c < m.n; ++c) {
      std::size_t count = 0;
      for (std::size_t i = 0; i < m.n; ++i)
        if (!covered[i] && m.at(c, i) <= eps) ++count;
      if (count > best_count) {
        best_count = count;
        best = c;
      }
    }
    if (best == m.n) break;  // unreachable: every member covers itself
    centers.push_back(best);
    for (std::size_t i = 0; i < m.n; ++i)
      if (!covered[i] && m.at(best, i) <= eps) {
        covered[i] = 1;
        --remaining;
      }
  }
  return centers;
}

/// Packing and covering estimates at scale eps from a shared distance matrix.
/// packing_count <= covering_count always: any eps-ball contains at most one
/// element of a 2eps-separated set.
inline EntropyEstimate estimate_entropy(const DistanceMatrix& m, double eps) {
  EntropyEstimate e;
  e.eps = eps;
  e.packing_count = packing_subset(m, eps).size();
  e.covering_count = covering_centers(m, eps).size();
  e.h_lower_bits = e.packing_count > 0 ? std::log2(double(e.packing_count)) : 0.0;
  e.h_upper_bits = e.covering_count > 0 ? std::log2(double(e.covering_count)) : 0.0;
  return e;
}

inline EntropyEstimate estimate_entropy(const std::vector<PiecewiseLinear>& family,
                                        double eps) {
  return estimate_entropy(pairwise_distances(family), eps);
}

inline std::size_t packing_count(const std::vector<PiecewiseLinear>& family,
                                 double eps) {
  return packing_subset(pairwise_distances(family), eps).size();
}

inline std::size_t covering_count(const std::vector<PiecewiseLinear>& family,
                                  double eps) {
  return covering_centers(pairwise_distances(family), eps).size();
}

// ---------------------------------------------------------------------------
// Cover transfer
// ---------------------------------------------------------------------------

struct CoverTransferFailure {
  std::size_t sample = 0;
  std::string reason;
  double value = 0.0;
};

struct CoverTransferResult {
  bool ok = false;
  std::vector<double> slack;  // per exact sample: 2*delta - distance to its center
  std::vector<CoverTransferFailure> failures;
};

/// Certifies that a delta-radius cover of the numerical samples also covers
/// the paired exact samples at radius 2*delta. Pairing is by index. For each
/// exact sample the triangle-inequality chain is checked with exact
/// distances: pairing gap <= delta, numerical sample covered at radius delta,
/// and the resulting exact-to-center distance recorded as slack against
/// 2*delta. Any violated link fails the certificate, naming the sample.
inline CoverTransferResult cover_transfer(
    const std::vector<PiecewiseLinear>& exact_samples,
    const std::vector<PiecewiseLinear>& numerical_samples,
    const std::vector<std::size_t>& center_indices, double delta) {
  if (exact_samples.size() != numerical_samples.size())
    throw std::invalid_argument("cover_transfer: sample sequences differ in length");
  CoverTransferResult r;
  r.slack.assign(exact_samples.size(), 0.0);
  constexpr double kTol = 1e-12;
  for (std::size_t i = 0; i < exact_samples.size(); ++i) {
    const double gap = l1_distance(exact_samples[i], numerical_samples[i]);
    if (gap > delta + kTol) {
      r.failures.push_back({i, "pairing gap exceeds delta", gap});
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_c = 0;
    for (const std::size_t c : center_indices) {
      const double dc = l1_distance(numerical_samples[i], numerical_samples[c]);
      if (dc < best) {
        best = dc;
        best_c = c;
      }
    }
    if (!(best <= delta + kTol)) {
      r.failures.push_back({i, "numerical sample uncovered at radius delta", best});
      continue;
    }
    const double exact_to_center =
        l1_distance(exact_samples[i], numerical_samples[best_c]);
    r.slack[i] = 2.0 * delta - exact_to_center;
  }
  r.ok = r.failures.empty();
  return r;
}

// ---------------------------------------------------------------------------
// Scaling fits
// ---------------------------------------------------------------------------

struct ScalingFit {
  std::vector<std::pair<double, double>> points;  // (eps, bits)
  double exponent = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log(bits) against log(1/eps): bits ~ constant * eps^(-exponent).
/// Requires >= 3 points, positive bits, distinct eps values.
inline ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_scaling: need at least 3 points");
  for (const auto& [eps, bits] : points) {
    if (!(eps > 0.0)) throw std::invalid_argument("fit_scaling: eps must be positive");
    if (!(bits > 0.0)) throw std::invalid_argument("fit_scaling: bits must be positive");
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (points[i].first == points[j].first)
        throw std::invalid_argument("fit_scaling: eps values must be distinct");

  ScalingFit fit;
  fit.points = points;
  const std::size_t n = points.size();
  double sx = 0, sy = 0;
  for (const auto& [eps, bits] : points) {
    sx += std::log(1.0 / eps);
    sy += std::log(bits);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [eps, bits] : points) {
    const double dx = std::log(1.0 / eps) - mx;
    const double dy = std::log(bits) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.exponent = sxy / sxx;
  fit.constant = std::exp(my - fit.exponent * mx);
  double ss_res = 0;
  for (const auto& [eps, bits] : points) {
    const double pred = my + fit.exponent * (std::log(1.0 / eps) - mx);
    const double res = std::log(bits) - pred;
    ss_res += res * res;
  }
  fit.r_squared = syy <= 1e-30 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

}  // namespace cle
