#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cle/entropy.hpp"
#include "cle/rng.hpp"

using namespace cle;

namespace {

PiecewiseLinear scaled_tent(double scale, double center = 0.0) {
  if (scale == 0.0) return PiecewiseLinear{};
  return PiecewiseLinear({center - 1.0, center, center + 1.0}, {0.0, scale, 0.0});
}

PiecewiseLinear area_tent(double area, double center) {
  return PiecewiseLinear({center - 0.5, center, center + 0.5}, {0.0, 2.0 * area, 0.0});
}

// random nondecreasing piecewise-linear function [0,L] -> [0,V]
PiecewiseLinear monotone_sample(Rng& rng, double L, double V) {
  const int k = static_cast<int>(rng.uniform_int(2, 20));
  std::vector<double> xs = rng.sorted_points(k, 0.0, L);
  xs.front() = 0.0;
  xs.back() = L;
  std::vector<double> ys(xs.size());
  for (auto& y : ys) y = rng.uniform(0.0, V);
  std::sort(ys.begin(), ys.end());
  return PiecewiseLinear(std::move(xs), std::move(ys));
}

}  // namespace

TEST_CASE("packing counts on explicit configurations") {
  const std::vector<PiecewiseLinear> singleton = {scaled_tent(1.0)};
  CHECK(packing_count(singleton, 0.1) == 1);
  CHECK(packing_count(singleton, 10.0) == 1);

  // equilateral triple at pairwise distance 2.5
  const std::vector<PiecewiseLinear> triple = {
      area_tent(1.25, 0.0), area_tent(1.25, 2.0), area_tent(1.25, 4.0)};
  CHECK(packing_count(triple, 1.0) == 3);   // 2.5 > 2
  CHECK(packing_count(triple, 1.5) == 1);   // 2.5 < 3
}

TEST_CASE("covering counts on explicit configurations") {
  CHECK(covering_count({scaled_tent(1.0)}, 0.5) == 1);

  // colinear at consecutive distances 0.9: the middle member covers all
  const std::vector<PiecewiseLinear> line = {scaled_tent(0.0), scaled_tent(0.9),
                                             scaled_tent(1.8)};
  CHECK(covering_count(line, 1.0) == 1);

  const std::vector<PiecewiseLinear> pair = {scaled_tent(0.0), scaled_tent(3.0)};
  CHECK(covering_count(pair, 1.0) == 2);
}

TEST_CASE("packing never exceeds covering and both shrink with eps") {
  Rng rng(401);
  std::vector<PiecewiseLinear> family;
  for (int i = 0; i < 40; ++i)
    family.push_back(scaled_tent(rng.uniform(0.0, 1.0), rng.uniform(-0.2, 0.2)));
  const DistanceMatrix dm = pairwise_distances(family);
  std::size_t prev_pack = SIZE_MAX, prev_cover = SIZE_MAX;
  for (const double eps : {0.01, 0.02, 0.05, 0.1, 0.3}) {
    const EntropyEstimate e = estimate_entropy(dm, eps);
    CHECK(e.packing_count <= e.covering_count);
    CHECK(e.packing_count <= prev_pack);
    CHECK(e.covering_count <= prev_cover);
    CHECK(e.h_lower_bits == Catch::Approx(std::log2(double(e.packing_count))));
    prev_pack = e.packing_count;
    prev_cover = e.covering_count;
  }
}

TEST_CASE("packing subsets are re-certified as separated") {
  Rng rng(409);
  std::vector<PiecewiseLinear> family;
  for (int i = 0; i < 30; ++i) family.push_back(scaled_tent(rng.uniform(0.0, 2.0)));
  const DistanceMatrix dm = pairwise_distances(family);
  const double eps = 0.07;
  const std::vector<std::size_t> kept = packing_subset(dm, eps);
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t b = a + 1; b < kept.size(); ++b)
      CHECK(l1_distance(family[kept[a]], family[kept[b]]) > 2 * eps);
}

TEST_CASE("monotone families stay under the closed-form covering budget") {
  // nondecreasing [0,1] -> [0,1] samples: for eps <= 1/6 the class needs at
  // most 4/eps bits, so any finite sample needs no more.
  Rng rng(419);
  std::vector<PiecewiseLinear> family;
  for (int i = 0; i < 200; ++i) family.push_back(monotone_sample(rng, 1.0, 1.0));
  const DistanceMatrix dm = pairwise_distances(family);
  for (const double eps : {1.0 / 12.0, 1.0 / 24.0}) {
    const EntropyEstimate e = estimate_entropy(dm, eps);
    CHECK(e.h_upper_bits <= 4.0 / eps);
  }
}

TEST_CASE("cover transfer certifies and fails by name") {
  Rng rng(431);
  std::vector<PiecewiseLinear> numerical;
  for (int i = 0; i < 12; ++i) numerical.push_back(scaled_tent(0.25 * i));

  SECTION("identity pairing at delta = 0") {
    std::vector<std::size_t> all(numerical.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const CoverTransferResult r = cover_transfer(numerical, numerical, all, 0.0);
    CHECK(r.ok);
    for (const double s : r.slack) CHECK(s == Catch::Approx(0.0).margin(1e-12));
  }

  SECTION("shifted pairing within delta certifies at 2 delta") {
    const double delta = 0.1;
    std::vector<PiecewiseLinear> exact;
    for (std::size_t i = 0; i < numerical.size(); ++i)
      exact.push_back(scaled_tent(0.25 * i + rng.uniform(-0.9, 0.9) * delta));
    const DistanceMatrix dm = pairwise_distances(numerical);
    const std::vector<std::size_t> centers = covering_centers(dm, delta);
    const CoverTransferResult r = cover_transfer(exact, numerical, centers, delta);
    CHECK(r.ok);
    for (const double s : r.slack) CHECK(s >= -1e-12);
  }

  SECTION("a pairing gap beyond delta fails naming the sample") {
    const double delta = 0.1;
    std::vector<PiecewiseLinear> exact = numerical;
    exact[7] = scaled_tent(0.25 * 7 + 3.0 * delta);
    std::vector<std::size_t> all(numerical.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const CoverTransferResult r = cover_transfer(exact, numerical, all, delta);
    CHECK_FALSE(r.ok);
    REQUIRE(r.failures.size() == 1);
    CHECK(r.failures.front().sample == 7);
    CHECK(r.failures.front().reason.find("gap") != std::string::npos);
  }
}

TEST_CASE("scaling fit recovers exact and noisy power laws") {
  std::vector<std::pair<double, double>> exact_points;
  for (const double eps : {0.1, 0.2, 0.4}) exact_points.push_back({eps, 10.0 / eps});
  const ScalingFit fit = fit_scaling(exact_points);
  CHECK(fit.exponent == Catch::Approx(1.0).margin(1e-12));
  CHECK(fit.constant == Catch::Approx(10.0).margin(1e-9));
  CHECK(fit.r_squared == Catch::Approx(1.0).margin(1e-12));

  std::vector<std::pair<double, double>> flat;
  for (const double eps : {0.1, 0.2, 0.4}) flat.push_back({eps, 5.0});
  CHECK(fit_scaling(flat).exponent == Catch::Approx(0.0).margin(1e-12));

  Rng rng(443);
  std::vector<std::pair<double, double>> noisy;
  for (int k = 0; k < 8; ++k) {
    const double eps = 0.4 * std::pow(0.7, k);
    noisy.push_back({eps, (10.0 / eps) * (1.0 + rng.uniform(-0.05, 0.05))});
  }
  const double exponent = fit_scaling(noisy).exponent;
  CHECK(exponent > 0.9);
  CHECK(exponent < 1.1);
}

TEST_CASE("scaling fit rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_scaling({{0.1, 1.0}, {0.2, 2.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_scaling({{0.1, 1.0}, {0.2, 0.0}, {0.4, 2.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_scaling({{0.1, 1.0}, {0.1, 2.0}, {0.4, 2.0}}),
                  std::invalid_argument);
}
