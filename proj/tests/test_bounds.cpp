#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cle/bounds.hpp"
#include "cle/io.hpp"
#include "cle/rng.hpp"

using namespace cle;

TEST_CASE("upper-bound constant, hand-evaluated") {
  // L = 0.25, N = 1, dx = 0.5 gives 2 L^N + dx = 2; dt = 1, beta = 1 give
  // beta t^N = 1. With m = 2: 4*4/1 + 4*2*sqrt(4) = 32.
  const UpperBoundResult r = gamma_plus(0.25, 1, 0.5, 1.0, 2.0, 1.0);
  CHECK(std::abs(r.gamma_plus - 32.0) <= 1e-12);
  CHECK(r.eps_max_upper == Catch::Approx(4.0 / 3.0).margin(1e-14));

  const UpperBoundResult r2 = gamma_plus(0.25, 1, 0.5, 1.0, 0.5, 1.0);
  CHECK(std::abs(r2.gamma_plus - 24.0) <= 1e-12);

  CHECK_THROWS_AS(gamma_plus(-1, 1, 0.5, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gamma_plus(1, 0, 0.5, 1, 1, 1), std::invalid_argument);
}

TEST_CASE("upper-bound constant is monotone in its inputs") {
  Rng rng(503);
  for (int trial = 0; trial < 30; ++trial) {
    const double L = rng.uniform(0.2, 2.0);
    const auto N = static_cast<std::int64_t>(rng.uniform_int(5, 200));
    const double dx = rng.uniform(0.001, 0.05);
    const double dt = rng.uniform(0.001, 0.05);
    const double m = rng.uniform(0.1, 3.0);
    const double beta = rng.uniform(0.2, 2.0);
    const double base = gamma_plus(L, N, dx, dt, m, beta).gamma_plus;
    CHECK(gamma_plus(L, N, dx, dt, m, beta * 1.2).gamma_plus < base);
    CHECK(gamma_plus(L, N, dx, dt, m * 1.2, beta).gamma_plus > base);
    CHECK(gamma_plus(L * 1.2, N, dx, dt, m, beta).gamma_plus > base);
    CHECK(gamma_plus(L, N, dx * 1.2, dt, m, beta).gamma_plus > base);
  }
}

TEST_CASE("lower-bound constants and window") {
  const LowerBoundResult r = gamma_minus(1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0);
  CHECK(std::abs(r.gamma_tilde_minus - 1.0 / (48.0 * std::log(2.0))) <= 1e-12);
  CHECK(r.gamma_minus == Catch::Approx(r.gamma_tilde_minus / 3.0));
  CHECK(r.eps_min_lower == 0.0);
  // window edge: (1/24) * min{1, 1/2, 1/8} = 1/192
  CHECK(r.eps_max_lower == Catch::Approx(1.0 / 192.0));
  CHECK_FALSE(r.window_empty);

  const LowerBoundResult r2 = gamma_minus(1.0, 1.0, 1.0, 0.5, 1e-4, 1.0, 1.0);
  CHECK(r2.eps_min_lower == Catch::Approx(2e-4));

  const LowerBoundResult empty = gamma_minus(1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 1.0);
  CHECK(empty.window_empty);

  CHECK_THROWS_AS(gamma_minus(1, 1, 1, 0.0, 0, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gamma_minus(1, 1, 1, 1.5, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("the tolerance factor cancels exactly") {
  Rng rng(509);
  for (int trial = 0; trial < 20; ++trial) {
    const double alpha = rng.uniform(0.05, 1.0);
    const LowerBoundResult r =
        gamma_minus(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0),
                    rng.uniform(0.5, 2.0), alpha, 0.0, 1.0, 1.0);
    CHECK(r.gamma_minus * (1.0 + 2.0 * alpha) ==
          Catch::Approx(r.gamma_tilde_minus).epsilon(1e-14));
  }
}

TEST_CASE("error lower bound from mismatched scalings") {
  CHECK(error_lower_bound(4.0, 2.0, 1.0, 1.0) == Catch::Approx(1.0).margin(1e-14));
  CHECK(error_lower_bound(1.0, 1.0, 1.0, 0.5) == Catch::Approx(0.25).margin(1e-14));
  CHECK_THROWS_AS(error_lower_bound(1.0, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(error_lower_bound(1.0, 0.5, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(error_lower_bound(-1.0, 2.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("transfer certificate windows") {
  const TransferSpec spec{10.0, 0.01, 1.0, 0.3};
  const TransferCertificate in = transfer_certificate(spec, 0.05);
  CHECK(in.window_ok);
  CHECK(in.asserted_bits.value() == 10.0);

  const TransferCertificate below = transfer_certificate(spec, 0.005);
  CHECK_FALSE(below.window_ok);
  CHECK(below.reason.find("below") != std::string::npos);

  // boundary case eps = eps0 / (1 + 2 alpha) is inside the closed window
  const TransferCertificate edge = transfer_certificate(spec, 0.1);
  CHECK(edge.window_ok);

  const TransferCertificate above = transfer_certificate(spec, 0.100001);
  CHECK_FALSE(above.window_ok);
}

TEST_CASE("window consistency with the certificate") {
  Rng rng(521);
  for (int trial = 0; trial < 50; ++trial) {
    const double alpha = rng.uniform(0.1, 1.0);
    const double delta = rng.uniform(0.0, 0.01);
    const double eps0 = rng.uniform(0.05, 0.5);
    const double lo = delta / alpha, hi = eps0 / (1 + 2 * alpha);
    if (lo > hi) continue;
    const double eps = rng.uniform(lo, hi);
    const TransferCertificate c =
        transfer_certificate(TransferSpec{5.0, delta, alpha, eps0}, eps);
    CHECK(c.window_ok);
  }
}

TEST_CASE("resolution classification") {
  auto power_fit = [](double exponent) {
    std::vector<std::pair<double, double>> pts;
    for (const double eps : {0.1, 0.2, 0.4, 0.8})
      pts.push_back({eps, 10.0 * std::pow(1.0 / eps, exponent)});
    return fit_scaling(pts);
  };
  const ScalingFit exact = power_fit(1.0);
  CHECK(classify_resolution(exact, power_fit(0.98), 0.1) == Resolution::high);
  CHECK(classify_resolution(exact, power_fit(0.5), 0.1) == Resolution::low);

  // close exponents but a poor fit on one side: inconclusive
  ScalingFit noisy = power_fit(0.98);
  noisy.r_squared = 0.5;
  CHECK(classify_resolution(exact, noisy, 0.1) == Resolution::inconclusive);

  ScalingFit too_small = exact;
  too_small.points.resize(2);
  CHECK_THROWS_AS(classify_resolution(too_small, exact, 0.1), std::invalid_argument);
}

TEST_CASE("bounds report echoes inputs and serializes") {
  const BoundsReport r =
      make_bounds_report(1.0, 1.0, 1.0, 100, 0.01, 0.009, 0.9, 1.0, 1e-3, 1.0, 0.125);
  CHECK(r.t_N == Catch::Approx(0.9));
  CHECK(r.L_N == Catch::Approx(2.0));
  CHECK(r.gamma_minus * 3.0 == Catch::Approx(r.gamma_tilde_minus));
  CHECK(r.eps_min_lower == Catch::Approx(1e-3));
  REQUIRE(r.eps_max_lower_proof.has_value());
  // L_T = 1 - 2 * 0.9 * 0.125 = 0.775; edge = L_T h / 18
  CHECK(*r.eps_max_lower_proof == Catch::Approx(0.775 * 0.125 / 18.0));

  json j;
  to_json(j, r);
  CHECK(j.at("gamma_plus").get<double>() == r.gamma_plus);
  CHECK(j.at("h").get<double>() == 0.125);
}
