#include <catch2/catch_amalgamated.hpp>

#include "cle/flux.hpp"
#include "cle/rng.hpp"

using namespace cle;

TEST_CASE("burgers model") {
  const FluxModel f = burgers();
  CHECK(f.eval(2.0) == 2.0);
  CHECK(f.d1(0.0) == 0.0);
  CHECK(f.d2(-3.0) == 1.0);
  CHECK(f.convexity_c == 1.0);
  CHECK(f.second_deriv_at_zero == 1.0);

  // evenness, used by the reflected precursor construction
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const double u = rng.uniform(-3.0, 3.0);
    CHECK(f.eval(-u) == f.eval(u));
  }
}

TEST_CASE("validate_flux on burgers") {
  const FluxModel f = burgers();
  const FluxValidation r = validate_flux(f, -1.0, 1.0, 101);
  CHECK(r.pass);
  CHECK(r.min_d2 == Catch::Approx(1.0));
  CHECK(r.max_wave_speed == Catch::Approx(1.0));
  CHECK(r.d1_increasing);

  const FluxValidation wide = validate_flux(f, -2.0, 2.0, 101);
  CHECK(wide.max_wave_speed == Catch::Approx(2.0));
}

TEST_CASE("validate_flux rejects degenerate convexity") {
  // f(u) = u^4 has f''(0) = 0, violating the uniform convexity claim.
  FluxModel quartic;
  quartic.eval = [](double u) { return u * u * u * u; };
  quartic.d1 = [](double u) { return 4 * u * u * u; };
  quartic.d2 = [](double u) { return 12 * u * u; };
  quartic.convexity_c = 0.1;
  quartic.second_deriv_at_zero = 0.0;

  const FluxValidation r = validate_flux(quartic, -1.0, 1.0, 101);
  CHECK_FALSE(r.pass);
  CHECK_FALSE(r.convexity_ok);
  CHECK(r.detail.find("convexity") != std::string::npos);
}

TEST_CASE("validate_flux preconditions") {
  CHECK_THROWS_AS(validate_flux(burgers(), -1.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(validate_flux(burgers(), 1.0, 1.0, 10), std::invalid_argument);
}
