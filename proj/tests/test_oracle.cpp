#include "wplab/moments.hpp"
#include "wplab/oracle.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace wplab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const OscillatorFrame kUnit = OscillatorFrame::unit();
}

TEST_CASE("quadrature of I") {
  CHECK_THAT(quad_moment_I(kUnit, 0, 0, 0, 0.0), WithinAbs(1.0 / std::sqrt(M_PI), 1e-10));
  CHECK_THAT(quad_moment_I(kUnit, 3, 1, 2, 0.8), WithinRel(moment_I_direct(kUnit, 3, 1, 2, 0.8), 1e-8));
  CHECK_THAT(quad_moment_I(kUnit, 0, 1, 0, 0.0), WithinAbs(0.0, 1e-12));
}

TEST_CASE("quadrature of J") {
  for (double p : {-1.0, 0.0, 0.6}) CHECK_THAT(quad_moment_J(kUnit, 0, 0, 1, p), WithinAbs(0.0, 1e-12));
  CHECK_THAT(quad_moment_J(kUnit, 0, 0, 0, 0.0), WithinAbs(1.0 / std::sqrt(M_PI), 1e-10));
  CHECK_THAT(quad_moment_J(kUnit, 2, 0, 2, 0.5), WithinRel(moment_J(kUnit, 2, 0, 2, 0.5), 1e-8));
}

TEST_CASE("quadrature in a non-unit frame") {
  const OscillatorFrame f(0.6, 2.5, 1.7);
  for (int n = 0; n <= 4; ++n) {
    for (int k = 0; k <= 4; ++k) {
      const double x = 0.7 / f.kappa();
      const double p = -0.4 * f.pscale();
      const double a = moment_I_direct(f, n, k, 1, x);
      CHECK_THAT(quad_moment_I(f, n, k, 1, x), WithinAbs(a, std::max(1e-12, 1e-8 * std::abs(a))));
      const double b = moment_J(f, n, k, 2, p);
      CHECK_THAT(quad_moment_J(f, n, k, 2, p), WithinAbs(b, std::max(1e-12, 1e-8 * std::abs(b))));
    }
  }
}

TEST_CASE("Gaussian moments") {
  CHECK_THAT(quad_gaussian_moment(0), WithinRel(std::sqrt(M_PI) / 2, 1e-13));
  CHECK_THAT(quad_gaussian_moment(1), WithinRel(std::sqrt(M_PI) / 4, 1e-13));
  CHECK_THAT(quad_gaussian_moment(3), WithinRel(15 * std::sqrt(M_PI) / 16, 1e-13));
  for (int j = 0; j <= 16; ++j) {
    CHECK_THAT(quad_gaussian_moment(j),
               WithinRel(specfun::odd_double_factorial(j) * std::sqrt(M_PI) / std::ldexp(1.0, j + 1), 1e-12));
  }
  CHECK_THROWS_AS(quad_gaussian_moment(17), std::domain_error);
}

TEST_CASE("quadrature settings validation and self-consistency") {
  QuadratureSpec narrow;
  narrow.half_width = 7.9;
  CHECK_THROWS_AS(quad_moment_I(kUnit, 0, 0, 0, 0.0, narrow), std::invalid_argument);
  QuadratureSpec bad;
  bad.abs_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  QuadratureSpec base, wide, deep;
  wide.half_width = 20.0;
  deep.max_depth = 20;
  for (int n : {0, 3, 7}) {
    for (int k : {1, 4}) {
      const double a = quad_moment_I(kUnit, n, k, 2, 0.45, base);
      CHECK_THAT(quad_moment_I(kUnit, n, k, 2, 0.45, wide), WithinAbs(a, base.abs_tol));
      CHECK_THAT(quad_moment_I(kUnit, n, k, 2, 0.45, deep), WithinAbs(a, base.abs_tol));
      const double b = quad_moment_J(kUnit, n, k, 3, -0.8, base);
      CHECK_THAT(quad_moment_J(kUnit, n, k, 3, -0.8, wide), WithinAbs(b, base.abs_tol));
    }
  }
}

TEST_CASE("unreachable tolerance reports the estimate") {
  QuadratureSpec tight;
  tight.max_depth = 1;
  tight.rel_tol = 1e-16;
  tight.abs_tol = 1e-300;
  try {
    quad_moment_I(kUnit, 9, 8, 3, 1.1, tight);
    FAIL("expected QuadratureError");
  } catch (const QuadratureError& e) {
    CHECK(std::isfinite(e.estimate()));
    CHECK(e.error() > 0.0);
  }
}

TEST_CASE("finite differences: harmonic spectrum") {
  FiniteDifferenceOptions opt;
  opt.richardson = true;
  const auto e = finite_difference_spectrum(PolynomialPotential::harmonic(kUnit), kUnit, -10.0, 10.0, 2000, 6, opt);
  REQUIRE(e.size() == 6);
  for (int s = 0; s <= 5; ++s) CHECK_THAT(e[static_cast<std::size_t>(s)], WithinAbs(s + 0.5, 1e-6));
  for (std::size_t s = 1; s < e.size(); ++s) CHECK(e[s] > e[s - 1]);
}

TEST_CASE("finite differences: plain stencil converges at second order") {
  const auto pot = PolynomialPotential::harmonic(kUnit);
  const double a = finite_difference_spectrum(pot, kUnit, -10.0, 10.0, 2000, 1)[0];
  const double b = finite_difference_spectrum(pot, kUnit, -10.0, 10.0, 4001, 1)[0];
  // Halving h quarters the error.
  CHECK_THAT((a - 0.5) / (b - 0.5), WithinAbs(4.0, 0.05));
}

TEST_CASE("finite differences: walls strictly increase the spectrum") {
  // An empty box: E_n = (n pi / L)^2 / 2 as h -> 0.
  const auto e = finite_difference_spectrum(PolynomialPotential({0.0, 0.0, 1e-12}), kUnit, 0.0, 1.0, 2000, 5);
  for (std::size_t s = 1; s < e.size(); ++s) CHECK(e[s] > e[s - 1]);
  CHECK_THAT(e[0], WithinRel(M_PI * M_PI / 2, 1e-5));
}

TEST_CASE("finite differences: argument checks") {
  const auto pot = PolynomialPotential::harmonic(kUnit);
  CHECK_THROWS_AS(finite_difference_spectrum(pot, kUnit, 1.0, -1.0, 2000, 1), std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_spectrum(pot, kUnit, -1.0, 1.0, 1999, 1), std::invalid_argument);
  CHECK_THROWS_AS(finite_difference_spectrum(pot, kUnit, -1.0, 1.0, 2000, 0), std::invalid_argument);
}
