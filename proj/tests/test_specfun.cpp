#include "wplab/specfun.hpp"

#include <catch_amalgamated.hpp>

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/laguerre.hpp>

#include <cmath>
#include <random>

using namespace wplab::specfun;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("factorial is exact through 34 and smooth beyond") {
  CHECK(factorial(0) == 1.0);
  CHECK(factorial(10) == 3628800.0);
  CHECK(factorial(20) == 2432902008176640000.0);
  CHECK_THAT(factorial(40), WithinRel(std::tgamma(41.0), 1e-13));
  CHECK_THROWS_AS(factorial(-1), std::domain_error);
  CHECK_THAT(log_factorial(100), WithinRel(std::lgamma(101.0), 1e-15));
}

TEST_CASE("binomial matches exact integers and vanishes outside the range") {
  CHECK(binomial(30, 15) == 155117520.0);
  CHECK(binomial(5, 0) == 1.0);
  CHECK(binomial(5, 6) == 0.0);
  CHECK(binomial(5, -1) == 0.0);
  // C(60, 30) exceeds 2^53; the literal is its correctly rounded double.
  CHECK(binomial(60, 30) == 118264581564861424.0);
  CHECK_THAT(binomial(100, 50), WithinRel(boost::math::binomial_coefficient<double>(100, 50), 1e-15));
  for (int n = 0; n <= 60; ++n) {
    for (int k = 1; k < n; ++k) {
      // Pascal's rule holds exactly while the values are representable.
      if (binomial(n, k) < 9e15) CHECK(binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k));
    }
  }
}

TEST_CASE("odd double factorial") {
  CHECK(odd_double_factorial(0) == 1.0);
  CHECK(odd_double_factorial(1) == 1.0);
  CHECK(odd_double_factorial(3) == 15.0);
  CHECK(odd_double_factorial(5) == 945.0);
  CHECK(odd_double_factorial(28) == 55.0 * odd_double_factorial(27));
  // (2j-1)!! = (2j)! / (2^j j!)
  for (int j = 1; j <= 40; ++j) {
    CHECK_THAT(odd_double_factorial(j),
               WithinRel(std::exp(std::lgamma(2.0 * j + 1) - j * std::log(2.0) - std::lgamma(j + 1.0)), 1e-12));
  }
}

TEST_CASE("Chebyshev series coefficient reproduces T_m") {
  // (2-1-1)! / (1! 0!) = 1; T_2 = 2x^2 - 1 confirms it.
  CHECK(cheb_series_coef(2, 1) == 1.0);
  CHECK(cheb_series_coef(4, 1) == 1.0);
  CHECK(cheb_series_coef(5, 0) == 0.2);
  CHECK_THROWS_AS(cheb_series_coef(4, 3), std::domain_error);
  CHECK_THROWS_AS(cheb_series_coef(0, 0), std::domain_error);
  // T_m(x) = (m/2) sum_s (-1)^s c(m,s) (2x)^{m-2s}
  for (int m = 1; m <= 20; ++m) {
    for (double x : {-0.9, -0.3, 0.2, 0.75}) {
      double acc = 0.0;
      double mag = 0.0;
      for (int s = 0; s <= m / 2; ++s) {
        const double t = (s % 2 ? -1.0 : 1.0) * cheb_series_coef(m, s) * std::pow(2 * x, m - 2 * s);
        acc += t;
        mag += std::abs(t);
      }
      CHECK_THAT(0.5 * m * acc, WithinAbs(chebyshev_t(m, x), 1e-14 * m * mag));
    }
  }
}

TEST_CASE("Chebyshev T_n(cos t) = cos(n t)") {
  const double t = M_PI / 5;
  CHECK_THAT(chebyshev_t(3, std::cos(t)), WithinAbs(std::cos(3 * t), 1e-15));
  for (int n = 0; n <= 30; ++n) CHECK_THAT(chebyshev_t(n, std::cos(0.37)), WithinAbs(std::cos(n * 0.37), 1e-13));
}

TEST_CASE("Laguerre polynomials") {
  // Explicit sum L_2^{(1)}(x) = 3 - 3x + x^2/2.
  CHECK_THAT(laguerre(2, 1, 1.0), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(laguerre(2, -1, 1.0), std::domain_error);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    const int n = static_cast<int>(rng() % 30);
    const int a = static_cast<int>(rng() % 12);
    const double x = u(rng);
    const double want = boost::math::laguerre(static_cast<unsigned>(n), static_cast<unsigned>(a), x);
    CHECK_THAT(laguerre(n, a, x), WithinAbs(want, 1e-10 * std::max(1.0, std::abs(want))));
  }
  std::vector<double> seq(15);
  laguerre_sequence(3, 2.5, seq);
  for (int j = 0; j < 15; ++j) CHECK_THAT(seq[static_cast<std::size_t>(j)], WithinRel(laguerre(j, 3, 2.5), 1e-14));
}

TEST_CASE("Hermite polynomials at zero") {
  for (int n = 0; n <= 30; ++n) {
    const double h = hermite(n, 0.0);
    CHECK_THAT(hermite_sq_zero(n), WithinRel(h * h, 1e-13));
  }
  CHECK(hermite(2, 1.5) == 4 * 2.25 - 2);
}

TEST_CASE("compensated summation recovers cancelled low bits") {
  std::vector<double> terms{1e16, 1.0, -1e16, 1.0};
  CHECK(sorted_sum(terms) == 2.0);
  CompensatedSum<double> acc;
  for (int i = 0; i < 10; ++i) acc += 0.1;
  CHECK_THAT(acc.value(), WithinAbs(1.0, 1e-16));
}
