#include "wplab/moments.hpp"
#include "wplab/oracle.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace wplab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const OscillatorFrame kUnit = OscillatorFrame::unit();

DensityMatrix random_state(int size, unsigned seed, double decay = 0.15) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  Vector c(size);
  for (int i = 0; i < size; ++i) c(i) = g(rng) * std::exp(-decay * i);
  c.normalize();
  return {c * c.transpose()};
}

}  // namespace

TEST_CASE("G table: frozen high-precision values") {
  GTable t(20, 10);
  CHECK_THAT(t.value(1, 1), WithinRel(-0.8862269254527580136, 1e-15));
  CHECK_THAT(t.value(2, 3), WithinRel(30.74099647664254359845, 1e-14));
  CHECK_THAT(t.value(5, 4), WithinRel(-2367.05672870147585708, 1e-14));
  CHECK_THAT(t.value(8, 8), WithinRel(1205445230.018499430852, 1e-13));
  CHECK_THAT(t.value(12, 10), WithinRel(13604780584600.63937046, 1e-13));
  CHECK_THAT(t.value(20, 6), WithinRel(380050319.1198371841783, 1e-13));
}

TEST_CASE("G table: base columns and recurrence") {
  GTable t(6, 6);
  CHECK_THAT(t.value(0, 0), WithinRel(std::sqrt(M_PI) / 2, 1e-15));
  // L_1(2p^2) = 1 - 2p^2: sqrt(pi)/4 - 2 (3 sqrt(pi)/8).
  CHECK_THAT(t.value(1, 1), WithinRel(-std::sqrt(M_PI) / 2, 1e-15));
  for (int l = 1; l <= 6; ++l) {
    for (int b = 1; b <= 6; ++b) {
      CHECK_THAT(t.value(l, b), WithinAbs((b + l - 0.5) * t.value(l, b - 1) - l * t.value(l - 1, b - 1),
                                          1e-12 * std::max(1.0, std::abs(t.value(l, b)))));
    }
  }
  CHECK_THROWS_AS(t.value(7, 0), std::out_of_range);
  CHECK_THROWS_AS(t.ensure(65, 0), std::out_of_range);
  t.ensure(10, 12);
  CHECK(t.lambda_max() == 10);
  CHECK(t.beta_max() == 12);
  CHECK_THAT(g_coefficient(t, 3, 2), WithinRel(quad_g_coefficient(3, 2), 1e-10));
}

TEST_CASE("G table perturbation scales every entry") {
  const GTable a(4, 4), b(4, 4, 1e-3);
  for (int l = 0; l <= 4; ++l) {
    for (int be = 0; be <= 4; ++be) CHECK_THAT(b.value(l, be), WithinRel(a.value(l, be) * 1.001, 1e-15));
  }
}

TEST_CASE("I: frozen high-precision values") {
  GTable t;
  struct Case {
    int n, k, ell;
    double x, want;
  };
  for (const Case& c : {Case{3, 1, 2, 0.8, -2.022304309156547098819}, Case{0, 2, 0, 0.0, -0.3989422804014326779399},
                        Case{5, 2, 1, -1.3, 0.85246742872341345912}, Case{1, 1, 0, 0.4, 0.1538466078142892604031},
                        Case{0, 0, 1, 0.0, 0.282094791773878143474}}) {
    CHECK_THAT(moment_I_direct(kUnit, c.n, c.k, c.ell, c.x), WithinRel(c.want, 1e-13));
    CHECK_THAT(moment_I_laguerre(kUnit, t, c.n, c.k, c.ell, c.x), WithinRel(c.want, 1e-13));
  }
}

TEST_CASE("I: worked examples") {
  for (double x : {-1.2, 0.0, 0.35, 2.0}) {
    const double g = std::exp(-x * x) / std::sqrt(M_PI);
    CHECK_THAT(moment_I_direct(kUnit, 1, 1, 0, x), WithinAbs(2 * x * x * g, 1e-15));
    CHECK_THAT(moment_I_direct(kUnit, 0, 1, 0, x), WithinAbs(std::sqrt(2.0) * x * g, 1e-15));
  }
  // Scaling into a non-unit frame: I^0 is the x-density, carrying kappa.
  const OscillatorFrame f(2.0, 1.5, 0.7);
  const double x = 0.4;
  const double psi = oscillator_eigenfunction(f, 2, x);
  CHECK_THAT(moment_I_direct(f, 2, 2, 0, x), WithinRel(psi * psi, 1e-13));
}

TEST_CASE("I: direct and Laguerre forms agree") {
  GTable t;
  const OscillatorFrame f(0.8, 1.7, 1.1);
  for (int n = 0; n <= 14; ++n) {
    for (int k = 0; k <= 14; ++k) {
      for (int ell = 0; ell <= 3; ++ell) {
        for (double u : {-3.1, -0.9, 0.0, 0.6, 2.4}) {
          const double x = u / f.kappa();
          const double a = moment_I_direct(f, n, k, ell, x);
          CHECK_THAT(moment_I_laguerre(f, t, n, k, ell, x), WithinAbs(a, 1e-9 * std::max(1.0, std::abs(a))));
        }
      }
    }
  }
}

TEST_CASE("J: frozen high-precision values") {
  // Re int x^r w_nk(x, p) dx by direct 30-digit double integration.
  CHECK_THAT(moment_J(kUnit, 2, 0, 2, 0.5), WithinRel(0.3883707004711596810886, 1e-13));
  CHECK_THAT(moment_J(kUnit, 0, 1, 1, 0.7), WithinRel(0.244402570730037941025, 1e-13));
  CHECK_THAT(moment_J(kUnit, 1, 0, 1, 0.7), WithinRel(0.244402570730037941025, 1e-13));
  CHECK_THAT(moment_J(kUnit, 4, 1, 3, -0.9), WithinRel(0.563328720572338311763, 1e-13));
  CHECK_THAT(moment_J(kUnit, 3, 3, 2, 1.2), WithinRel(0.7553354692308152475008, 1e-13));
}

TEST_CASE("J: parity law") {
  for (int n = 0; n <= 6; ++n) {
    for (int k = 0; k <= 6; ++k) {
      for (int r = 0; r <= 4; ++r) {
        if ((n - k + r) % 2 == 0) continue;
        CHECK(moment_J(kUnit, n, k, r, 0.37) == 0.0);
        // The real part of the quadrature vanishes; only the imaginary part survives.
        CHECK_THAT(quad_moment_J(kUnit, n, k, r, 0.37), WithinAbs(0.0, 1e-12));
        if (n != k) CHECK(std::abs(quad_moment_J_imag(kUnit, n, k, r, 0.37)) > 0.0);
      }
    }
  }
}

TEST_CASE("J^0 on the diagonal is the momentum density") {
  const OscillatorFrame f(1.3, 0.9, 0.6);
  for (int n = 0; n <= 5; ++n) {
    for (double p : {-0.8, 0.0, 0.5}) {
      // |phi_n(p)|^2 has the x-density's shape in pbar.
      const double pb = f.pbar(p);
      const double psi = oscillator_eigenfunction(OscillatorFrame::unit(), n, pb);
      CHECK_THAT(moment_J(f, n, n, 0, p), WithinAbs(psi * psi / f.pscale(), 1e-14));
    }
  }
}

TEST_CASE("pointwise forms refuse n + k above the precision limit") {
  GTable t;
  CHECK_NOTHROW(moment_I_direct(kUnit, 20, 20, 0, 0.5));
  CHECK_THROWS_AS(moment_I_direct(kUnit, 21, 20, 0, 0.5), PrecisionLimitError);
  CHECK_THROWS_AS(moment_J(kUnit, 30, 12, 0, 0.5), PrecisionLimitError);
  CHECK_NOTHROW(moment_I_laguerre(kUnit, t, 30, 12, 0, 0.5));
  CHECK_THROWS_AS(moment_I_direct(kUnit, -1, 0, 0, 0.5), std::domain_error);
}

TEST_CASE("batched sums equal the per-pair sums") {
  const OscillatorFrame f(1.2, 0.8, 0.9);
  const auto rho = random_state(12, 3);
  const MomentSums sums(f, rho, 4, 2);
  for (double u : {-2.5, -0.4, 0.0, 1.3}) {
    for (int ell = 0; ell <= 2; ++ell) {
      const double x = u / f.kappa();
      double want = 0.0;
      for (int n = 0; n < 12; ++n)
        for (int k = 0; k < 12; ++k) want += rho.rho(k, n) * moment_I_direct(f, n, k, ell, x);
      CHECK_THAT(sums.sum_I(ell, x), WithinAbs(want, 1e-12 * std::max(1.0, std::abs(want))));
    }
    for (int r = 0; r <= 4; ++r) {
      const double p = u * f.pscale();
      double want = 0.0;
      for (int n = 0; n < 12; ++n)
        for (int k = 0; k < 12; ++k) want += rho.rho(k, n) * moment_J(f, n, k, r, p);
      CHECK_THAT(sums.sum_J(r, p), WithinAbs(want, 1e-12 * std::max(1.0, std::abs(want))));
    }
  }
  CHECK_THROWS_AS(sums.sum_I(3, 0.0), std::out_of_range);
  CHECK_THROWS_AS(sums.sum_J(5, 0.0), std::out_of_range);
}

TEST_CASE("batched sums stay accurate beyond the pointwise limit") {
  // 60 terms with weight reaching n + k = 118; zeroth moments are the densities.
  const auto f = OscillatorFrame::unit();
  const auto rho = random_state(60, 11, 0.4);
  const EigenState st{0, 0.0, rho.rho.col(0) / std::sqrt(rho.rho(0, 0))};
  const Vector& c = st.coeffs;
  const MomentSums sums(f, rho, 0, 0);
  for (double x : {-3.0, -0.7, 0.2, 1.9}) {
    const double psi = wavefunction(f, st, x);
    CHECK_THAT(sums.sum_I(0, x), WithinAbs(psi * psi, 1e-13));
    CHECK(sums.bound_I(0, x) <= MomentSums::kMaxError);
  }
  // |psi~(p)|^2 with psi~ = sum (-i)^n c_n psi_n(p).
  for (double p : {-2.2, 0.0, 0.9}) {
    double re = 0.0, im = 0.0;
    for (int n = 0; n < 60; ++n) {
      const double t = c(n) * oscillator_eigenfunction(f, n, p);
      switch (n % 4) {
        case 0: re += t; break;
        case 1: im -= t; break;
        case 2: re -= t; break;
        default: im += t;
      }
    }
    CHECK_THAT(sums.sum_J(0, p), WithinAbs(re * re + im * im, 1e-13));
  }
}

TEST_CASE("batched sums refuse weight that cancellation would swamp") {
  // A pure high state: the monomial expansion of psi_55^2 cancels by ~1e30.
  Vector c = Vector::Zero(60);
  c(55) = 1.0;
  const MomentSums sums(OscillatorFrame::unit(), {c * c.transpose()}, 0, 0);
  CHECK_THROWS_AS(sums.sum_I(0, 0.3), PrecisionLimitError);
  CHECK_THROWS_AS(sums.sum_J(0, 0.3), PrecisionLimitError);
  CHECK(sums.bound_I(0, 0.3) > MomentSums::kMaxError);
}
