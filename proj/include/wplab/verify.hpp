#pragma once

// End-to-end cross-check suites: closed forms against each other, against
// quadrature, against the harmonic closed form, and the energy identity.

#include "energy.hpp"
#include "moments.hpp"
#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace wplab {

struct SuiteResult {
  explicit SuiteResult(std::string suite) : name(std::move(suite)) {}

  std::string name;
  long checks = 0;
  long failures = 0;
  double worst = 0.0;  // largest error over the suite's own tolerance
  std::string detail;  // first failure, if any

  bool pass() const { return failures == 0 && checks > 0; }

  /// Bitwise equality.
  void check_exact(double got, double want, const std::string& what) {
    ++checks;
    if (got != want) {
      if (failures == 0) detail = what + ": values differ";
      ++failures;
    }
  }

  /// Records one comparison of `got` against `want` within `tol`.
  void check(double got, double want, double tol, const std::string& what) {
    ++checks;
    const double err = std::abs(got - want);
    const double ratio = err / tol;
    if (!(ratio <= 1.0)) {
      if (failures == 0) {
        std::ostringstream m;
        m.precision(17);
        m << what << ": got " << got << ", want " << want << ", tol " << tol;
        detail = m.str();
      }
      ++failures;
    }
    if (!(ratio <= worst)) worst = std::isfinite(ratio) ? std::max(worst, ratio) : ratio;
  }
};

/// G_lambda^{2 beta}, lambda, beta <= 8, against quadrature; base columns
/// against their closed forms.
inline SuiteResult verify_gtable(double perturbation = 0.0) {
  SuiteResult r("gtable");
  const GTable table(8, 8, perturbation);
  for (int l = 0; l <= 8; ++l) {
    for (int b = 0; b <= 8; ++b) {
      const double want = quad_g_coefficient(l, b);
      const double got = table.value(l, b);
      r.check(got, want, 1e-10 * std::max(1.0, std::abs(want)),
              "G(" + std::to_string(l) + "," + std::to_string(b) + ")");
    }
    r.check_exact(table.value(l, 0), GTable::base0(l), "G(" + std::to_string(l) + ",0) closed form");
    r.check_exact(table.value(l, 1), GTable::base1(l), "G(" + std::to_string(l) + ",1) closed form");
  }
  return r;
}

/// Explicit triple sum against the Laguerre form for n, k <= max_nk.
inline SuiteResult verify_theorem_equivalence(const OscillatorFrame& frame, int max_nk, double perturbation = 0.0) {
  SuiteResult r("theorem_equivalence");
  GTable table(16, 16, perturbation);
  const auto xs = linspace(-4.0 * frame.sigma_length(), 4.0 * frame.sigma_length(), 25);
  for (int n = 0; n <= max_nk; ++n) {
    for (int k = 0; k <= max_nk; ++k) {
      for (int ell = 0; ell <= 3; ++ell) {
        for (double x : xs) {
          const double a = moment_I_direct(frame, n, k, ell, x);
          const double b = moment_I_laguerre(frame, table, n, k, ell, x);
          r.check(b, a, 1e-9 * std::max(1.0, std::abs(a)),
                  "I(" + std::to_string(n) + "," + std::to_string(k) + "," + std::to_string(ell) + ")");
        }
      }
    }
  }
  return r;
}

/// Closed-form I and J against adaptive quadrature, n, k <= min(max_nk, 10).
inline SuiteResult verify_quadrature(const OscillatorFrame& frame, int max_nk) {
  SuiteResult r("quadrature");
  const int top = std::min(max_nk, 10);
  const auto xs = linspace(-3.0 * frame.sigma_length(), 3.3 * frame.sigma_length(), 10);
  const auto ps = linspace(-3.0 * frame.pscale(), 3.3 * frame.pscale(), 10);
  for (int n = 0; n <= top; ++n) {
    for (int k = 0; k <= top; ++k) {
      const std::string pair = std::to_string(n) + "," + std::to_string(k) + ",";
      for (int ell = 0; ell <= 3; ++ell) {
        for (double x : xs) {
          const double want = quad_moment_I(frame, n, k, ell, x);
          r.check(moment_I_direct(frame, n, k, ell, x), want, std::max(1e-12, 1e-8 * std::abs(want)),
                  "I(" + pair + std::to_string(ell) + ")");
        }
      }
      for (int rr = 0; rr <= 4; ++rr) {
        for (double p : ps) {
          const double want = quad_moment_J(frame, n, k, rr, p);
          r.check(moment_J(frame, n, k, rr, p), want, std::max(1e-12, 1e-8 * std::abs(want)),
                  "J(" + pair + std::to_string(rr) + ")");
        }
      }
    }
  }
  return r;
}

/// General pipeline with a harmonic potential against the harmonic closed form.
inline SuiteResult verify_harmonic(const OscillatorFrame& frame, int max_state = 3) {
  SuiteResult r("harmonic_reference");
  const auto pot = PolynomialPotential::harmonic(frame);
  const int size = 30;
  const auto states = solve_eigenstates(build_hamiltonian(SpectralBasis(size, frame), pot), max_state + 1);
  for (int s = 0; s <= max_state; ++s) {
    const ConditionalEnergy ce(frame, density_matrix(states[static_cast<std::size_t>(s)]), pot);
    for (Axis axis : {Axis::x, Axis::p}) {
      const double scale = axis == Axis::x ? frame.sigma_length() : frame.pscale();
      for (double u : linspace(-3.7, 3.7, 41)) {
        const double c = u * scale;
        const auto v = ce.energy(axis, c);
        if (std::abs(v.denominator) <= 1e-6) continue;
        const double want = axis == Axis::x ? harmonic_avg_energy_x(s, c, frame) : harmonic_avg_energy_p(s, c, frame);
        r.check(v.value, want, 1e-8 * std::abs(want),
                "E_" + std::string(axis_name(axis)) + " s=" + std::to_string(s));
      }
    }
  }
  return r;
}

/// Phase-space average of the energy against the eigenvalue.
inline SuiteResult verify_energy_identity(const OscillatorFrame& frame, const PolynomialPotential& pot, int size,
                                          const std::vector<int>& state_list) {
  SuiteResult r("energy_identity");
  if (state_list.empty()) return r;
  const int count = *std::max_element(state_list.begin(), state_list.end()) + 1;
  const auto states = solve_eigenstates(build_hamiltonian(SpectralBasis(size, frame), pot), count);
  for (int s : state_list) {
    const auto& st = states[static_cast<std::size_t>(s)];
    const ConditionalEnergy ce(frame, density_matrix(st), pot);
    const auto id = energy_identity(ce, size);
    const double tol = std::max(1e-6, 1e-6 * std::abs(st.energy));
    r.check(id.from_x, st.energy, tol, "x-axis identity s=" + std::to_string(s));
    r.check(id.from_p, st.energy, tol, "p-axis identity s=" + std::to_string(s));
  }
  return r;
}

}  // namespace wplab
