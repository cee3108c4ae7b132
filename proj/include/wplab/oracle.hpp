#pragma once

// Brute-force references for the closed forms: adaptive Gauss-Kronrod
// quadrature of the defining integrals over the polynomial-form kernel, and a
// finite-difference Schrodinger spectrum independent of the harmonic basis.

#include "model.hpp"
#include "wigner.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplab {

struct QuadratureSpec {
  double half_width = 10.0;  // in units of the frame's length or momentum scale
  unsigned max_depth = 15;   // maximum bisection depth of the adaptive scheme
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;

  void validate() const {
    if (!(half_width >= 8.0) || !std::isfinite(half_width)) {
      throw std::invalid_argument("QuadratureSpec: half-width must be at least 8");
    }
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
    if (max_depth == 0) throw std::invalid_argument("QuadratureSpec: max depth must be positive");
  }
};

/// Quadrature that did not reach its tolerance; carries what it did reach.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const { return estimate_; }
  double error() const { return error_; }

 private:
  double estimate_;
  double error_;
};

namespace detail {

// Integrates f over [-h, 0] and [0, h]. The error target is relative to the
// L1 norm of f, floored by abs_tol.
template <typename F>
double adaptive_integral(F&& f, double h, const QuadratureSpec& spec, const char* who) {
  using boost::math::quadrature::gauss_kronrod;
  double total = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  for (int side = 0; side < 2; ++side) {
    double err = 0.0;
    double norm = 0.0;
    const double a = side == 0 ? -h : 0.0;
    const double b = side == 0 ? 0.0 : h;
    total += gauss_kronrod<double, 61>::integrate(f, a, b, spec.max_depth, spec.rel_tol * 1e-2, &err, &norm);
    error += err;
    l1 += norm;
  }
  if (!std::isfinite(total) || error > std::max(spec.abs_tol, spec.rel_tol * l1)) {
    std::ostringstream msg;
    msg << who << ": tolerance not reached (estimate " << total << ", error " << error << ")";
    throw QuadratureError(msg.str(), total, error);
  }
  return total;
}

}  // namespace detail

/// int p^{2 ell} Re w_{n,k}(x, p) dp over |pbar| <= half-width.
inline double quad_moment_I(const OscillatorFrame& frame, int n, int k, int ell, double x,
                            const QuadratureSpec& spec = {}) {
  spec.validate();
  if (n < 0 || k < 0 || ell < 0) throw std::domain_error("quad_moment_I: negative index");
  auto f = [&](double p) { return std::pow(p, 2 * ell) * kernel_w_reference(frame, n, k, {x, p}).real(); };
  return detail::adaptive_integral(f, spec.half_width * frame.pscale(), spec, "quad_moment_I");
}

/// int x^r Re w_{n,k}(x, p) dx over |xbar| <= half-width.
inline double quad_moment_J(const OscillatorFrame& frame, int n, int k, int r, double p,
                            const QuadratureSpec& spec = {}) {
  spec.validate();
  if (n < 0 || k < 0 || r < 0) throw std::domain_error("quad_moment_J: negative index");
  auto f = [&](double x) { return std::pow(x, r) * kernel_w_reference(frame, n, k, {x, p}).real(); };
  return detail::adaptive_integral(f, spec.half_width * frame.sigma_length(), spec, "quad_moment_J");
}

/// Imaginary counterpart of quad_moment_J, used to confirm the parity law.
inline double quad_moment_J_imag(const OscillatorFrame& frame, int n, int k, int r, double p,
                                 const QuadratureSpec& spec = {}) {
  spec.validate();
  auto f = [&](double x) { return std::pow(x, r) * kernel_w_reference(frame, n, k, {x, p}).imag(); };
  return detail::adaptive_integral(f, spec.half_width * frame.sigma_length(), spec, "quad_moment_J_imag");
}

/// int_0^inf p^{2j} e^{-p^2} dp.
inline double quad_gaussian_moment(int j) {
  if (j < 0 || j > 16) throw std::domain_error("quad_gaussian_moment: j must be in [0, 16]");
  using boost::math::quadrature::gauss_kronrod;
  auto f = [j](double p) { return std::pow(p, 2 * j) * std::exp(-p * p); };
  return gauss_kronrod<double, 61>::integrate(f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14);
}

/// int_0^inf p^{2 beta} e^{-p^2} L_lambda(2 p^2) dp by quadrature.
inline double quad_g_coefficient(int lambda, int beta) {
  if (lambda < 0 || beta < 0) throw std::domain_error("quad_g_coefficient: negative index");
  using boost::math::quadrature::gauss_kronrod;
  auto f = [&](double p) { return std::pow(p, 2 * beta) * std::exp(-p * p) * specfun::laguerre(lambda, 0, 2 * p * p); };
  // The integrand is negligible beyond p = 12 for the supported orders.
  return gauss_kronrod<double, 61>::integrate(f, 0.0, 12.0, 20, 1e-15);
}

struct FiniteDifferenceOptions {
  /// Combine spacings h and h/2 as (4 E_{h/2} - E_h) / 3.
  bool richardson = false;
  /// When finite, keep only states with at least `localize_weight` of their
  /// probability at x < localize_below; drops states living past a barrier.
  double localize_below = std::numeric_limits<double>::infinity();
  double localize_weight = 0.99;
  /// Extra eigenpairs computed so filtering can still return `count`.
  int spare = 24;
};

namespace detail {

inline std::vector<double> fd_levels(const PolynomialPotential& potential, const OscillatorFrame& frame, double lo,
                                     double hi, int points, int count, const FiniteDifferenceOptions& opt) {
  const double h = (hi - lo) / (points + 1);
  const double kin = frame.hbar() * frame.hbar() / (2.0 * frame.mass() * h * h);
  std::vector<double> d(static_cast<std::size_t>(points));
  std::vector<double> e(static_cast<std::size_t>(points - 1), -kin);
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    xs[static_cast<std::size_t>(i)] = lo + (i + 1) * h;
    d[static_cast<std::size_t>(i)] = 2.0 * kin + potential(xs[static_cast<std::size_t>(i)]);
  }
  const bool filter = std::isfinite(opt.localize_below);
  const int want = std::min(points, filter ? count + opt.spare : count);
  std::vector<double> w(static_cast<std::size_t>(points));
  std::vector<double> z(filter ? static_cast<std::size_t>(points) * static_cast<std::size_t>(want) : 1);
  std::vector<lapack_int> ifail(static_cast<std::size_t>(points));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_dstevx(LAPACK_COL_MAJOR, filter ? 'V' : 'N', 'I', points, d.data(), e.data(), 0.0, 0.0, 1, want,
                     2 * LAPACKE_dlamch('S'), &found, w.data(), z.data(), points, ifail.data());
  if (info != 0) {
    throw std::runtime_error("finite_difference_spectrum: tridiagonal eigensolver failed (info " +
                             std::to_string(info) + ")");
  }
  std::vector<double> out;
  for (lapack_int j = 0; j < found && static_cast<int>(out.size()) < count; ++j) {
    if (filter) {
      double inside = 0.0;
      double total = 0.0;
      for (int i = 0; i < points; ++i) {
        const double v = z[static_cast<std::size_t>(j) * static_cast<std::size_t>(points) + static_cast<std::size_t>(i)];
        total += v * v;
        if (xs[static_cast<std::size_t>(i)] < opt.localize_below) inside += v * v;
      }
      if (inside < opt.localize_weight * total) continue;
    }
    out.push_back(w[static_cast<std::size_t>(j)]);
  }
  if (static_cast<int>(out.size()) < count) {
    throw std::runtime_error("finite_difference_spectrum: only " + std::to_string(out.size()) + " of " +
                             std::to_string(count) + " states passed the localization filter");
  }
  return out;
}

}  // namespace detail

/// Lowest `count` eigenvalues of the three-point-stencil Hamiltonian on
/// `points` interior nodes of [lo, hi] with Dirichlet walls.
inline std::vector<double> finite_difference_spectrum(const PolynomialPotential& potential,
                                                      const OscillatorFrame& frame, double lo, double hi, int points,
                                                      int count, const FiniteDifferenceOptions& opt = {}) {
  if (!(hi > lo)) throw std::invalid_argument("finite_difference_spectrum: empty domain");
  if (points < 2000) throw std::invalid_argument("finite_difference_spectrum: at least 2000 points required");
  if (count < 1 || count > points) throw std::invalid_argument("finite_difference_spectrum: bad state count");
  auto coarse = detail::fd_levels(potential, frame, lo, hi, points, count, opt);
  if (!opt.richardson) return coarse;
  // 2n + 1 interior nodes halve the spacing exactly.
  const auto fine = detail::fd_levels(potential, frame, lo, hi, 2 * points + 1, count, opt);
  for (std::size_t i = 0; i < coarse.size(); ++i) coarse[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
  return coarse;
}

}  // namespace wplab
