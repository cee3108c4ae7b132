#pragma once

// Conditional average energies along x and p, their poles, and the harmonic
// closed-form reference.

#include "model.hpp"
#include "moments.hpp"
#include "parallel.hpp"
#include "wigner.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplab {

/// Out-of-band signal: the marginal density vanishes at the requested point.
class DenominatorNearZero : public std::runtime_error {
 public:
  DenominatorNearZero(double coordinate, double denominator)
      : std::runtime_error("marginal density " + std::to_string(denominator) + " below tolerance at " +
                           std::to_string(coordinate)),
        coordinate_(coordinate),
        denominator_(denominator) {}
  double coordinate() const { return coordinate_; }
  double denominator() const { return denominator_; }

 private:
  double coordinate_;
  double denominator_;
};

/// numerator / denominator with the gap flag raised when |denominator| < tol.
struct ConditionalValue {
  double numerator = 0.0;
  double denominator = 0.0;
  double value = 0.0;  // NaN on a gap
  bool gap = false;
};

/// Denominator tolerance along an axis, in that axis' density units.
inline double default_denominator_tol(const OscillatorFrame& f, Axis axis) {
  return axis == Axis::x ? 1e-12 * f.kappa() : 1e-12 / f.pscale();
}

namespace detail {

inline ConditionalValue make_ratio(double num, double den, double tol) {
  ConditionalValue v{num, den, 0.0, false};
  if (std::abs(den) < tol) {
    v.gap = true;
    v.value = std::numeric_limits<double>::quiet_NaN();
  } else {
    v.value = num / den;
  }
  return v;
}

}  // namespace detail

/// Energy numerators and marginal densities of one density matrix.
///   x axis: Q1 = sum rho I^0,  Q2 = sum rho I^1 / 2m + U(x) Q1
///   p axis: R1 = sum rho J^0,  R2 = p^2/2m R1 + sum_r a_r sum rho J^r
class ConditionalEnergy {
 public:
  ConditionalEnergy(const OscillatorFrame& frame, const DensityMatrix& rho, PolynomialPotential potential)
      : frame_(frame), potential_(std::move(potential)), sums_(frame, rho, potential_.degree(), 1) {}

  const OscillatorFrame& frame() const { return frame_; }
  const PolynomialPotential& potential() const { return potential_; }
  const MomentSums& sums() const { return sums_; }

  double denominator(Axis axis, double c) const { return axis == Axis::x ? sums_.sum_I(0, c) : sums_.sum_J(0, c); }

  double numerator(Axis axis, double c) const {
    const double m = frame_.mass();
    if (axis == Axis::x) return sums_.sum_I(1, c) / (2.0 * m) + potential_(c) * sums_.sum_I(0, c);
    double acc = c * c / (2.0 * m) * sums_.sum_J(0, c);
    for (int r = 0; r <= potential_.degree(); ++r) {
      if (potential_.coeff(r) != 0.0) acc += potential_.coeff(r) * sums_.sum_J(r, c);
    }
    return acc;
  }

  ConditionalValue energy(Axis axis, double c, double tol) const {
    return detail::make_ratio(numerator(axis, c), denominator(axis, c), tol);
  }
  ConditionalValue energy(Axis axis, double c) const { return energy(axis, c, default_denominator_tol(frame_, axis)); }

 private:
  OscillatorFrame frame_;
  PolynomialPotential potential_;
  MomentSums sums_;
};

/// <p^{2 ell}> conditioned on x, with the marginal density alongside.
inline ConditionalValue conditional_p_moment_value(const OscillatorFrame& frame, const DensityMatrix& rho, int ell,
                                                   double x) {
  MomentSums sums(frame, rho, 0, std::max(ell, 1));
  return detail::make_ratio(sums.sum_I(ell, x), sums.sum_I(0, x), default_denominator_tol(frame, Axis::x));
}

/// Throws DenominatorNearZero at zeros of the position density.
inline double conditional_p_moment(const OscillatorFrame& frame, const DensityMatrix& rho, int ell, double x) {
  const auto v = conditional_p_moment_value(frame, rho, ell, x);
  if (v.gap) throw DenominatorNearZero(x, v.denominator);
  return v.value;
}

/// <x^r> conditioned on p, with the marginal density alongside.
inline ConditionalValue conditional_x_moment_value(const OscillatorFrame& frame, const DensityMatrix& rho, int r,
                                                   double p) {
  MomentSums sums(frame, rho, r, 0);
  return detail::make_ratio(sums.sum_J(r, p), sums.sum_J(0, p), default_denominator_tol(frame, Axis::p));
}

inline double conditional_x_moment(const OscillatorFrame& frame, const DensityMatrix& rho, int r, double p) {
  const auto v = conditional_x_moment_value(frame, rho, r, p);
  if (v.gap) throw DenominatorNearZero(p, v.denominator);
  return v.value;
}

/// <p^2>/2m + U(x), conditioned on x.
inline double average_energy_x(const OscillatorFrame& frame, const DensityMatrix& rho,
                               const PolynomialPotential& potential, double x) {
  const auto v = ConditionalEnergy(frame, rho, potential).energy(Axis::x, x);
  if (v.gap) throw DenominatorNearZero(x, v.denominator);
  return v.value;
}

/// p^2/2m + sum_r a_r <x^r>, conditioned on p.
inline double average_energy_p(const OscillatorFrame& frame, const DensityMatrix& rho,
                               const PolynomialPotential& potential, double p) {
  const auto v = ConditionalEnergy(frame, rho, potential).energy(Axis::p, p);
  if (v.gap) throw DenominatorNearZero(p, v.denominator);
  return v.value;
}

struct Window {
  double lo = 0.0;
  double hi = 0.0;
  int samples = 2001;

  void validate() const {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("Window: need lo < hi");
    if (samples < 3) throw std::invalid_argument("Window: need at least 3 samples");
  }
  std::vector<double> grid() const { return linspace(lo, hi, samples); }
};

struct ProfileSample {
  double coord = 0.0;
  double energy = 0.0;  // NaN on a gap
  double numerator = 0.0;
  double denominator = 0.0;
  bool gap = false;
};

/// Local minimum of the marginal density that is not a zero.
struct DensityMinimum {
  double coord = 0.0;
  double denominator = 0.0;
  double depth = 0.0;  // denominator / max denominator over the window
};

struct EnergyProfile {
  Axis axis = Axis::x;
  int state_index = 0;
  Window window;
  double tol = 0.0;
  std::vector<ProfileSample> samples;
  std::vector<double> poles;
  std::vector<DensityMinimum> minima;
  bool edge_warning = false;  // density at a window edge below 10 tol
};

namespace detail {

// Zero of f between a and b with f(a) f(b) < 0, to width `xtol`.
template <typename F>
double bisect_root(F&& f, double a, double b, double xtol) {
  double fa = f(a);
  for (int it = 0; it < 200 && std::abs(b - a) > xtol; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Poles of the conditional energy on a sampled window. Candidates are sign
/// changes of the density, refined by bisection, and local minima of |density|,
/// refined by Brent minimization. A candidate is a pole when the refined
/// density is below `tol` and the numerator there exceeds 1e3 tol. Candidates
/// closer than two sample spacings are merged.
inline std::vector<double> find_poles(const ConditionalEnergy& ce, Axis axis, const std::vector<double>& coords,
                                      const std::vector<double>& dens, double tol,
                                      std::vector<DensityMinimum>* minima = nullptr) {
  const std::size_t n = coords.size();
  if (n < 3 || dens.size() != n) throw std::invalid_argument("find_poles: need matching samples");
  const double span = coords.back() - coords.front();
  const double spacing = span / static_cast<double>(n - 1);
  const double xtol = 1e-10 * span;
  auto den = [&](double c) { return ce.denominator(axis, c); };
  const double peak = *std::max_element(dens.begin(), dens.end(), [](double a, double b) {
    return std::abs(a) < std::abs(b);
  });

  std::vector<double> candidates;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if ((dens[i] < 0.0 && dens[i + 1] > 0.0) || (dens[i] > 0.0 && dens[i + 1] < 0.0)) {
      candidates.push_back(detail::bisect_root(den, coords[i], coords[i + 1], xtol));
    }
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = std::abs(dens[i]);
    if (a <= std::abs(dens[i - 1]) && a < std::abs(dens[i + 1])) {
      auto absden = [&](double c) { return std::abs(den(c)); };
      const auto best = boost::math::tools::brent_find_minima(absden, coords[i - 1], coords[i + 1], 40);
      if (best.second < tol) {
        candidates.push_back(best.first);
      } else if (minima) {
        minima->push_back({best.first, den(best.first), peak != 0.0 ? den(best.first) / std::abs(peak) : 0.0});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<double> poles;
  std::vector<double> cluster;
  auto flush = [&] {
    if (cluster.empty()) return;
    // Representative: the member with the smallest |density|.
    double best = cluster.front();
    double best_abs = std::abs(den(best));
    for (double c : cluster) {
      const double v = std::abs(den(c));
      if (v < best_abs) {
        best = c;
        best_abs = v;
      }
    }
    if (std::abs(ce.numerator(axis, best)) > 1e3 * tol) poles.push_back(best);
    cluster.clear();
  };
  for (double c : candidates) {
    if (!cluster.empty() && c - cluster.back() > 2.0 * spacing) flush();
    cluster.push_back(c);
  }
  flush();
  return poles;
}

/// Samples the conditional energy on `window` and locates its poles.
inline EnergyProfile energy_profile(const ConditionalEnergy& ce, Axis axis, const Window& window, int state_index = 0,
                                    std::optional<double> tol_override = std::nullopt) {
  window.validate();
  EnergyProfile prof;
  prof.axis = axis;
  prof.state_index = state_index;
  prof.window = window;
  prof.tol = tol_override.value_or(default_denominator_tol(ce.frame(), axis));
  const auto coords = window.grid();
  prof.samples.resize(coords.size());
  parallel_for(coords.size(), [&](std::size_t i) {
    const double c = coords[i];
    const double num = ce.numerator(axis, c);
    const double den = ce.denominator(axis, c);
    const auto v = detail::make_ratio(num, den, prof.tol);
    prof.samples[i] = {c, v.value, num, den, v.gap};
  });
  std::vector<double> dens(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) dens[i] = prof.samples[i].denominator;
  prof.poles = find_poles(ce, axis, coords, dens, prof.tol, &prof.minima);
  prof.edge_warning = std::abs(dens.front()) < 10.0 * prof.tol || std::abs(dens.back()) < 10.0 * prof.tol;
  return prof;
}

/// Poles only, for callers that do not keep the profile.
inline std::vector<double> find_poles(const OscillatorFrame& frame, const DensityMatrix& rho,
                                      const PolynomialPotential& potential, Axis axis, const Window& window) {
  return energy_profile(ConditionalEnergy(frame, rho, potential), axis, window).poles;
}

/// C_k and Cbar_k of the harmonic closed form for state s. The step-function
/// weight at j = 0 is (1 + eta0) / 2; eta0 = 0 matches the general machinery.
struct HarmonicCoeffSet {
  int s = 0;
  double eta0 = 0.0;
  std::vector<double> c;
  std::vector<double> cbar;

  explicit HarmonicCoeffSet(int state, double eta_zero = 0.0) : s(state), eta0(eta_zero) {
    if (state < 0 || state > 24) throw std::domain_error("HarmonicCoeffSet: s must be in [0, 24]");
    // ratio(i) = H_i^2(0) / (2^i i!); 2i H_{i-1}^2(0) / (2^i i!) = ratio(i-1).
    auto ratio = [](int i) {
      if (i < 0) return 0.0;
      return specfun::hermite_sq_zero(i) / (std::ldexp(1.0, i) * specfun::factorial(i));
    };
    for (int k = 0; k <= state; ++k) {
      double sum_c = 0.0;
      double sum_cbar = 0.0;
      for (int j = 0; j <= k; ++j) {
        const double w = j == 0 ? 0.5 * (1.0 + eta_zero) : 1.0;
        const int i = k - j;
        sum_c += w * (ratio(i) + ratio(i - 1));
        sum_cbar += w * (ratio(i) - ratio(i - 1));
      }
      const double sign = k % 2 == 0 ? 1.0 : -1.0;
      c.push_back(sign * sum_c);
      cbar.push_back(sign * sum_cbar);
    }
  }

  /// sum C_k L_{s-k}(y) / sum Cbar_k L_{s-k}(y); the denominator alongside.
  ConditionalValue ratio_at(double y) const {
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k <= s; ++k) {
      const double l = specfun::laguerre(s - k, 0, y);
      num += c[static_cast<std::size_t>(k)] * l;
      den += cbar[static_cast<std::size_t>(k)] * l;
    }
    return {num, den, num / den, den == 0.0};
  }
};

/// Harmonic-oscillator Wigner function (-1)^s/(pi hbar) e^{-2 eps} L_s(4 eps).
inline double harmonic_wigner(int s, const PhasePoint& pt, const OscillatorFrame& frame) {
  if (s < 0) throw std::domain_error("harmonic_wigner: negative state");
  const double eps = pt.eps(frame);
  const double sign = s % 2 == 0 ? 1.0 : -1.0;
  return sign / (M_PI * frame.hbar()) * std::exp(-2.0 * eps) * specfun::laguerre(s, 0, 4.0 * eps);
}

/// Harmonic <E>_{s,x}: (hbar omega / 2) (<v^2>/2 sigma_v^2 + x^2/2 sigma_x^2), y = x^2/sigma_x^2.
inline double harmonic_avg_energy_x(int s, double x, const OscillatorFrame& frame, double eta0 = 0.0) {
  const double xb = frame.xbar(x);
  const double y = 2.0 * xb * xb;
  const auto r = HarmonicCoeffSet(s, eta0).ratio_at(y);
  return 0.5 * frame.hbar() * frame.omega() * (0.5 * r.value + 0.5 * y);
}

/// Harmonic <E>_{s,p}, the same form with the roles of x and v exchanged.
inline double harmonic_avg_energy_p(int s, double p, const OscillatorFrame& frame, double eta0 = 0.0) {
  const double pb = frame.pbar(p);
  const double y = 2.0 * pb * pb;
  const auto r = HarmonicCoeffSet(s, eta0).ratio_at(y);
  return 0.5 * frame.hbar() * frame.omega() * (0.5 * y + 0.5 * r.value);
}

struct PoleMatch {
  double pole = 0.0;
  std::optional<NegativityInterval> interval;
};

struct PoleNegativityReport {
  Axis axis = Axis::x;
  std::vector<PoleMatch> matches;
  std::vector<NegativityInterval> intervals;
  std::vector<NegativityInterval> unmatched_intervals;

  std::size_t unmatched_poles() const {
    return static_cast<std::size_t>(
        std::count_if(matches.begin(), matches.end(), [](const PoleMatch& m) { return !m.interval; }));
  }
  /// Every pole in its own interval and every interval holding exactly one pole.
  bool bijection() const {
    if (unmatched_poles() != 0 || !unmatched_intervals.empty()) return false;
    for (const auto& iv : intervals) {
      const auto hits = std::count_if(matches.begin(), matches.end(), [&](const PoleMatch& m) {
        return m.interval && m.interval->lo == iv.lo && m.interval->hi == iv.hi;
      });
      if (hits != 1) return false;
    }
    return true;
  }
};

/// Pairs poles with the negativity intervals of the axis slice W(x, 0) or
/// W(0, p) sampled on the same window.
inline PoleNegativityReport match_poles(Axis axis, const std::vector<double>& poles,
                                        std::vector<NegativityInterval> intervals) {
  PoleNegativityReport rep;
  rep.axis = axis;
  rep.intervals = std::move(intervals);
  std::vector<bool> used(rep.intervals.size(), false);
  for (double pole : poles) {
    PoleMatch m{pole, std::nullopt};
    for (std::size_t i = 0; i < rep.intervals.size(); ++i) {
      if (rep.intervals[i].contains(pole)) {
        m.interval = rep.intervals[i];
        used[i] = true;
        break;
      }
    }
    rep.matches.push_back(m);
  }
  for (std::size_t i = 0; i < rep.intervals.size(); ++i) {
    if (!used[i]) rep.unmatched_intervals.push_back(rep.intervals[i]);
  }
  return rep;
}

inline PoleNegativityReport pole_negativity_report(const OscillatorFrame& frame, const DensityMatrix& rho,
                                                   const PolynomialPotential& potential, Axis axis,
                                                   const Window& window) {
  const auto poles = find_poles(frame, rho, potential, axis, window);
  const WignerEvaluator eval(frame, rho);
  return match_poles(axis, poles, slice_negativity(eval, axis, window.grid(), default_negativity_tol(frame)));
}

struct EnergyIdentity {
  double from_x = 0.0;  // int Q2 dx
  double from_p = 0.0;  // int R2 dp
  double half_width_x = 0.0;
  double half_width_p = 0.0;
};

/// Phase-space average of the energy, integrating the x- and p-axis
/// numerators over windows wide enough for every basis function.
inline EnergyIdentity energy_identity(const ConditionalEnergy& ce, int basis_size) {
  using boost::math::quadrature::gauss_kronrod;
  const auto& f = ce.frame();
  // Beyond the outermost turning point sqrt(2K+1) the basis decays like a Gaussian.
  const double reach = std::sqrt(2.0 * basis_size + 1.0) + 8.0;
  EnergyIdentity out;
  out.half_width_x = reach * f.sigma_length();
  out.half_width_p = reach * f.pscale();
  auto qx = [&](double x) { return ce.numerator(Axis::x, x); };
  auto rp = [&](double p) { return ce.numerator(Axis::p, p); };
  double err = 0.0;
  out.from_x = gauss_kronrod<double, 61>::integrate(qx, -out.half_width_x, out.half_width_x, 20, 1e-13, &err);
  out.from_p = gauss_kronrod<double, 61>::integrate(rp, -out.half_width_p, out.half_width_p, 20, 1e-13, &err);
  return out;
}

}  // namespace wplab
