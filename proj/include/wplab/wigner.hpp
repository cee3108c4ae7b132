#pragma once

// Weyl-operator matrix elements w_{n,k}(x, p) of the harmonic-oscillator basis,
// Wigner functions assembled from a density matrix, and negativity detection.

#include "model.hpp"
#include "parallel.hpp"
#include "specfun.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplab {

using Complex = std::complex<double>;

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;

  /// (p^2/2m + m omega^2 x^2/2) / (hbar omega)
  double eps(const OscillatorFrame& f) const { return 0.5 * modz_sq(f); }
  /// |z|^2 = xbar^2 + pbar^2
  double modz_sq(const OscillatorFrame& f) const {
    const double xb = f.xbar(x);
    const double pb = f.pbar(p);
    return xb * xb + pb * pb;
  }
  double modz(const OscillatorFrame& f) const { return std::sqrt(modz_sq(f)); }
  /// Full angle of xbar + i pbar, in (-pi, pi].
  double phi(const OscillatorFrame& f) const { return std::atan2(f.pbar(p), f.xbar(x)); }
};

enum class Axis { x, p };

inline const char* axis_name(Axis a) { return a == Axis::x ? "x" : "p"; }

/// Laguerre form: ((-1)^min / pi hbar) sqrt(2^|n-k| min!/max!) e^{-|z|^2}
/// |z|^|n-k| L_min^{(|n-k|)}(2|z|^2) e^{i(n-k)phi}.
inline Complex kernel_w(const OscillatorFrame& frame, int n, int k, const PhasePoint& pt) {
  if (n < 0 || k < 0) throw std::domain_error("kernel_w: negative index");
  const int lo = std::min(n, k);
  const int hi = std::max(n, k);
  const int m = hi - lo;
  const double r2 = pt.modz_sq(frame);
  const double sign = (lo % 2 == 0) ? 1.0 : -1.0;
  const double inv_pi_hbar = 1.0 / (M_PI * frame.hbar());
  if (m == 0) return {sign * inv_pi_hbar * std::exp(-r2) * specfun::laguerre(lo, 0, 2.0 * r2), 0.0};
  if (r2 == 0.0) return {0.0, 0.0};
  const double log_mag = 0.5 * (m * std::log(2.0) + specfun::log_factorial(lo) - specfun::log_factorial(hi)) +
                         0.5 * m * std::log(r2) - r2;
  const double radial = sign * inv_pi_hbar * std::exp(log_mag) * specfun::laguerre(lo, m, 2.0 * r2);
  const double angle = (n - k) * pt.phi(frame);
  return {radial * std::cos(angle), radial * std::sin(angle)};
}

/// Polynomial form ((-1)^n / pi hbar) e^{-xbar^2 - pbar^2} P_{n,k}(-xbar - i pbar, xbar - i pbar).
/// Independent of kernel_w: no Laguerre polynomials, no angle.
inline Complex kernel_w_reference(const OscillatorFrame& frame, int n, int k, const PhasePoint& pt) {
  if (n < 0 || k < 0) throw std::domain_error("kernel_w_reference: negative index");
  const double xb = frame.xbar(pt.x);
  const double pb = frame.pbar(pt.p);
  // The alternating sum cancels to ~1e-9 relative at n, k ~ 10 in double;
  // extended precision keeps it usable as an oracle.
  using LC = std::complex<long double>;
  const LC z1(-xb, -pb);
  const LC z2(xb, -pb);
  const int lo = std::min(n, k);

  std::vector<LC> pow1(static_cast<std::size_t>(n) + 1), pow2(static_cast<std::size_t>(k) + 1);
  pow1[0] = 1.0L;
  pow2[0] = 1.0L;
  for (int i = 1; i <= n; ++i) pow1[static_cast<std::size_t>(i)] = pow1[static_cast<std::size_t>(i) - 1] * z1;
  for (int i = 1; i <= k; ++i) pow2[static_cast<std::size_t>(i)] = pow2[static_cast<std::size_t>(i) - 1] * z2;

  const long double ln2 = std::log(2.0L);
  const long double log_norm = 0.5L * ((n + k) * ln2 + std::lgamma(n + 1.0L) + std::lgamma(k + 1.0L));
  LC acc = 0.0L;
  for (int s = 0; s <= lo; ++s) {
    const long double log_c =
        log_norm - s * ln2 - std::lgamma(s + 1.0L) - std::lgamma(k - s + 1.0L) - std::lgamma(n - s + 1.0L);
    acc += std::exp(log_c) * pow1[static_cast<std::size_t>(n - s)] * pow2[static_cast<std::size_t>(k - s)];
  }
  const Complex sum(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign / (M_PI * frame.hbar()) * std::exp(-xb * xb - pb * pb) * sum;
}

/// Evaluates W = sum rho_{k,n} w_{n,k} at many points for one density matrix.
/// Uses Hermiticity: diagonal terms plus 2 Re(rho_{k,n} w_{n,k}) over n > k.
class WignerEvaluator {
 public:
  WignerEvaluator(const OscillatorFrame& frame, const DensityMatrix& rho) : frame_(frame), rho_(rho.rho) {
    const int k = rho_.rows();
    if (rho_.cols() != k) throw std::invalid_argument("WignerEvaluator: density matrix not square");
    // 0.5 log(2^m min!/max!) for every (min, m).
    log_norm_.assign(static_cast<std::size_t>(k) * static_cast<std::size_t>(k), 0.0);
    for (int lo = 0; lo < k; ++lo) {
      for (int m = 0; lo + m < k; ++m) {
        log_norm_[index(lo, m)] =
            0.5 * (m * std::log(2.0) + specfun::log_factorial(lo) - specfun::log_factorial(lo + m));
      }
    }
  }

  double operator()(const PhasePoint& pt) const {
    const int size = static_cast<int>(rho_.rows());
    const double r2 = pt.modz_sq(frame_);
    const double phi = pt.phi(frame_);
    const double log_r = r2 > 0.0 ? 0.5 * std::log(r2) : 0.0;
    std::vector<double> lag(static_cast<std::size_t>(size));
    specfun::CompensatedSum<double> acc;
    for (int m = 0; m < size; ++m) {
      if (m > 0 && r2 == 0.0) break;
      const int count = size - m;
      lag.resize(static_cast<std::size_t>(count));
      specfun::laguerre_sequence(m, 2.0 * r2, lag);
      const double angular = m == 0 ? 1.0 : 2.0 * std::cos(m * phi);
      for (int lo = 0; lo < count; ++lo) {
        const double rho = rho_(lo, lo + m);
        if (rho == 0.0) continue;
        const double sign = (lo % 2 == 0) ? 1.0 : -1.0;
        const double mag = std::exp(log_norm_[index(lo, m)] + m * log_r - r2);
        acc.add(rho * sign * mag * lag[static_cast<std::size_t>(lo)] * angular);
      }
    }
    return acc.value() / (M_PI * frame_.hbar());
  }

  const OscillatorFrame& frame() const { return frame_; }

 private:
  std::size_t index(int lo, int m) const {
    return static_cast<std::size_t>(lo) * static_cast<std::size_t>(rho_.rows()) + static_cast<std::size_t>(m);
  }

  OscillatorFrame frame_;
  Matrix rho_;
  std::vector<double> log_norm_;
};

/// W(x, p) for a symmetric density matrix, in 1/action.
inline double wigner_value(const OscillatorFrame& frame, const DensityMatrix& rho, const PhasePoint& pt) {
  return WignerEvaluator(frame, rho)(pt);
}

struct WignerField {
  std::vector<double> xs;
  std::vector<double> ps;
  /// values[i * ps.size() + j] = W(xs[i], ps[j])
  std::vector<double> values;
  int state_index = 0;

  double at(std::size_t i, std::size_t j) const { return values[i * ps.size() + j]; }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }

  /// Trapezoid estimate of the integral over the grid.
  double integral() const {
    auto weights = [](const std::vector<double>& g) {
      std::vector<double> w(g.size(), 0.0);
      for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        const double h = 0.5 * (g[i + 1] - g[i]);
        w[i] += h;
        w[i + 1] += h;
      }
      return w;
    };
    const auto wx = weights(xs);
    const auto wp = weights(ps);
    specfun::CompensatedSum<double> acc;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < ps.size(); ++j) acc.add(wx[i] * wp[j] * at(i, j));
    }
    return acc.value();
  }
};

inline std::vector<double> linspace(double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("linspace: need at least two points");
  std::vector<double> out(static_cast<std::size_t>(count));
  const double step = (hi - lo) / (count - 1);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

inline bool strictly_increasing(const std::vector<double>& g) {
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (!(g[i] > g[i - 1])) return false;
  }
  return true;
}

inline WignerField wigner_grid(const OscillatorFrame& frame, const DensityMatrix& rho, std::vector<double> xs,
                               std::vector<double> ps, int state_index = 0) {
  if (!strictly_increasing(xs) || !strictly_increasing(ps)) {
    throw std::invalid_argument("wigner_grid: grids must be strictly increasing");
  }
  WignerEvaluator eval(frame, rho);
  WignerField field{std::move(xs), std::move(ps), {}, state_index};
  field.values.assign(field.xs.size() * field.ps.size(), 0.0);
  const std::size_t np = field.ps.size();
  parallel_for(field.xs.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < np; ++j) field.values[i * np + j] = eval({field.xs[i], field.ps[j]});
  });
  return field;
}

struct NegativityInterval {
  Axis axis = Axis::x;
  double lo = 0.0;
  double hi = 0.0;
  double min_value = 0.0;

  bool contains(double c) const { return c > lo && c < hi; }
};

/// Natural cubic spline through (xs, ys); used to refine interval edges when
/// only samples are available.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> xs, std::vector<double> ys) : xs_(std::move(xs)), ys_(std::move(ys)) {
    const std::size_t n = xs_.size();
    if (n < 2 || ys_.size() != n) throw std::invalid_argument("CubicSpline: need matching samples");
    m_.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = xs_[i] - xs_[i - 1];
      const double h1 = xs_[i + 1] - xs_[i];
      const double rhs = 6.0 * ((ys_[i + 1] - ys_[i]) / h1 - (ys_[i] - ys_[i - 1]) / h0);
      const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
      c[i] = h1 / diag;
      d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
      m_[i] = d[i] - c[i] * m_[i + 1];
      if (i == 1) break;
    }
  }

  double operator()(double x) const {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t i = it == xs_.begin() ? 0 : static_cast<std::size_t>(it - xs_.begin()) - 1;
    i = std::min(i, xs_.size() - 2);
    const double h = xs_[i + 1] - xs_[i];
    const double a = (xs_[i + 1] - x) / h;
    const double b = (x - xs_[i]) / h;
    return a * ys_[i] + b * ys_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
  }

 private:
  std::vector<double> xs_, ys_, m_;
};

namespace detail {

// Bisects the crossing of level `level` between `inside` (f < level) and
// `outside` (f >= level); returns a point on the outside of the final bracket.
inline double refine_crossing(const std::function<double(double)>& f, double outside, double inside, double level,
                              double value_tol) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (outside + inside);
    const double v = f(mid);
    if (v < level) {
      inside = mid;
    } else {
      outside = mid;
      if (v - level <= value_tol) break;
    }
    if (std::abs(inside - outside) <= 1e-14 * (1.0 + std::abs(outside))) break;
  }
  return outside;
}

}  // namespace detail

/// Maximal runs where W < -tol along a 1-D slice. Edges are bisected on
/// `evaluate` until W is within tol/10 of the -tol level; an interval that
/// touches the sample window keeps the window edge.
inline std::vector<NegativityInterval> negativity_intervals(Axis axis, const std::vector<double>& coords,
                                                            const std::vector<double>& values, double tol,
                                                            const std::function<double(double)>& evaluate) {
  if (coords.size() != values.size() || coords.size() < 2) {
    throw std::invalid_argument("negativity_intervals: need matching samples");
  }
  if (!strictly_increasing(coords)) throw std::invalid_argument("negativity_intervals: coords must increase");
  if (!(tol > 0.0)) throw std::invalid_argument("negativity_intervals: tol must be positive");
  std::vector<NegativityInterval> out;
  const std::size_t n = coords.size();
  std::size_t i = 0;
  while (i < n) {
    if (!(values[i] < -tol)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double lowest = values[i];
    while (j + 1 < n && values[j + 1] < -tol) {
      ++j;
      lowest = std::min(lowest, values[j]);
    }
    NegativityInterval iv{axis, coords[i], coords[j], lowest};
    if (i > 0) iv.lo = detail::refine_crossing(evaluate, coords[i - 1], coords[i], -tol, tol / 10.0);
    if (j + 1 < n) iv.hi = detail::refine_crossing(evaluate, coords[j + 1], coords[j], -tol, tol / 10.0);
    out.push_back(iv);
    i = j + 1;
  }
  return out;
}

/// Samples-only variant: edges are refined on a natural cubic spline.
inline std::vector<NegativityInterval> negativity_intervals(Axis axis, const std::vector<double>& coords,
                                                            const std::vector<double>& values, double tol) {
  CubicSpline spline(coords, values);
  return negativity_intervals(axis, coords, values, tol, [&](double c) { return spline(c); });
}

/// Default negativity threshold 1e-9 / (pi hbar).
inline double default_negativity_tol(const OscillatorFrame& f) { return 1e-9 / (M_PI * f.hbar()); }

/// Samples W along the x axis (p = 0) or p axis (x = 0) and returns its
/// negativity intervals, with edges refined on the exact Wigner function.
inline std::vector<NegativityInterval> slice_negativity(const WignerEvaluator& eval, Axis axis,
                                                        const std::vector<double>& coords, double tol,
                                                        std::vector<double>* samples = nullptr) {
  auto at = [&](double c) { return axis == Axis::x ? eval({c, 0.0}) : eval({0.0, c}); };
  std::vector<double> values(coords.size());
  parallel_for(coords.size(), [&](std::size_t i) { values[i] = at(coords[i]); });
  auto out = negativity_intervals(axis, coords, values, tol, at);
  if (samples) *samples = std::move(values);
  return out;
}

}  // namespace wplab
