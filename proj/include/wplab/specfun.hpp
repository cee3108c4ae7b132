#pragma once

// Special functions and combinatorial coefficients shared by the closed-form
// moment formulas. Everything here is a pure function.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplab::specfun {

namespace detail {

using u128 = unsigned __int128;

// Largest n with n! representable in an unsigned 128-bit integer.
inline constexpr int kExactFactorialLimit = 34;

constexpr u128 exact_factorial(int n) {
  u128 r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<u128>(i);
  return r;
}

inline double to_double(u128 v) {
  // Split to keep the conversion correctly rounded for values above 2^64.
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return std::ldexp(static_cast<double>(hi), 64) + static_cast<double>(lo);
}

}  // namespace detail

/// n! as a double; exact integer arithmetic up to 34!, log-gamma beyond.
inline double factorial(int n) {
  if (n < 0) throw std::domain_error("factorial: negative argument");
  if (n <= detail::kExactFactorialLimit) return detail::to_double(detail::exact_factorial(n));
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0));
}

/// log(n!) for any n >= 0.
inline double log_factorial(int n) {
  if (n < 0) throw std::domain_error("log_factorial: negative argument");
  if (n <= detail::kExactFactorialLimit) return std::log(factorial(n));
  return std::lgamma(static_cast<double>(n) + 1.0);
}

/// Binomial coefficient C(n, k); zero outside 0 <= k <= n.
inline double binomial(int n, int k) {
  if (n < 0) throw std::domain_error("binomial: negative n");
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  // The multiplicative form stays exact in 128 bits while C(n, k) * n fits.
  if (n <= 120) {
    detail::u128 r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<detail::u128>(n - k + i) / static_cast<detail::u128>(i);
    return detail::to_double(r);
  }
  return std::round(std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k)));
}

/// |2j - 1|!! with the empty-product convention |-1|!! = 1.
inline double odd_double_factorial(int j) {
  if (j < 0) throw std::domain_error("odd_double_factorial: negative index");
  // 55!! is the last value below 2^128.
  if (j <= 28) {
    detail::u128 r = 1;
    for (int i = 3; i <= 2 * j - 1; i += 2) r *= static_cast<detail::u128>(i);
    return detail::to_double(r);
  }
  // (2j-1)!! = (2j)! / (2^j j!)
  return std::exp(std::lgamma(2.0 * j + 1.0) - j * std::log(2.0) - std::lgamma(j + 1.0));
}

/// Coefficient (m-s-1)! / (s! (m-2s)!) of the power series of T_m, i.e.
/// (1/s) C^{s-1}_{m-s-1}, with the removable s = 0 case equal to 1/m.
inline double cheb_series_coef(int m, int s) {
  if (m < 1) throw std::domain_error("cheb_series_coef: m must be positive");
  if (s < 0 || s > m / 2) {
    throw std::domain_error("cheb_series_coef: s=" + std::to_string(s) + " outside [0, " +
                            std::to_string(m / 2) + "]");
  }
  if (s == 0) return 1.0 / m;
  if (m - 1 <= detail::kExactFactorialLimit) {
    const auto num = detail::exact_factorial(m - s - 1);
    const auto den = detail::exact_factorial(s) * detail::exact_factorial(m - 2 * s);
    // num/den is generally not an integer; divide in floating point once.
    return detail::to_double(num) / detail::to_double(den);
  }
  return std::exp(log_factorial(m - s - 1) - log_factorial(s) - log_factorial(m - 2 * s));
}

/// Physicists' Hermite polynomial H_n(x).
inline double hermite(int n, double x) {
  if (n < 0) throw std::domain_error("hermite: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// H_n(0)^2: zero for odd n, ((2l)!/l!)^2 for n = 2l.
inline double hermite_sq_zero(int n) {
  if (n < 0) throw std::domain_error("hermite_sq_zero: negative degree");
  if (n % 2 != 0) return 0.0;
  const int l = n / 2;
  if (n <= detail::kExactFactorialLimit) {
    const double h = detail::to_double(detail::exact_factorial(n) / detail::exact_factorial(l));
    return h * h;
  }
  return std::exp(2.0 * (log_factorial(n) - log_factorial(l)));
}

/// Generalized Laguerre polynomial L_n^{(alpha)}(x), alpha >= 0.
inline double laguerre(int n, int alpha, double x) {
  if (n < 0) throw std::domain_error("laguerre: negative degree");
  if (alpha < 0) throw std::domain_error("laguerre: alpha must be non-negative");
  if (n == 0) return 1.0;
  const double a = alpha;
  double prev = 1.0;
  double cur = 1.0 + a - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Fills out[j] = L_j^{(alpha)}(x) for j = 0..out.size()-1.
inline void laguerre_sequence(int alpha, double x, std::vector<double>& out) {
  if (alpha < 0) throw std::domain_error("laguerre_sequence: alpha must be non-negative");
  if (out.empty()) return;
  const double a = alpha;
  out[0] = 1.0;
  if (out.size() == 1) return;
  out[1] = 1.0 + a - x;
  for (std::size_t k = 1; k + 1 < out.size(); ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = ((2.0 * kk + 1.0 + a - x) * out[k] - (kk + a) * out[k - 1]) / (kk + 1.0);
  }
}

/// Chebyshev polynomial of the first kind T_n(x).
inline double chebyshev_t(int n, double x) {
  if (n < 0) throw std::domain_error("chebyshev_t: negative degree");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = 2.0 * x * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Neumaier-compensated accumulator.
template <typename Real = double>
class CompensatedSum {
 public:
  void add(Real v) {
    const Real t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(Real v) {
    add(v);
    return *this;
  }
  Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0;
  Real comp_ = 0;
};

/// Sums terms in descending order of magnitude with compensation.
template <typename Real>
Real sorted_sum(std::vector<Real>& terms) {
  std::sort(terms.begin(), terms.end(), [](Real a, Real b) { return std::abs(a) > std::abs(b); });
  CompensatedSum<Real> acc;
  for (Real t : terms) acc.add(t);
  return acc.value();
}

}  // namespace wplab::specfun
