#pragma once

// Closed-form conditional moments of the Weyl kernel:
//   I^l_{n,k}(x) = int p^{2l} w_{n,k}(x, p) dp
//   J^r_{n,k}(p) = Re int x^r w_{n,k}(x, p) dx
// and the Gaussian-Laguerre coefficients G_lambda^{2 beta} they depend on.

#include "model.hpp"
#include "specfun.hpp"

#include <quadmath.h>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace wplab {

/// Raised when an index combination would lose precision in the alternating sums.
class PrecisionLimitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Largest n + k accepted by the pointwise alternating-sum forms.
inline constexpr int kMaxDirectIndexSum = 40;

/// G_lambda^{2 beta} = int_0^inf p^{2 beta} e^{-p^2} L_lambda(2 p^2) dp.
/// Columns beta = 0 and beta = 1 come from closed forms; every other entry
/// from the recurrence G_l^{2b} = (b + l - 1/2) G_l^{2(b-1)} - l G_{l-1}^{2(b-1)}.
class GTable {
 public:
  static constexpr int kCap = 64;

  explicit GTable(int lambda_max = 16, int beta_max = 16, double perturbation = 0.0)
      : perturbation_(perturbation) {
    build(lambda_max, beta_max);
  }

  int lambda_max() const { return lambda_max_; }
  int beta_max() const { return beta_max_; }
  double perturbation() const { return perturbation_; }

  /// In-bounds lookup; throws std::out_of_range otherwise.
  double value(int lambda, int beta) const {
    if (lambda < 0 || beta < 0 || lambda > lambda_max_ || beta > beta_max_) {
      throw std::out_of_range("GTable: (" + std::to_string(lambda) + ", " + std::to_string(beta) +
                              ") outside the table");
    }
    return table_[idx(lambda, beta)] * (1.0 + perturbation_);
  }

  /// Grows the table so (lambda, beta) is in bounds; hard cap kCap.
  void ensure(int lambda, int beta) {
    if (lambda < 0 || beta < 0) throw std::out_of_range("GTable: negative index");
    if (lambda > kCap || beta > kCap) {
      throw std::out_of_range("GTable: request exceeds the cap of " + std::to_string(kCap));
    }
    if (lambda > lambda_max_ || beta > beta_max_) build(std::max(lambda, lambda_max_), std::max(beta, beta_max_));
  }

  /// Closed form of the beta = 0 column.
  static double base0(int lambda) {
    const double sign = lambda % 2 == 0 ? 1.0 : -1.0;
    return sign * std::sqrt(M_PI) / 2.0 * hermite_ratio(lambda);
  }

  /// Closed form of the beta = 1 column, including its inner H^2 sum.
  static double base1(int lambda) {
    const double sign = lambda % 2 == 0 ? 1.0 : -1.0;
    double inner = 0.5 * hermite_ratio(lambda);
    for (int r = 1; r <= lambda; ++r) inner += hermite_ratio(lambda - r);
    return sign * std::sqrt(M_PI) / 2.0 * inner;
  }

 private:
  // H_l^2(0) / (2^l l!), i.e. C(2j, j) / 4^j for l = 2j and 0 for odd l.
  static double hermite_ratio(int l) {
    if (l % 2 != 0) return 0.0;
    const int j = l / 2;
    return specfun::binomial(l, j) * std::ldexp(1.0, -l);
  }

  std::size_t idx(int lambda, int beta) const {
    return static_cast<std::size_t>(lambda) * static_cast<std::size_t>(beta_max_ + 1) +
           static_cast<std::size_t>(beta);
  }

  void build(int lambda_max, int beta_max) {
    if (lambda_max < 0 || beta_max < 1 || lambda_max > kCap || beta_max > kCap) {
      throw std::out_of_range("GTable: bounds must satisfy 0 <= lambda <= 64, 1 <= beta <= 64");
    }
    lambda_max_ = lambda_max;
    beta_max_ = beta_max;
    table_.assign(static_cast<std::size_t>(lambda_max + 1) * static_cast<std::size_t>(beta_max + 1), 0.0);
    for (int l = 0; l <= lambda_max; ++l) {
      table_[idx(l, 0)] = base0(l);
      table_[idx(l, 1)] = base1(l);
    }
    for (int b = 2; b <= beta_max; ++b) {
      for (int l = 0; l <= lambda_max; ++l) {
        const double prev_same = table_[idx(l, b - 1)];
        const double prev_lower = l > 0 ? table_[idx(l - 1, b - 1)] : 0.0;
        table_[idx(l, b)] = (b + l - 0.5) * prev_same - l * prev_lower;
      }
    }
  }

  int lambda_max_ = 0;
  int beta_max_ = 0;
  double perturbation_ = 0.0;
  std::vector<double> table_;
};

/// G_lambda^{2 beta}, extending the table when needed.
inline double g_coefficient(GTable& table, int lambda, int beta) {
  table.ensure(lambda, beta);
  return table.value(lambda, beta);
}

namespace detail {

inline void check_indices(int n, int k, int power, const char* who) {
  if (n < 0 || k < 0 || power < 0) throw std::domain_error(std::string(who) + ": negative index");
}

inline void check_direct_limit(int n, int k, const char* who) {
  if (n + k > kMaxDirectIndexSum) {
    throw PrecisionLimitError(std::string(who) + ": n + k = " + std::to_string(n + k) + " exceeds " +
                              std::to_string(kMaxDirectIndexSum));
  }
}

inline double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

// Diagonal branch shared by both theorems:
// sum_l sum_s (-1)^{l+n}/l! 2^{l-ell-s} C(n,l) C(l,s) |2(ell+s)-1|!! xb^{2(l-s)}.
inline double diagonal_I_sum(int n, int ell, double xb) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>((n + 1) * (n + 2) / 2));
  const double x2 = xb * xb;
  for (int l = 0; l <= n; ++l) {
    const double sign = (l + n) % 2 == 0 ? 1.0 : -1.0;
    const double outer = sign / specfun::factorial(l) * specfun::binomial(n, l);
    for (int s = 0; s <= l; ++s) {
      terms.push_back(outer * std::ldexp(1.0, l - ell - s) * specfun::binomial(l, s) *
                      specfun::odd_double_factorial(ell + s) * ipow(x2, l - s));
    }
  }
  return specfun::sorted_sum(terms);
}

}  // namespace detail

/// I^l_{n,k}(x) from the explicit triple sum (Chebyshev expansion of the
/// angular factor). Refuses n + k > 40.
inline double moment_I_direct(const OscillatorFrame& frame, int n, int k, int ell, double x) {
  detail::check_indices(n, k, ell, "moment_I_direct");
  detail::check_direct_limit(n, k, "moment_I_direct");
  const double xb = frame.xbar(x);
  const double scale = std::pow(frame.pscale(), 2 * ell + 1) / (frame.hbar() * std::sqrt(M_PI));
  const double gauss = std::exp(-xb * xb);
  if (n == k) return scale * detail::diagonal_I_sum(n, ell, xb) * gauss;

  const int lo = std::min(n, k);
  const int hi = std::max(n, k);
  const int m = hi - lo;
  const double pref =
      std::sqrt(std::ldexp(1.0, 3 * hi - lo) / (specfun::factorial(n) * specfun::factorial(k))) * m;
  std::vector<double> terms;
  for (int l = 0; l <= lo; ++l) {
    const double cl = specfun::factorial(l) * specfun::binomial(k, l) * specfun::binomial(n, l);
    for (int s = 0; s <= m / 2; ++s) {
      const double sign = (l + s) % 2 == 0 ? 1.0 : -1.0;
      const double cs = sign * cl * specfun::cheb_series_coef(m, s);
      const int big_m = lo - l + s;
      for (int mu = 0; mu <= big_m; ++mu) {
        terms.push_back(cs * specfun::binomial(big_m, mu) * specfun::odd_double_factorial(ell + mu) *
                        std::ldexp(1.0, -(l + 2 * s + ell + mu + 1)) * detail::ipow(xb, n + k - 2 * (l + mu)));
      }
    }
  }
  return scale * pref * specfun::sorted_sum(terms) * gauss;
}

/// I^l_{n,k}(x) through generalized Laguerre polynomials and the G table.
inline double moment_I_laguerre(const OscillatorFrame& frame, GTable& table, int n, int k, int ell, double x) {
  detail::check_indices(n, k, ell, "moment_I_laguerre");
  const double xb = frame.xbar(x);
  const double gauss = std::exp(-xb * xb);
  const double scale = std::pow(frame.pscale(), 2 * ell + 1);
  if (n == k) {
    // A_{n,n} sqrt(pi) = (-1)^n / (hbar sqrt(pi)); the (-1)^n sits inside the sum.
    return scale / (frame.hbar() * std::sqrt(M_PI)) * detail::diagonal_I_sum(n, ell, xb) * gauss;
  }
  const int lo = std::min(n, k);
  const int hi = std::max(n, k);
  const int m = hi - lo;
  table.ensure(lo, ell + m / 2);
  const double sign_a = lo % 2 == 0 ? 1.0 : -1.0;
  const double a_nk = sign_a / (M_PI * frame.hbar()) *
                      std::exp(0.5 * (m * std::log(2.0) + specfun::log_factorial(lo) - specfun::log_factorial(hi)));
  const double y = 2.0 * xb * xb;
  std::vector<double> terms;
  for (int l = 0; l <= lo; ++l) {
    const double lag = specfun::laguerre(lo - l, m - 1, y);
    for (int s = 0; s <= m / 2; ++s) {
      const double cs = (s % 2 == 0 ? 1.0 : -1.0) * std::ldexp(1.0, -2 * s) * specfun::cheb_series_coef(m, s);
      for (int mu = 0; mu <= s; ++mu) {
        terms.push_back(cs * specfun::binomial(s, mu) * table.value(l, ell + mu) * detail::ipow(xb, m - 2 * mu) *
                        lag);
      }
    }
  }
  return a_nk * scale * std::ldexp(1.0, m) * m * specfun::sorted_sum(terms) * gauss;
}

/// Real part of J^r_{n,k}(p). The imaginary part cancels only inside sums
/// with a symmetric density matrix, so this is meaningful in such sums.
/// Exactly zero when |n - k| + r is odd. Refuses n + k > 40.
inline double moment_J(const OscillatorFrame& frame, int n, int k, int r, double p) {
  detail::check_indices(n, k, r, "moment_J");
  const int lo = std::min(n, k);
  const int hi = std::max(n, k);
  const int m = hi - lo;
  if ((m + r) % 2 != 0) return 0.0;
  detail::check_direct_limit(n, k, "moment_J");
  const double pb = frame.pbar(p);
  const double p2 = pb * pb;
  const double gauss = std::exp(-p2);
  const double kappa = frame.kappa();
  std::vector<double> terms;

  if (n == k) {
    const int ell = r / 2;
    const double pref =
        std::ldexp(1.0, n) * specfun::factorial(n) / (std::pow(kappa, 2 * ell + 1) * frame.hbar() * std::sqrt(M_PI));
    for (int l = 0; l <= n; ++l) {
      const double fl = specfun::factorial(n - l);
      const double outer = (l % 2 == 0 ? 1.0 : -1.0) / (specfun::factorial(l) * fl * fl);
      for (int mu = 0; mu <= n - l; ++mu) {
        terms.push_back(outer * specfun::odd_double_factorial(ell + mu) * std::ldexp(1.0, -(l + ell + mu)) *
                        specfun::binomial(n - l, mu) * detail::ipow(p2, n - l - mu));
      }
    }
    return pref * specfun::sorted_sum(terms) * gauss;
  }

  const int nu = (m + r) / 2;
  const double pref = m / (2.0 * frame.hbar() * std::pow(kappa, r + 1)) *
                      std::sqrt(std::ldexp(1.0, 3 * hi - lo) /
                                (M_PI * specfun::factorial(n) * specfun::factorial(k)));
  for (int l = 0; l <= lo; ++l) {
    const double cl = specfun::factorial(l) * specfun::binomial(k, l) * specfun::binomial(n, l);
    for (int s = 0; s <= m / 2; ++s) {
      const double cs = ((l + s) % 2 == 0 ? 1.0 : -1.0) * cl * specfun::cheb_series_coef(m, s);
      const int big_m = lo + s - l;
      for (int mu = 0; mu <= big_m; ++mu) {
        const int gexp = nu + mu - s;
        if (gexp < 0) throw std::logic_error("moment_J: negative Gaussian moment index");
        terms.push_back(cs * std::ldexp(1.0, -(l + s + mu + nu)) * specfun::odd_double_factorial(gexp) *
                        specfun::binomial(big_m, mu) * detail::ipow(p2, big_m - mu));
      }
    }
  }
  return pref * specfun::sorted_sum(terms) * gauss;
}

/// Density-weighted moment sums
///   Q_l(x) = sum_{n,k} rho_{k,n} I^l_{n,k}(x),  R_r(p) = sum_{n,k} rho_{k,n} J^r_{n,k}(p)
/// over every index pair of a basis-size density matrix. The Laguerre form of I
/// and the closed form of J are expanded once into monomial coefficients of
/// e^{xb^2} Q_l(xb) and e^{pb^2} R_r(pb) in 113-bit arithmetic; evaluation is a
/// Horner pass. Instead of the pointwise index limit, every coefficient carries
/// the sum of the magnitudes that cancelled into it; an evaluation whose
/// rounding bound exceeds kMaxError of the natural scale throws
/// PrecisionLimitError. Eigenstates with decaying coefficients stay far below it.
class MomentSums {
 public:
  using Quad = __float128;

  MomentSums(const OscillatorFrame& frame, const DensityMatrix& rho, int max_r = 4, int max_ell = 1)
      : frame_(frame), max_r_(max_r), max_ell_(max_ell) {
    size_ = rho.size();
    if (rho.rho.cols() != size_ || size_ < 1) throw std::invalid_argument("MomentSums: density matrix not square");
    if (max_r < 0 || max_ell < 0) throw std::invalid_argument("MomentSums: negative moment order");
    const int top = 2 * size_ + max_r + 2 * max_ell + 8;
    fact_.resize(static_cast<std::size_t>(top) + 1);
    fact_[0] = 1;
    for (int i = 1; i <= top; ++i) fact_[u(i)] = fact_[u(i - 1)] * i;
    odd_df_.resize(static_cast<std::size_t>(top) + 1);
    odd_df_[0] = 1;
    for (int j = 1; j <= top; ++j) odd_df_[u(j)] = odd_df_[u(j - 1)] * (2 * j - 1);

    build_g_table();
    qpoly_.resize(static_cast<std::size_t>(max_ell) + 1);
    qabs_.resize(qpoly_.size());
    for (int ell = 0; ell <= max_ell; ++ell) build_q(rho.rho, ell);
    rpoly_.resize(static_cast<std::size_t>(max_r) + 1);
    rabs_.resize(rpoly_.size());
    for (int r = 0; r <= max_r; ++r) build_r(rho.rho, r);
  }

  /// Largest accepted rounding bound, relative to pscale^{2l+1}/hbar or 1/(hbar kappa^{r+1}).
  static constexpr double kMaxError = 1e-13;

  int size() const { return size_; }
  int max_r() const { return max_r_; }
  int max_ell() const { return max_ell_; }

  /// sum rho_{k,n} I^l_{n,k}(x).
  double sum_I(int ell, double x) const {
    if (ell < 0 || ell > max_ell_) throw std::out_of_range("MomentSums::sum_I: ell out of range");
    const double xb = frame_.xbar(x);
    const auto& c = qpoly_[u(ell)];
    Quad acc = 0;
    const Quad q = xb;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * q + *it;
    check_bound(qabs_[u(ell)], std::abs(xb), xb * xb, "sum_I");
    const double scale = std::pow(frame_.pscale(), 2 * ell + 1) / frame_.hbar();
    return scale * static_cast<double>(acc * static_cast<Quad>(std::exp(-xb * xb)));
  }

  /// Rounding bound of sum_I in units of pscale^{2l+1}/hbar.
  double bound_I(int ell, double x) const {
    if (ell < 0 || ell > max_ell_) throw std::out_of_range("MomentSums::bound_I: ell out of range");
    const double xb = frame_.xbar(x);
    return bound(qabs_[u(ell)], std::abs(xb), xb * xb);
  }

  /// Rounding bound of sum_J in units of 1/(hbar kappa^{r+1}).
  double bound_J(int r, double p) const {
    if (r < 0 || r > max_r_) throw std::out_of_range("MomentSums::bound_J: r out of range");
    const double pb = frame_.pbar(p);
    return bound(rabs_[u(r)], pb * pb, pb * pb);
  }

  /// sum rho_{k,n} J^r_{n,k}(p).
  double sum_J(int r, double p) const {
    if (r < 0 || r > max_r_) throw std::out_of_range("MomentSums::sum_J: r out of range");
    const double pb = frame_.pbar(p);
    const auto& c = rpoly_[u(r)];
    Quad acc = 0;
    const Quad q = static_cast<Quad>(pb) * static_cast<Quad>(pb);
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * q + *it;
    check_bound(rabs_[u(r)], pb * pb, pb * pb, "sum_J");
    const double scale = 1.0 / (frame_.hbar() * std::pow(frame_.kappa(), r + 1));
    return scale * static_cast<double>(acc * static_cast<Quad>(std::exp(-pb * pb)));
  }

 private:
  static std::size_t u(int i) { return static_cast<std::size_t>(i); }
  static Quad mag(Quad v) { return fabsq(v); }

  // eps_113 (stages + Horner length) sum |c_j| t^j e^{-g}; t is |xb| or pb^2.
  static double bound(const std::vector<double>& a, double t, double g) {
    double acc = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * t + *it;
    return std::ldexp(1.0, -112) * (8.0 + 2.0 * static_cast<double>(a.size())) * acc * std::exp(-g);
  }
  static void check_bound(const std::vector<double>& a, double t, double g, const char* who) {
    const double b = bound(a, t, g);
    if (!(b <= kMaxError)) {
      throw PrecisionLimitError(std::string("MomentSums::") + who + ": rounding bound " + std::to_string(b) +
                                " exceeds the accepted error; reduce the weight on high basis indices");
    }
  }
  static std::vector<double> to_double(const std::vector<Quad>& v) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(v[i]);
    return out;
  }

  Quad binom(int n, int k) const {
    if (k < 0 || k > n) return 0;
    return fact_[u(n)] / (fact_[u(k)] * fact_[u(n - k)]);
  }
  Quad cheb(int m, int s) const {
    if (s == 0) return Quad(1) / m;
    return fact_[u(m - s - 1)] / (fact_[u(s)] * fact_[u(m - 2 * s)]);
  }
  static Quad pow2(int e) { return ldexpq(Quad(1), e); }
  std::size_t gidx(int l, int b) const { return u(l) * u(g_beta_ + 1) + u(b); }

  void build_g_table() {
    g_lambda_ = size_;
    g_beta_ = max_ell_ + size_ / 2 + 2;
    g_.assign(u(g_lambda_ + 1) * u(g_beta_ + 1), 0);
    const Quad sqrt_pi = sqrtq(M_PIq);
    // H_l^2(0) / (2^l l!) = C(2j, j) / 4^j for l = 2j.
    auto ratio = [&](int l) -> Quad { return l % 2 != 0 ? Quad(0) : binom(l, l / 2) * pow2(-l); };
    for (int l = 0; l <= g_lambda_; ++l) {
      const Quad sign = l % 2 == 0 ? 1 : -1;
      g_[gidx(l, 0)] = sign * sqrt_pi / 2 * ratio(l);
      Quad inner = ratio(l) / 2;
      for (int r = 1; r <= l; ++r) inner += ratio(l - r);
      g_[gidx(l, 1)] = sign * sqrt_pi / 2 * inner;
    }
    for (int b = 2; b <= g_beta_; ++b) {
      for (int l = 0; l <= g_lambda_; ++l) {
        g_[gidx(l, b)] = (b + l - Quad(0.5)) * g_[gidx(l, b - 1)] - (l > 0 ? l * g_[gidx(l - 1, b - 1)] : Quad(0));
      }
    }
  }

  // Coefficients of e^{xb^2} Q_l in powers of xb, without the p-scale and hbar.
  void build_q(const Matrix& rho, int ell) {
    const int deg = 2 * (size_ - 1);
    std::vector<Quad> c(u(deg) + 1, 0), ca(u(deg) + 1, 0);
    const Quad inv_sqrt_pi = 1 / sqrtq(M_PIq);

    // Diagonal: sum_l sum_s (-1)^{l+n}/l! 2^{l-ell-s} C(n,l) C(l,s) |2(ell+s)-1|!! xb^{2(l-s)}.
    for (int n = 0; n < size_; ++n) {
      const Quad w = rho(n, n);
      if (w == 0) continue;
      for (int l = 0; l <= n; ++l) {
        const Quad outer = ((l + n) % 2 == 0 ? 1 : -1) * w * binom(n, l) / fact_[u(l)] * inv_sqrt_pi;
        for (int s = 0; s <= l; ++s) {
          const Quad t = outer * pow2(l - ell - s) * binom(l, s) * odd_df_[u(ell + s)];
          c[u(2 * (l - s))] += t;
          ca[u(2 * (l - s))] += mag(t);
        }
      }
    }

    // Off-diagonal pairs (lo, lo+m), counted twice.
    std::vector<Quad> beta, beta_abs;
    std::vector<Quad> v, v_abs;
    for (int m = 1; m < size_; ++m) {
      const int count = size_ - m;
      // beta_mu = sum_{s >= mu} (-1)^s 4^{-s} c(m,s) C(s,mu)
      beta.assign(u(m / 2) + 1, 0);
      beta_abs.assign(u(m / 2) + 1, 0);
      for (int mu = 0; mu <= m / 2; ++mu) {
        for (int s = mu; s <= m / 2; ++s) {
          const Quad t = pow2(-2 * s) * cheb(m, s) * binom(s, mu);
          beta[u(mu)] += s % 2 == 0 ? t : -t;
          beta_abs[u(mu)] += t;
        }
      }
      for (int l = 0; l < count; ++l) {
        // V(y) = sum_{lo >= l} 2 w A 2^m m L^{(m-1)}_{lo-l}(y), y = 2 xb^2, as powers of xb^2.
        v.assign(u(count - l), 0);
        v_abs.assign(u(count - l), 0);
        for (int lo = l; lo < count; ++lo) {
          const Quad w = rho(lo, lo + m);
          if (w == 0) continue;
          const Quad a = (lo % 2 == 0 ? 1 : -1) / M_PIq * sqrtq(pow2(m) * fact_[u(lo)] / fact_[u(lo + m)]);
          const Quad front = 2 * w * a * pow2(m) * m;
          const int j = lo - l;
          for (int i = 0; i <= j; ++i) {
            const Quad t = front * binom(j + m - 1, j - i) / fact_[u(i)] * pow2(i);
            v[u(i)] += i % 2 == 0 ? t : -t;
            v_abs[u(i)] += mag(t);
          }
        }
        for (int mu = 0; mu <= m / 2; ++mu) {
          const Quad bg = beta[u(mu)] * g_[gidx(l, ell + mu)];
          if (bg == 0) continue;
          const Quad bg_abs = beta_abs[u(mu)] * mag(g_[gidx(l, ell + mu)]);
          for (std::size_t i = 0; i < v.size(); ++i) {
            c[2 * i + u(m - 2 * mu)] += v[i] * bg;
            ca[2 * i + u(m - 2 * mu)] += v_abs[i] * bg_abs;
          }
        }
      }
    }
    qpoly_[u(ell)] = std::move(c);
    qabs_[u(ell)] = to_double(ca);
  }

  // Coefficients of e^{pb^2} R_r in powers of pb^2, without hbar kappa^{r+1}.
  void build_r(const Matrix& rho, int r) {
    const int top_m = size_ + size_ / 2 + 1;
    const int top_t = (size_ + r) / 2 + 1;
    // Y[M][t] weights F_{M,t} = sum_mu C(M,mu) |2(t+mu)-1|!! 2^{-(mu+t)} pb^{2(M-mu)}.
    std::vector<Quad> y(u(top_m + 1) * u(top_t + 1), 0), ya(y.size(), 0);
    auto yidx = [&](int big_m, int t) { return u(big_m) * u(top_t + 1) + u(t); };
    const Quad inv_sqrt_pi = 1 / sqrtq(M_PIq);

    if (r % 2 == 0) {
      const int ell = r / 2;
      for (int n = 0; n < size_; ++n) {
        const Quad w = rho(n, n);
        if (w == 0) continue;
        for (int l = 0; l <= n; ++l) {
          const Quad coef = (l % 2 == 0 ? 1 : -1) * w * pow2(n - l) * fact_[u(n)] /
                            (fact_[u(l)] * fact_[u(n - l)] * fact_[u(n - l)]);
          y[yidx(n - l, ell)] += coef * inv_sqrt_pi;
          ya[yidx(n - l, ell)] += mag(coef * inv_sqrt_pi);
        }
      }
    }
    for (int m = 1; m < size_; ++m) {
      if ((m + r) % 2 != 0) continue;
      const int nu = (m + r) / 2;
      for (int lo = 0; lo + m < size_; ++lo) {
        const Quad w = rho(lo, lo + m);
        if (w == 0) continue;
        const int hi = lo + m;
        const Quad pref = w * m * sqrtq(pow2(3 * hi - lo) / (fact_[u(lo)] * fact_[u(hi)])) * inv_sqrt_pi;
        for (int l = 0; l <= lo; ++l) {
          const Quad cl = pref * fact_[u(l)] * binom(lo, l) * binom(hi, l);
          for (int s = 0; s <= m / 2; ++s) {
            const Quad sign = (l + s) % 2 == 0 ? 1 : -1;
            const Quad t = cl * pow2(-(l + 2 * s)) * cheb(m, s);
            y[yidx(lo + s - l, nu - s)] += sign * t;
            ya[yidx(lo + s - l, nu - s)] += mag(t);
          }
        }
      }
    }
    std::vector<Quad> c(u(top_m) + 1, 0), ca(c.size(), 0);
    for (int big_m = 0; big_m <= top_m; ++big_m) {
      for (int t = 0; t <= top_t; ++t) {
        const Quad yv = y[yidx(big_m, t)];
        if (yv == 0) continue;
        const Quad ya_v = ya[yidx(big_m, t)];
        for (int mu = 0; mu <= big_m; ++mu) {
          const Quad w = binom(big_m, mu) * odd_df_[u(t + mu)] * pow2(-(mu + t));
          c[u(big_m - mu)] += yv * w;
          ca[u(big_m - mu)] += ya_v * w;
        }
      }
    }
    while (c.size() > 1 && c.back() == 0) {
      c.pop_back();
      ca.pop_back();
    }
    rpoly_[u(r)] = std::move(c);
    rabs_[u(r)] = to_double(ca);
  }

  OscillatorFrame frame_;
  int size_ = 0;
  int max_r_ = 4;
  int max_ell_ = 1;
  std::vector<Quad> fact_;
  std::vector<Quad> odd_df_;
  int g_lambda_ = 0;
  int g_beta_ = 0;
  std::vector<Quad> g_;
  std::vector<std::vector<Quad>> qpoly_;
  std::vector<std::vector<double>> qabs_;
  std::vector<std::vector<Quad>> rpoly_;
  std::vector<std::vector<double>> rabs_;
};

}  // namespace wplab
