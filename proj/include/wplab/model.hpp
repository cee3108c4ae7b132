#pragma once

// Physical frame, polynomial potential and the truncated harmonic-oscillator
// basis eigensolver that produces stationary states and their density matrices.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mass, frequency and Planck constant of the reference oscillator, plus the
/// derived length and momentum scales used to nondimensionalize phase space.
class OscillatorFrame {
 public:
  OscillatorFrame() = default;
  OscillatorFrame(double mass, double omega, double hbar) : mass_(mass), omega_(omega), hbar_(hbar) {
    if (!(mass > 0.0) || !(omega > 0.0) || !(hbar > 0.0) || !std::isfinite(mass) || !std::isfinite(omega) ||
        !std::isfinite(hbar)) {
      throw std::invalid_argument("OscillatorFrame: m, omega and hbar must be positive and finite");
    }
  }

  static OscillatorFrame unit() { return {1.0, 1.0, 1.0}; }

  double mass() const { return mass_; }
  double omega() const { return omega_; }
  double hbar() const { return hbar_; }

  /// kappa = sqrt(m omega / hbar), inverse length.
  double kappa() const { return std::sqrt(mass_ * omega_ / hbar_); }
  /// sqrt(m hbar omega), the momentum scale.
  double pscale() const { return std::sqrt(mass_ * hbar_ * omega_); }
  /// Position width of the harmonic ground state, 1/kappa.
  double sigma_length() const { return 1.0 / kappa(); }

  double xbar(double x) const { return kappa() * x; }
  double pbar(double p) const { return p / pscale(); }

  bool operator==(const OscillatorFrame&) const = default;

 private:
  double mass_ = 1.0;
  double omega_ = 1.0;
  double hbar_ = 1.0;
};

/// U(x) = sum_n a_n x^n with a non-vanishing leading coefficient.
class PolynomialPotential {
 public:
  explicit PolynomialPotential(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
    if (coeffs_.size() < 2) throw std::invalid_argument("PolynomialPotential: degree must be at least 1");
    for (double a : coeffs_) {
      if (!std::isfinite(a)) throw std::invalid_argument("PolynomialPotential: non-finite coefficient");
    }
  }

  /// m omega^2 x^2 / 2 for the given frame.
  static PolynomialPotential harmonic(const OscillatorFrame& frame) {
    return PolynomialPotential({0.0, 0.0, 0.5 * frame.mass() * frame.omega() * frame.omega()});
  }

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(int n) const { return n >= 0 && n <= degree() ? coeffs_[static_cast<std::size_t>(n)] : 0.0; }

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

 private:
  std::vector<double> coeffs_;
};

/// First `size` harmonic-oscillator eigenfunctions of `frame`.
struct SpectralBasis {
  int size = 0;
  OscillatorFrame frame;

  SpectralBasis(int k, OscillatorFrame f) : size(k), frame(f) {
    if (k < 2) throw std::invalid_argument("SpectralBasis: size must be at least 2");
  }
};

struct EigenState {
  int index = 0;
  double energy = 0.0;
  Vector coeffs;
};

/// Real symmetric rho_{k,n} = c_k c_n.
struct DensityMatrix {
  Matrix rho;

  int size() const { return static_cast<int>(rho.rows()); }
  double operator()(int k, int n) const { return rho(k, n); }
};

/// Eigensolver failure; carries the achieved off-diagonal residual.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {

inline Matrix position_matrix(int size, double kappa) {
  Matrix x = Matrix::Zero(size, size);
  for (int n = 0; n + 1 < size; ++n) {
    const double v = std::sqrt((n + 1) / 2.0) / kappa;
    x(n, n + 1) = v;
    x(n + 1, n) = v;
  }
  return x;
}

}  // namespace detail

/// Matrix of x in the basis: <n|x|n+1> = sqrt((n+1)/2)/kappa.
inline Matrix build_position_matrix(const SpectralBasis& basis) {
  return detail::position_matrix(basis.size, basis.frame.kappa());
}

/// H = hbar omega (n + 1/2) - m omega^2 X^2 / 2 + sum_n a_n X^n. Powers of X
/// are formed in a basis enlarged by the potential degree and then cropped,
/// so the returned block carries no truncation error.
inline Matrix build_hamiltonian(const SpectralBasis& basis, const PolynomialPotential& potential) {
  const int k = basis.size;
  const int degree = potential.degree();
  if (k < degree + 2) {
    throw std::invalid_argument("build_hamiltonian: basis size " + std::to_string(k) +
                                " is too small for a degree-" + std::to_string(degree) + " potential");
  }
  const auto& f = basis.frame;
  const int work = k + std::max(degree, 2);
  const Matrix x = detail::position_matrix(work, f.kappa());

  Matrix v = Matrix::Zero(work, work);
  Matrix power = Matrix::Identity(work, work);
  Matrix x2;
  for (int n = 0; n <= degree; ++n) {
    if (n > 0) power = power * x;
    if (n == 2) x2 = power;
    v += potential.coeff(n) * power;
  }
  if (degree < 2) x2 = x * x;

  Matrix h = -0.5 * f.mass() * f.omega() * f.omega() * x2 + v;
  for (int n = 0; n < work; ++n) h(n, n) += f.hbar() * f.omega() * (n + 0.5);
  Matrix out = h.topLeftCorner(k, k);
  // Symmetrize away rounding from the products.
  return 0.5 * (out + out.transpose());
}

/// Lowest `count` eigenpairs of symmetric `h`, ascending. Each eigenvector is
/// signed so its largest-magnitude coefficient is positive; exact ties are
/// ordered by the index of that dominant coefficient.
inline std::vector<EigenState> solve_eigenstates(const Matrix& h, int count) {
  const int k = static_cast<int>(h.rows());
  if (h.cols() != k) throw std::invalid_argument("solve_eigenstates: matrix is not square");
  if (count < 0 || count > k) throw std::invalid_argument("solve_eigenstates: count out of range");
  const double norm = h.cwiseAbs().maxCoeff();
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, norm)) {
    throw std::invalid_argument("solve_eigenstates: matrix is not symmetric");
  }

  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const Matrix& vecs = solver.eigenvectors();
  const Vector& vals = solver.eigenvalues();
  const double residual = (h * vecs - vecs * vals.asDiagonal()).cwiseAbs().maxCoeff();
  if (solver.info() != Eigen::Success || !std::isfinite(residual) || residual > 1e-12 * std::max(1.0, norm) * k) {
    std::ostringstream msg;
    msg << "solve_eigenstates: eigensolver did not converge (residual " << residual << ")";
    throw SolverError(msg.str(), residual);
  }

  struct Entry {
    double energy;
    int dominant;
    int column;
  };
  std::vector<Entry> order;
  order.reserve(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    Eigen::Index dom = 0;
    vecs.col(j).cwiseAbs().maxCoeff(&dom);
    order.push_back({vals(j), static_cast<int>(dom), j});
  }
  std::stable_sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return a.dominant < b.dominant;
  });

  std::vector<EigenState> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int s = 0; s < count; ++s) {
    const auto& e = order[static_cast<std::size_t>(s)];
    Vector c = vecs.col(e.column);
    if (c(e.dominant) < 0.0) c = -c;
    c /= c.norm();
    out.push_back({s, e.energy, std::move(c)});
  }
  return out;
}

inline DensityMatrix density_matrix(const EigenState& state) {
  Matrix rho = state.coeffs * state.coeffs.transpose();
  // Bitwise symmetric storage.
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) rho(j, i) = rho(i, j);
  }
  return {std::move(rho)};
}

/// Harmonic-oscillator eigenfunction psi_n(x) of `frame`, by the normalized
/// three-term recurrence.
inline double oscillator_eigenfunction(const OscillatorFrame& frame, int n, double x) {
  const double y = frame.xbar(x);
  const double scale = std::sqrt(frame.kappa());
  double prev = scale * std::pow(M_PI, -0.25) * std::exp(-0.5 * y * y);
  if (n == 0) return prev;
  double cur = std::sqrt(2.0) * y * prev;
  for (int j = 1; j < n; ++j) {
    const double next = std::sqrt(2.0 / (j + 1)) * y * cur - std::sqrt(static_cast<double>(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Psi_s(x) = sum_k c_k psi_k(x).
inline double wavefunction(const OscillatorFrame& frame, const EigenState& state, double x) {
  const double y = frame.xbar(x);
  const double scale = std::sqrt(frame.kappa());
  double prev = scale * std::pow(M_PI, -0.25) * std::exp(-0.5 * y * y);
  double acc = state.coeffs(0) * prev;
  if (state.coeffs.size() == 1) return acc;
  double cur = std::sqrt(2.0) * y * prev;
  acc += state.coeffs(1) * cur;
  for (Eigen::Index j = 1; j + 1 < state.coeffs.size(); ++j) {
    const double jj = static_cast<double>(j);
    const double next = std::sqrt(2.0 / (jj + 1)) * y * cur - std::sqrt(jj / (jj + 1)) * prev;
    prev = cur;
    cur = next;
    acc += state.coeffs(j + 1) * cur;
  }
  return acc;
}

}  // namespace wplab
