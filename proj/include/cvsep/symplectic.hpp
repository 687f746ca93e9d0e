#pragma once

// Covariance-matrix and symplectic algebra for one- and two-mode states.
//
// Convention: gamma_ij = <r_i r_j + r_j r_i> - 2 d_i d_j with d = 0, so the
// vacuum covariance matrix is the identity (<x^2>_vac = 1/2).

#include "cvsep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <utility>

namespace cvsep {

/// Physicality tolerance on the smallest symplectic eigenvalue.
inline constexpr double kPhysicalityTol = 1e-9;

class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Matrix m) {
    if (m.rows() != m.cols() || (m.rows() != 2 && m.rows() != 4))
      throw InvalidArgument("covariance matrix must be 2x2 or 4x4, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    if (!m.allFinite()) throw InvalidArgument("covariance matrix has non-finite entries");
    if (!is_symmetric(m, 1e-12)) throw InvalidArgument("covariance matrix is not symmetric");
    m_ = symmetrized(m);
  }

  static CovarianceMatrix identity(int modes) {
    return CovarianceMatrix(Matrix::Identity(2 * modes, 2 * modes));
  }
  static CovarianceMatrix thermal(int modes, double a) {
    return CovarianceMatrix(a * Matrix::Identity(2 * modes, 2 * modes));
  }

  const Matrix& matrix() const { return m_; }
  int modes() const { return static_cast<int>(m_.rows() / 2); }
  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }

  /// 2x2 block of mode k.
  Matrix mode_block(int k) const { return m_.block(2 * k, 2 * k, 2, 2); }

 private:
  Matrix m_;
};

class SymplecticMatrix {
 public:
  explicit SymplecticMatrix(Matrix s, double tol = 1e-10) {
    if (s.rows() != s.cols() || (s.rows() != 2 && s.rows() != 4))
      throw InvalidArgument("symplectic matrix must be 2x2 or 4x4");
    const int modes = static_cast<int>(s.rows() / 2);
    const Matrix omega = symplectic_form(modes);
    const double scale = std::max(1.0, max_abs(s) * max_abs(s));
    const double err = max_abs(s * omega * s.transpose() - omega);
    if (err > tol * scale)
      throw NumericError("matrix is not symplectic (|S W S^T - W| = " + std::to_string(err) + ")");
    s_ = std::move(s);
  }

  static SymplecticMatrix identity(int modes) {
    return SymplecticMatrix(Matrix::Identity(2 * modes, 2 * modes));
  }

  const Matrix& matrix() const { return s_; }
  int modes() const { return static_cast<int>(s_.rows() / 2); }

  SymplecticMatrix operator*(const SymplecticMatrix& other) const {
    return SymplecticMatrix(s_ * other.s_, 1e-9);
  }
  SymplecticMatrix inverse() const {
    // S^{-1} = W^T S^T W for symplectic S.
    const Matrix omega = symplectic_form(modes());
    return SymplecticMatrix(omega.transpose() * s_.transpose() * omega, 1e-9);
  }

  /// Congruence S gamma S^T.
  CovarianceMatrix act(const CovarianceMatrix& gamma) const {
    if (gamma.dim() != s_.rows()) throw InvalidArgument("dimension mismatch in symplectic action");
    return CovarianceMatrix(symmetrized(s_ * gamma.matrix() * s_.transpose()));
  }

 private:
  Matrix s_;
};

/// Parameters of the Fock-diagonal-input / two-mode-squeezer / additive-noise circuit.
class CircuitParams {
 public:
  CircuitParams(double a, double lambda, double eta, double mu)
      : a_(a), lambda_(lambda), eta_(eta), mu_(mu) {
    if (!std::isfinite(a) || a < 1.0) throw InvalidArgument("circuit parameter a must be >= 1");
    if (!std::isfinite(lambda) || lambda < 0.0 || lambda >= 1.0)
      throw InvalidArgument("circuit parameter lambda must lie in [0, 1)");
    if (!std::isfinite(eta) || eta < 0.0) throw InvalidArgument("noise eta must be >= 0");
    if (!std::isfinite(mu) || mu < 0.0) throw InvalidArgument("noise mu must be >= 0");
  }

  double a() const { return a_; }
  double lambda() const { return lambda_; }
  double eta() const { return eta_; }
  double mu() const { return mu_; }

  CircuitParams with_a(double v) const { return {v, lambda_, eta_, mu_}; }
  CircuitParams with_lambda(double v) const { return {a_, v, eta_, mu_}; }
  CircuitParams with_eta(double v) const { return {a_, lambda_, v, mu_}; }
  CircuitParams with_mu(double v) const { return {a_, lambda_, eta_, v}; }

 private:
  double a_, lambda_, eta_, mu_;
};

struct SymplecticSpectrum {
  double nu_plus;
  double nu_minus;
};

struct DuanResult {
  double delta;  ///< EPR variance
  double bound;  ///< (alpha^2 + 1/alpha^2) / 2
  double alpha;

  bool violated() const { return delta < bound; }
};

struct WilliamsonForm {
  SymplecticMatrix S;  ///< S gamma S^T = diag(nu_plus 1, nu_minus 1)
  double nu_plus;
  double nu_minus;
  double residual;     ///< max-norm reconstruction error
};

// ---------------------------------------------------------------------------

inline CovarianceMatrix circuit_covariance(const CircuitParams& p) {
  const double a = p.a(), l = p.lambda();
  const double d = 1.0 - l * l;
  const double n1 = (a + l * l) / d + p.eta();
  const double n2 = (a * l * l + 1.0) / d + p.mu();
  const double c = (a + 1.0) * l / d;
  Matrix g = Matrix::Zero(4, 4);
  g(0, 0) = g(1, 1) = n1;
  g(2, 2) = g(3, 3) = n2;
  g(0, 2) = g(2, 0) = c;
  g(1, 3) = g(3, 1) = -c;
  return CovarianceMatrix(g);
}

/// Mirror reflection p2 -> -p2 (Lambda = diag(1, 1, 1, -1)).
inline Matrix reflection_p2() {
  Matrix lam = Matrix::Identity(4, 4);
  lam(3, 3) = -1.0;
  return lam;
}

inline CovarianceMatrix partial_transpose(const CovarianceMatrix& gamma) {
  if (gamma.dim() != 4) throw InvalidArgument("partial transpose requires a two-mode (4x4) matrix");
  Matrix g = gamma.matrix();
  g.row(3) *= -1.0;
  g.col(3) *= -1.0;
  return CovarianceMatrix(g);
}

namespace detail {

inline void require_positive_definite(const CovarianceMatrix& gamma) {
  if (!is_positive_definite(gamma.matrix()))
    throw InvalidArgument("covariance matrix is not positive definite");
}

}  // namespace detail

/// Symplectic eigenvalues, largest first: moduli of the eigenvalues of i W gamma.
inline Vector symplectic_eigenvalues(const CovarianceMatrix& gamma) {
  detail::require_positive_definite(gamma);
  const int n = gamma.dim();
  const Matrix root = spd_power(gamma.matrix(), 0.5);
  // i * gamma^{1/2} W gamma^{1/2} is Hermitian and similar to i W gamma.
  const Matrix a = root * symplectic_form(gamma.modes()) * root;
  const Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  Vector ev = es.eigenvalues();  // ascending: -nu_max ... nu_max
  Vector nu(n / 2);
  for (int k = 0; k < n / 2; ++k) nu(k) = ev(n - 1 - k);
  return nu;
}

inline SymplecticSpectrum symplectic_spectrum(const CovarianceMatrix& gamma) {
  if (gamma.dim() != 4) throw InvalidArgument("symplectic_spectrum expects a 4x4 matrix");
  const Vector nu = symplectic_eigenvalues(gamma);
  return {nu(0), nu(1)};
}

/// Closed-form symplectic eigenvalues of the partially transposed circuit matrix.
inline SymplecticSpectrum nu_pm_closed_form(const CircuitParams& p) {
  const double a = p.a(), l = p.lambda(), eta = p.eta(), mu = p.mu();
  const double d = 1.0 - l * l;
  const double base = (a + 1.0) * (1.0 + l * l) / d + eta + mu;
  const double s = a - 1.0 + eta - mu;
  const double root = std::sqrt(s * s + 4.0 * (a + 1.0) * (a + 1.0) * l * l / (d * d));
  return {0.5 * (base + root), 0.5 * (base - root)};
}

inline bool is_physical(const CovarianceMatrix& gamma) {
  if (!is_positive_definite(gamma.matrix())) return false;
  const Vector nu = symplectic_eigenvalues(gamma);
  return nu.minCoeff() >= 1.0 - kPhysicalityTol;
}

/// Williamson normal form of a two-mode covariance matrix, nu_plus block first.
///
/// Built from the real canonical form of B = gamma^{-1/2} W gamma^{-1/2}: if O brings
/// B to blocks [[0, 1/nu], [-1/nu, 0]], then S = D^{1/2} O^T gamma^{-1/2}.
/// Degenerate spectra use the polar choice S = (gamma/nu)^{-1/2}.
inline WilliamsonForm williamson(const CovarianceMatrix& gamma) {
  if (gamma.dim() != 4) throw InvalidArgument("williamson expects a 4x4 matrix");
  detail::require_positive_definite(gamma);
  using cd = std::complex<double>;
  const Matrix& g = gamma.matrix();
  const Matrix inv_root = spd_power(g, -0.5);
  const Matrix b = inv_root * symplectic_form(2) * inv_root;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cd(0.0, 1.0) * b.cast<cd>());
  if (es.info() != Eigen::Success) throw NumericError("williamson: eigen-decomposition failed");
  // Eigenvalues ascending: -k_max, -k_min, k_min, k_max with k = 1/nu.
  const double k_small = es.eigenvalues()(2);
  const double k_large = es.eigenvalues()(3);
  const double nu_plus = 1.0 / k_small;
  const double nu_minus = 1.0 / k_large;

  Matrix s;
  if (std::abs(nu_plus - nu_minus) <= 1e-10 * nu_plus) {
    const double nu = 0.5 * (nu_plus + nu_minus);
    s = spd_power(g / nu, -0.5);
  } else {
    Matrix o(4, 4);
    Vector d(4);
    for (int slot = 0; slot < 2; ++slot) {
      const int idx = 2 + slot;  // k_small (nu_plus) first
      const Eigen::VectorXcd w = std::sqrt(2.0) * es.eigenvectors().col(idx);
      // B a = k b, B b = -k a for w = a + i b; column pair (b, a) gives +k upper-right.
      o.col(2 * slot) = w.imag();
      o.col(2 * slot + 1) = w.real();
      d(2 * slot) = d(2 * slot + 1) = 1.0 / es.eigenvalues()(idx);
    }
    s = d.cwiseSqrt().asDiagonal() * o.transpose() * inv_root;
  }
  Matrix target = Matrix::Zero(4, 4);
  target.diagonal() << nu_plus, nu_plus, nu_minus, nu_minus;
  const double residual = max_abs(s * g * s.transpose() - target);
  if (residual > 1e-8 * std::max(1.0, nu_plus))
    throw NumericError("williamson: reconstruction residual " + std::to_string(residual));
  return {SymplecticMatrix(s, 1e-9), nu_plus, nu_minus, residual};
}

inline SymplecticMatrix tms_symplectic(double lambda) {
  if (!std::isfinite(lambda) || std::abs(lambda) >= 1.0)
    throw InvalidArgument("two-mode squeezer requires |lambda| < 1");
  const double f = 1.0 / std::sqrt(1.0 - lambda * lambda);
  Matrix s = Matrix::Identity(4, 4);
  s(0, 2) = s(2, 0) = lambda;
  s(1, 3) = s(3, 1) = -lambda;
  return SymplecticMatrix(f * s);
}

/// Independent phase-space rotations of the two modes.
inline SymplecticMatrix phase_rotation(double theta1, double theta2) {
  Matrix s = Matrix::Zero(4, 4);
  const double c1 = std::cos(theta1), s1 = std::sin(theta1);
  const double c2 = std::cos(theta2), s2 = std::sin(theta2);
  s.block(0, 0, 2, 2) << c1, s1, -s1, c1;
  s.block(2, 2, 2, 2) << c2, s2, -s2, c2;
  return SymplecticMatrix(s);
}

/// Independent additive Gaussian noise channels on the two modes.
inline CovarianceMatrix add_noise(const CovarianceMatrix& gamma, double eta, double mu) {
  if (gamma.dim() != 4) throw InvalidArgument("add_noise expects a 4x4 matrix");
  if (!(eta >= 0.0) || !(mu >= 0.0)) throw InvalidArgument("noise variances must be >= 0");
  Matrix g = gamma.matrix();
  g(0, 0) += eta;
  g(1, 1) += eta;
  g(2, 2) += mu;
  g(3, 3) += mu;
  return CovarianceMatrix(g);
}

/// EPR variance for u = |alpha| x1 + x2 / alpha, v = |alpha| p1 - p2 / alpha.
inline DuanResult epr_variance(const CovarianceMatrix& gamma, double alpha) {
  if (gamma.dim() != 4) throw InvalidArgument("epr_variance expects a 4x4 matrix");
  if (alpha == 0.0 || !std::isfinite(alpha)) throw InvalidArgument("alpha must be finite and nonzero");
  const Matrix& g = gamma.matrix();
  const double au = std::abs(alpha), ia = 1.0 / alpha;
  // <dr_i dr_j>_sym = gamma_ij / 2
  const double var_u = 0.5 * (au * au * g(0, 0) + ia * ia * g(2, 2) + 2.0 * au * ia * g(0, 2));
  const double var_v = 0.5 * (au * au * g(1, 1) + ia * ia * g(3, 3) - 2.0 * au * ia * g(1, 3));
  return {0.5 * (var_u + var_v), 0.5 * (alpha * alpha + 1.0 / (alpha * alpha)), alpha};
}

/// Minimises Delta(alpha) - bound(alpha) by golden-section on log|alpha| in [-5, 5]
/// for each sign of alpha.
inline DuanResult duan_minimum(const CovarianceMatrix& gamma) {
  const auto objective = [&](double t, double sign) {
    const DuanResult r = epr_variance(gamma, sign * std::exp(t));
    return r.delta - r.bound;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  DuanResult best{std::numeric_limits<double>::infinity(), 0.0, 1.0};
  double best_gap = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    double lo = -5.0, hi = 5.0;
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = objective(x1, sign), f2 = objective(x2, sign);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = objective(x1, sign);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = objective(x2, sign);
      }
    }
    const double t = 0.5 * (lo + hi);
    const DuanResult r = epr_variance(gamma, sign * std::exp(t));
    if (r.delta - r.bound < best_gap) {
      best_gap = r.delta - r.bound;
      best = r;
    }
  }
  return best;
}

inline bool duan_detects(const CovarianceMatrix& gamma) {
  const DuanResult r = duan_minimum(gamma);
  return r.delta - r.bound < -1e-12;
}

}  // namespace cvsep
