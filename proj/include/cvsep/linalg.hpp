#pragma once

// Small dense linear-algebra helpers shared by the symplectic and Wigner layers.
// Phase-space ordering is (x1, p1, x2, p2); all matrices are 2N x 2N with N <= 2.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace cvsep {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Invalid user-facing input (bad range, wrong dimension, malformed spec).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numeric assertion failed (non-convergence, broken structural assumption).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Block-diagonal symplectic form for `modes` modes, each block [[0, 1], [-1, 0]].
inline Matrix symplectic_form(int modes) {
  Matrix omega = Matrix::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

inline bool is_symmetric(const Matrix& m, double rel_tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  return max_abs(m - m.transpose()) <= rel_tol * scale;
}

inline Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline bool is_positive_definite(const Matrix& m) {
  if (!is_symmetric(m, 1e-10)) return false;
  const double scale = std::max(1e-300, max_abs(m));
  return min_eigenvalue(m) > 1e-14 * scale;
}

/// Principal matrix power of a symmetric positive-definite matrix.
inline Matrix spd_power(const Matrix& m, double exponent) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0)
    throw InvalidArgument("matrix is not positive definite");
  Vector d = es.eigenvalues().array().pow(exponent).matrix();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix block_diagonal(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace cvsep
