#pragma once

// Independent reference computations used only by the tests: grid quadrature,
// Fock-basis sums, random symplectic matrices and a wave-function moment oracle.

#include "cvsep/linalg.hpp"
#include "cvsep/symplectic.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using cvsep::Matrix;

/// (2 pi) * integral over [-L, L]^2 of f * g, trapezoid rule.
inline double grid2(const std::function<double(double, double)>& f, double extent = 8.0,
                    int points = 401) {
  const double h = 2.0 * extent / (points - 1);
  double s = 0.0;
  for (int i = 0; i < points; ++i) {
    const double x = -extent + i * h;
    const double wi = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    for (int j = 0; j < points; ++j) {
      const double p = -extent + j * h;
      const double wj = (j == 0 || j == points - 1) ? 0.5 : 1.0;
      s += wi * wj * f(x, p);
    }
  }
  return s * h * h;
}

/// Integral over the plane of f in polar coordinates (trapezoid in r and angle);
/// accurate for integrands with a kink at the origin such as |r| W(r).
inline double polar2(const std::function<double(double, double)>& f, double radius = 9.0,
                     int radial = 2000, int angular = 64) {
  const double hr = radius / radial, ht = 2.0 * std::numbers::pi / angular;
  double s = 0.0;
  for (int i = 1; i <= radial; ++i) {
    const double r = i * hr;
    const double wr = (i == radial) ? 0.5 : 1.0;
    for (int j = 0; j < angular; ++j) s += wr * r * f(r * std::cos(j * ht), r * std::sin(j * ht));
  }
  return s * hr * ht;
}

/// Integral over [-L, L]^4 of f, trapezoid rule.
inline double grid4(const std::function<double(const std::array<double, 4>&)>& f, double extent,
                    int points) {
  const double h = 2.0 * extent / (points - 1);
  std::vector<double> node(points), w(points);
  for (int i = 0; i < points; ++i) {
    node[i] = -extent + i * h;
    w[i] = (i == 0 || i == points - 1) ? 0.5 : 1.0;
  }
  double s = 0.0;
  std::array<double, 4> r{};
  for (int a = 0; a < points; ++a) {
    r[0] = node[a];
    for (int b = 0; b < points; ++b) {
      r[1] = node[b];
      for (int c = 0; c < points; ++c) {
        r[2] = node[c];
        for (int d = 0; d < points; ++d) {
          r[3] = node[d];
          s += w[a] * w[b] * w[c] * w[d] * f(r);
        }
      }
    }
  }
  return s * h * h * h * h;
}

/// Laguerre polynomial by the three-term recurrence.
inline double laguerre(int n, double t) {
  double l0 = 1.0, l1 = 1.0 - t;
  if (n == 0) return l0;
  for (int k = 1; k < n; ++k) {
    const double l2 = ((2.0 * k + 1.0 - t) * l1 - k * l0) / (k + 1.0);
    l0 = l1;
    l1 = l2;
  }
  return l1;
}

/// Textbook Wigner function of |n>, vacuum variance 1/2.
inline double fock_wigner(int n, double x, double p) {
  const double r2 = x * x + p * p;
  return ((n % 2 == 0) ? 1.0 : -1.0) / std::numbers::pi * laguerre(n, 2.0 * r2) * std::exp(-r2);
}

/// Occupation distribution of a thermal state with covariance a * 1.
inline double thermal_occupation(double a, int n) {
  return 2.0 / (a + 1.0) * std::pow((a - 1.0) / (a + 1.0), n);
}

/// Tr[rho sigma] for two Fock-diagonal states.
inline double fock_trace(const std::vector<double>& p, const std::function<double(int)>& q) {
  double s = 0.0;
  for (std::size_t n = 0; n < p.size(); ++n) s += p[n] * q(static_cast<int>(n));
  return s;
}

/// Random two-mode symplectic from squeezers, rotations and a beam splitter.
inline Matrix random_symplectic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> sq(-0.8, 0.8);
  const auto squeeze = [](double r1, double r2) {
    Matrix s = Matrix::Zero(4, 4);
    s.diagonal() << std::exp(r1), std::exp(-r1), std::exp(r2), std::exp(-r2);
    return s;
  };
  const auto splitter = [](double t) {
    Matrix b = Matrix::Zero(4, 4);
    const double c = std::cos(t), s = std::sin(t);
    b(0, 0) = b(1, 1) = b(2, 2) = b(3, 3) = c;
    b(0, 2) = b(1, 3) = s;
    b(2, 0) = b(3, 1) = -s;
    return b;
  };
  Matrix s = cvsep::phase_rotation(angle(rng), angle(rng)).matrix();
  s = squeeze(sq(rng), sq(rng)) * s;
  s = splitter(angle(rng)) * s;
  s = cvsep::tms_symplectic(0.9 * sq(rng)).matrix() * s;
  s = cvsep::phase_rotation(angle(rng), angle(rng)).matrix() * s;
  return s;
}

/// Random one-mode symplectic (rotation * squeeze * rotation).
inline Matrix random_symplectic_1mode(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> sq(-0.8, 0.8);
  const auto rot = [](double t) {
    Matrix m(2, 2);
    m << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    return m;
  };
  const double r = sq(rng);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = std::exp(r);
  d(1, 1) = std::exp(-r);
  return rot(angle(rng)) * d * rot(angle(rng));
}

/// Covariance matrix of psi(x, y) ~ (x + y) exp(-(x+y)^2/(4 s+^2) - (x-y)^2/(4 s-^2)),
/// from position moments of |psi|^2 and momentum moments of derivatives on a grid.
inline Matrix path_state_covariance(double s_plus, double s_minus, double extent = 12.0,
                                    int points = 481) {
  const auto psi = [&](double x, double y) {
    const double u = x + y, v = x - y;
    return u * std::exp(-u * u / (4.0 * s_plus * s_plus) - v * v / (4.0 * s_minus * s_minus));
  };
  const double h = 2.0 * extent / (points - 1);
  const double d = 1e-4;
  // Accumulate <x^2>, <y^2>, <xy>, <px^2>, <py^2>, <px py>, and symmetrised <x px> etc.
  double n = 0, xx = 0, yy = 0, xy = 0, pxpx = 0, pypy = 0, pxpy = 0;
  for (int i = 0; i < points; ++i) {
    const double x = -extent + i * h;
    for (int j = 0; j < points; ++j) {
      const double y = -extent + j * h;
      const double f = psi(x, y);
      const double fx = (psi(x + d, y) - psi(x - d, y)) / (2 * d);
      const double fy = (psi(x, y + d) - psi(x, y - d)) / (2 * d);
      n += f * f;
      xx += x * x * f * f;
      yy += y * y * f * f;
      xy += x * y * f * f;
      // real wave function: <p_i p_j> = integral d_i psi d_j psi
      pxpx += fx * fx;
      pypy += fy * fy;
      pxpy += fx * fy;
    }
  }
  // Real psi gives vanishing symmetrised position-momentum correlations.
  Matrix g = Matrix::Zero(4, 4);
  g(0, 0) = 2 * xx / n;
  g(2, 2) = 2 * yy / n;
  g(0, 2) = g(2, 0) = 2 * xy / n;
  g(1, 1) = 2 * pxpx / n;
  g(3, 3) = 2 * pypy / n;
  g(1, 3) = g(3, 1) = 2 * pxpy / n;
  return g;
}

}  // namespace oracle
