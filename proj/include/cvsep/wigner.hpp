#pragma once

// Wigner functions of the form  prefactor * P(r) * N(r; 0, Sigma)  and finite
// mixtures thereof. A state with covariance matrix gamma has envelope
// Sigma = gamma / 2, so the vacuum is exp(-x^2 - p^2) / pi and
// Tr[rho1 rho2] = (2 pi)^N * integral(W1 W2).
//
// Each term stores its polynomial in whitened coordinates z = F^{-1} r with
// F F^T = Sigma. Symplectic substitutions then only change F, and every other
// operation re-expands the polynomial through an orthogonal map or a contraction,
// so skewed transformations do not inflate the coefficients.

#include "cvsep/linalg.hpp"
#include "cvsep/polynomial.hpp"
#include "cvsep/symplectic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace cvsep {

class PolyGaussian {
 public:
  /// prefactor * P(r) * N(r; 0, envelope).
  PolyGaussian(const Matrix& envelope, const Polynomial& poly, double prefactor = 1.0) {
    check_dims(envelope.rows(), poly.num_vars());
    if (!is_positive_definite(envelope)) throw InvalidArgument("PolyGaussian envelope must be positive definite");
    const Matrix f = Eigen::LLT<Matrix>(symmetrized(envelope)).matrixL();
    init(f, poly.substitute(f), prefactor);
  }

  /// prefactor * Q(F^{-1} r) * N(r; 0, F F^T).
  static PolyGaussian in_frame(const Matrix& frame, Polynomial q, double prefactor = 1.0) {
    PolyGaussian w;
    w.check_dims(frame.rows(), q.num_vars());
    if (frame.cols() != frame.rows() || Eigen::FullPivLU<Matrix>(frame).rank() < frame.rows())
      throw InvalidArgument("PolyGaussian frame must be square and invertible");
    w.init(frame, std::move(q), prefactor);
    return w;
  }

  int modes() const { return static_cast<int>(sigma_.rows() / 2); }
  int dim() const { return static_cast<int>(sigma_.rows()); }
  const Matrix& envelope() const { return sigma_; }
  const Matrix& frame() const { return frame_; }
  const Matrix& frame_inverse() const { return frame_inv_; }
  /// Polynomial in the whitened coordinates z = F^{-1} r.
  const Polynomial& frame_poly() const { return q_; }
  /// Polynomial in phase-space coordinates r.
  Polynomial poly() const { return q_.substitute(frame_inv_); }
  double prefactor() const { return prefactor_; }

  double operator()(std::span<const double> r) const {
    std::array<double, 4> z{};
    const double zz = whiten(r, z);
    return prefactor_ * q_.evaluate(std::span<const double>(z.data(), dim())) * norm_ * std::exp(-0.5 * zz);
  }

  /// Envelope density N(r; 0, Sigma) alone.
  double envelope_density(std::span<const double> r) const {
    std::array<double, 4> z{};
    return norm_ * std::exp(-0.5 * whiten(r, z));
  }

 private:
  PolyGaussian() : q_(2) {}

  /// z = F^{-1} r; returns |z|^2.
  double whiten(std::span<const double> r, std::array<double, 4>& z) const {
    const int n = dim();
    if (static_cast<int>(r.size()) < n) throw InvalidArgument("too few coordinates");
    double zz = 0.0;
    for (int i = 0; i < n; ++i) {
      double t = 0.0;
      for (int j = 0; j < n; ++j) t += frame_inv_(i, j) * r[j];
      z[i] = t;
      zz += t * t;
    }
    return zz;
  }

  static void check_dims(Eigen::Index rows, int vars) {
    if (rows != 2 && rows != 4) throw InvalidArgument("PolyGaussian supports one or two modes");
    if (vars != rows) throw InvalidArgument("polynomial/envelope dimension mismatch");
  }

  void init(const Matrix& f, Polynomial q, double prefactor) {
    frame_ = f;
    frame_inv_ = f.inverse();
    sigma_ = symmetrized(f * f.transpose());
    q_ = std::move(q);
    prefactor_ = prefactor;
    norm_ = 1.0 / (std::pow(2.0 * std::numbers::pi, modes()) * std::abs(f.determinant()));
  }

  Matrix frame_;
  Matrix frame_inv_;
  Matrix sigma_;
  Polynomial q_;
  double prefactor_ = 1.0;
  double norm_ = 1.0;
};

struct WeightedTerm {
  double weight;
  PolyGaussian term;
};

class PGSum {
 public:
  PGSum() = default;
  PGSum(PolyGaussian w) { terms_.push_back({1.0, std::move(w)}); }  // NOLINT(implicit)

  void add(double weight, PolyGaussian w) {
    if (!terms_.empty() && terms_.front().term.modes() != w.modes())
      throw InvalidArgument("PGSum terms must share the mode count");
    terms_.push_back({weight, std::move(w)});
  }

  int modes() const {
    if (terms_.empty()) throw InvalidArgument("empty PGSum has no mode count");
    return terms_.front().term.modes();
  }
  const std::vector<WeightedTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double operator()(std::span<const double> r) const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.weight * t.term(r);
    return s;
  }

  template <class F>
  PGSum map(F&& f) const {
    PGSum out;
    for (const auto& t : terms_) out.add(t.weight, f(t.term));
    return out;
  }

 private:
  std::vector<WeightedTerm> terms_;
};

// ---------------------------------------------------------------------------
// Constructors

inline PolyGaussian gaussian_wigner(const CovarianceMatrix& gamma) {
  if (!is_positive_definite(gamma.matrix()))
    throw InvalidArgument("gaussian_wigner requires a positive-definite matrix");
  return PolyGaussian(0.5 * gamma.matrix(), Polynomial::constant(gamma.dim(), 1.0));
}

/// Polynomial part of the Fock |n> Wigner function on the vacuum envelope:
/// (-1)^n L_n(2 (x^2 + p^2)).
inline Polynomial fock_polynomial(int n, int degree_cap = kDefaultDegreeCap) {
  if (n < 0) throw InvalidArgument("Fock number must be non-negative");
  if (2 * n > degree_cap) throw DegreeCapExceeded("Fock state degree exceeds the polynomial cap");
  const auto& binom = detail::binomials();
  Polynomial p(2, degree_cap);
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  double kfact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) kfact *= k;
    // L_n(t) = sum_k C(n,k) (-1)^k t^k / k!,  t^k = 2^k (x^2 + p^2)^k
    const double lk = binom[n][k] * ((k % 2 == 0) ? 1.0 : -1.0) * std::ldexp(1.0, k) / kfact;
    for (int j = 0; j <= k; ++j) p.add_term({2 * j, 2 * (k - j), 0, 0}, sign * lk * binom[k][j]);
  }
  return p;
}

inline Matrix vacuum_envelope(int modes) { return 0.5 * Matrix::Identity(2 * modes, 2 * modes); }

inline PolyGaussian fock_wigner(int n) {
  return PolyGaussian(vacuum_envelope(1), fock_polynomial(n));
}

/// Fock-diagonal mixture sum_n weights[n] |n><n| as a single PolyGaussian.
inline PolyGaussian fock_diagonal_wigner(std::span<const double> weights,
                                         int degree_cap = kDefaultDegreeCap) {
  if (weights.empty()) throw InvalidArgument("Fock-diagonal state needs at least one weight");
  Polynomial p(2, degree_cap);
  for (std::size_t n = 0; n < weights.size(); ++n)
    if (weights[n] != 0.0) p += weights[n] * fock_polynomial(static_cast<int>(n), degree_cap);
  return PolyGaussian(vacuum_envelope(1), std::move(p));
}

// ---------------------------------------------------------------------------
// Structural operations

inline PolyGaussian tensor(const PolyGaussian& w1, const PolyGaussian& w2) {
  if (w1.modes() + w2.modes() > 2) throw InvalidArgument("tensor product limited to two modes");
  const int n = w1.dim() + w2.dim();
  Polynomial q = w1.frame_poly().embed(n, 0) * w2.frame_poly().embed(n, w1.dim());
  return PolyGaussian::in_frame(block_diagonal(w1.frame(), w2.frame()), std::move(q),
                                w1.prefactor() * w2.prefactor());
}

/// W'(r) = W(M^{-1} r) / |det M|. Only the frame changes.
inline PolyGaussian linear_substitute(const PolyGaussian& w, const Matrix& m) {
  if (m.rows() != w.dim() || m.cols() != w.dim()) throw InvalidArgument("substitution matrix shape mismatch");
  if (!Eigen::FullPivLU<Matrix>(m).isInvertible()) throw InvalidArgument("substitution matrix is singular");
  return PolyGaussian::in_frame(m * w.frame(), w.frame_poly(), w.prefactor());
}

inline PolyGaussian linear_substitute(const PolyGaussian& w, const SymplecticMatrix& s) {
  return linear_substitute(w, s.matrix());
}

namespace detail {

/// Eigen-decomposition of a symmetric matrix, with V = 1 when it is already diagonal.
inline std::pair<Matrix, Vector> symmetric_eigen(const Matrix& c) {
  const Eigen::Index n = c.rows();
  bool diagonal = true;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && c(i, j) != 0.0) diagonal = false;
  if (diagonal) return {Matrix::Identity(n, n), c.diagonal()};
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(c));
  return {es.eigenvectors(), es.eigenvalues()};
}

inline Polynomial heat_diagonal(const Polynomial& q, const Vector& d) {
  bool any = false;
  for (Eigen::Index i = 0; i < d.size(); ++i) any = any || d(i) != 0.0;
  if (!any) return q;
  return q.heat(Matrix(d.asDiagonal()));
}

}  // namespace detail

/// Convolution with N(0, noise / 2): the covariance matrix grows by `noise`.
inline PolyGaussian gaussian_convolve(const PolyGaussian& w, const CovarianceMatrix& noise) {
  if (noise.dim() != w.dim()) throw InvalidArgument("noise dimension mismatch");
  const double scale = std::max(1.0, max_abs(noise.matrix()));
  if (min_eigenvalue(noise.matrix()) < -1e-12 * scale)
    throw InvalidArgument("noise covariance must be positive semi-definite");
  const Matrix& f = w.frame();
  const Matrix total = symmetrized(w.envelope() + 0.5 * noise.matrix());
  const Matrix total_inv = total.inverse();
  // Given the output point r, the whitened pre-noise point is N(F^T T^{-1} r, Cz)
  // with Cz = 1 - F^T T^{-1} F. Writing Cz = V L V^T and choosing the output frame
  // T F^{-T} V (1 - L)^{1/2} makes the whole update a rotation, a diagonal heat
  // step and a diagonal contraction.
  const Matrix cz = symmetrized(Matrix::Identity(w.dim(), w.dim()) - f.transpose() * total_inv * f);
  auto [v, lam] = detail::symmetric_eigen(cz);
  Vector shrink(w.dim());
  for (int i = 0; i < w.dim(); ++i) {
    lam(i) = std::clamp(lam(i), 0.0, 1.0);
    shrink(i) = std::sqrt(1.0 - lam(i));
  }
  if (!(shrink.minCoeff() > 0.0)) throw NumericError("convolution frame is degenerate");
  const bool rotate = !v.isIdentity(0.0);
  Polynomial q = rotate ? w.frame_poly().substitute(v) : w.frame_poly();
  q = detail::heat_diagonal(q, lam).scale_variables(std::span<const double>(shrink.data(), shrink.size()));
  const Matrix out_frame = total * f.transpose().inverse() * v * shrink.asDiagonal();
  return PolyGaussian::in_frame(out_frame, std::move(q), w.prefactor());
}

/// Integrates out `mode` (0 or 1) of a two-mode function.
inline PolyGaussian marginalize(const PolyGaussian& w, int mode) {
  if (w.modes() != 2) throw InvalidArgument("marginalize requires a two-mode function");
  if (mode != 0 && mode != 1) throw InvalidArgument("mode index must be 0 or 1");
  const int out_off = 2 * mode;          // integrated block
  const int keep_off = 2 * (1 - mode);   // kept block
  const Matrix& s = w.envelope();
  const Matrix s_kk = s.block(keep_off, keep_off, 2, 2);
  const Matrix s_ik = s.block(out_off, keep_off, 2, 2);
  const Matrix s_ii = s.block(out_off, out_off, 2, 2);
  // Frame U with U U^T = Sigma in which the kept coordinates depend on the kept z only.
  const Matrix u_kk = Eigen::LLT<Matrix>(symmetrized(s_kk)).matrixL();
  const Matrix u_ik = s_ik * u_kk.transpose().inverse();
  const Matrix schur = symmetrized(s_ii - u_ik * u_ik.transpose());
  Eigen::LLT<Matrix> llt(schur);
  if (llt.info() != Eigen::Success) throw NumericError("marginalize: conditional covariance not positive definite");
  Matrix u = Matrix::Zero(4, 4);
  u.block(keep_off, keep_off, 2, 2) = u_kk;
  u.block(out_off, keep_off, 2, 2) = u_ik;
  u.block(out_off, out_off, 2, 2) = llt.matrixL();
  // z = F^{-1} U z' with F^{-1} U orthogonal; the integrated z' are standard normal.
  Polynomial q = w.frame_poly().substitute(w.frame_inverse() * u);
  Matrix c = Matrix::Zero(4, 4);
  c(out_off, out_off) = c(out_off + 1, out_off + 1) = 1.0;
  q = q.heat(c);
  const std::array<int, 2> keep{keep_off, keep_off + 1};
  return PolyGaussian::in_frame(u_kk, q.restrict_to(keep), w.prefactor());
}

// ---------------------------------------------------------------------------
// Integrals

namespace detail {

/// E[z^e] for z ~ N(0, 1) componentwise: product of (e_i - 1)!!.
inline double standard_normal_moment(const Exponents& e) {
  static const std::vector<double> df = [] {
    std::vector<double> t(256, 0.0);
    t[0] = 1.0;
    for (int k = 2; k < 256; k += 2) t[k] = t[k - 2] * (k - 1);
    return t;
  }();
  double m = 1.0;
  for (int i = 0; i < kMaxVars; ++i) {
    if (e[i] % 2 != 0) return 0.0;
    m *= df[e[i]];
  }
  return m;
}

/// E[A(z) B(z)] for z ~ N(0, 1), summed pairwise so the product is never formed.
inline double standard_normal_pair(const Polynomial& a, const Polynomial& b) {
  double e = 0.0;
  a.for_each([&](const Exponents& x, double ca) {
    b.for_each([&](const Exponents& y, double cb) {
      e += ca * cb * standard_normal_moment(Exponents{x[0] + y[0], x[1] + y[1], x[2] + y[2], x[3] + y[3]});
    });
  });
  return e;
}

}  // namespace detail

/// Integral of r^e W(r) over phase space, evaluated in the whitened frame r = F z.
inline double moment(const PolyGaussian& w, const Exponents& e) {
  const int n = w.dim();
  const Matrix& f = w.frame();
  Polynomial r_pow = Polynomial::constant(n, 1.0, std::max(kDefaultDegreeCap, detail::total(e)));
  for (int i = 0; i < n; ++i) {
    if (e[i] == 0) continue;
    Polynomial form(n, r_pow.degree_cap());
    for (int j = 0; j < n; ++j) {
      Exponents u{0, 0, 0, 0};
      u[j] = 1;
      form.add_term(u, f(i, j));
    }
    for (int k = 0; k < e[i]; ++k) r_pow = r_pow * form;
  }
  return w.prefactor() * detail::standard_normal_pair(r_pow, w.frame_poly());
}

inline double moment(const PGSum& w, const Exponents& e) {
  double s = 0.0;
  for (const auto& t : w.terms()) s += t.weight * moment(t.term, e);
  return s;
}

inline double integral(const PGSum& w) { return moment(w, Exponents{0, 0, 0, 0}); }

/// Covariance matrix gamma_ij = 2 * <r_i r_j> of a normalised Wigner function.
inline CovarianceMatrix covariance_matrix(const PGSum& w) {
  const double norm = integral(w);
  if (std::abs(norm - 1.0) > 1e-8)
    throw InvalidArgument("covariance extraction needs a normalised state (integral = " +
                          std::to_string(norm) + ")");
  const int n = 2 * w.modes();
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Exponents e{0, 0, 0, 0};
      e[i] += 1;
      e[j] += 1;
      g(i, j) = g(j, i) = 2.0 * moment(w, e);
    }
  return CovarianceMatrix(g);
}

/// Tr[rho1 rho2] = (2 pi)^N integral(W1 W2), in closed form.
inline double overlap(const PolyGaussian& w1, const PolyGaussian& w2) {
  if (w1.modes() != w2.modes()) throw InvalidArgument("overlap: mode count mismatch");
  // Keep the higher-degree polynomial on the side that only sees a rotation and a
  // diagonal contraction.
  const bool swap = w2.frame_poly().degree() > w1.frame_poly().degree();
  const PolyGaussian& a = swap ? w2 : w1;
  const PolyGaussian& b = swap ? w1 : w2;
  // N(r;S1) N(r;S2) = N(0; S1+S2) N(r; S3),  S3 = (S1^-1 + S2^-1)^-1.
  // Everything is taken relative to the frames: with B = F2^{-1} F1,
  // F1^{-1} S3 F1^{-T} = (I + B^T B)^{-1} = V D V^T and S1+S2 = F2 (I + B B^T) F2^T,
  // so neither envelope is ever inverted.
  const Matrix rel_frame = b.frame_inverse() * a.frame();
  auto [v, c] = detail::symmetric_eigen(symmetrized(rel_frame.transpose() * rel_frame));
  Vector root(c.size());
  double det_factor = std::abs(b.frame().determinant());
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    const double ci = std::max(c(i), 0.0);
    root(i) = 1.0 / std::sqrt(1.0 + ci);
    det_factor *= std::sqrt(1.0 + ci);
  }
  const bool rotate = !v.isIdentity(0.0);
  Polynomial qa = rotate ? a.frame_poly().substitute(v) : a.frame_poly();
  qa = qa.scale_variables(std::span<const double>(root.data(), root.size()));
  const Polynomial qb =
      b.frame_poly().degree() == 0 ? b.frame_poly() : b.frame_poly().substitute(rel_frame * v * root.asDiagonal());
  const double e = detail::standard_normal_pair(qa, qb);
  return a.prefactor() * b.prefactor() * e / det_factor;
}

inline double overlap(const PGSum& w1, const PGSum& w2) {
  if (w1.modes() != w2.modes()) throw InvalidArgument("overlap: mode count mismatch");
  double s = 0.0;
  for (const auto& a : w1.terms())
    for (const auto& b : w2.terms()) s += a.weight * b.weight * overlap(a.term, b.term);
  return s;
}

inline double overlap(const PGSum& w1, const PGSum& w2, int num_modes) {
  if (w1.modes() != num_modes || w2.modes() != num_modes)
    throw InvalidArgument("overlap: mode count mismatch");
  return overlap(w1, w2);
}

// ---------------------------------------------------------------------------
// Radial moments (one mode)

namespace detail {

inline bool isotropic_envelope(const Matrix& s, double* variance) {
  const double v = 0.5 * (s(0, 0) + s(1, 1));
  *variance = v;
  return std::abs(s(0, 0) - s(1, 1)) <= 1e-12 * v && std::abs(s(0, 1)) <= 1e-12 * v;
}

}  // namespace detail

/// Phase-space expectation of r^k = (x^2 + p^2)^{k/2} for odd k, closed form
/// for an isotropic envelope. Phase averaging is implicit since r is rotation invariant.
inline double radial_moment(const PolyGaussian& w, int k) {
  if (w.modes() != 1) throw InvalidArgument("radial_moment requires a one-mode function");
  if (k < 1 || k % 2 == 0) throw InvalidArgument("radial_moment requires an odd k >= 1");
  double s = 0.0;
  if (!detail::isotropic_envelope(w.envelope(), &s))
    throw InvalidArgument("radial_moment requires an isotropic envelope");
  // integral r^{k+1+i+j} exp(-r^2 / 2s) dr = 1/2 (2s)^{(m+1)/2} Gamma((m+1)/2), m = k+1+i+j
  // angular integral of cos^i sin^j = 2 pi (i-1)!! (j-1)!! / (i+j)!! for even i, j
  const auto double_fact = [](int n) {
    double r = 1.0;
    for (int t = n; t > 1; t -= 2) r *= t;
    return r;
  };
  double sum = 0.0;
  w.poly().for_each([&](const Exponents& e, double c) {
    const int i = e[0], j = e[1];
    if (i % 2 != 0 || j % 2 != 0) return;
    const double angular =
        2.0 * std::numbers::pi * double_fact(i - 1) * double_fact(j - 1) / double_fact(i + j);
    const double m = k + 1 + i + j;
    const double radial =
        0.5 * std::pow(2.0 * s, 0.5 * (m + 1)) * std::exp(std::lgamma(0.5 * (m + 1)));
    sum += c * angular * radial;
  });
  return w.prefactor() * sum / (2.0 * std::numbers::pi * s);
}

/// Radial-profile moment: integral_0^inf r^k Wbar(r) dr with Wbar the phase-averaged
/// Wigner function; equals <r^{k-1}> / (2 pi), a polynomial moment for odd k.
inline double radial_profile_moment(const PolyGaussian& w, int k) {
  if (w.modes() != 1) throw InvalidArgument("radial_profile_moment requires a one-mode function");
  if (k < 1 || k % 2 == 0) throw InvalidArgument("radial_profile_moment requires an odd k >= 1");
  const int half = (k - 1) / 2;
  const auto& binom = detail::binomials();
  double sum = 0.0;
  for (int j = 0; j <= half; ++j) sum += binom[half][j] * moment(w, Exponents{2 * j, 2 * (half - j), 0, 0});
  return sum / (2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// Squeezed single-photon path-entangled state

/// Wigner function of psi(x, y) ~ (x + y) exp(-(x+y)^2 / 4 s+^2 - (x-y)^2 / 4 s-^2):
/// a squeezed |1> on u = (x+y)/sqrt2 and squeezed vacuum on v = (x-y)/sqrt2.
inline PolyGaussian path_state_wigner(double s_plus, double s_minus) {
  if (!(s_plus > 0.0) || !(s_minus > 0.0) || !std::isfinite(s_plus) || !std::isfinite(s_minus))
    throw InvalidArgument("squeezing parameters must be positive");
  const PolyGaussian pair = tensor(fock_wigner(1), fock_wigner(0));
  // W(r) = W_pair(B r) with B r = (u / s+, s+ p_u, v / s-, s- p_v).
  const double h = 1.0 / std::sqrt(2.0);
  Matrix b = Matrix::Zero(4, 4);
  b.row(0) << h / s_plus, 0, h / s_plus, 0;
  b.row(1) << 0, h * s_plus, 0, h * s_plus;
  b.row(2) << h / s_minus, 0, -h / s_minus, 0;
  b.row(3) << 0, h * s_minus, 0, -h * s_minus;
  return linear_substitute(pair, Matrix(b.inverse()));
}

// ---------------------------------------------------------------------------
// Grid quadrature (independent of the closed-form integrals above)

/// Trapezoid rule of (2 pi) integral(f g) over [-extent, extent]^2 on `points` nodes per axis.
template <class F, class G>
double grid_overlap_1mode(const F& f, const G& g, double extent = 8.0, int points = 401) {
  const double h = 2.0 * extent / (points - 1);
  double sum = 0.0;
  std::array<double, 2> r{};
  for (int i = 0; i < points; ++i) {
    r[0] = -extent + i * h;
    const double wi = (i == 0 || i == points - 1) ? 0.5 : 1.0;
    for (int j = 0; j < points; ++j) {
      r[1] = -extent + j * h;
      const double wj = (j == 0 || j == points - 1) ? 0.5 : 1.0;
      sum += wi * wj * f(std::span<const double>(r)) * g(std::span<const double>(r));
    }
  }
  return 2.0 * std::numbers::pi * sum * h * h;
}

}  // namespace cvsep
