#pragma once

// Degree of Gaussianity g = Tr[rho rho_G] / Tr[rho_G rho_G], where rho_G is the
// Gaussian state with the covariance matrix of rho, and the analysing box that
// extracts g2 of the reduced nu_minus mode of a partially transposed two-mode state.

#include "cvsep/linalg.hpp"
#include "cvsep/symplectic.hpp"
#include "cvsep/threshold.hpp"
#include "cvsep/wigner.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace cvsep {

enum class GaussianityMethod { wigner_overlap, dual_circuit, quadrature, radial_series };

inline const char* to_string(GaussianityMethod m) {
  switch (m) {
    case GaussianityMethod::wigner_overlap: return "wigner_overlap";
    case GaussianityMethod::dual_circuit: return "dual_circuit";
    case GaussianityMethod::quadrature: return "quadrature";
    case GaussianityMethod::radial_series: return "radial_series";
  }
  return "unknown";
}

struct GaussianityDiagnostics {
  int terms_used = 0;
  double last_term = 0.0;              ///< magnitude of the last series term
  double extrapolation_residual = 0.0; ///< V-limit or grid-refinement disagreement
  double isotropy_defect = 0.0;
  std::vector<std::string> notes;
};

struct GaussianityResult {
  double g;
  GaussianityMethod method;
  GaussianityDiagnostics diagnostics;
};

/// Fock-diagonal single-mode state sum_n phi_n |n><n|.
class FockDiagonalSpec {
 public:
  explicit FockDiagonalSpec(std::vector<double> weights, double tail_mass = 0.0)
      : weights_(std::move(weights)), tail_mass_(tail_mass) {
    if (weights_.empty()) throw InvalidArgument("Fock-diagonal spec needs at least one weight");
    if (static_cast<int>(weights_.size()) > kDefaultFockCutoff + 1)
      throw InvalidArgument("Fock truncation above n = " + std::to_string(kDefaultFockCutoff) +
                            " is not supported");
    double sum = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("Fock weights must be finite and >= 0");
      sum += w;
    }
    if (sum < 1.0 - 1e-10 || sum > 1.0 + 1e-12)
      throw InvalidArgument("Fock weights must sum to 1 (got " + std::to_string(sum) + ")");
  }

  static FockDiagonalSpec fock(int n) {
    if (n < 0) throw InvalidArgument("Fock number must be non-negative");
    std::vector<double> w(n + 1, 0.0);
    w[n] = 1.0;
    return FockDiagonalSpec(std::move(w));
  }

  const std::vector<double>& weights() const { return weights_; }
  int n_max() const { return static_cast<int>(weights_.size()) - 1; }
  double tail_mass() const { return tail_mass_; }

  /// a = sum_n phi_n (2n + 1); the covariance matrix is a * 1.
  double a() const {
    double s = 0.0;
    for (std::size_t n = 0; n < weights_.size(); ++n) s += weights_[n] * (2.0 * n + 1.0);
    return s;
  }

  PolyGaussian wigner() const { return fock_diagonal_wigner(weights_); }

 private:
  std::vector<double> weights_;
  double tail_mass_;
};

// ---------------------------------------------------------------------------
// Degree of Gaussianity

inline PolyGaussian gaussian_associate(const PGSum& w) { return gaussian_wigner(covariance_matrix(w)); }

inline GaussianityResult degree_of_gaussianity(const PGSum& w) {
  const PGSum g(gaussian_associate(w));
  return {overlap(w, g) / overlap(g, g), GaussianityMethod::wigner_overlap, {}};
}

/// Tr[rho rho_th^m] for Fock-diagonal rho and a thermal state of covariance m * 1.
inline double thermal_trace(const std::vector<double>& weights, double m) {
  const double q = (m - 1.0) / (m + 1.0);
  double s = 0.0, qn = 1.0;
  for (double w : weights) {
    s += w * qn;
    qn *= q;
  }
  return 2.0 / (m + 1.0) * s;
}

/// g = a * Tr[rho rho_th^a] in closed form.
inline double gaussianity_fock_diagonal(const FockDiagonalSpec& spec) {
  const double a = spec.a();
  return a * thermal_trace(spec.weights(), a);
}

/// (1 + 2np)(np)^n - (1 + 2np - n)(1 + np)^n; zeros in (0, 1) make
/// p |n><n| + (1 - p) |0><0| have g = 1.
inline double counterexample_root_residual(int n, double p) {
  if (n < 1) throw InvalidArgument("counterexample order must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("counterexample weight must lie in (0, 1)");
  const double np = n * p;
  return (1.0 + 2.0 * np) * std::pow(np, n) - (1.0 + 2.0 * np - n) * std::pow(1.0 + np, n);
}

/// Roots of counterexample_root_residual(n, .) in (0, 1), by scan and bisection.
inline std::vector<double> counterexample_roots(int n, int samples = 4000) {
  const auto f = [n](double p) { return counterexample_root_residual(n, p); };
  std::vector<double> roots;
  double p0 = 0.5 / samples, f0 = f(p0);
  for (int i = 1; i < samples; ++i) {
    const double p1 = (i + 0.5) / samples;
    const double f1 = f(p1);
    if (f1 == 0.0) {
      roots.push_back(p1);
    } else if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0) {
      double lo = p0, hi = p1, flo = f0;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    p0 = p1;
    f0 = f1;
  }
  return roots;
}

inline FockDiagonalSpec counterexample_spec(int n, double p) {
  std::vector<double> w(n + 1, 0.0);
  w[0] = 1.0 - p;
  w[n] += p;
  return FockDiagonalSpec(std::move(w));
}

/// Series g = 2 sum_n (-1)^n <(x^2 + p^2)^n> / (n! a^n) over the first `terms`
/// coefficients, summed with the Euler transform so that the Gaussian case
/// (coefficients constant) converges.
inline GaussianityResult radial_series_g(const PolyGaussian& w, int terms) {
  if (w.modes() != 1) throw InvalidArgument("radial series requires a one-mode state");
  if (terms < 1) throw InvalidArgument("radial series needs at least one term");
  const Matrix gamma = covariance_matrix(PGSum(w)).matrix();
  const double a = 0.5 * (gamma(0, 0) + gamma(1, 1));
  if (std::abs(gamma(0, 0) - gamma(1, 1)) > 1e-8 * a || std::abs(gamma(0, 1)) > 1e-8 * a)
    throw InvalidArgument("radial series requires an isotropic covariance matrix");
  std::vector<double> b(terms);
  double fact_pow = 1.0;  // n! a^n
  for (int n = 0; n < terms; ++n) {
    if (n > 0) fact_pow *= n * a;
    // 4 pi * integral_0^inf r^{2n+1} Wbar(r) dr = 2 <r^{2n}>
    b[n] = 4.0 * std::numbers::pi * radial_profile_moment(w, 2 * n + 1) / fact_pow;
  }
  // Euler transform: sum (-1)^n b_n = sum_k (-1)^k (Delta^k b)_0 / 2^{k+1}
  std::vector<double> diff = b;
  double sum = 0.0, last = 0.0;
  for (int k = 0; k < terms; ++k) {
    last = ((k % 2 == 0) ? 1.0 : -1.0) * diff[0] / std::ldexp(1.0, k + 1);
    sum += last;
    for (int j = 0; j + 1 < terms - k; ++j) diff[j] = diff[j + 1] - diff[j];
  }
  GaussianityResult r{sum, GaussianityMethod::radial_series, {}};
  r.diagnostics.terms_used = terms;
  r.diagnostics.last_term = std::abs(last);
  return r;
}

// ---------------------------------------------------------------------------
// Analysing box

struct AnalyzingBox {
  double nu_plus;
  double nu_minus;
  SymplecticMatrix williamson_s;
  PGSum sigma2;  ///< reduced state of the nu_minus mode; its covariance is nu_minus * 1
  GaussianityResult g2;
};

namespace detail {

inline double g2_from_sigma2(const PGSum& sigma2, double nu_minus) {
  const PGSum ref(gaussian_wigner(CovarianceMatrix(nu_minus * Matrix::Identity(2, 2))));
  // Tr[sigma2_G sigma2_G] = 1 / nu_minus
  return nu_minus * overlap(sigma2, ref);
}

}  // namespace detail

namespace detail {

/// Passive two-mode rotation U = [[c, e^{ib} s], [-e^{-ib} s, c]] as a real symplectic.
inline Matrix passive_rotation(double theta, double beta) {
  using cd = std::complex<double>;
  const cd i(0.0, 1.0);
  const cd u[2][2] = {{std::cos(theta), std::exp(i * beta) * std::sin(theta)},
                      {-std::exp(-i * beta) * std::sin(theta), std::cos(theta)}};
  Matrix m(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      m(2 * a, 2 * b) = u[a][b].real();
      m(2 * a, 2 * b + 1) = -u[a][b].imag();
      m(2 * a + 1, 2 * b) = u[a][b].imag();
      m(2 * a + 1, 2 * b + 1) = u[a][b].real();
    }
  return m;
}

inline bool degenerate(const WilliamsonForm& wf) {
  return std::abs(wf.nu_plus - wf.nu_minus) <= 1e-10 * wf.nu_plus;
}

struct BoxCandidate {
  Matrix s;
  PGSum sigma2;
  double g2;
};

/// With nu_plus = nu_minus the diagonaliser is fixed only up to a passive rotation,
/// which changes g2. Every choice gives a valid bound; keep the one with the
/// smallest g2. Grid over (theta, beta), then coordinate-wise golden refinement.
template <class Eval>
BoxCandidate minimise_over_passive(const Matrix& s0, const Eval& eval) {
  const auto at = [&](double theta, double beta) {
    const Matrix s = passive_rotation(theta, beta) * s0;
    auto [sigma2, g2] = eval(s);
    return BoxCandidate{s, std::move(sigma2), g2};
  };
  constexpr double kPi = std::numbers::pi;
  constexpr int kTheta = 17, kBeta = 16;
  double best_t = 0.0, best_b = 0.0;
  BoxCandidate best = at(0.0, 0.0);
  for (int i = 0; i < kTheta; ++i)
    for (int j = 0; j < kBeta; ++j) {
      const double t = 0.5 * kPi * i / (kTheta - 1), b = 2.0 * kPi * j / kBeta;
      auto c = at(t, b);
      if (c.g2 < best.g2) {
        best = std::move(c);
        best_t = t;
        best_b = b;
      }
    }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double step_t = 0.5 * kPi / (kTheta - 1), step_b = 2.0 * kPi / kBeta;
  for (int sweep = 0; sweep < 3; ++sweep) {
    for (int coord = 0; coord < 2; ++coord) {
      const double centre = coord == 0 ? best_t : best_b;
      const double step = coord == 0 ? step_t : step_b;
      const auto f = [&](double v) {
        return coord == 0 ? at(v, best_b).g2 : at(best_t, v).g2;
      };
      double lo = centre - step, hi = centre + step;
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = f(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = f(x2);
        }
      }
      const double v = 0.5 * (lo + hi);
      auto c = coord == 0 ? at(v, best_b) : at(best_t, v);
      if (c.g2 < best.g2) {
        best = std::move(c);
        (coord == 0 ? best_t : best_b) = v;
      }
    }
    step_t *= 0.1;
    step_b *= 0.1;
  }
  return best;
}

inline AnalyzingBox make_box(const WilliamsonForm& wf, const Matrix& s0,
                             const std::function<std::pair<PGSum, double>(const Matrix&)>& eval) {
  if (!degenerate(wf)) {
    auto [sigma2, g2] = eval(s0);
    return {wf.nu_plus, wf.nu_minus, SymplecticMatrix(s0, 1e-9), std::move(sigma2),
            {g2, GaussianityMethod::wigner_overlap, {}}};
  }
  auto best = minimise_over_passive(s0, eval);
  AnalyzingBox box{wf.nu_plus, wf.nu_minus, SymplecticMatrix(best.s, 1e-9), std::move(best.sigma2),
                   {best.g2, GaussianityMethod::wigner_overlap, {}}};
  box.g2.diagnostics.notes.push_back(
      "degenerate symplectic spectrum: diagonaliser chosen to minimise g2");
  return box;
}

}  // namespace detail

/// Partial transpose, Williamson symplectic of the transposed covariance, trace
/// over the nu_plus mode, and g2 of what remains.
inline AnalyzingBox analyzing_box_wigner(const PGSum& w) {
  if (w.modes() != 2) throw InvalidArgument("analysing box requires a two-mode state");
  const CovarianceMatrix pt = partial_transpose(covariance_matrix(w));
  const WilliamsonForm wf = williamson(pt);
  const auto eval = [&](const Matrix& s) {
    const Matrix m = s * reflection_p2();
    PGSum sigma2 = w.map([&](const PolyGaussian& t) { return marginalize(linear_substitute(t, m), 0); });
    const double g2 = detail::g2_from_sigma2(sigma2, wf.nu_minus);
    return std::pair{std::move(sigma2), g2};
  };
  return detail::make_box(wf, wf.S.matrix(), eval);
}

/// Analysing box for (input x vacuum) sent through the two-mode squeezer and the
/// additive-noise channels. The nu_minus mode sees a one-mode Gaussian channel
/// r -> X r + noise(Y) of the input, so the pipeline stays two-dimensional.
inline AnalyzingBox analyzing_box_circuit(const PolyGaussian& input, const CircuitParams& p) {
  if (input.modes() != 1) throw InvalidArgument("circuit input must be a one-mode state");
  const Matrix gamma_in = covariance_matrix(PGSum(input)).matrix();
  const Matrix t = tms_symplectic(p.lambda()).matrix();
  Matrix noise = Matrix::Zero(4, 4);
  noise.diagonal() << p.eta(), p.eta(), p.mu(), p.mu();
  const Matrix gamma =
      symmetrized(t * block_diagonal(gamma_in, Matrix::Identity(2, 2)) * t.transpose() + noise);
  const Matrix lam = reflection_p2();
  const WilliamsonForm wf = williamson(CovarianceMatrix(lam * gamma * lam));

  const auto eval = [&](const Matrix& s) {
    const Matrix sl = s * lam;
    const Matrix m = sl * t;
    const Matrix x = m.block(2, 0, 2, 2);
    const Matrix m22 = m.block(2, 2, 2, 2);
    const Matrix shifted = symmetrized(sl * noise * sl.transpose());
    PGSum sigma2;
    if (std::abs(x.determinant()) > 1e-12 * std::max(1.0, max_abs(x) * max_abs(x))) {
      const Matrix y = symmetrized(m22 * m22.transpose() + shifted.block(2, 2, 2, 2));
      sigma2 = PGSum(gaussian_convolve(linear_substitute(input, x), CovarianceMatrix(y)));
    } else {
      // Input decoupled from the nu_minus mode: run the full two-mode pipeline.
      const PolyGaussian vac = gaussian_wigner(CovarianceMatrix::identity(1));
      const PolyGaussian pre = linear_substitute(tensor(input, vac), m);
      sigma2 = PGSum(marginalize(gaussian_convolve(pre, CovarianceMatrix(shifted)), 0));
    }
    const double g2 = detail::g2_from_sigma2(sigma2, wf.nu_minus);
    return std::pair{std::move(sigma2), g2};
  };
  return detail::make_box(wf, wf.S.matrix(), eval);
}

/// Same box, with the final overlap against the nu_minus Gaussian done on a trapezoid
/// grid at two resolutions; their disagreement is the reported residual.
inline GaussianityResult g2_quadrature(const AnalyzingBox& box, int points = 401) {
  const PolyGaussian ref = gaussian_wigner(CovarianceMatrix(box.nu_minus * Matrix::Identity(2, 2)));
  const double extent = 8.0 * std::sqrt(std::max(1.0, box.nu_minus));
  const auto value = [&](int n) {
    return box.nu_minus * grid_overlap_1mode(box.sigma2, ref, extent, n);
  };
  const double fine = value(points);
  const double coarse = value(points / 2 + 1);
  const double residual = std::abs(fine - coarse);
  if (residual > 1e-6)
    throw NumericError("quadrature: grid refinements disagree by " + std::to_string(residual));
  GaussianityResult r{fine, GaussianityMethod::quadrature, {}};
  r.diagnostics.extrapolation_residual = residual;
  r.diagnostics.terms_used = points;
  return r;
}

/// One-mode g on a grid: a * (2 pi) integral W G over two refinements.
inline GaussianityResult gaussianity_quadrature(const PolyGaussian& w, int points = 401) {
  if (w.modes() != 1) throw InvalidArgument("grid quadrature requires a one-mode state");
  const PolyGaussian g = gaussian_associate(PGSum(w));
  const double purity_g = 1.0 / std::sqrt(covariance_matrix(PGSum(g)).matrix().determinant());
  const double var = covariance_matrix(PGSum(w)).matrix().trace() / 2.0;
  const double extent = 8.0 * std::sqrt(std::max(1.0, var));
  const double fine = grid_overlap_1mode(w, g, extent, points) / purity_g;
  const double coarse = grid_overlap_1mode(w, g, extent, points / 2 + 1) / purity_g;
  const double residual = std::abs(fine - coarse);
  if (residual > 1e-6)
    throw NumericError("quadrature: grid refinements disagree by " + std::to_string(residual));
  GaussianityResult r{fine, GaussianityMethod::quadrature, {}};
  r.diagnostics.extrapolation_residual = residual;
  r.diagnostics.terms_used = points;
  return r;
}

inline GaussianityResult g2_quadrature(const PGSum& w, int points = 401) {
  return g2_quadrature(analyzing_box_wigner(w), points);
}

// ---------------------------------------------------------------------------
// Dual circuit

struct DualCircuitOptions {
  std::vector<double> volumes{1e2, 1e3, 1e4, 1e5, 1e6};
  double isotropy_tol = 1e-8;
  double residual_tol = 1e-8;
  /// Diagonaliser to use instead of the default one (e.g. the analysing box's choice
  /// on a degenerate spectrum).
  std::optional<Matrix> williamson_s;
};

namespace detail {

struct DualTrace {
  double value;        ///< ((V + 1) / 2) Tr[sigma (rho_th^V x sigma2_G)]
  double anisotropy;
};

inline DualTrace dual_circuit_trace(const std::vector<double>& weights, const CircuitParams& p,
                                    const WilliamsonForm& wf, double v, double isotropy_tol) {
  const Matrix lam = reflection_p2();
  const Matrix s_inv = wf.S.inverse().matrix();
  Matrix d = Matrix::Zero(4, 4);
  d.diagonal() << v, v, wf.nu_minus, wf.nu_minus;
  Matrix noise = Matrix::Zero(4, 4);
  noise.diagonal() << p.eta(), p.eta(), p.mu(), p.mu();
  const Matrix back = tms_symplectic(-p.lambda()).matrix();
  const Matrix star =
      symmetrized(back * (lam * s_inv * d * s_inv.transpose() * lam + noise) * back.transpose());

  // 2 pi * integral over mode 2 of W_vac * W_star = C * W_th^m on mode 1.
  Matrix q = star.inverse();
  q(2, 2) += 1.0;
  q(3, 3) += 1.0;
  const Matrix q22 = q.block(2, 2, 2, 2);
  const Matrix schur = q.block(0, 0, 2, 2) - q.block(0, 2, 2, 2) * q22.inverse() * q.block(2, 0, 2, 2);
  const double scale = 0.5 * (schur(0, 0) + schur(1, 1));
  const double anisotropy = std::max(std::abs(schur(0, 0) - schur(1, 1)), 2.0 * std::abs(schur(0, 1))) / scale;
  if (anisotropy > isotropy_tol)
    throw NumericError("dual circuit: reduced mode-1 Gaussian is not isotropic (defect " +
                       std::to_string(anisotropy) + ")");
  const double m = 1.0 / scale;
  const double c = 2.0 * m / std::sqrt(star.determinant() * q22.determinant());
  return {0.5 * (v + 1.0) * c * thermal_trace(weights, m), anisotropy};
}

}  // namespace detail

/// g2 for a Fock-diagonal input through the circuit by the dual-map method:
/// g2 = nu_minus * lim_V ((V+1)/2) Tr[sigma (rho_th^V x sigma2_G)], the limit taken by
/// Richardson extrapolation in 1/V.
inline GaussianityResult g2_dual_circuit(const FockDiagonalSpec& spec, const CircuitParams& p,
                                         const DualCircuitOptions& opt = {}) {
  if (opt.volumes.size() < 2) throw InvalidArgument("dual circuit needs at least two volumes");
  Matrix gamma_in = spec.a() * Matrix::Identity(2, 2);
  const Matrix t = tms_symplectic(p.lambda()).matrix();
  const Matrix gamma = add_noise(CovarianceMatrix(symmetrized(
                                     t * block_diagonal(gamma_in, Matrix::Identity(2, 2)) * t.transpose())),
                                 p.eta(), p.mu())
                           .matrix();
  const Matrix lam = reflection_p2();
  WilliamsonForm wf = williamson(CovarianceMatrix(lam * gamma * lam));
  if (opt.williamson_s) wf.S = SymplecticMatrix(*opt.williamson_s, 1e-9);

  const std::size_t k = opt.volumes.size();
  std::vector<double> h(k), table(k);
  double anisotropy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto tr = detail::dual_circuit_trace(spec.weights(), p, wf, opt.volumes[i], opt.isotropy_tol);
    h[i] = 1.0 / opt.volumes[i];
    table[i] = tr.value;
    anisotropy = std::max(anisotropy, tr.anisotropy);
  }
  // Neville's scheme evaluated at h = 0. The residual compares the full estimate with
  // the one that drops the smallest volume.
  double without_coarsest = table[k - 1];
  for (std::size_t level = 1; level < k; ++level) {
    for (std::size_t i = 0; i + level < k; ++i)
      table[i] = (h[i + level] * table[i] - h[i] * table[i + 1]) / (h[i + level] - h[i]);
    if (level == k - 2) without_coarsest = table[1];
  }
  const double residual = std::abs(table[0] - without_coarsest) * wf.nu_minus;
  if (residual > opt.residual_tol)
    throw NumericError("dual circuit: V extrapolation residual " + std::to_string(residual));
  GaussianityResult r{wf.nu_minus * table[0], GaussianityMethod::dual_circuit, {}};
  r.diagnostics.extrapolation_residual = residual;
  r.diagnostics.terms_used = static_cast<int>(k);
  r.diagnostics.isotropy_defect = anisotropy;
  return r;
}

}  // namespace cvsep
