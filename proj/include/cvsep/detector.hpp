#pragma once

// Improved two-mode separability test: a state is entangled when the smallest
// symplectic eigenvalue of its partial transpose lies below nu_th(g2).

#include "cvsep/gaussianity.hpp"
#include "cvsep/symplectic.hpp"
#include "cvsep/threshold.hpp"
#include "cvsep/wigner.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace cvsep {

/// Tolerance used for both zone boundaries (nu_minus against 1 and against nu_th).
inline constexpr double kZoneTol = 1e-9;
/// g2 this close to 1 is treated as Gaussian (nu_th = 1); nu_th grows like
/// 2 sqrt(1 - g) just below 1, so round-off in g2 would otherwise leak into the zone.
inline constexpr double kGaussianTol = 1e-10;
inline constexpr double kPdcTailTarget = 1e-12;

enum class Zone { duan_detected, improved_detected, undetected };

inline const char* to_string(Zone z) {
  switch (z) {
    case Zone::duan_detected: return "duan_detected";
    case Zone::improved_detected: return "improved_detected";
    case Zone::undetected: return "undetected";
  }
  return "unknown";
}

/// Poisson-weighted Fock mixture with mean photon number (a - 1)/2. With n_max < 0
/// the truncation is the smallest n with tail mass below 1e-12, capped at 30.
inline FockDiagonalSpec pdc_weights(double a, int n_max = -1) {
  if (!(a >= 1.0) || !std::isfinite(a)) throw InvalidArgument("PDC input requires a >= 1");
  if (n_max > kDefaultFockCutoff) throw InvalidArgument("PDC truncation above 30 is not supported");
  const double mean = 0.5 * (a - 1.0);
  std::vector<double> w;
  double term = std::exp(-mean), total = 0.0;
  const int cap = n_max < 0 ? kDefaultFockCutoff : n_max;
  for (int k = 0; k <= cap; ++k) {
    if (k > 0) term *= mean / k;
    w.push_back(term);
    total += term;
    if (n_max < 0 && 1.0 - total < kPdcTailTarget) break;
  }
  const double tail = std::max(0.0, 1.0 - total);
  if (tail > 1e-10)
    throw InvalidArgument("PDC truncation at n = " + std::to_string(w.size() - 1) +
                          " leaves tail mass " + std::to_string(tail) + " (a too large)");
  return FockDiagonalSpec(std::move(w), tail);
}

class StateFamily {
 public:
  enum class Kind { vacuum, fock, pdc, custom, path_state };

  static StateFamily vacuum() { return StateFamily(Kind::vacuum); }
  static StateFamily fock(int n) {
    if (n < 0) throw InvalidArgument("Fock number must be non-negative");
    StateFamily f(Kind::fock);
    f.n_ = n;
    return f;
  }
  /// PDC input; without `a` the circuit parameter a is used.
  static StateFamily pdc(std::optional<double> a = std::nullopt) {
    if (a && !(*a >= 1.0)) throw InvalidArgument("PDC input requires a >= 1");
    StateFamily f(Kind::pdc);
    f.a_ = a;
    return f;
  }
  static StateFamily custom(std::vector<double> weights) {
    StateFamily f(Kind::custom);
    FockDiagonalSpec check(weights);
    f.weights_ = std::move(weights);
    return f;
  }
  static StateFamily path_state(double s_plus, double s_minus) {
    if (!(s_plus > 0.0) || !(s_minus > 0.0)) throw InvalidArgument("squeezing parameters must be positive");
    StateFamily f(Kind::path_state);
    f.s_plus_ = s_plus;
    f.s_minus_ = s_minus;
    return f;
  }

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  std::optional<double> pdc_a() const { return a_; }
  const std::vector<double>& weights() const { return weights_; }
  double s_plus() const { return s_plus_; }
  double s_minus() const { return s_minus_; }

  /// Input variance a implied by the family, if it fixes one.
  std::optional<double> implied_a() const {
    switch (kind_) {
      case Kind::vacuum: return 1.0;
      case Kind::fock: return 2.0 * n_ + 1.0;
      case Kind::pdc: return a_;
      case Kind::custom: return FockDiagonalSpec(weights_).a();
      case Kind::path_state: return std::nullopt;
    }
    return std::nullopt;
  }

  /// Fock-diagonal input for circuit parameter a.
  FockDiagonalSpec spec(double a) const {
    switch (kind_) {
      case Kind::vacuum: return FockDiagonalSpec({1.0});
      case Kind::fock: return FockDiagonalSpec::fock(n_);
      case Kind::pdc: return pdc_weights(a_.value_or(a));
      case Kind::custom: return FockDiagonalSpec(weights_);
      case Kind::path_state: break;
    }
    throw InvalidArgument("the path state is not a circuit input");
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::vacuum: return "vacuum";
      case Kind::fock: return "fock:" + std::to_string(n_);
      case Kind::pdc: return "pdc";
      case Kind::custom: return "custom";
      case Kind::path_state: return "path-state";
    }
    return "unknown";
  }

 private:
  explicit StateFamily(Kind k) : kind_(k) {}
  Kind kind_;
  int n_ = 0;
  std::optional<double> a_;
  std::vector<double> weights_;
  double s_plus_ = 1.0, s_minus_ = 1.0;
};

struct DetectionVerdict {
  double nu_plus = 0.0;
  double nu_minus = 0.0;
  double g2 = 1.0;
  double nu_th = 1.0;
  Zone zone = Zone::undetected;
  bool eb_flag = false;
  GaussianityMethod method = GaussianityMethod::wigner_overlap;
  GaussianityDiagnostics diagnostics;
  std::optional<int> segment_n;
  std::vector<std::string> warnings;
};

inline Zone classify(double nu_minus, double nu_th, bool eb_flag = false) {
  if (eb_flag) return Zone::undetected;
  if (nu_minus < 1.0 - kZoneTol) return Zone::duan_detected;
  if (nu_minus < nu_th - kZoneTol) return Zone::improved_detected;
  return Zone::undetected;
}

namespace detail {

/// Fills nu_th, zone and segment notes from nu_minus and g2.
inline void finish_verdict(DetectionVerdict& v) {
  ThresholdPoint tp{};
  if (std::abs(v.g2 - 1.0) <= kGaussianTol) {
    tp = {1.0, 1.0, std::nullopt, std::nullopt};
  } else {
    try {
      tp = threshold_point(v.g2);
    } catch (const InvalidArgument& e) {
      throw NumericError(std::string("threshold: ") + e.what());
    }
  }
  v.nu_th = tp.nu_th;
  v.segment_n = tp.n;
  if (tp.n && *tp.n != 0)
    v.diagnostics.notes.push_back("g2 lies on threshold segment n = " + std::to_string(*tp.n) +
                                  " (outside the 3/4 <= g2 <= 1 closed form)");
  if (tp.segments_overlap) v.diagnostics.notes.push_back("several threshold segments attain g2");
  v.zone = classify(v.nu_minus, v.nu_th, v.eb_flag);
}

}  // namespace detail

struct AnalyzeOptions {
  GaussianityMethod method = GaussianityMethod::wigner_overlap;
  /// Also run the dual-circuit method and record the disagreement in the diagnostics.
  bool cross_check = false;
};

/// Input state x vacuum -> two-mode squeezer -> additive noise, then the analysing box.
inline DetectionVerdict analyze(const StateFamily& family, const CircuitParams& p,
                                const AnalyzeOptions& opt = {}) {
  if (family.kind() == StateFamily::Kind::path_state)
    throw InvalidArgument("path states are analysed with analyze_path_state");
  if (const auto ia = family.implied_a(); ia && std::abs(*ia - p.a()) > 1e-9 * p.a())
    throw InvalidArgument("input family fixes a = " + std::to_string(*ia) + " but a = " +
                          std::to_string(p.a()) + " was given");
  const FockDiagonalSpec spec = family.spec(p.a());

  DetectionVerdict v;
  v.method = opt.method;
  v.eb_flag = p.eta() >= 2.0 || p.mu() >= 2.0;
  if (p.lambda() > 0.8) v.warnings.push_back("lambda > 0.8 is outside the experimentally feasible range");
  if (v.eb_flag) v.warnings.push_back("noise >= 2 makes the channel entanglement breaking");
  if (spec.tail_mass() > 0.0)
    v.diagnostics.notes.push_back("Fock truncation n_max = " + std::to_string(spec.n_max()) +
                                  ", tail mass " + std::to_string(spec.tail_mass()));

  // The dual method shares the box's diagonaliser when the spectrum is degenerate.
  const bool degenerate_spectrum = detail::degenerate(williamson(partial_transpose(circuit_covariance(p))));
  std::optional<AnalyzingBox> box;
  if (opt.method != GaussianityMethod::dual_circuit || opt.cross_check || degenerate_spectrum)
    box = analyzing_box_circuit(spec.wigner(), p);

  switch (opt.method) {
    case GaussianityMethod::wigner_overlap:
      v.g2 = box->g2.g;
      v.diagnostics.notes = box->g2.diagnostics.notes;
      break;
    case GaussianityMethod::quadrature: {
      const auto q = g2_quadrature(*box);
      v.g2 = q.g;
      v.diagnostics.extrapolation_residual = q.diagnostics.extrapolation_residual;
      v.diagnostics.terms_used = q.diagnostics.terms_used;
      break;
    }
    case GaussianityMethod::dual_circuit: {
      DualCircuitOptions dopt;
      if (degenerate_spectrum) dopt.williamson_s = box->williamson_s.matrix();
      const auto d = g2_dual_circuit(spec, p, dopt);
      v.g2 = d.g;
      v.diagnostics.extrapolation_residual = d.diagnostics.extrapolation_residual;
      v.diagnostics.isotropy_defect = d.diagnostics.isotropy_defect;
      v.diagnostics.terms_used = d.diagnostics.terms_used;
      break;
    }
    case GaussianityMethod::radial_series:
      throw InvalidArgument("radial_series applies to one-mode states only");
  }
  if (box) {
    v.nu_plus = box->nu_plus;
    v.nu_minus = box->nu_minus;
  } else {
    const auto nu = symplectic_spectrum(partial_transpose(circuit_covariance(p)));
    v.nu_plus = nu.nu_plus;
    v.nu_minus = nu.nu_minus;
  }
  if (opt.cross_check && opt.method != GaussianityMethod::dual_circuit) {
    DualCircuitOptions dopt;
    dopt.williamson_s = box->williamson_s.matrix();
    const double dual = g2_dual_circuit(spec, p, dopt).g;
    v.diagnostics.notes.push_back("dual-circuit cross-check |delta g2| = " +
                                  std::to_string(std::abs(dual - v.g2)));
  }
  detail::finish_verdict(v);
  return v;
}

// ---------------------------------------------------------------------------
// Squeezed single-photon path-entangled state

struct PathStateReport {
  DetectionVerdict verdict;
  double ratio;               ///< s_minus / s_plus
  double expected_nu_minus;   ///< sqrt(3) * min(ratio, 1 / ratio)
  double expected_g2;         ///< (3/4) sqrt(3/2)
  /// Ratio at which sqrt(3) s+/s- reaches nu_th(g2); below it that branch would be undetected.
  double boundary_ratio;
};

inline const double kPathStateG2 = 0.75 * std::sqrt(1.5);

inline PathStateReport analyze_path_state(double s_plus, double s_minus) {
  if (!(s_plus > 0.0) || !(s_minus > 0.0) || !std::isfinite(s_plus) || !std::isfinite(s_minus))
    throw InvalidArgument("squeezing parameters must be positive");
  const double ratio = s_minus / s_plus;
  const auto box = analyzing_box_wigner(PGSum(path_state_wigner(s_plus, s_minus)));
  PathStateReport rep{{}, ratio, std::sqrt(3.0) * std::min(ratio, 1.0 / ratio), kPathStateG2, 0.0};
  if (std::abs(box.nu_minus - rep.expected_nu_minus) > 1e-8)
    throw NumericError("path state: nu_minus " + std::to_string(box.nu_minus) + " differs from sqrt(3) min(s-/s+, s+/s-)");
  if (std::abs(box.g2.g - kPathStateG2) > 1e-8)
    throw NumericError("path state: g2 " + std::to_string(box.g2.g) + " differs from (3/4) sqrt(3/2)");
  DetectionVerdict& v = rep.verdict;
  v.nu_plus = box.nu_plus;
  v.nu_minus = box.nu_minus;
  v.g2 = box.g2.g;
  v.diagnostics = box.g2.diagnostics;
  detail::finish_verdict(v);
  rep.boundary_ratio = std::sqrt(3.0) / v.nu_th;
  return rep;
}

// ---------------------------------------------------------------------------
// Reference table

struct Rational {
  long num;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct Table1Entry {
  bool fock;  ///< Fock input (n = (a-1)/2) or PDC input
  Rational a, lambda, eta, mu;
  double nu_minus_ref;
  double g2_ref;
};

inline const std::vector<Table1Entry>& table1_entries() {
  static const std::vector<Table1Entry> rows{
      {true, {3}, {3, 5}, {1, 13}, {1}, 1.0, 0.99541},
      {true, {3}, {3, 10}, {1, 10}, {228, 757}, 1.0, 0.99780},
      {true, {3}, {1, 2}, {1, 10}, {9, 10}, 1.1, 0.99492},
      {true, {3}, {1, 2}, {1, 10}, {4, 5}, 1.04, 0.99521},
      {false, {2}, {3, 10}, {1, 10}, {513, 1271}, 1.0, 0.99798},
      {false, {2}, {7, 10}, {1, 10}, {931, 677}, 1.0, 0.99850},
      {false, {3}, {3, 5}, {1, 13}, {1}, 1.0, 0.99781},
      {false, {3}, {3, 10}, {1, 10}, {228, 757}, 1.0, 0.99893},
      {false, {3}, {1, 2}, {1, 10}, {9, 10}, 1.1, 0.99758},
      {false, {3}, {1, 2}, {1, 10}, {4, 5}, 1.04, 0.99771},
  };
  return rows;
}

inline constexpr double kTable1NuTol = 1e-9;
inline constexpr double kTable1G2Tol = 1e-5;

struct Table1Row {
  Table1Entry entry;
  CircuitParams params;
  DetectionVerdict verdict;
  double dev_nu;
  double dev_g2;
  bool within_tolerance() const {
    return std::abs(dev_nu) <= kTable1NuTol && std::abs(dev_g2) <= kTable1G2Tol;
  }
};

inline StateFamily table1_family(const Table1Entry& e) {
  const double a = e.a.value();
  return e.fock ? StateFamily::fock(static_cast<int>(std::lround((a - 1.0) / 2.0))) : StateFamily::pdc(a);
}

inline std::vector<Table1Row> reproduce_table1(const AnalyzeOptions& opt = {}) {
  std::vector<Table1Row> out;
  for (const auto& e : table1_entries()) {
    const CircuitParams p(e.a.value(), e.lambda.value(), e.eta.value(), e.mu.value());
    auto v = analyze(table1_family(e), p, opt);
    const double dn = v.nu_minus - e.nu_minus_ref, dg = v.g2 - e.g2_ref;
    out.push_back({e, p, std::move(v), dn, dg});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

enum class SweepParam { a, lambda, eta, mu };

inline const char* to_string(SweepParam s) {
  switch (s) {
    case SweepParam::a: return "a";
    case SweepParam::lambda: return "lambda";
    case SweepParam::eta: return "eta";
    case SweepParam::mu: return "mu";
  }
  return "unknown";
}

inline SweepParam parse_sweep_param(const std::string& s) {
  if (s == "a") return SweepParam::a;
  if (s == "lambda") return SweepParam::lambda;
  if (s == "eta") return SweepParam::eta;
  if (s == "mu") return SweepParam::mu;
  throw InvalidArgument("unknown sweep parameter '" + s + "' (expected a, lambda, eta or mu)");
}

struct SweepPoint {
  double value;
  DetectionVerdict verdict;
};

struct SweepResult {
  SweepParam vary;
  std::vector<SweepPoint> points;
  /// Parameter value where nu_minus meets nu_th(g2), between the first detected/undetected pair.
  std::optional<double> crossing;
  std::optional<std::pair<double, double>> crossing_bracket;
};

namespace detail {

inline void check_sweep_value(const StateFamily& family, SweepParam vary, double v) {
  if (vary != SweepParam::a) return;
  switch (family.kind()) {
    case StateFamily::Kind::fock:
      if (v < 1.0 || std::abs(v - std::round(v)) > 0 || static_cast<long>(std::round(v)) % 2 == 0)
        throw InvalidArgument("Fock inputs only allow odd integer a (got " + std::to_string(v) + ")");
      break;
    case StateFamily::Kind::pdc: break;
    default: throw InvalidArgument("varying a requires a Fock or PDC input");
  }
}

inline std::pair<StateFamily, CircuitParams> sweep_point(const StateFamily& family, const CircuitParams& base,
                                                         SweepParam vary, double v) {
  switch (vary) {
    case SweepParam::a: {
      const CircuitParams p = base.with_a(v);
      if (family.kind() == StateFamily::Kind::fock)
        return {StateFamily::fock(static_cast<int>(std::lround((v - 1.0) / 2.0))), p};
      return {StateFamily::pdc(v), p};
    }
    case SweepParam::lambda: return {family, base.with_lambda(v)};
    case SweepParam::eta: return {family, base.with_eta(v)};
    case SweepParam::mu: return {family, base.with_mu(v)};
  }
  throw InvalidArgument("unknown sweep parameter");
}

inline bool detected(Zone z) { return z != Zone::undetected; }

}  // namespace detail

inline SweepResult sweep(const StateFamily& family, const CircuitParams& base, SweepParam vary,
                         const std::vector<double>& values, const AnalyzeOptions& opt = {}) {
  if (values.empty()) throw InvalidArgument("sweep needs at least one value");
  if (family.kind() == StateFamily::Kind::path_state) throw InvalidArgument("sweeps apply to circuit inputs");
  for (double v : values) {
    detail::check_sweep_value(family, vary, v);
    (void)detail::sweep_point(family, base, vary, v);  // range validation before any work
  }
  SweepResult res{vary, {}, std::nullopt, std::nullopt};
  for (double v : values) {
    auto [fam, p] = detail::sweep_point(family, base, vary, v);
    res.points.push_back({v, analyze(fam, p, opt)});
  }
  for (std::size_t i = 0; i + 1 < res.points.size(); ++i) {
    const bool d0 = detail::detected(res.points[i].verdict.zone);
    const bool d1 = detail::detected(res.points[i + 1].verdict.zone);
    if (d0 == d1) continue;
    double lo = res.points[i].value, hi = res.points[i + 1].value;
    res.crossing_bracket = std::pair{lo, hi};
    const bool continuous = !(vary == SweepParam::a && family.kind() == StateFamily::Kind::fock);
    if (continuous && !res.points[i].verdict.eb_flag && !res.points[i + 1].verdict.eb_flag) {
      // Bisection on nu_minus - nu_th(g2).
      const auto gap = [&](double v) {
        auto [fam, p] = detail::sweep_point(family, base, vary, v);
        const auto r = analyze(fam, p, opt);
        return r.nu_minus - r.nu_th;
      };
      double glo = gap(lo);
      for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = gap(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      res.crossing = 0.5 * (lo + hi);
    }
    break;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Negative control

/// NOON state (|N,0> + |0,N>)/sqrt2: covariance (N+1) 1 on both modes, reduced states
/// (|0><0| + |N><N|)/2. Taking S = 1 as the Williamson symplectic of the diagonal matrix,
/// sigma2 is that reduced state.
inline DetectionVerdict noon_control(int n) {
  if (n < 1) throw InvalidArgument("NOON control requires N >= 1");
  if (n > kDefaultFockCutoff) throw InvalidArgument("NOON control limited to N <= 30");
  const CovarianceMatrix gamma((n + 1.0) * Matrix::Identity(4, 4));
  DetectionVerdict v;
  const auto nu = symplectic_spectrum(partial_transpose(gamma));
  v.nu_plus = nu.nu_plus;
  v.nu_minus = nu.nu_minus;
  std::vector<double> w(n + 1, 0.0);
  w[0] = 0.5;
  w[n] += 0.5;
  v.g2 = gaussianity_fock_diagonal(FockDiagonalSpec(w));
  detail::finish_verdict(v);
  return v;
}

}  // namespace cvsep
