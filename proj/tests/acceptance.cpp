// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cvsep/cvsep.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace cvsep;

namespace {

// Pinned tolerances.
constexpr double kTolNu = 1e-9;              // 1: reference table nu_minus
constexpr double kMaxSecondsNu = 1.0;        // 1: runtime
constexpr double kTolG2 = 1e-5;              // 2: reference table g2, both methods
constexpr double kMaxSecondsG2 = 30.0;       // 2: runtime
constexpr double kTolPathG2 = 1e-6;          // 3
constexpr double kTolPathNuTh = 1e-3;        // 3
constexpr double kTolPathBoundary = 5e-4;    // 3
constexpr double kTolPathNu = 1e-8;          // 3
constexpr double kTolThreshold = 1e-9;       // 4
constexpr double kTolInvariance = 1e-8;      // 5(i)
constexpr double kTolCounterexample = 1e-10; // 5(ii)
constexpr double kTolRoots = 1e-9;           // 5(iii)
constexpr double kTolRadial = 1e-6;          // 5(iv)
constexpr double kTolDual = 1e-6;            // 6: overlap vs dual circuit
constexpr double kTolQuadrature = 1e-4;      // 6: overlap vs quadrature
constexpr double kTolVacuumG2 = 1e-9;        // 7
constexpr double kTolCrossing = 1e-4;        // 8: rerun stability

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += why;
    }
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& run) {
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d %s: %s%s%s\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.empty() ? "" : " | ",
              o.detail.c_str());
  std::fflush(stdout);
}

// ---------------------------------------------------------------------------

Outcome table1_nu() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string bad;
  const auto& rows = table1_entries();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& e = rows[i];
    const CircuitParams p(e.a.value(), e.lambda.value(), e.eta.value(), e.mu.value());
    const double nu = symplectic_spectrum(partial_transpose(circuit_covariance(p))).nu_minus;
    const double closed = nu_pm_closed_form(p).nu_minus;
    o.require(std::abs(nu - closed) <= kTolNu, "row " + std::to_string(i + 1) + " spectrum vs closed form " +
                                                   num(nu - closed));
    const double dev = std::abs(nu - e.nu_minus_ref);
    worst = std::max(worst, dev);
    if (dev > kTolNu) bad += (bad.empty() ? "" : ",") + std::to_string(i + 1) + " (" + num(nu) + " vs " +
                             num(e.nu_minus_ref) + ")";
  }
  const double secs = seconds_since(t0);
  o.require(bad.empty(), "rows outside " + num(kTolNu) + ": " + bad);
  o.require(secs < kMaxSecondsNu, "runtime " + num(secs) + " s");
  o.detail = "max |dev| " + num(worst) + ", " + num(secs) + " s" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome table1_g2() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_overlap = 0.0, worst_dual = 0.0;
  const auto overlap = reproduce_table1({GaussianityMethod::wigner_overlap});
  const auto dual = reproduce_table1({GaussianityMethod::dual_circuit});
  for (std::size_t i = 0; i < overlap.size(); ++i) {
    const double ref = overlap[i].entry.g2_ref;
    const double d1 = std::abs(overlap[i].verdict.g2 - ref);
    const double d2 = std::abs(dual[i].verdict.g2 - ref);
    worst_overlap = std::max(worst_overlap, d1);
    worst_dual = std::max(worst_dual, d2);
    o.require(d1 <= kTolG2, "row " + std::to_string(i + 1) + " overlap dev " + num(d1));
    o.require(d2 <= kTolG2, "row " + std::to_string(i + 1) + " dual dev " + num(d2));
  }
  const double secs = seconds_since(t0);
  o.require(secs < kMaxSecondsG2, "runtime " + num(secs) + " s");
  o.detail = "max |dev| overlap " + num(worst_overlap) + ", dual " + num(worst_dual) + ", " + num(secs) + " s" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome path_state() {
  Outcome o;
  const double exact_g2 = 0.75 * std::sqrt(1.5);
  const auto box = analyzing_box_wigner(PGSum(path_state_wigner(1.0, 1.0)));
  o.require(std::abs(box.g2.g - exact_g2) <= kTolPathG2, "g2 " + num(box.g2.g));
  o.require(std::abs(box.g2.g - 0.918559) <= kTolPathG2, "g2 vs printed 0.918559: " + num(box.g2.g));
  const double nu_th = nu_threshold(box.g2.g);
  o.require(std::abs(nu_th - 1.7986) <= kTolPathNuTh, "nu_th " + num(nu_th));
  const double boundary = std::sqrt(3.0) / nu_th;
  o.require(std::abs(boundary - 0.963) <= kTolPathBoundary, "boundary " + num(boundary));
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double s_plus = 0.8 + 0.1 * k;
    const double s_minus = s_plus * (1.0 + 0.25 * k);
    const auto b = analyzing_box_wigner(PGSum(path_state_wigner(s_plus, s_minus)));
    const double dev = std::abs(b.nu_minus - std::sqrt(3.0) * s_plus / s_minus);
    worst = std::max(worst, dev);
    o.require(dev <= kTolPathNu, "nu_minus at s-/s+ = " + num(s_minus / s_plus) + " off by " + num(dev));
    // The covariance itself against a grid-moment oracle.
    if (k % 3 == 0) {
      const Matrix gamma = oracle::path_state_covariance(s_plus, s_minus, 8.0 * std::max(s_plus, s_minus), 801);
      const double nu = symplectic_spectrum(partial_transpose(CovarianceMatrix(symmetrized(gamma)))).nu_minus;
      o.require(std::abs(nu - std::sqrt(3.0) * s_plus / s_minus) <= 1e-6, "grid oracle nu_minus " + num(nu));
    }
  }
  o.detail = "g2 " + num(box.g2.g) + ", nu_th " + num(nu_th) + ", boundary " + num(boundary) +
             ", max nu dev " + num(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome threshold() {
  Outcome o;
  o.require(nu_threshold(1.0) == 1.0, "nu_th(1) = " + num(nu_threshold(1.0)));
  o.require(std::abs(nu_threshold(0.75) - 3.0) <= kTolThreshold, "nu_th(3/4) = " + num(nu_threshold(0.75)));
  const double seg_end = threshold_segment_g(0, 0.0);
  o.require(std::abs(seg_end - 0.75) <= kTolThreshold, "segment 0 endpoint g = " + num(seg_end));
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double g = 0.75 + 0.25 * i / 100.0;
    const double closed = nu_threshold_closed_form(g);
    const double param = nu_threshold_parametric(g).nu_th;
    worst = std::max(worst, std::abs(closed - param));
  }
  o.require(worst <= kTolThreshold, "closed form vs parametric " + num(worst));
  o.detail = "max closed/parametric gap " + num(worst) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome appendix_a() {
  Outcome o;
  std::mt19937_64 rng(2024);

  // (i) invariance
  std::vector<PGSum> battery;
  battery.emplace_back(tensor(fock_wigner(1), fock_wigner(0)));
  battery.emplace_back(tensor(fock_wigner(2), fock_wigner(1)));
  battery.emplace_back(path_state_wigner(1.0, 1.4));
  PGSum mix;
  mix.add(0.5, tensor(fock_wigner(1), fock_wigner(1)));
  mix.add(0.5, linear_substitute(tensor(fock_wigner(0), fock_wigner(3)), oracle::random_symplectic(rng)));
  battery.push_back(mix);
  Matrix transpose = Matrix::Identity(4, 4);
  transpose(1, 1) = transpose(3, 3) = -1.0;
  double worst = 0.0;
  for (const auto& w : battery) {
    const double g0 = degree_of_gaussianity(w).g;
    const auto g_after = [&](const Matrix& m) {
      return degree_of_gaussianity(w.map([&](const PolyGaussian& t) { return linear_substitute(t, m); })).g;
    };
    for (int k = 0; k < 50; ++k) worst = std::max(worst, std::abs(g_after(oracle::random_symplectic(rng)) - g0));
    worst = std::max(worst, std::abs(g_after(transpose) - g0));
    worst = std::max(worst, std::abs(g_after(reflection_p2()) - g0));
  }
  o.require(worst <= kTolInvariance, "(i) invariance defect " + num(worst));

  // (ii) two-Fock counterexample, traces in the Fock basis
  const double p = 1.0 / (2.0 * std::sqrt(2.0));
  const std::vector<double> phi{1.0 - p, 0.0, p};
  const double a = 1.0 + 4.0 * p;
  const double cross = oracle::fock_trace(phi, [&](int n) { return oracle::thermal_occupation(a, n); });
  double purity_g = 0.0;
  for (int n = 0; n < 400; ++n) purity_g += std::pow(oracle::thermal_occupation(a, n), 2);
  const double target = 1.0 / (1.0 + std::sqrt(2.0));
  const double g_ce = degree_of_gaussianity(PGSum(fock_diagonal_wigner(phi))).g;
  o.require(std::abs(cross - target) <= kTolCounterexample, "(ii) Tr[rho rho_G] " + num(cross));
  o.require(std::abs(purity_g - target) <= kTolCounterexample, "(ii) Tr[rho_G^2] " + num(purity_g));
  o.require(std::abs(g_ce - 1.0) <= kTolCounterexample, "(ii) g " + num(g_ce));

  // (iii) every root gives g = 1
  int roots = 0;
  double worst_root = 0.0;
  for (int n = 1; n <= 3; ++n)
    for (double r : counterexample_roots(n)) {
      ++roots;
      const auto spec = counterexample_spec(n, r);
      const double fock_g = spec.a() * oracle::fock_trace(spec.weights(), [&](int k) {
        return oracle::thermal_occupation(spec.a(), k);
      });
      const double wig_g = degree_of_gaussianity(PGSum(spec.wigner())).g;
      worst_root = std::max({worst_root, std::abs(fock_g - 1.0), std::abs(wig_g - 1.0)});
    }
  o.require(worst_root <= kTolRoots, "(iii) root g defect " + num(worst_root));

  // (iv) radial series
  const double radial = radial_series_g(fock_wigner(1), 25).g;
  o.require(std::abs(radial - 0.75) <= kTolRadial, "(iv) radial series " + num(radial));

  o.detail = "(i) " + num(worst) + ", (ii) g " + num(g_ce) + ", (iii) " + std::to_string(roots) + " roots, defect " +
             num(worst_root) + ", (iv) " + num(std::abs(radial - 0.75)) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome cross_oracle() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> lam(0.1, 0.7), noise(0.0, 1.5);
  const double choices[] = {1.0, 3.0, 5.0};
  double worst_dual = 0.0, worst_quad = 0.0;
  for (int k = 0; k < 20; ++k) {
    const double a = choices[rng() % 3];
    const CircuitParams p(a, lam(rng), noise(rng), noise(rng));
    const StateFamily fam = (k % 2 == 0) ? StateFamily::fock(static_cast<int>((a - 1.0) / 2.0)) : StateFamily::pdc();
    const double g_ov = analyze(fam, p, {GaussianityMethod::wigner_overlap}).g2;
    const double g_du = analyze(fam, p, {GaussianityMethod::dual_circuit}).g2;
    const double g_qu = analyze(fam, p, {GaussianityMethod::quadrature}).g2;
    worst_dual = std::max(worst_dual, std::abs(g_ov - g_du));
    worst_quad = std::max(worst_quad, std::abs(g_ov - g_qu));
  }
  o.require(worst_dual <= kTolDual, "overlap vs dual " + num(worst_dual));
  o.require(worst_quad <= kTolQuadrature, "overlap vs quadrature " + num(worst_quad));
  o.detail = "20 configs, max overlap/dual " + num(worst_dual) + ", overlap/quadrature " + num(worst_quad) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome soundness() {
  Outcome o;
  double worst_vac = 0.0;
  int eb_checked = 0, nu_checked = 0;
  for (double l : {0.0, 0.2, 0.5, 0.7})
    for (double eta : {0.0, 0.5, 1.5})
      for (double mu : {0.0, 0.8, 1.9}) {
        const auto v = analyze(StateFamily::vacuum(), {1, l, eta, mu});
        worst_vac = std::max(worst_vac, std::abs(v.g2 - 1.0));
        o.require(v.zone != Zone::improved_detected, "vacuum configuration flagged beyond Duan-Simon");
      }
  o.require(worst_vac <= kTolVacuumG2, "vacuum g2 defect " + num(worst_vac));

  for (double a : {1.0, 3.0, 5.0})
    for (double l : {0.1, 0.4, 0.7})
      for (auto [eta, mu] : {std::pair{2.0, 0.0}, {0.0, 2.0}, {2.5, 0.3}, {0.4, 3.0}, {2.0, 2.0}}) {
        const StateFamily fam = StateFamily::fock(static_cast<int>((a - 1.0) / 2.0));
        const auto v = analyze(fam, {a, l, eta, mu});
        ++eb_checked;
        o.require(v.eb_flag && v.zone == Zone::undetected, "eb configuration detected at a=" + num(a) +
                                                               " lambda=" + num(l));
      }

  for (double a : {1.0, 3.0, 5.0})
    for (double l : {0.1, 0.3, 0.5, 0.7, 0.9})
      for (double eta : {0.0, 0.5, 1.0, 1.5, 1.99}) {
        const double nu = symplectic_spectrum(partial_transpose(circuit_covariance({a, l, eta, 0.0}))).nu_minus;
        ++nu_checked;
        o.require(nu < 1.0, "mu = 0 gives nu_minus " + num(nu) + " at a=" + num(a) + " lambda=" + num(l) +
                                " eta=" + num(eta));
      }

  for (int n = 1; n <= 12; ++n) {
    const auto v = noon_control(n);
    o.require(v.zone == Zone::undetected, "NOON N=" + std::to_string(n) + " detected");
  }
  o.detail = "vacuum g2 defect " + num(worst_vac) + ", " + std::to_string(eb_checked) + " eb configs, " +
             std::to_string(nu_checked) + " mu=0 configs, NOON 1..12" + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome fig5() {
  Outcome o;
  const CircuitParams base(3, 0.5, 0.1, 0.7);
  struct Spec {
    const char* name;
    StateFamily family;
    SweepParam vary;
    std::vector<double> values;
  };
  const auto range = [](double from, double to, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(from + (to - from) * i / (n - 1));
    return v;
  };
  const std::vector<Spec> sweeps{
      {"a (pdc)", StateFamily::pdc(), SweepParam::a, range(3.0, 7.0, 21)},
      {"eta (fock)", StateFamily::fock(1), SweepParam::eta, range(0.1, 1.5, 15)},
      {"mu (fock)", StateFamily::fock(1), SweepParam::mu, range(0.7, 1.5, 17)},
      {"lambda (fock)", StateFamily::fock(1), SweepParam::lambda, range(0.5, 0.05, 10)},
      {"eta (pdc)", StateFamily::pdc(), SweepParam::eta, range(0.1, 1.5, 15)},
      {"mu (pdc)", StateFamily::pdc(), SweepParam::mu, range(0.7, 1.5, 17)},
      {"lambda (pdc)", StateFamily::pdc(), SweepParam::lambda, range(0.5, 0.05, 10)},
  };
  std::string crossings;
  for (const auto& s : sweeps) {
    const auto r1 = sweep(s.family, base, s.vary, s.values);
    const auto r2 = sweep(s.family, base, s.vary, s.values);
    bool increasing = true, single_crossing = true, left = false;
    for (std::size_t i = 0; i < r1.points.size(); ++i) {
      const auto& v = r1.points[i].verdict;
      if (i > 0 && !(v.nu_minus > r1.points[i - 1].verdict.nu_minus)) increasing = false;
      const bool below = v.nu_minus < v.nu_th;
      if (!below) left = true;
      if (left && below) single_crossing = false;
    }
    o.require(increasing, std::string(s.name) + ": nu_minus not strictly increasing");
    o.require(r1.points.front().verdict.nu_minus < r1.points.front().verdict.nu_th,
              std::string(s.name) + ": base point not below nu_th");
    o.require(single_crossing, std::string(s.name) + ": re-enters the detected region");
    o.require(r1.crossing.has_value() && r2.crossing.has_value(), std::string(s.name) + ": no crossing in range");
    if (r1.crossing && r2.crossing) {
      o.require(std::abs(*r1.crossing - *r2.crossing) <= kTolCrossing, std::string(s.name) + ": unstable crossing");
      const CircuitParams at = s.vary == SweepParam::a      ? base.with_a(*r1.crossing)
                               : s.vary == SweepParam::eta  ? base.with_eta(*r1.crossing)
                               : s.vary == SweepParam::mu   ? base.with_mu(*r1.crossing)
                                                            : base.with_lambda(*r1.crossing);
      const auto v = analyze(s.family, at);
      o.require(std::abs(v.nu_minus - v.nu_th) <= 1e-6, std::string(s.name) + ": crossing residual " +
                                                           num(v.nu_minus - v.nu_th));
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%s=%.6f", crossings.empty() ? "" : ", ", s.name, *r1.crossing);
      crossings += buf;
    }
  }
  o.detail = "crossings " + crossings + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  report(1, "reference table nu_minus", table1_nu);
  report(2, "reference table g2 (overlap and dual circuit)", table1_g2);
  report(3, "path-state constants", path_state);
  report(4, "threshold curve", threshold);
  report(5, "Gaussianity property suite", appendix_a);
  report(6, "cross-oracle g2 equivalence", cross_oracle);
  report(7, "soundness controls", soundness);
  report(8, "parameter sweeps", fig5);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
