#pragma once

// Lower bound nu_th(g) on the smallest symplectic eigenvalue of a mode with
// degree of Gaussianity g. For g < 1 the curve is a chain of segments, segment n
// being the binary mixtures of |n> and |n+1>.

#include "cvsep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cvsep {

inline constexpr int kDefaultSegmentCap = 50;

struct ThresholdPoint {
  double g;
  double nu_th;
  std::optional<int> n;     ///< segment index, empty on the g >= 1 branch
  std::optional<double> r;  ///< mixing parameter in [0, 1)
  bool segments_overlap = false;
};

/// g along segment n at mixing r, where nu = 2n + 3 - 2r.
inline double threshold_segment_g(int n, double r) {
  if (n < 0) throw InvalidArgument("segment index must be non-negative");
  if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument("segment parameter r must lie in [0, 1]");
  const double nu = 2.0 * n + 3.0 - 2.0 * r;
  const double q = (nu - 1.0) / (nu + 1.0);
  return 2.0 * nu / (nu + 1.0) * std::pow(q, n) * (q * (1.0 - r) + r);
}

/// Closed form valid for 3/4 <= g <= 1 (segment n = 0).
inline double nu_threshold_closed_form(double g) {
  if (!(g >= 0.75 && g <= 1.0)) throw InvalidArgument("closed-form threshold needs 3/4 <= g <= 1");
  return (2.0 - g + 2.0 * std::sqrt(1.0 - g)) / g;
}

namespace detail {

struct SegmentHit {
  int n;
  double r;
  double nu;
};

/// Every (n, r) with threshold_segment_g(n, r) = g, r in [0, 1), n <= n_max.
inline std::vector<SegmentHit> segment_hits(double g, int n_max) {
  constexpr int kSamples = 400;
  std::vector<SegmentHit> hits;
  for (int n = 0; n <= n_max; ++n) {
    const auto f = [&](double r) { return threshold_segment_g(n, r) - g; };
    double r0 = 0.0, f0 = f(0.0);
    if (f0 == 0.0) hits.push_back({n, 0.0, 2.0 * n + 3.0});
    for (int i = 1; i <= kSamples; ++i) {
      const double r1 = static_cast<double>(i) / kSamples;
      const double f1 = f(r1);
      // r = 1 itself belongs to the next segment down (its r = 0 point).
      if (f1 == 0.0 && i < kSamples) {
        hits.push_back({n, r1, 2.0 * n + 3.0 - 2.0 * r1});
      } else if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
        double lo = r0, hi = r1, flo = f0;
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
        const double r = 0.5 * (lo + hi);
        if (r < 1.0) hits.push_back({n, r, 2.0 * n + 3.0 - 2.0 * r});
      }
      r0 = r1;
      f0 = f1;
    }
  }
  return hits;
}

}  // namespace detail

/// Inverts the parametric segment family for g < 1, returning the minimum nu over
/// all segments attaining g.
inline ThresholdPoint nu_threshold_parametric(double g, int n_max = kDefaultSegmentCap) {
  if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("g must be positive and finite");
  if (g >= 1.0) throw InvalidArgument("parametric threshold is defined for g < 1");
  const auto hits = detail::segment_hits(g, n_max);
  if (hits.empty())
    throw InvalidArgument("no threshold segment with n <= " + std::to_string(n_max) +
                          " attains g = " + std::to_string(g));
  ThresholdPoint best{g, std::numeric_limits<double>::infinity(), std::nullopt, std::nullopt};
  int first_segment = hits.front().n;
  bool several = false;
  for (const auto& h : hits) {
    if (h.n != first_segment) several = true;
    if (h.nu < best.nu_th) {
      best.nu_th = h.nu;
      best.n = h.n;
      best.r = h.r;
    }
  }
  best.segments_overlap = several;
  return best;
}

inline ThresholdPoint threshold_point(double g, int n_max = kDefaultSegmentCap) {
  if (!(g > 0.0) || !std::isfinite(g)) throw InvalidArgument("g must be positive and finite");
  if (g >= 2.0) throw InvalidArgument("threshold undefined for g >= 2");
  if (g >= 1.0) return {g, g / (2.0 - g), std::nullopt, std::nullopt};
  if (g >= 0.75) {
    const double nu = nu_threshold_closed_form(g);
    return {g, nu, 0, 0.5 * (3.0 - nu)};
  }
  return nu_threshold_parametric(g, n_max);
}

inline double nu_threshold(double g) { return threshold_point(g).nu_th; }

/// `steps` evenly spaced samples over [g_min, g_max], plus g = 1 when inside the range.
inline std::vector<ThresholdPoint> threshold_curve(double g_min, double g_max, int steps,
                                                   std::span<const double> extra = {}) {
  if (!(g_min > 0.0) || !(g_max < 2.0) || !(g_min < g_max))
    throw InvalidArgument("threshold range must satisfy 0 < g_min < g_max < 2");
  if (steps < 2) throw InvalidArgument("threshold curve needs at least two steps");
  std::vector<double> gs;
  for (int i = 0; i < steps; ++i) gs.push_back(g_min + (g_max - g_min) * i / (steps - 1));
  gs.back() = g_max;
  if (g_min <= 1.0 && g_max >= 1.0) gs.push_back(1.0);
  for (double g : extra) gs.push_back(g);
  std::sort(gs.begin(), gs.end());
  gs.erase(std::unique(gs.begin(), gs.end()), gs.end());
  std::vector<ThresholdPoint> out;
  out.reserve(gs.size());
  for (double g : gs) out.push_back(threshold_point(g));
  return out;
}

}  // namespace cvsep
