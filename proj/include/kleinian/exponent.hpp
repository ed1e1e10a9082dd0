#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "kleinian/error.hpp"
#include "kleinian/group.hpp"

namespace kleinian {

/// Truncated Poincare series: sum of exp(-s d) over sorted displacements up
/// to t (all of them by default). The identity contributes 1.
inline double poincare_partial_sum(const std::vector<double>& displacements, double s,
                                   double t = INFINITY) {
  if (!(s >= 0.0)) throw ParameterError("exponent s must be nonnegative");
  double sum = 0.0;
  for (double d : displacements) {
    if (d > t) break;
    sum += std::exp(-s * d);
  }
  return sum;
}

inline double poincare_partial_sum(const OrbitBatch& batch, double s) {
  if (!(s >= 0.0)) throw ParameterError("exponent s must be nonnegative");
  double sum = 0.0;
  for (const OrbitEntry& e : batch.entries) sum += std::exp(-s * e.displacement);
  return sum;
}

struct ExponentOptions {
  /// s is subcritical when the series grows at least this much from T/2 to T.
  double doubling_threshold = 2.0;
  int bisection_steps = 40;
  std::size_t confident_size = 1000;
};

struct ExponentEstimate {
  double delta_series = 0.0;
  double delta_growth = 0.0;
  double T_max = 0.0;
  double agreement_gap = 0.0;
  std::size_t orbit_size = 0;
  bool low_confidence = false;
  /// Cyclic group generated by a loxodromic: the orbit grows linearly and
  /// both estimates are reported as 0.
  bool elementary = false;
  Certificate certificate;
};

/// Integer sample points in [lo, hi], or 8 evenly spaced ones when the
/// window holds fewer than 8 integers.
inline std::vector<double> fit_grid(double lo, double hi) {
  std::vector<double> grid;
  for (double t = std::ceil(lo); t <= hi; t += 1.0) grid.push_back(t);
  if (grid.size() >= 8) return grid;
  grid.clear();
  for (int i = 0; i < 8; ++i) grid.push_back(lo + (hi - lo) * i / 7.0);
  return grid;
}

/// Least-squares slope and intercept of y against x.
inline std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

/// Number of sorted values at most t.
inline std::size_t count_at_most(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

/**
 * Series estimate: bisection on s for the point where the truncated series
 * stops doubling between cutoffs T/2 and T. Growth estimate: slope of
 * log N(t) over the window [T/2, T].
 */
inline ExponentEstimate estimate_delta(const DisplacementSet& orbit, const GroupSpec& spec,
                                       const ExponentOptions& opt = {}) {
  const double T = orbit.cutoff;
  const double top = static_cast<double>(to_int(spec.dim()) - 1);
  const std::vector<double>& d = orbit.values;
  ExponentEstimate est;
  est.T_max = T;
  est.orbit_size = d.size();
  est.certificate = orbit.certificate;
  est.low_confidence = d.size() < opt.confident_size;
  est.elementary = spec.rank() == 1 && is_loxodromic(classify(spec.generators().front()));
  if (est.elementary) return est;

  auto ratio = [&](double s) {
    double half = 0.0, full = 0.0;
    for (double x : d) {
      const double w = std::exp(-s * x);
      full += w;
      if (x <= T / 2.0) half += w;
    }
    return full / half;
  };
  double lo = 0.0, hi = top;
  if (ratio(lo) < opt.doubling_threshold) {
    hi = 0.0;
  } else if (ratio(hi) >= opt.doubling_threshold) {
    lo = top;
  } else {
    for (int i = 0; i < opt.bisection_steps; ++i) {
      const double mid = 0.5 * (lo + hi);
      (ratio(mid) >= opt.doubling_threshold ? lo : hi) = mid;
    }
  }
  est.delta_series = 0.5 * (lo + hi);

  std::vector<double> ts, logs;
  for (double t : fit_grid(T / 2.0, T)) {
    ts.push_back(t);
    logs.push_back(std::log(static_cast<double>(count_at_most(d, t))));
  }
  est.delta_growth = std::clamp(linear_fit(ts, logs).first, 0.0, top);
  est.agreement_gap = std::abs(est.delta_series - est.delta_growth);
  return est;
}

inline ExponentEstimate estimate_delta(const GroupSpec& spec, double T, const TraversalOptions& topt = {},
                                       const ExponentOptions& opt = {}) {
  return estimate_delta(orbit_displacements(spec, T, Pruned{}, topt), spec, opt);
}

/// Bottom of the spectrum from the critical exponent in dimension n.
inline double lambda0_from_delta(double delta, int n) {
  if (n != 2 && n != 3) throw ParameterError("dimension must be 2 or 3");
  const double top = n - 1.0;
  if (!(delta >= 0.0 && delta <= top)) throw ParameterError("delta must lie in [0, n-1]");
  if (delta <= top / 2.0) return top * top / 4.0;
  return delta * (top - delta);
}

}  // namespace kleinian
