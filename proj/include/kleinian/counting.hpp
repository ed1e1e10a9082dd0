#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "kleinian/error.hpp"
#include "kleinian/exponent.hpp"
#include "kleinian/group.hpp"
#include "kleinian/hypgeom.hpp"

namespace kleinian {

enum class SeriesKind { Loops, PrimitiveGeodesics, Ortho };

inline const char* kind_name(SeriesKind k) {
  switch (k) {
    case SeriesKind::Loops: return "loops";
    case SeriesKind::PrimitiveGeodesics: return "geodesics";
    default: return "ortho";
  }
}

struct CountEntry {
  double length;
  Word word;
};

/// Sorted lengths with the group element (or class representative) behind
/// each one.
struct CountSeries {
  SeriesKind kind = SeriesKind::Loops;
  double cutoff = 0.0;
  std::vector<CountEntry> entries;
  Certificate certificate;
  /// Geodesic series list each unoriented geodesic once unless oriented.
  bool oriented = false;
  /// Ortho series: translates that overlapped D- and were skipped.
  std::size_t overlaps_skipped = 0;

  std::size_t size() const { return entries.size(); }

  /// N(t) = number of lengths at most t.
  std::size_t count(double t) const {
    return static_cast<std::size_t>(
        std::upper_bound(entries.begin(), entries.end(), t,
                         [](double v, const CountEntry& e) { return v < e.length; }) -
        entries.begin());
  }

  std::vector<double> lengths() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const CountEntry& e : entries) out.push_back(e.length);
    return out;
  }
};

namespace detail {
inline void sort_series(CountSeries& s) {
  std::sort(s.entries.begin(), s.entries.end(), [](const CountEntry& x, const CountEntry& y) {
    if (x.length != y.length) return x.length < y.length;
    return x.word < y.word;
  });
}
}  // namespace detail

/// Lengths of geodesic loops at the basepoint: displacements of the
/// non-identity orbit elements within T.
inline CountSeries count_loops(const GroupSpec& spec, const HPoint& basepoint, double T,
                               const TraversalOptions& opt = {}) {
  require_interior(basepoint, "loop basepoint");
  const OrbitBatch batch = enumerate_orbit(spec.with_basepoint(basepoint), T, Pruned{}, opt);
  CountSeries s;
  s.kind = SeriesKind::Loops;
  s.cutoff = T;
  s.certificate = batch.certificate;
  for (const OrbitEntry& e : batch.entries)
    if (!e.word.empty()) s.entries.push_back({e.displacement, e.word});
  return s;
}

/// Translation lengths of primitive closed geodesics with length at most L.
/// Unoriented geodesics are listed once; in oriented mode each appears
/// twice, as the class of w and of w^-1.
inline CountSeries count_primitive_geodesics(const GroupSpec& spec, double L, const TraversalOptions& opt = {},
                                             bool oriented = false) {
  const ClassList classes = conjugacy_classes(spec, L, opt);
  CountSeries s;
  s.kind = SeriesKind::PrimitiveGeodesics;
  s.cutoff = L;
  s.certificate = classes.certificate;
  s.oriented = oriented;
  for (const ConjugacyClass& c : classes.classes) {
    if (!c.primitive || !(c.translation_length > 0.0)) continue;
    s.entries.push_back({c.translation_length, c.representative});
    if (oriented) s.entries.push_back({c.translation_length, canonical_class(c.representative.inverse())});
  }
  detail::sort_series(s);
  return s;
}

/// Ratio N(L) delta L exp(-delta L), with N counting oriented geodesics.
inline double prime_geodesic_ratio(const CountSeries& geodesics, double delta, double L) {
  const double n = static_cast<double>(geodesics.count(L)) * (geodesics.oriented ? 1.0 : 2.0);
  return n * delta * L * std::exp(-delta * L);
}

/// A convex body together with the subgroup preserving it.
struct StabilizedBody {
  ConvexBody body;
  Stabilizer stabilizer;
};

/// How far from the basepoint the foot of a perpendicular on the body can
/// lie once the stabilizer has moved it to a fundamental domain.
inline double body_reach(const GroupSpec& spec, const StabilizedBody& b) {
  const HPoint& x0 = spec.basepoint();
  const double stab = b.stabilizer.trivial()
                          ? 0.0
                          : dist(x0, apply(spec.generator(b.stabilizer.generator), x0));
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Ball>) return dist(x0, s.center) + s.radius;
        else if constexpr (std::is_same_v<T, Horoball>)
          return 3.0 * std::abs(point_to_body(x0, b.body)) + stab;
        else return dist_point_to_line(x0, s.axis) + s.radius + stab;
      },
      b.body.shape());
}

/// Checks that every stabilizer generator maps its body to itself.
inline void check_precisely_invariant(const GroupSpec& spec, const StabilizedBody& b,
                                      double tol = Tolerances{}.invariance) {
  if (b.body.dim() != spec.dim()) throw DimensionError("body and group live in different dimensions");
  if (b.stabilizer.generator < 0 || b.stabilizer.generator > spec.rank())
    throw ParameterError("stabilizer generator out of range");
  if (b.stabilizer.trivial()) return;
  const ConvexBody moved = transform(spec.generator(b.stabilizer.generator), b.body);
  if (!approx_equal(moved, b.body, tol))
    throw ValidationError(std::string("stabilizer ") + letter_char(b.stabilizer.generator) +
                          " does not preserve the " + b.body.type_name());
}

/// Lengths of common perpendiculars from D- to the translates g D+, one per
/// double coset, kept when in (0, T]. Overlapping translates are skipped and
/// counted. The orbit search radius is T plus the reach of both bodies,
/// plus `extra_margin`.
inline CountSeries count_ortho(const GroupSpec& spec, const StabilizedBody& minus, const StabilizedBody& plus,
                               double T, const TraversalOptions& opt = {}, double extra_margin = 0.0) {
  check_precisely_invariant(spec, minus);
  check_precisely_invariant(spec, plus);
  const double R = T + body_reach(spec, minus) + body_reach(spec, plus) + extra_margin;
  const DoubleCosetList cosets = double_cosets(spec, minus.stabilizer, plus.stabilizer, R, opt);
  CountSeries s;
  s.kind = SeriesKind::Ortho;
  s.cutoff = T;
  s.certificate = cosets.certificate;
  for (const DoubleCoset& c : cosets.cosets) {
    const double len = body_distance(minus.body, transform(c.map, plus.body));
    if (!(len > 0.0)) {
      ++s.overlaps_skipped;
      continue;
    }
    if (len <= T) s.entries.push_back({len, c.representative});
  }
  detail::sort_series(s);
  return s;
}

// ---------------------------------------------------------------------------
// Exponential fits

struct ExpFit {
  double C_hat = 0.0;
  double delta_hat = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  /// Largest relative deviation of N(t) from C exp(delta t) on the grid.
  double residual = 0.0;
  /// Slope of log N against log t; polynomial growth stays small.
  double loglog_slope = 0.0;
  /// Set when the series does not look exponential (residual above 0.5 or
  /// log-log slope below 2), as for elementary groups.
  bool rejected = false;
  std::size_t samples = 0;
};

namespace detail {

// Fits t^power N(t) ~ C exp(delta t); power 0 is the plain exponential law.
inline ExpFit fit_weighted(const CountSeries& series, double t_lo, double t_hi, std::size_t min_lengths, double power) {
  if (!(t_lo > 0.0 && t_hi > t_lo && t_hi <= series.cutoff))
    throw ParameterError("fit window must satisfy 0 < t_lo < t_hi <= cutoff");
  const std::size_t inside = series.count(t_hi) - series.count(t_lo);
  if (inside < min_lengths)
    throw InsufficientDataError("only " + std::to_string(inside) + " lengths in the fit window");
  std::vector<double> ts, logn, logt;
  for (double t : fit_grid(t_lo, t_hi)) {
    const std::size_t n = series.count(t);
    if (n == 0) throw InsufficientDataError("N(t) vanishes inside the fit window");
    ts.push_back(t);
    logn.push_back(std::log(static_cast<double>(n)));
    logt.push_back(std::log(t));
  }
  std::vector<double> weighted = logn;
  for (std::size_t i = 0; i < ts.size(); ++i) weighted[i] += power * logt[i];
  const auto [slope, intercept] = linear_fit(ts, weighted);
  ExpFit fit;
  fit.delta_hat = slope;
  fit.C_hat = std::exp(intercept);
  fit.t_lo = t_lo;
  fit.t_hi = t_hi;
  fit.samples = ts.size();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double model = fit.C_hat * std::exp(fit.delta_hat * ts[i]) * std::pow(ts[i], -power);
    fit.residual = std::max(fit.residual, std::abs(std::exp(logn[i]) - model) / model);
  }
  fit.loglog_slope = linear_fit(logt, logn).first;
  fit.rejected = fit.residual > 0.5 || fit.loglog_slope < 2.0;
  return fit;
}

}  // namespace detail

inline ExpFit fit_exponential(const CountSeries& series, double t_lo, double t_hi, std::size_t min_lengths = 30) {
  return detail::fit_weighted(series, t_lo, t_hi, min_lengths, 0.0);
}

/// Fit on the default window [T/2, T].
inline ExpFit fit_exponential(const CountSeries& series) {
  return fit_exponential(series, series.cutoff / 2.0, series.cutoff);
}

/// Fit of the prime geodesic law N(t) ~ C exp(delta t) / t, i.e. a linear
/// fit of log(t N(t)). The plain exponential fit is biased low by about 1/t
/// on geodesic counts.
inline ExpFit fit_prime_geodesic(const CountSeries& series, double t_lo, double t_hi, std::size_t min_lengths = 30) {
  return detail::fit_weighted(series, t_lo, t_hi, min_lengths, 1.0);
}

inline ExpFit fit_prime_geodesic(const CountSeries& series) {
  return fit_prime_geodesic(series, series.cutoff / 2.0, series.cutoff);
}

// ---------------------------------------------------------------------------
// Export

inline void write_series_csv(std::ostream& out, const CountSeries& s) {
  out << "kind,word,length\n";
  char buf[64];
  for (const CountEntry& e : s.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.length);
    out << kind_name(s.kind) << ',' << e.word.to_string() << ',' << buf << '\n';
  }
}

}  // namespace kleinian
