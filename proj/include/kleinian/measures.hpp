#pragma once

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kleinian/error.hpp"
#include "kleinian/group.hpp"
#include "kleinian/hypgeom.hpp"

namespace kleinian {

struct BoundaryAtom {
  HPoint point;
  double weight;
};

/// Atomic approximation of a Patterson-Sullivan measure seen from a
/// reference point.
struct EmpiricalBoundaryMeasure {
  HPoint reference;
  double delta = 0.0;
  double cutoff = 0.0;
  /// Atoms come from orbit points with displacement in [shell_start, cutoff].
  double shell_start = 0.0;
  std::vector<BoundaryAtom> atoms;
  /// Unnormalized total weight sum of exp(-delta d) before scaling to 1.
  double raw_total = 0.0;

  Dim dim() const { return reference.dim(); }
  double total() const {
    double t = 0.0;
    for (const BoundaryAtom& a : atoms) t += a.weight;
    return t;
  }
};

/// Atoms at the shadows of the orbit points of the batch with displacement
/// at least `shell_start` (T/2 when negative), with weights
/// exp(-delta d(x0, g x0)), normalized to total mass one. Points deep in the
/// ball dominate the truncated series and carry a visible bias toward the
/// generators; the outer shell is close to invariant.
inline EmpiricalBoundaryMeasure ps_estimate(const OrbitBatch& batch, const HPoint& x0, double delta,
                                            double shell_start = -1.0) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  if (shell_start < 0.0) shell_start = batch.cutoff / 2.0;
  EmpiricalBoundaryMeasure mu{x0, delta, batch.cutoff, shell_start, {}, 0.0};
  for (const OrbitEntry& e : batch.entries) {
    if (e.word.empty() || e.displacement < shell_start) continue;
    mu.atoms.push_back({shadow_point(x0, apply(e.map, x0)), std::exp(-delta * e.displacement)});
    mu.raw_total += mu.atoms.back().weight;
  }
  if (mu.atoms.empty()) throw InsufficientDataError("no orbit points in the shell");
  for (BoundaryAtom& a : mu.atoms) a.weight /= mu.raw_total;
  return mu;
}

inline EmpiricalBoundaryMeasure ps_estimate(const GroupSpec& spec, double delta, double T,
                                            const TraversalOptions& opt = {}, double shell_start = -1.0) {
  if (!(delta > 0.0)) throw ParameterError("delta must be positive");
  return ps_estimate(enumerate_orbit(spec, T, Pruned{}, opt), spec.basepoint(), delta, shell_start);
}

/// Total mass at `to` of the conformal density whose value at `from` is mu:
/// the integral of exp(-delta beta_xi(to, from)).
inline double transport_mass(const EmpiricalBoundaryMeasure& mu, const HPoint& from, const HPoint& to) {
  require_interior(from, "transport origin");
  require_interior(to, "transport target");
  double total = 0.0;
  for (const BoundaryAtom& a : mu.atoms) total += a.weight * std::exp(-mu.delta * busemann_cocycle(a.point, to, from));
  return total;
}

/// The same density viewed from `to`: atoms reweighted by exp(-delta beta),
/// without renormalization.
inline EmpiricalBoundaryMeasure rebase(const EmpiricalBoundaryMeasure& mu, const HPoint& to) {
  EmpiricalBoundaryMeasure out = mu;
  out.reference = to;
  for (BoundaryAtom& a : out.atoms) a.weight *= std::exp(-mu.delta * busemann_cocycle(a.point, to, mu.reference));
  return out;
}

/// Image of the measure under g, reweighted back to the reference point so
/// that it can be compared with the original; equal for invariant densities.
inline EmpiricalBoundaryMeasure pushforward(const EmpiricalBoundaryMeasure& mu, const MobiusMap& g) {
  EmpiricalBoundaryMeasure out = mu;
  const HPoint gx = apply(g, mu.reference);
  for (BoundaryAtom& a : out.atoms) {
    a.point = apply(g, a.point);
    a.weight *= std::exp(-mu.delta * busemann_cocycle(a.point, mu.reference, gx));
  }
  return out;
}

/// Predicted ratio C_x / C_y of loop-counting constants at two basepoints
/// from the Patterson-Sullivan masses there (each counted at both ends of a
/// loop) and the ratio of Bowen-Margulis masses of the two groups.
inline double loop_constant_prediction(std::pair<double, double> mu_masses, double delta,
                                       double bm_mass_relative = 1.0) {
  if (!(mu_masses.first > 0.0 && mu_masses.second > 0.0 && delta > 0.0 && bm_mass_relative > 0.0))
    throw ParameterError("masses, delta and the relative Bowen-Margulis mass must be positive");
  const double r = mu_masses.first / mu_masses.second;
  return r * r / bm_mass_relative;
}

// ---------------------------------------------------------------------------
// Boundary partitions

/// Index of the cell containing xi in the visual partition at x: nbins
/// equal arcs of the visual circle in H2, an nbins x nbins grid in polar
/// and azimuthal angle in H3.
inline std::size_t visual_cell(const HPoint& x, const HPoint& xi, std::size_t nbins = 16) {
  const auto v = visual_direction(x, xi);
  constexpr double pi = std::numbers::pi;
  auto bin = [nbins](double u) {
    const auto k = static_cast<std::size_t>(std::floor(u * static_cast<double>(nbins)));
    return std::min(k, nbins - 1);
  };
  if (x.dim() == Dim::H2) {
    double angle = std::atan2(v[2], v[0]);
    if (angle < 0.0) angle += 2.0 * pi;
    return bin(angle / (2.0 * pi));
  }
  const double polar = std::acos(std::clamp(v[2], -1.0, 1.0));
  double azimuth = std::atan2(v[1], v[0]);
  if (azimuth < 0.0) azimuth += 2.0 * pi;
  return bin(polar / pi) * nbins + bin(azimuth / (2.0 * pi));
}

inline std::vector<double> histogram(const EmpiricalBoundaryMeasure& mu, std::size_t nbins = 16) {
  std::vector<double> h(mu.dim() == Dim::H2 ? nbins : nbins * nbins, 0.0);
  for (const BoundaryAtom& a : mu.atoms) h[visual_cell(mu.reference, a.point, nbins)] += a.weight;
  return h;
}

/// L1 distance between the visual histograms of two measures with a common
/// reference point.
inline double histogram_distance(const EmpiricalBoundaryMeasure& a, const EmpiricalBoundaryMeasure& b,
                                 std::size_t nbins = 16) {
  const auto ha = histogram(a, nbins), hb = histogram(b, nbins);
  double d = 0.0;
  for (std::size_t i = 0; i < ha.size(); ++i) d += std::abs(ha[i] - hb[i]);
  return d;
}

/// Angle between the visual directions of two boundary points seen from x.
inline double visual_angle(const HPoint& x, const HPoint& p, const HPoint& q) {
  const auto u = visual_direction(x, p), v = visual_direction(x, q);
  const double c = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
  return std::acos(std::clamp(c, -1.0, 1.0));
}

/// CSV rows: horizontal coordinate of the atom (or inf), visual direction
/// at the reference point, weight.
inline void write_measure_csv(std::ostream& out, const EmpiricalBoundaryMeasure& mu) {
  out << "re,im,dir_x,dir_y,dir_vertical,weight\n";
  char buf[256];
  for (const BoundaryAtom& a : mu.atoms) {
    const auto v = visual_direction(mu.reference, a.point);
    if (a.point.is_infinity())
      std::snprintf(buf, sizeof buf, "inf,inf,%.17g,%.17g,%.17g,%.17g\n", v[0], v[1], v[2], a.weight);
    else
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", a.point.horizontal().real(),
                    a.point.horizontal().imag(), v[0], v[1], v[2], a.weight);
    out << buf;
  }
}

}  // namespace kleinian
