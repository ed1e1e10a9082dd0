#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kleinian/counting.hpp"
#include "kleinian/exponent.hpp"
#include "kleinian/group.hpp"
#include "kleinian/parallel.hpp"

namespace kleinian {

struct BodyPair {
  StabilizedBody minus;
  StabilizedBody plus;
};

struct FamilyMember {
  double k;
  GroupSpec group;
  std::optional<BodyPair> bodies;
};

/// Groups G_k converging to a limit group, evaluated with shared cutoffs.
struct FamilySpec {
  std::vector<FamilyMember> members;
  FamilyMember limit;
  double T = 14.0;
  double L = 12.0;
  /// Loop and ortho fit window; [T/2, T] when absent.
  std::optional<std::pair<double, double>> window;
  std::size_t node_budget = 200'000'000;

  void validate() const {
    if (members.empty()) throw ValidationError("a family needs at least one member");
    if (!(T > 0.0 && L > 0.0)) throw ValidationError("cutoffs T and L must be positive");
    for (const FamilyMember& m : members) {
      if (m.group.dim() != limit.group.dim()) throw DimensionError("family members live in different dimensions");
      if (m.bodies.has_value() != limit.bodies.has_value())
        throw ValidationError("bodies must be given for every member or for none");
    }
  }
};

struct SweepRow {
  double k = 0.0;
  bool is_limit = false;
  bool failed = false;
  std::string failure;
  ExponentEstimate exponent;
  double lambda0 = 0.0;
  std::optional<ExpFit> loop_fit;
  std::size_t geodesic_count = 0;
  double geodesic_ratio = 0.0;
  std::optional<ExpFit> ortho_fit;
  std::vector<std::string> certificates;
};

/// Absolute differences from the limit row; NaN where a value is missing.
struct SweepGaps {
  double delta_series = NAN;
  double delta_growth = NAN;
  double lambda0 = NAN;
  double loop_C = NAN;
  double loop_delta = NAN;
  double geodesic_ratio = NAN;
  double ortho_C = NAN;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  SweepRow limit;
  std::vector<SweepGaps> gaps;
};

struct SweepOptions {
  int workers = 1;
};

namespace detail {

inline SweepRow evaluate_member(const FamilyMember& m, bool is_limit, const FamilySpec& family) {
  SweepRow row;
  row.k = m.k;
  row.is_limit = is_limit;
  TraversalOptions topt;
  topt.node_budget = family.node_budget;
  const auto [lo, hi] = family.window.value_or(std::make_pair(family.T / 2.0, family.T));
  try {
    row.exponent = estimate_delta(m.group, family.T, topt);
    row.certificates.push_back(row.exponent.certificate.to_string());
    row.lambda0 = lambda0_from_delta(row.exponent.delta_series, to_int(m.group.dim()));
    const CountSeries loops = count_loops(m.group, m.group.basepoint(), family.T, topt);
    row.loop_fit = fit_exponential(loops, lo, hi);
    const CountSeries geo = count_primitive_geodesics(m.group, family.L, topt);
    row.certificates.push_back(geo.certificate.to_string());
    row.geodesic_count = geo.size();
    if (row.exponent.delta_series > 0.0)
      row.geodesic_ratio = prime_geodesic_ratio(geo, row.exponent.delta_series, family.L);
    if (m.bodies) {
      const CountSeries ortho = count_ortho(m.group, m.bodies->minus, m.bodies->plus, family.T, topt);
      row.certificates.push_back(ortho.certificate.to_string());
      row.ortho_fit = fit_exponential(ortho, lo, hi);
    }
  } catch (const Error& e) {
    row.failed = true;
    row.failure = std::string(e.kind()) + ": " + e.what();
  }
  return row;
}

}  // namespace detail

/// Evaluates every member and the limit independently, then compares each
/// row with the limit row.
inline SweepReport run_sweep(const FamilySpec& family, const SweepOptions& opt = {}) {
  family.validate();
  const std::size_t n = family.members.size();
  std::vector<SweepRow> rows(n + 1);
  parallel_for(n + 1, opt.workers, [&](std::size_t i) {
    rows[i] = i < n ? detail::evaluate_member(family.members[i], false, family)
                    : detail::evaluate_member(family.limit, true, family);
  });
  SweepReport report;
  report.limit = rows.back();
  rows.pop_back();
  report.rows = std::move(rows);
  const SweepRow& lim = report.limit;
  for (const SweepRow& r : report.rows) {
    SweepGaps g;
    if (!r.failed && !lim.failed) {
      g.delta_series = std::abs(r.exponent.delta_series - lim.exponent.delta_series);
      g.delta_growth = std::abs(r.exponent.delta_growth - lim.exponent.delta_growth);
      g.lambda0 = std::abs(r.lambda0 - lim.lambda0);
      if (r.loop_fit && lim.loop_fit) {
        g.loop_C = std::abs(r.loop_fit->C_hat - lim.loop_fit->C_hat);
        g.loop_delta = std::abs(r.loop_fit->delta_hat - lim.loop_fit->delta_hat);
      }
      g.geodesic_ratio = std::abs(r.geodesic_ratio - lim.geodesic_ratio);
      if (r.ortho_fit && lim.ortho_fit) g.ortho_C = std::abs(r.ortho_fit->C_hat - lim.ortho_fit->C_hat);
    }
    report.gaps.push_back(g);
  }
  return report;
}

/// Whether a gap sequence is weakly decreasing up to the slack, ignoring
/// missing values.
inline bool weakly_decreasing(const std::vector<double>& gaps, double slack) {
  double prev = NAN;
  for (double g : gaps) {
    if (std::isnan(g)) continue;
    if (!std::isnan(prev) && g > prev + slack) return false;
    prev = g;
  }
  return true;
}

}  // namespace kleinian
