#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kleinian/counting.hpp"
#include "kleinian/exponent.hpp"
#include "kleinian/group.hpp"
#include "kleinian/hypgeom.hpp"
#include "kleinian/measures.hpp"
#include "kleinian/mobius.hpp"
#include "kleinian/sweep.hpp"

namespace kleinian {

struct SelftestResult {
  std::string name;
  bool passed;
  std::string detail;
};

namespace detail {

inline SelftestResult near_check(std::string name, double got, double want, double tol) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "got %.12g, want %.12g", got, want);
  return {std::move(name), std::abs(got - want) <= tol, buf};
}

inline SelftestResult count_check(std::string name, std::size_t got, std::size_t want) {
  return {std::move(name), got == want, "got " + std::to_string(got) + ", want " + std::to_string(want)};
}

}  // namespace detail

/// The closed-form and hand-derived examples of every module, each an
/// independent check.
inline std::vector<SelftestResult> run_selftest() {
  using detail::count_check;
  using detail::near_check;
  const double ln2 = std::log(2.0), ln4 = std::log(4.0);
  auto p2 = [](double x, double h) { return HPoint::interior(Dim::H2, x, h); };
  auto b2 = [](double x) { return HPoint::boundary(Dim::H2, x); };
  const HPoint i2 = p2(0, 1);
  const HPoint inf2 = HPoint::infinity(Dim::H2);
  const MobiusMap g4(Dim::H2, 2.0, 0.0, 0.0, 0.5);
  const GroupSpec cyclic({g4}, i2);
  const MobiusMap a(Dim::H2, std::cosh(1.0), std::sinh(1.0), std::sinh(1.0), std::cosh(1.0));
  const MobiusMap b(Dim::H2, std::exp(1.0), 0.0, 0.0, std::exp(-1.0));
  const GroupSpec schottky({a, b}, i2);

  std::vector<std::function<SelftestResult()>> checks = {
      [&] { return near_check("dist(i, 2i) = log 2", dist(i2, p2(0, 2)), ln2, 1e-9); },
      [&] { return near_check("dist(i, 1+i) = acosh(3/2)", dist(i2, p2(1, 1)), std::acosh(1.5), 1e-9); },
      [&] { return near_check("busemann(inf; i, ei) = 1", busemann_cocycle(inf2, i2, p2(0, std::numbers::e)), 1.0, 1e-9); },
      [&] { return near_check("busemann(0; i, 2i) = -log 2", busemann_cocycle(b2(0), i2, p2(0, 2)), -ln2, 1e-9); },
      [&] {
        return near_check("dist(2i, vertical line) = 0",
                          dist_point_to_line(p2(0, 2), GeodesicLine(b2(0), inf2)), 0.0, 1e-9);
      },
      [&] {
        return near_check("horoball(0,1) to horoball(inf,4) = 2 log 2",
                          body_distance(ConvexBody::horoball(b2(0), 1.0), ConvexBody::horoball(inf2, 4.0)),
                          2.0 * ln2, 1e-9);
      },
      [&] { return near_check("translation length of diag(2,1/2) = log 4", translation_length(g4), ln4, 1e-9); },
      [&] {
        return count_check("parabolic z+1 classified as parabolic",
                           is_loxodromic(classify(MobiusMap(Dim::H2, 1.0, 1.0, 0.0, 1.0))) ? 1 : 0, 0);
      },
      [&] { return count_check("cyclic orbit at T=3 has 5 elements", enumerate_orbit(cyclic, 3.0).size(), 5); },
      [&] {
        const auto n = enumerate_orbit(cyclic, 10.0).size();
        return count_check("cyclic orbit count 2 floor(T/tau) + 1 at T=10",
                           n, 2 * static_cast<std::size_t>(std::floor(10.0 / ln4)) + 1);
      },
      [&] {
        const double s = poincare_partial_sum(enumerate_orbit(cyclic, 40.0), 1.0);
        return near_check("cyclic Poincare series at s=1 is 5/3", s, 5.0 / 3.0, 1e-6);
      },
      [&] {
        const auto est = estimate_delta(cyclic, 30.0);
        return SelftestResult{"cyclic exponent is 0 with elementary flag",
                              est.elementary && std::abs(est.delta_series) <= 0.02, ""};
      },
      [&] { return near_check("lambda0 at delta=0.3 in H2 is 1/4", lambda0_from_delta(0.3, 2), 0.25, 1e-12); },
      [&] { return near_check("lambda0 at delta=1.5 in H3 is 3/4", lambda0_from_delta(1.5, 3), 0.75, 1e-12); },
      [&] {
        const auto classes = conjugacy_classes_by_word_length(schottky, 2);
        return count_check("rank 2 classes of word length <= 2", classes.size(), 6);
      },
      [&] {
        std::size_t prim = 0;
        for (const auto& c : conjugacy_classes_by_word_length(schottky, 2)) prim += c.primitive;
        return count_check("rank 2 primitive classes of word length <= 2", prim, 4);
      },
      [&] {
        const CountSeries s = count_loops(cyclic, i2, 3.0);
        const bool ok = s.size() == 4 && std::abs(s.entries[0].length - ln4) < 1e-9 &&
                        std::abs(s.entries[1].length - ln4) < 1e-9 &&
                        std::abs(s.entries[2].length - 2 * ln4) < 1e-9 &&
                        std::abs(s.entries[3].length - 2 * ln4) < 1e-9;
        return SelftestResult{"cyclic loop lengths {log 4, log 4, log 16, log 16}", ok, ""};
      },
      [&] {
        const CountSeries s = count_primitive_geodesics(cyclic, 3.0);
        const bool ok = s.size() == 1 && std::abs(s.entries[0].length - ln4) < 1e-9;
        return SelftestResult{"cyclic group has a single primitive geodesic", ok, ""};
      },
      [&] {
        const StabilizedBody ball{ConvexBody::ball(i2, 0.25), {}};
        const CountSeries loops = count_loops(schottky, i2, 6.0);
        const CountSeries ortho = count_ortho(schottky, ball, ball, 5.5);
        bool ok = ortho.size() == loops.count(6.0);
        for (std::size_t k = 0; ok && k < ortho.size(); ++k)
          ok = std::abs(ortho.entries[k].length - (loops.entries[k].length - 0.5)) < 1e-9;
        return SelftestResult{"ball translation identity on the Schottky group", ok, ""};
      },
      [&] {
        const double m = transport_mass(ps_estimate(schottky, 0.74, 10.0), i2, i2);
        return near_check("transported mass at the reference point is 1", m, 1.0, 1e-12);
      },
      [&] {
        FamilySpec f{{{1.0, schottky, std::nullopt}, {2.0, schottky, std::nullopt}}, {0.0, schottky, std::nullopt}};
        f.T = 8.0;
        f.L = 6.0;
        const SweepReport r = run_sweep(f);
        double worst = 0.0;
        for (const SweepGaps& g : r.gaps)
          for (double v : {g.delta_series, g.delta_growth, g.lambda0, g.loop_C, g.geodesic_ratio})
            worst = std::max(worst, std::isnan(v) ? INFINITY : v);
        return near_check("constant family has zero gaps", worst, 0.0, 1e-9);
      },
  };

  std::vector<SelftestResult> out;
  for (const auto& check : checks) {
    try {
      out.push_back(check());
    } catch (const std::exception& e) {
      out.push_back({"(check threw)", false, e.what()});
    }
  }
  return out;
}

}  // namespace kleinian
