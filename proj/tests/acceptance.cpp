#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "kleinian/io.hpp"
#include "kleinian/kleinian.hpp"
#include "kleinian/selftest.hpp"
#include "test_support.hpp"

using namespace kleinian;
using kleinian::testing::fixture_group;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string fixture_path(const std::string& name) { return std::string(KLEINIAN_FIXTURES) + "/" + name; }

Outcome geometry_suite() {
  std::size_t passed = 0, total = 0;
  for (const SelftestResult& r : run_selftest()) {
    ++total;
    passed += r.passed;
  }
  kleinian::testing::Sampler s(23);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Dim dim = k < 14 ? Dim::H3 : Dim::H2;
    GeodesicLine l1 = s.line(dim), l2 = s.line(dim);
    if (dim == Dim::H2) {
      const double a = s.uniform(-2, 0), b = a + s.uniform(0.3, 1.5);
      const double c = b + s.uniform(0.2, 1.0), d = c + s.uniform(0.3, 1.5);
      l1 = GeodesicLine(HPoint::boundary(dim, a), HPoint::boundary(dim, b));
      l2 = GeodesicLine(HPoint::boundary(dim, c), HPoint::boundary(dim, d));
    }
    const double r1 = s.uniform(0, 0.1), r2 = s.uniform(0, 0.1);
    const double got = body_distance(ConvexBody::tube(l1, r1), ConvexBody::tube(l2, r2));
    const double oracle = kleinian::testing::grid_line_distance(l1, l2) - (r1 + r2);
    worst = std::max(worst, std::abs(got - oracle));
  }
  return {passed == total && worst <= 1e-6,
          fmt("%zu/%zu closed-form checks, tube/tube worst deviation %.2e on 20 instances", passed, total, worst)};
}

Outcome enumeration_completeness() {
  const std::vector<std::pair<std::string, int>> groups = {{"schottky_sym.grp", 10},  {"schottky_asym.grp", 7},
                                                           {"schottky_h3.grp", 8},    {"schottky_rank3.grp", 7},
                                                           {"parabolic_h3.grp", 89}};
  std::string detail;
  bool ok = true;
  for (const auto& [name, depth] : groups) {
    const GroupSpec g = fixture_group(name);
    const OrbitBatch p = enumerate_orbit(g, 8.0);
    const OrbitBatch e = enumerate_orbit(g, 8.0, Exact{depth});
    std::set<Word> a, b;
    for (const auto& x : p.entries) a.insert(x.word);
    for (const auto& x : e.entries) b.insert(x.word);
    const bool same = a == b && e.certificate.depth_sufficient;
    ok = ok && same;
    detail += fmt("%s %zu%s ", name.c_str(), p.size(), same ? "" : " MISMATCH");
  }
  return {ok, detail};
}

Outcome parabolic_exponent() {
  const ExponentEstimate e = estimate_delta(fixture_group("parabolic_h3.grp"), 30.0);
  const bool ok = std::abs(e.delta_series - 0.5) <= 0.01 && std::abs(e.delta_growth - 0.5) <= 0.01;
  return {ok, fmt("delta_series %.4f, delta_growth %.4f, orbit %zu", e.delta_series, e.delta_growth, e.orbit_size)};
}

Outcome cross_estimator() {
  const ExponentEstimate e = estimate_delta(fixture_group("schottky_sym.grp"), 14.0);
  return {e.agreement_gap <= 0.02,
          fmt("delta_series %.4f, delta_growth %.4f, gap %.4f", e.delta_series, e.delta_growth, e.agreement_gap)};
}

Outcome counting_law(std::string& info) {
  const GroupSpec g = fixture_group("schottky_sym.grp");
  const double delta = estimate_delta(g, 14.0).delta_series;
  const ExpFit fit = fit_exponential(count_loops(g, g.basepoint(), 14.0));
  const double L = 12.0;
  const CountSeries geo = count_primitive_geodesics(g, L);
  const double at_l = prime_geodesic_ratio(geo, delta, L);
  const double at_l2 = prime_geodesic_ratio(geo, delta, L - 2.0);
  const bool ok = std::abs(fit.delta_hat - delta) <= 0.05 && !fit.rejected && at_l >= 0.7 && at_l <= 1.4 &&
                  std::abs(at_l - 1.0) < std::abs(at_l2 - 1.0);
  const CountSeries longer = count_primitive_geodesics(g, 14.0);
  info = fmt("geodesic ratio %.4f at L=14; prime-geodesic fit delta_hat %.4f at L=14",
             prime_geodesic_ratio(longer, delta, 14.0), fit_prime_geodesic(longer).delta_hat);
  return {ok, fmt("loop delta_hat %.4f vs %.4f; geodesic ratio %.4f at L=12, %.4f at L=10", fit.delta_hat, delta,
                  at_l, at_l2)};
}

Outcome ball_translation() {
  const GroupSpec g = fixture_group("schottky_sym.grp");
  const double r = 0.25, T = 12.0;
  const StabilizedBody ball{ConvexBody::ball(g.basepoint(), r), {}};
  const CountSeries loops = count_loops(g, g.basepoint(), T);
  const CountSeries ortho = count_ortho(g, ball, ball, T - 2 * r);
  bool ok = ortho.size() == loops.size();
  std::size_t mismatches = 0;
  for (std::size_t k = 0; ok && k < ortho.size(); ++k)
    mismatches += ortho.entries[k].length != loops.entries[k].length - 2 * r;
  return {ok && mismatches == 0, fmt("%zu ortho lengths vs %zu loops, %zu inexact", ortho.size(), loops.size(), mismatches)};
}

Outcome constant_consistency() {
  const GroupSpec g = fixture_group("schottky_sym.grp");
  const double T = 14.0;
  const HPoint x = g.basepoint();
  const double delta = estimate_delta(g, T).delta_series;
  const EmpiricalBoundaryMeasure mu = ps_estimate(g, delta, T);
  const double cx = fit_exponential(count_loops(g, x, T)).C_hat;
  bool ok = true;
  std::string detail;
  for (const HPoint& y : {HPoint::interior(Dim::H2, 0.3, 1.2), HPoint::interior(Dim::H2, 0.0, 1.6),
                          HPoint::interior(Dim::H2, 2.0, 1.0)}) {
    const double cy = fit_exponential(count_loops(g, y, T)).C_hat;
    const double predicted = 1.0 / loop_constant_prediction({transport_mass(mu, x, x), transport_mass(mu, x, y)}, delta);
    const double rel = cy / cx / predicted - 1.0;
    ok = ok && std::abs(rel) <= 0.25;
    detail += fmt("y=(%.1f, %.1f) Cy/Cx %.3f pred %.3f (%+.1f%%) ", y.horizontal().real(), y.height(), cy / cx, predicted, 100 * rel);
  }
  return {ok, detail};
}

Outcome sweep_convergence(std::string& info) {
  const SweepReport pinch = run_sweep(io::load_family(fixture_path("pinch.fam")));
  std::vector<double> d, l, c;
  bool complete = true;
  for (std::size_t i = 0; i < pinch.rows.size(); ++i) {
    complete = complete && !pinch.rows[i].failed;
    d.push_back(pinch.gaps[i].delta_series);
    l.push_back(pinch.gaps[i].lambda0);
    c.push_back(pinch.gaps[i].loop_C);
  }
  const bool mono = weakly_decreasing(d, 0.02) && weakly_decreasing(l, 0.02) && weakly_decreasing(c, 0.02);
  const SweepReport constant = run_sweep(io::load_family(fixture_path("constant.fam")));
  double worst = 0.0;
  for (const SweepGaps& g : constant.gaps)
    for (double v : {g.delta_series, g.delta_growth, g.lambda0, g.loop_C, g.loop_delta, g.geodesic_ratio, g.ortho_C})
      worst = std::max(worst, std::isnan(v) ? INFINITY : v);

  const SweepReport wide = run_sweep(io::load_family(fixture_path("pinch_wide.fam")));
  std::vector<double> wc;
  for (const SweepGaps& g : wide.gaps) wc.push_back(g.loop_C);
  info = fmt("pinch_wide.fam (adds k=0, trace 4): loop_C gaps %.3f -> %.3f, weakly decreasing: %s",
             wc[0], wc[1], weakly_decreasing(wc, 0.02) ? "yes" : "no");
  return {complete && mono && worst < 1e-9,
          fmt("pinch gaps delta %.4f -> %.5f, lambda0 %.4f -> %.5f, C %.4f -> %.5f; constant family worst gap %.1e",
              d.front(), d.back(), l.front(), l.back(), c.front(), c.back(), worst)};
}

int run(const std::string& args) {
  const int status = std::system((std::string(KLEINIAN_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "kleinian_acceptance";
  fs::remove_all(root);
  const std::string sym = fixture_path("schottky_sym.grp");
  const std::vector<std::string> commands = {
      "exponent --group " + fixture_path("parabolic_h3.grp") + " --T 30",
      "exponent --group " + sym + " --T 14",
      "loops --group " + sym + " --T 14",
      "geodesics --group " + sym + " --L 12 --T 14",
      "ortho --group " + sym + " --bodies " + fixture_path("balls.json") + " --T 11.5",
      "ps-measure --group " + sym + " --T 14",
      "sweep --family " + fixture_path("constant.fam"),
      "sweep --family " + fixture_path("pinch.fam"),
  };
  std::size_t compared = 0, differing = 0;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    std::vector<fs::path> dirs;
    for (const char* w : {"1", "1", "4"}) {
      const fs::path dir = root / (std::to_string(i) + "_" + w + "_" + std::to_string(dirs.size()));
      if (run(commands[i] + " --workers " + w + " --out " + dir.string()) != 0) return {false, "command failed: " + commands[i]};
      dirs.push_back(dir);
    }
    for (const auto& entry : fs::directory_iterator(dirs[0])) {
      const std::string first = io::read_file(entry.path());
      for (std::size_t k = 1; k < dirs.size(); ++k) {
        ++compared;
        differing += io::read_file(dirs[k] / entry.path().filename()) != first;
      }
    }
  }
  fs::remove_all(root);
  return {differing == 0 && compared > 0,
          fmt("%zu commands, %zu file comparisons across repeated runs and worker counts 1/4, %zu differ",
              commands.size(), compared, differing)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  std::string counting_info, sweep_info;
  const std::vector<Criterion> criteria = {
      {1, "geometry oracle suite", 10.0, geometry_suite},
      {2, "enumeration completeness (Pruned = Exact, T=8)", 60.0, enumeration_completeness},
      {3, "parabolic exponent in H3 at T=30", 30.0, parabolic_exponent},
      {4, "cross-estimator agreement at T=14", 300.0, cross_estimator},
      {5, "counting law: loop fit and prime geodesic band", 300.0, [&] { return counting_law(counting_info); }},
      {6, "ball translation identity", 60.0, ball_translation},
      {7, "loop constants vs transported PS masses", 300.0, constant_consistency},
      {8, "sweep convergence on pinching and constant families", 600.0, [&] { return sweep_convergence(sweep_info); }},
      {9, "determinism across runs and worker counts", 600.0, determinism},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs <= c.limit_s;
    failures += !pass;
    std::printf("%s criterion %d: %s | %s | %.1f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s);
    if (c.id == 5 && !counting_info.empty()) std::printf("INFO criterion 5: %s\n", counting_info.c_str());
    if (c.id == 8 && !sweep_info.empty()) std::printf("INFO criterion 8: %s\n", sweep_info.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
