#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "kleinian/hypgeom.hpp"
#include "test_support.hpp"

using namespace kleinian;
using kleinian::testing::Sampler;

namespace {

HPoint p2(double x, double h) { return HPoint::interior(Dim::H2, x, h); }
HPoint b2(double x) { return HPoint::boundary(Dim::H2, x); }
const HPoint inf2 = HPoint::infinity(Dim::H2);

}  // namespace

TEST(Distance, Examples) {
  EXPECT_EQ(dist(p2(0, 1), p2(0, 1)), 0.0);
  EXPECT_NEAR(dist(p2(0, 1), p2(0, 2)), std::log(2.0), 1e-12);
  EXPECT_NEAR(dist(p2(0, 1), p2(1, 1)), std::acosh(1.5), 1e-12);
  EXPECT_NEAR(dist(p2(0, 1), p2(1, 1)), 0.962423650119206895, 1e-12);
}

TEST(Distance, DimensionMismatch) {
  const HPoint x3 = HPoint::interior(Dim::H3, Complex(0, 1), 1.0);
  EXPECT_THROW(dist(p2(0, 1), x3), DimensionError);
  EXPECT_THROW(HPoint::interior(Dim::H2, Complex(0, 1), 1.0), DimensionError);
  EXPECT_THROW(HPoint::interior(Dim::H2, 0.0, 0.0), ParameterError);
}

TEST(Distance, MetricAxioms) {
  Sampler s(11);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 1000; ++i) {
      const HPoint x = s.point(dim), y = s.point(dim), z = s.point(dim);
      EXPECT_EQ(dist(x, y), dist(y, x));
      EXPECT_LE(dist(x, z), dist(x, y) + dist(y, z) + 1e-12);
      EXPECT_GT(dist(x, y), 0.0);
    }
  }
}

TEST(Distance, IsometryInvariance) {
  Sampler s(12);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 100; ++i) {
      const MobiusMap g = s.map(dim);
      const HPoint x = s.point(dim), y = s.point(dim);
      EXPECT_NEAR(dist(apply(g, x), apply(g, y)), dist(x, y), 1e-10);
    }
  }
}

TEST(Busemann, Examples) {
  EXPECT_NEAR(busemann_cocycle(inf2, p2(0, 1), p2(0, std::numbers::e)), 1.0, 1e-12);
  EXPECT_EQ(busemann_cocycle(b2(0.3), p2(0.2, 0.7), p2(0.2, 0.7)), 0.0);
  // Ray to 0 is (0, e^{-t}): d(r(t), (0,1)) - d(r(t), (0,2)) = t - (t + log 2).
  EXPECT_NEAR(busemann_cocycle(b2(0), p2(0, 1), p2(0, 2)), -std::log(2.0), 1e-12);
}

TEST(Busemann, MatchesRayLimit) {
  // Independent route: evaluate the defining limit along the vertical ray
  // above xi (or straight up for infinity) at a large time.
  Sampler s(13);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 50; ++i) {
      const HPoint x = s.point(dim), y = s.point(dim);
      const bool at_inf = (i % 5 == 0);
      const HPoint xi = at_inf ? HPoint::infinity(dim) : s.boundary(dim);
      const double t = 18.0;
      const HPoint r = at_inf ? HPoint::interior(dim, Complex(0.0), std::exp(t))
                              : HPoint::interior(dim, xi.horizontal(), std::exp(-t));
      EXPECT_NEAR(busemann_cocycle(xi, x, y), dist(r, x) - dist(r, y), 1e-6);
    }
  }
}

TEST(Busemann, CocycleAntisymmetryAndBound) {
  Sampler s(14);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 200; ++i) {
      const HPoint xi = s.boundary(dim);
      const HPoint x = s.point(dim), y = s.point(dim), z = s.point(dim);
      EXPECT_NEAR(busemann_cocycle(xi, x, y) + busemann_cocycle(xi, y, z), busemann_cocycle(xi, x, z),
                  1e-9);
      EXPECT_NEAR(busemann_cocycle(xi, x, y), -busemann_cocycle(xi, y, x), 1e-12);
      EXPECT_LE(std::abs(busemann_cocycle(xi, x, y)), dist(x, y) + 1e-12);
    }
  }
}

TEST(Busemann, Equivariance) {
  Sampler s(15);
  for (int i = 0; i < 50; ++i) {
    const MobiusMap g = s.map(Dim::H3);
    const HPoint xi = s.boundary(Dim::H3), x = s.point(Dim::H3), y = s.point(Dim::H3);
    EXPECT_NEAR(busemann_cocycle(apply(g, xi), apply(g, x), apply(g, y)), busemann_cocycle(xi, x, y),
                1e-9);
  }
}

TEST(Gromov, Examples) {
  const GeodesicLine vertical(b2(0), inf2);
  EXPECT_NEAR(gromov_product(vertical, p2(0, 5)), 0.0, 1e-12);
  EXPECT_NEAR(gromov_product(GeodesicLine(b2(-1), b2(1)), p2(0, 1)), 0.0, 1e-12);

  // Basepoint (1,1) off the line: evaluate with y at the foot of the
  // perpendicular and with y one unit further along the line.
  const HPoint x0 = p2(1, 1);
  const HPoint foot = p2(0, std::sqrt(2.0));
  const HPoint further = p2(0, std::sqrt(2.0) * std::numbers::e);
  const double at_foot = gromov_product(vertical, x0, foot);
  const double at_further = gromov_product(vertical, x0, further);
  EXPECT_NEAR(at_foot, at_further, 1e-9);
  EXPECT_NEAR(at_foot, 0.5 * std::log(2.0), 1e-12);
}

TEST(Gromov, ClosedFormAndIndependenceOfY) {
  // In constant curvature the product equals log cosh of the distance to the line.
  Sampler s(16);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 100; ++i) {
      const GeodesicLine l = s.line(dim);
      const HPoint x = s.point(dim);
      const double d = dist_point_to_line(x, l);
      const double g1 = gromov_product(l, x, line_point(l, s.uniform(-2, 2)));
      const double g2 = gromov_product(l, x, line_point(l, s.uniform(-2, 2)));
      EXPECT_NEAR(g1, g2, 1e-9);
      EXPECT_NEAR(g1, std::log(std::cosh(d)), 1e-9);
      EXPECT_GE(g1, 0.0);
      EXPECT_LE(g1, d + 1e-12);
      EXPECT_GE(g1, d - std::log(2.0) - 1e-12);
    }
  }
}

TEST(PointToLine, Examples) {
  const GeodesicLine vertical(b2(0), inf2);
  EXPECT_NEAR(dist_point_to_line(p2(0, 3), vertical), 0.0, 1e-15);
  EXPECT_NEAR(dist_point_to_line(p2(1, 1), vertical), std::asinh(1.0), 1e-12);
  EXPECT_NEAR(dist_point_to_line(p2(1, 1), vertical), 0.881373587019543025, 1e-12);
}

TEST(PointToLine, IsometryInvariance) {
  Sampler s(17);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 100; ++i) {
      const MobiusMap g = s.map(dim);
      const GeodesicLine l = s.line(dim);
      const HPoint x = s.point(dim);
      EXPECT_NEAR(dist_point_to_line(apply(g, x), apply(g, l)), dist_point_to_line(x, l), 1e-10);
    }
  }
}

TEST(PointToLine, FootMinimizesDistance) {
  Sampler s(18);
  for (int i = 0; i < 50; ++i) {
    const GeodesicLine l = s.line(Dim::H3);
    const HPoint x = s.point(Dim::H3);
    const HPoint f = foot_on_line(x, l);
    EXPECT_NEAR(dist(x, f), dist_point_to_line(x, l), 1e-10);
    EXPECT_NEAR(dist_point_to_line(f, l), 0.0, 1e-7);
  }
}

TEST(Lines, ThroughTwoPointsAndRays) {
  Sampler s(19);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int i = 0; i < 100; ++i) {
      const HPoint x = s.point(dim), y = s.point(dim);
      const GeodesicLine l = line_through(x, y);
      EXPECT_NEAR(dist_point_to_line(x, l), 0.0, 1e-7);
      EXPECT_NEAR(dist_point_to_line(y, l), 0.0, 1e-7);
      // Orientation: y lies ahead of x.
      EXPECT_GT(line_time(l, y), line_time(l, x));
      const HPoint p = point_toward(x, y, dist(x, y));
      EXPECT_NEAR(dist(p, y), 0.0, 1e-8);

      const HPoint xi = s.boundary(dim);
      const GeodesicLine r = ray_line(x, xi);
      EXPECT_TRUE(same_boundary_point(r.forward(), xi));
      EXPECT_NEAR(dist_point_to_line(x, r), 0.0, 1e-7);
    }
  }
}

TEST(Lines, VisualDirectionIsUnitAndEquivariantUnderStabilizer) {
  Sampler s(20);
  for (int i = 0; i < 50; ++i) {
    const HPoint x = s.point(Dim::H3);
    const auto v = visual_direction(x, s.boundary(Dim::H3));
    EXPECT_NEAR(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], 1.0, 1e-12);
  }
  const auto up = visual_direction(p2(0, 1), inf2);
  EXPECT_EQ(up[2], 1.0);
  const auto down = visual_direction(p2(0, 1), b2(0));
  EXPECT_NEAR(down[2], -1.0, 1e-15);
  const auto side = visual_direction(p2(0, 1), b2(1));
  EXPECT_NEAR(side[0], 1.0, 1e-15);
}

TEST(BodyDistance, Examples) {
  const auto b1 = ConvexBody::ball(p2(0, 1), 1.0);
  const auto b2b = ConvexBody::ball(p2(0, std::exp(3.0)), 1.0);
  EXPECT_NEAR(body_distance(b1, b2b), 1.0, 1e-12);

  const auto h0 = ConvexBody::horoball(b2(0), 0.5);
  const auto h1 = ConvexBody::horoball(b2(1), 0.5);
  EXPECT_NEAR(body_distance(h0, h1), 2.0 * std::log(2.0), 1e-12);

  const auto hinf = ConvexBody::horoball(inf2, 1.0);
  const auto hq = ConvexBody::horoball(b2(0), 0.25);
  EXPECT_NEAR(body_distance(hinf, hq), std::log(4.0), 1e-12);
}

TEST(BodyDistance, HoroballClosedFormsAgreeWithConjugation) {
  // Conjugate the first base to infinity and measure along the vertical geodesic.
  Sampler s(21);
  for (int i = 0; i < 50; ++i) {
    const HPoint p = s.boundary(Dim::H3);
    const HPoint q = s.boundary(Dim::H3);
    const auto a = ConvexBody::horoball(p, s.uniform(0.05, 0.4));
    const auto b = ConvexBody::horoball(q, s.uniform(0.05, 0.4));
    const MobiusMap g = detail::send_to_infinity(Dim::H3, p.horizontal());
    const ConvexBody ga = transform(g, a), gb = transform(g, b);
    const auto& ha = std::get<Horoball>(ga.shape());
    const auto& hb = std::get<Horoball>(gb.shape());
    ASSERT_TRUE(ha.base.is_infinity());
    const double along_vertical = dist(HPoint::interior(Dim::H3, hb.base.horizontal(), hb.size),
                                       HPoint::interior(Dim::H3, hb.base.horizontal(), ha.size));
    const double signed_vertical = ha.size > hb.size ? along_vertical : -along_vertical;
    EXPECT_NEAR(body_distance(a, b), signed_vertical, 1e-9);
  }
}

TEST(BodyDistance, OverlapIsReportedNotThrown) {
  const auto b = ConvexBody::ball(p2(0, 1), 0.5);
  EXPECT_LT(body_distance(b, b), 0.0);
  const auto h = ConvexBody::horoball(b2(0), 1.0);
  EXPECT_EQ(body_distance(h, ConvexBody::horoball(b2(0), 0.3)), -INFINITY);
  const auto t1 = ConvexBody::tube(GeodesicLine(b2(0), b2(1)), 0.1);
  const auto t2 = ConvexBody::tube(GeodesicLine(b2(1), b2(3)), 0.1);
  EXPECT_LE(body_distance(t1, t2), 0.0);
  const auto t3 = ConvexBody::tube(GeodesicLine(b2(0.5), b2(2)), 0.0);
  EXPECT_LE(body_distance(t1, t3), 1e-9);  // crossing axes
}

TEST(BodyDistance, MixedPairsMatchClosestPoints) {
  const auto ball = ConvexBody::ball(p2(0, 1), 0.3);
  const auto horo = ConvexBody::horoball(inf2, 4.0);
  EXPECT_NEAR(body_distance(ball, horo), std::log(4.0) - 0.3, 1e-12);
  const auto tube = ConvexBody::tube(GeodesicLine(b2(2), b2(4)), 0.2);
  // Apex of the tube axis is (3, 1); the horoball at infinity of height 4 is log 4 above it.
  EXPECT_NEAR(body_distance(horo, tube), std::log(4.0) - 0.2, 1e-12);
  EXPECT_NEAR(body_distance(ball, tube), dist_point_to_line(p2(0, 1), GeodesicLine(b2(2), b2(4))) - 0.5,
              1e-12);
}

std::vector<ConvexBody> random_bodies(Sampler& s, Dim dim) {
  std::vector<ConvexBody> out;
  out.push_back(ConvexBody::ball(s.point(dim), s.uniform(0.05, 0.3)));
  out.push_back(ConvexBody::horoball(s.boundary(dim), s.uniform(0.05, 0.3)));
  out.push_back(ConvexBody::horoball(HPoint::infinity(dim), s.uniform(6.0, 10.0)));
  out.push_back(ConvexBody::tube(s.line(dim), s.uniform(0.0, 0.2)));
  return out;
}

TEST(BodyDistance, SymmetricAndInvariant) {
  Sampler s(22);
  for (Dim dim : {Dim::H2, Dim::H3}) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto bodies = random_bodies(s, dim);
      const auto others = random_bodies(s, dim);
      const MobiusMap g = s.map(dim);
      for (const auto& a : bodies)
        for (const auto& b : others) {
          const double d = body_distance(a, b);
          EXPECT_EQ(d, body_distance(b, a));
          const double moved = body_distance(transform(g, a), transform(g, b));
          if (std::isinf(d)) {
            EXPECT_EQ(moved, d);
          } else {
            EXPECT_NEAR(moved, d, 1e-8) << a.type_name() << "/" << b.type_name();
          }
        }
    }
  }
}

TEST(BodyDistance, TubeTubeMatchesGridOracle) {
  Sampler s(23);
  int checked = 0;
  while (checked < 20) {
    const Dim dim = checked < 14 ? Dim::H3 : Dim::H2;
    GeodesicLine l1 = s.line(dim), l2 = s.line(dim);
    if (dim == Dim::H2) {
      // Disjoint, non-nested intervals give ultraparallel lines.
      const double a = s.uniform(-2, 0), b = a + s.uniform(0.3, 1.5);
      const double c = b + s.uniform(0.2, 1.0), d = c + s.uniform(0.3, 1.5);
      l1 = GeodesicLine(b2(a), b2(b));
      l2 = GeodesicLine(b2(c), b2(d));
    }
    const double r1 = s.uniform(0, 0.1), r2 = s.uniform(0, 0.1);
    const double got = body_distance(ConvexBody::tube(l1, r1), ConvexBody::tube(l2, r2));
    const double oracle = kleinian::testing::grid_line_distance(l1, l2) - (r1 + r2);
    EXPECT_NEAR(got, oracle, 1e-6);
    ++checked;
  }
}

TEST(ClosestPoint, Examples) {
  const HPoint c = p2(0, 1);
  const auto ball = ConvexBody::ball(c, 0.5);
  const HPoint target = p2(0, 5);
  const HPoint got = closest_point_on_body(ball, target);
  EXPECT_NEAR(dist(got, p2(0, std::exp(0.5))), 0.0, 1e-12);

  const auto horo = ConvexBody::horoball(inf2, 1.0);
  const HPoint h = closest_point_on_body(horo, p2(0, 0.5));
  EXPECT_NEAR(dist(h, p2(0, 1)), 0.0, 1e-12);

  const auto tube = ConvexBody::tube(GeodesicLine(b2(0), inf2), 0.0);
  const HPoint f = closest_point_on_body(tube, p2(1, 1));
  EXPECT_NEAR(f.horizontal().real(), 0.0, 1e-12);
  EXPECT_NEAR(f.height(), std::sqrt(2.0), 1e-12);
}

TEST(ClosestPoint, Errors) {
  const auto ball = ConvexBody::ball(p2(0, 1), 0.5);
  EXPECT_THROW(closest_point_on_body(ball, p2(0, 1.1)), ContainmentError);
  const auto horo = ConvexBody::horoball(b2(2), 0.5);
  EXPECT_THROW(closest_point_on_body(horo, b2(2)), ParameterError);
  EXPECT_THROW(closest_point_on_body(horo, p2(2, 0.25)), ContainmentError);
  const auto tube = ConvexBody::tube(GeodesicLine(b2(0), inf2), 0.3);
  EXPECT_THROW(closest_point_on_body(tube, p2(0.1, 1.0)), ContainmentError);
  EXPECT_THROW(closest_point_on_body(tube, b2(0)), ParameterError);
}

TEST(ClosestPoint, MinimizesOverDenseBoundarySample) {
  Sampler s(24);
  for (int i = 0; i < 20; ++i) {
    const Dim dim = Dim::H2;
    const HPoint target = s.point(dim);
    // Bodies placed away from the target.
    const HPoint c = point_toward(target, s.boundary(dim), 2.0);
    const auto ball = ConvexBody::ball(c, 0.7);
    const auto tube = ConvexBody::tube(ray_line(c, s.boundary(dim)), 0.4);
    const auto horo = ConvexBody::horoball(HPoint::boundary(dim, target.horizontal() + 3.0), 0.5);
    for (const ConvexBody* b : {&ball, &tube, &horo}) {
      if (point_to_body(target, *b) <= 0.0) continue;
      const HPoint p = closest_point_on_body(*b, target);
      EXPECT_NEAR(point_to_body(p, *b), 0.0, 1e-9) << b->type_name();
      const double best = dist(p, target);
      EXPECT_NEAR(best, point_to_body(target, *b), 1e-9) << b->type_name();
      // Dense sample of the body's boundary through closest points of far targets.
      for (int k = 0; k < 2000; ++k) {
        const double x = target.horizontal().real() + std::tan(s.uniform(-1.55, 1.55)) * 3.0;
        const HPoint probe = HPoint::interior(dim, x, std::exp(s.uniform(-6, 3)));
        if (point_to_body(probe, *b) <= 0.0) continue;
        const HPoint q = closest_point_on_body(*b, probe);
        EXPECT_GE(dist(q, target), best - 1e-9);
      }
    }
  }
}

TEST(ClosestPoint, BoundaryTargetMinimizesBusemann) {
  Sampler s(25);
  const HPoint x0 = p2(0, 1);
  for (int i = 0; i < 20; ++i) {
    const HPoint xi = s.boundary(Dim::H2);
    const auto ball = ConvexBody::ball(s.point(Dim::H2), 0.5);
    const HPoint p = closest_point_on_body(ball, xi);
    const double best = busemann_cocycle(xi, p, x0);
    const auto& bb = std::get<Ball>(ball.shape());
    for (int k = 0; k < 500; ++k) {
      const HPoint q = point_toward(bb.center, s.boundary(Dim::H2), bb.radius);
      EXPECT_GE(busemann_cocycle(xi, q, x0), best - 1e-9);
    }
  }
}

TEST(HopfCoordinates, BasepointAtTimeZeroIsFootOfReference) {
  const GeodesicLine l(b2(-1), b2(1));
  const HPoint ref = p2(0, 3);
  const OrientedVector v{l, 0.0};
  EXPECT_NEAR(dist(vector_basepoint(v, ref), p2(0, 1)), 0.0, 1e-12);
  const OrientedVector w{l, 0.7};
  EXPECT_NEAR(dist(vector_basepoint(w, ref), p2(0, 1)), 0.7, 1e-12);
}
