#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <tuple>
#include <variant>

#include "kleinian/minimize.hpp"
#include "kleinian/mobius.hpp"
#include "kleinian/point.hpp"

namespace kleinian {

namespace detail {

inline HPoint make_interior(Dim dim, Complex z, double h) {
  return HPoint::interior(dim, dim == Dim::H2 ? Complex(z.real(), 0.0) : z, h);
}

inline HPoint make_boundary(Dim dim, Complex z) {
  return HPoint::boundary(dim, dim == Dim::H2 ? Complex(z.real(), 0.0) : z);
}

/// Map sending x to (0, 1) by a horizontal translation and a dilation.
inline MobiusMap recentering(const HPoint& x) {
  const double s = std::sqrt(x.height());
  return MobiusMap(x.dim(), Complex(1.0 / s), -x.horizontal() / s, Complex(0.0), Complex(s));
}

/// Map sending the finite boundary point p to infinity: z -> -1/(z - p).
inline MobiusMap send_to_infinity(Dim dim, Complex p) {
  return MobiusMap(dim, Complex(0.0), Complex(-1.0), Complex(1.0), -p);
}

}  // namespace detail

/// Hyperbolic distance between interior points.
inline double dist(const HPoint& x, const HPoint& y) {
  require_same_dim(x, y);
  require_interior(x, "dist argument");
  require_interior(y, "dist argument");
  const double dh = x.height() - y.height();
  const double chord2 = std::norm(x.horizontal() - y.horizontal()) + dh * dh;
  return 2.0 * std::asinh(std::sqrt(chord2) / (2.0 * std::sqrt(x.height() * y.height())));
}

/// Busemann cocycle: lim d(r(t), x) - d(r(t), y) along a ray r converging to xi.
inline double busemann_cocycle(const HPoint& xi, const HPoint& x, const HPoint& y) {
  require_same_dim(xi, x);
  require_same_dim(x, y);
  require_boundary(xi, "Busemann base");
  require_interior(x, "Busemann argument");
  require_interior(y, "Busemann argument");
  const double base = std::log(y.height() / x.height());
  if (xi.is_infinity()) return base;
  const Complex p = xi.horizontal();
  const double qx = std::norm(x.horizontal() - p) + x.height() * x.height();
  const double qy = std::norm(y.horizontal() - p) + y.height() * y.height();
  return base + std::log(qx / qy);
}

/// Isometry sending the backward endpoint of the line to 0 and the forward
/// endpoint to infinity. Real for H2 lines.
inline MobiusMap normalizer(const GeodesicLine& line) {
  const Dim dim = line.dim();
  const HPoint& m = line.backward();
  const HPoint& p = line.forward();
  if (m.is_infinity())
    return MobiusMap(dim, Complex(0.0), Complex(-1.0), Complex(1.0), -p.horizontal());
  if (p.is_infinity()) return MobiusMap(dim, Complex(1.0), -m.horizontal(), Complex(0.0), Complex(1.0));
  const Complex lo = m.horizontal();
  const Complex hi = p.horizontal();
  if (dim == Dim::H2 && (lo - hi).real() < 0.0)
    return MobiusMap(dim, Complex(-1.0), lo, Complex(1.0), -hi);
  return MobiusMap(dim, Complex(1.0), -lo, Complex(1.0), -hi);
}

/// Point of the line at time s of the normalized parametrization
/// s -> normalizer^{-1}(0, e^s). Unit speed, oriented forward.
inline HPoint line_point(const GeodesicLine& line, double s) {
  return apply(normalizer(line).inverse(), HPoint::interior(line.dim(), Complex(0.0), std::exp(s)));
}

/// Signed time of the projection of x to the line, in the parametrization of line_point.
inline double line_time(const GeodesicLine& line, const HPoint& x) {
  require_same_dim(x, line.backward());
  require_interior(x, "projected point");
  const HPoint y = apply(normalizer(line), x);
  return 0.5 * std::log(std::norm(y.horizontal()) + y.height() * y.height());
}

inline double dist_point_to_line(const HPoint& x, const GeodesicLine& line) {
  require_same_dim(x, line.backward());
  require_interior(x, "point");
  const HPoint y = apply(normalizer(line), x);
  return std::asinh(std::abs(y.horizontal()) / y.height());
}

/// Foot of the perpendicular from x to the line.
inline HPoint foot_on_line(const HPoint& x, const GeodesicLine& line) {
  require_same_dim(x, line.backward());
  require_interior(x, "point");
  const MobiusMap n = normalizer(line);
  const HPoint y = apply(n, x);
  const double r = std::sqrt(std::norm(y.horizontal()) + y.height() * y.height());
  return apply(n.inverse(), HPoint::interior(x.dim(), Complex(0.0), r));
}

/// Gromov product of the endpoints seen from the basepoint,
/// (v-|v+)_x = (beta_{v-}(x, y) + beta_{v+}(x, y)) / 2 for any y on the line.
/// Nonnegative, zero exactly on the line.
inline double gromov_product(const GeodesicLine& line, const HPoint& basepoint,
                             const HPoint& on_line) {
  return 0.5 * (busemann_cocycle(line.backward(), basepoint, on_line) +
                busemann_cocycle(line.forward(), basepoint, on_line));
}

inline double gromov_product(const GeodesicLine& line, const HPoint& basepoint) {
  return gromov_product(line, basepoint, foot_on_line(basepoint, line));
}

/// Oriented geodesic through two distinct interior points, from x towards y.
inline GeodesicLine line_through(const HPoint& x, const HPoint& y) {
  require_same_dim(x, y);
  require_interior(x, "line point");
  require_interior(y, "line point");
  if (x == y) throw ParameterError("line through a point and itself is undefined");
  const Dim dim = x.dim();
  const MobiusMap frame = detail::recentering(x);
  const MobiusMap back = frame.inverse();
  const HPoint yy = apply(frame, y);
  const Complex w = yy.horizontal();
  const double k = yy.height();
  auto lift = [&](Complex z) { return apply(back, detail::make_boundary(dim, z)); };
  if (w == Complex(0.0)) {
    if (k > 1.0) return GeodesicLine(lift(0.0), HPoint::infinity(dim));
    return GeodesicLine(HPoint::infinity(dim), lift(0.0));
  }
  const double len = std::abs(w);
  const Complex u = w / len;
  const double c = (len * len + k * k - 1.0) / (2.0 * len);
  const double r = std::sqrt(c * c + 1.0);
  const double lo = c > 0.0 ? -1.0 / (c + r) : c - r;
  const double hi = c < 0.0 ? 1.0 / (r - c) : c + r;
  return GeodesicLine(lift(lo * u), lift(hi * u));
}

/// Oriented geodesic through x ending at the boundary point xi.
inline GeodesicLine ray_line(const HPoint& x, const HPoint& xi) {
  require_same_dim(x, xi);
  require_interior(x, "ray origin");
  require_boundary(xi, "ray end");
  const Dim dim = x.dim();
  const MobiusMap frame = detail::recentering(x);
  const MobiusMap back = frame.inverse();
  const HPoint e = apply(frame, xi);
  auto lift = [&](Complex z) { return apply(back, detail::make_boundary(dim, z)); };
  if (e.is_infinity()) return GeodesicLine(lift(0.0), xi);
  const Complex w = e.horizontal();
  if (w == Complex(0.0)) return GeodesicLine(HPoint::infinity(dim), xi);
  return GeodesicLine(lift(-w / std::norm(w)), xi);
}

/// Point at distance s from x along the geodesic towards target (interior or boundary).
inline HPoint point_toward(const HPoint& x, const HPoint& target, double s) {
  const GeodesicLine line = target.is_interior() ? line_through(x, target) : ray_line(x, target);
  const MobiusMap n = normalizer(line);
  const HPoint y = apply(n, x);
  const double r = std::sqrt(std::norm(y.horizontal()) + y.height() * y.height());
  return apply(n.inverse(), HPoint::interior(x.dim(), Complex(0.0), r * std::exp(s)));
}

/// Unit vector at x pointing to the boundary point xi, as (re, im, vertical)
/// coordinates on the visual sphere. The imaginary coordinate vanishes in H2.
inline std::array<double, 3> visual_direction(const HPoint& x, const HPoint& xi) {
  require_same_dim(x, xi);
  require_interior(x, "viewpoint");
  require_boundary(xi, "direction target");
  const HPoint e = apply(detail::recentering(x), xi);
  if (e.is_infinity()) return {0.0, 0.0, 1.0};
  const Complex w = e.horizontal();
  const double n = std::norm(w);
  const double den = 1.0 + n;
  return {2.0 * w.real() / den, 2.0 * w.imag() / den, (n - 1.0) / den};
}

/// Forward endpoint of the ray from x through y.
inline HPoint shadow_point(const HPoint& x, const HPoint& y) { return line_through(x, y).forward(); }

/// Basepoint of a vector in Hopf coordinates, time measured from the point
/// of the line closest to ref.
inline HPoint vector_basepoint(const OrientedVector& v, const HPoint& ref) {
  return line_point(v.line, line_time(v.line, ref) + v.basetime);
}

// ---------------------------------------------------------------------------
// Convex bodies

struct Ball {
  HPoint center;
  double radius;
};

/// Horoball based at a boundary point. For a finite base the size is the
/// Euclidean diameter; for the base at infinity it is the height of the
/// bounding horizontal plane.
struct Horoball {
  HPoint base;
  double size;
};

struct Tube {
  GeodesicLine axis;
  double radius;
};

class ConvexBody {
 public:
  using Variant = std::variant<Ball, Horoball, Tube>;

  static ConvexBody ball(const HPoint& center, double radius) {
    require_interior(center, "ball center");
    if (!(radius > 0.0)) throw ParameterError("ball radius must be positive");
    return ConvexBody(Ball{center, radius});
  }
  static ConvexBody horoball(const HPoint& base, double size) {
    require_boundary(base, "horoball base");
    if (!(size > 0.0)) throw ParameterError("horoball size must be positive");
    return ConvexBody(Horoball{base, size});
  }
  static ConvexBody tube(const GeodesicLine& axis, double radius) {
    if (!(radius >= 0.0)) throw ParameterError("tube radius must be nonnegative");
    return ConvexBody(Tube{axis, radius});
  }

  const Variant& shape() const { return v_; }
  Dim dim() const {
    return std::visit(
        [](const auto& b) {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, Ball>) return b.center.dim();
          else if constexpr (std::is_same_v<T, Horoball>) return b.base.dim();
          else return b.axis.dim();
        },
        v_);
  }
  const char* type_name() const {
    switch (v_.index()) {
      case 0: return "ball";
      case 1: return "horoball";
      default: return "tube";
    }
  }

 private:
  explicit ConvexBody(Variant v) : v_(std::move(v)) {}
  Variant v_;
};

namespace detail {

/// Normalized form of a horoball: a map sending its base to infinity and the
/// height of its image.
struct HoroFrame {
  MobiusMap map;
  double height;
};

inline HoroFrame horo_frame(const Horoball& h) {
  const Dim dim = h.base.dim();
  if (h.base.is_infinity()) return {MobiusMap::identity(dim), h.size};
  return {send_to_infinity(dim, h.base.horizontal()), 1.0 / h.size};
}

inline double point_to_horoball(const HPoint& x, const Horoball& h) {
  if (h.base.is_infinity()) return std::log(h.size / x.height());
  const double q = std::norm(x.horizontal() - h.base.horizontal()) + x.height() * x.height();
  return std::log(q / (h.size * x.height()));
}

inline Horoball transform(const MobiusMap& g, const Horoball& h) {
  const Dim dim = h.base.dim();
  const HPoint on_sphere = h.base.is_infinity()
                               ? HPoint::interior(dim, Complex(0.0), h.size)
                               : HPoint::interior(dim, h.base.horizontal(), h.size);
  const HPoint base = apply(g, h.base);
  const HPoint p = apply(g, on_sphere);
  if (base.is_infinity()) return {base, p.height()};
  const double size = (std::norm(p.horizontal() - base.horizontal()) + p.height() * p.height()) /
                      p.height();
  return {base, size};
}

inline auto line_key(const GeodesicLine& l, double radius) {
  auto key = [](const HPoint& p) {
    return std::make_tuple(p.is_infinity() ? 1 : 0, p.horizontal().real(), p.horizontal().imag());
  };
  return std::tuple_cat(key(l.backward()), key(l.forward()), std::make_tuple(radius));
}

/// Distance between geodesic lines by nested golden-section search over both
/// arclength parameters. Lines sharing an endpoint are at distance zero.
inline double line_line_distance(const GeodesicLine& l1, const GeodesicLine& l2) {
  if (same_boundary_point(l1.backward(), l2.backward()) ||
      same_boundary_point(l1.backward(), l2.forward()) ||
      same_boundary_point(l1.forward(), l2.backward()) ||
      same_boundary_point(l1.forward(), l2.forward()))
    return 0.0;
  // Seed both parameters by a few alternating projections.
  HPoint q2 = line_point(l2, 0.0);
  HPoint q1 = foot_on_line(q2, l1);
  for (int i = 0; i < 6; ++i) {
    q2 = foot_on_line(q1, l2);
    q1 = foot_on_line(q2, l1);
  }
  const double s0 = line_time(l1, q1);
  const double t0 = line_time(l2, q2);
  constexpr double window = 30.0;
  const MobiusMap back1 = normalizer(l1).inverse();
  const MobiusMap back2 = normalizer(l2).inverse();
  const Dim dim = l1.dim();
  auto at = [dim](const MobiusMap& back, double s) {
    return apply(back, HPoint::interior(dim, Complex(0.0), std::exp(s)));
  };
  auto inner = [&](double t) {
    const HPoint p2 = at(back2, t);
    return golden_section_minimize([&](double s) { return dist(at(back1, s), p2); }, s0 - window,
                                   s0 + window)
        .value;
  };
  return golden_section_minimize(inner, t0 - window, t0 + window).value;
}

}  // namespace detail

/// Image of a convex body under an isometry.
inline ConvexBody transform(const MobiusMap& g, const ConvexBody& body) {
  return std::visit(
      [&](const auto& b) -> ConvexBody {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Ball>) {
          return ConvexBody::ball(apply(g, b.center), b.radius);
        } else if constexpr (std::is_same_v<T, Horoball>) {
          const Horoball h = detail::transform(g, b);
          return ConvexBody::horoball(h.base, h.size);
        } else {
          return ConvexBody::tube(apply(g, b.axis), b.radius);
        }
      },
      body.shape());
}

/// Signed distance from an interior point to a body (negative inside).
inline double point_to_body(const HPoint& x, const ConvexBody& body) {
  if (x.dim() != body.dim()) throw DimensionError("point and body live in different dimensions");
  require_interior(x, "point");
  return std::visit(
      [&](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Ball>) return dist(x, b.center) - b.radius;
        else if constexpr (std::is_same_v<T, Horoball>) return detail::point_to_horoball(x, b);
        else return dist_point_to_line(x, b.axis) - b.radius;
      },
      body.shape());
}

/// Signed distance between convex bodies: the length of the common
/// perpendicular when they are disjoint, nonpositive when they overlap.
/// Bodies sharing a point at infinity return -infinity.
inline double body_distance(const ConvexBody& first, const ConvexBody& second) {
  if (first.dim() != second.dim()) throw DimensionError("bodies live in different dimensions");
  const ConvexBody* a = &first;
  const ConvexBody* b = &second;
  if (a->shape().index() > b->shape().index()) std::swap(a, b);
  constexpr double overlap = -std::numeric_limits<double>::infinity();

  if (const auto* ba = std::get_if<Ball>(&a->shape())) {
    if (const auto* bb = std::get_if<Ball>(&b->shape()))
      return dist(ba->center, bb->center) - (ba->radius + bb->radius);
    return point_to_body(ba->center, *b) - ba->radius;
  }
  if (const auto* ha = std::get_if<Horoball>(&a->shape())) {
    if (const auto* hb = std::get_if<Horoball>(&b->shape())) {
      if (same_boundary_point(ha->base, hb->base)) return overlap;
      if (ha->base.is_infinity()) return std::log(ha->size / hb->size);
      if (hb->base.is_infinity()) return std::log(hb->size / ha->size);
      const double sep = std::abs(ha->base.horizontal() - hb->base.horizontal());
      return 2.0 * std::log(sep / std::sqrt(ha->size * hb->size));
    }
    const auto& tube = std::get<Tube>(b->shape());
    const detail::HoroFrame frame = detail::horo_frame(*ha);
    const GeodesicLine ax = apply(frame.map, tube.axis);
    if (ax.backward().is_infinity() || ax.forward().is_infinity()) return overlap;
    const double apex = std::abs(ax.backward().horizontal() - ax.forward().horizontal()) / 2.0;
    return std::log(frame.height / apex) - tube.radius;
  }
  const auto& ta = std::get<Tube>(a->shape());
  const auto& tb = std::get<Tube>(b->shape());
  const bool ordered = detail::line_key(ta.axis, ta.radius) <= detail::line_key(tb.axis, tb.radius);
  const double axes = ordered ? detail::line_line_distance(ta.axis, tb.axis)
                              : detail::line_line_distance(tb.axis, ta.axis);
  return axes - (ta.radius + tb.radius);
}

/// Closest point map onto a convex body. For a boundary target the result
/// minimizes the Busemann function of the target over the body.
inline HPoint closest_point_on_body(const ConvexBody& body, const HPoint& target) {
  if (target.dim() != body.dim()) throw DimensionError("target and body live in different dimensions");
  const Dim dim = target.dim();
  return std::visit(
      [&](const auto& b) -> HPoint {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Ball>) {
          if (target.is_interior() && dist(b.center, target) <= b.radius)
            throw ContainmentError("target lies inside the ball");
          return point_toward(b.center, target, b.radius);
        } else if constexpr (std::is_same_v<T, Horoball>) {
          const detail::HoroFrame frame = detail::horo_frame(b);
          const HPoint t = apply(frame.map, target);
          if (t.is_infinity()) throw ParameterError("closest point to the horoball base is undefined");
          if (t.is_interior() && t.height() >= frame.height)
            throw ContainmentError("target lies inside the horoball");
          return apply(frame.map.inverse(), HPoint::interior(dim, t.horizontal(), frame.height));
        } else {
          const MobiusMap n = normalizer(b.axis);
          const HPoint t = apply(n, target);
          if (t.is_infinity() || (t.is_boundary() && t.horizontal() == Complex(0.0)))
            throw ParameterError("closest point to an endpoint of the tube axis is undefined");
          const Complex z = t.horizontal();
          if (t.is_interior() && (z == Complex(0.0) || std::asinh(std::abs(z) / t.height()) <= b.radius))
            throw ContainmentError("target lies inside the tube");
          const double rho = t.is_interior() ? std::sqrt(std::norm(z) + t.height() * t.height())
                                             : std::abs(z);
          const Complex u = z / std::abs(z);
          const Complex foot = rho * std::tanh(b.radius) * u;
          return apply(n.inverse(), detail::make_interior(dim, foot, rho / std::cosh(b.radius)));
        }
      },
      body.shape());
}

/// Whether two bodies coincide up to a tolerance on their defining data.
inline bool approx_equal(const ConvexBody& x, const ConvexBody& y, double tol) {
  if (x.shape().index() != y.shape().index() || x.dim() != y.dim()) return false;
  auto rel = [tol](double u, double v) { return std::abs(u - v) <= tol * std::max(1.0, std::abs(u)); };
  if (const auto* a = std::get_if<Ball>(&x.shape())) {
    const auto& b = std::get<Ball>(y.shape());
    return dist(a->center, b.center) <= tol && rel(a->radius, b.radius);
  }
  if (const auto* a = std::get_if<Horoball>(&x.shape())) {
    const auto& b = std::get<Horoball>(y.shape());
    return near_boundary_point(a->base, b.base, tol) && rel(a->size, b.size);
  }
  const auto& a = std::get<Tube>(x.shape());
  const auto& b = std::get<Tube>(y.shape());
  const bool same = near_boundary_point(a.axis.backward(), b.axis.backward(), tol) &&
                    near_boundary_point(a.axis.forward(), b.axis.forward(), tol);
  const bool flipped = near_boundary_point(a.axis.backward(), b.axis.forward(), tol) &&
                       near_boundary_point(a.axis.forward(), b.axis.backward(), tol);
  return (same || flipped) && rel(a.radius, b.radius);
}

}  // namespace kleinian
