#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

#include "kleinian/error.hpp"

namespace kleinian {

using Complex = std::complex<double>;

/// Dimension of the hyperbolic space. H2 is realized as the vertical
/// half-plane over the real axis inside upper half-space.
enum class Dim : int { H2 = 2, H3 = 3 };

inline int to_int(Dim d) { return static_cast<int>(d); }

inline Dim dim_from_int(int n) {
  if (n == 2) return Dim::H2;
  if (n == 3) return Dim::H3;
  throw DimensionError("dimension must be 2 or 3, got " + std::to_string(n));
}

/// Default tolerances. Every operation that uses one also accepts an override.
struct Tolerances {
  double geometry = 1e-9;
  double classify = 1e-9;
  double dedup = 1e-8;
  double invariance = 1e-8;
};

/// A point of upper half-space or of its boundary sphere.
///
/// Interior points carry a horizontal coordinate and a positive height.
/// Boundary points carry a horizontal coordinate or are the point at infinity,
/// which is an explicit state and never a large number.
class HPoint {
 public:
  enum class Kind { Interior, Boundary, Infinity };

  static HPoint interior(Dim dim, Complex horizontal, double height) {
    if (!(height > 0.0) || !std::isfinite(height))
      throw ParameterError("interior point needs a finite positive height");
    check_horizontal(dim, horizontal);
    return HPoint(dim, Kind::Interior, horizontal, height);
  }
  static HPoint interior(Dim dim, double x, double height) {
    return interior(dim, Complex(x, 0.0), height);
  }
  static HPoint boundary(Dim dim, Complex horizontal) {
    check_horizontal(dim, horizontal);
    return HPoint(dim, Kind::Boundary, horizontal, 0.0);
  }
  static HPoint boundary(Dim dim, double x) { return boundary(dim, Complex(x, 0.0)); }
  static HPoint infinity(Dim dim) { return HPoint(dim, Kind::Infinity, Complex(0.0, 0.0), 0.0); }

  Dim dim() const { return dim_; }
  Kind kind() const { return kind_; }
  bool is_interior() const { return kind_ == Kind::Interior; }
  bool is_boundary() const { return kind_ != Kind::Interior; }
  bool is_infinity() const { return kind_ == Kind::Infinity; }

  /// Horizontal coordinate; zero for the point at infinity.
  Complex horizontal() const { return z_; }
  /// Height; zero for boundary points.
  double height() const { return h_; }

  friend bool operator==(const HPoint& a, const HPoint& b) {
    return a.dim_ == b.dim_ && a.kind_ == b.kind_ && a.z_ == b.z_ && a.h_ == b.h_;
  }

  std::string to_string() const;

 private:
  HPoint(Dim dim, Kind kind, Complex z, double h) : dim_(dim), kind_(kind), z_(z), h_(h) {}

  static void check_horizontal(Dim dim, Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw ParameterError("horizontal coordinate must be finite; use HPoint::infinity");
    if (dim == Dim::H2 && z.imag() != 0.0)
      throw DimensionError("H2 points must have a real horizontal coordinate");
  }

  Dim dim_;
  Kind kind_;
  Complex z_;
  double h_;
};

inline std::string format_complex(Complex z) {
  char buf[96];
  if (z.imag() == 0.0) {
    std::snprintf(buf, sizeof buf, "%.17g", z.real());
  } else {
    std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
  }
  return buf;
}

inline std::string HPoint::to_string() const {
  switch (kind_) {
    case Kind::Infinity:
      return "inf";
    case Kind::Boundary:
      return format_complex(z_);
    case Kind::Interior: {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g", h_);
      return "(" + format_complex(z_) + ", " + buf + ")";
    }
  }
  return {};
}

inline void require_same_dim(const HPoint& a, const HPoint& b) {
  if (a.dim() != b.dim()) throw DimensionError("operands live in different dimensions");
}

inline void require_interior(const HPoint& p, const char* what) {
  if (!p.is_interior()) throw ParameterError(std::string(what) + " must be an interior point");
}

inline void require_boundary(const HPoint& p, const char* what) {
  if (!p.is_boundary()) throw ParameterError(std::string(what) + " must be a boundary point");
}

/// Exact equality of boundary points, treating infinity as a value.
inline bool same_boundary_point(const HPoint& a, const HPoint& b) {
  if (a.is_infinity() || b.is_infinity()) return a.is_infinity() && b.is_infinity();
  return a.horizontal() == b.horizontal();
}

/// Boundary points equal up to an absolute tolerance on the horizontal
/// coordinate. Infinity only matches infinity.
inline bool near_boundary_point(const HPoint& a, const HPoint& b, double tol) {
  if (a.is_infinity() || b.is_infinity()) return a.is_infinity() && b.is_infinity();
  return std::abs(a.horizontal() - b.horizontal()) <= tol;
}

/// An oriented geodesic line, given by its backward and forward endpoints.
class GeodesicLine {
 public:
  GeodesicLine(HPoint backward, HPoint forward) : minus_(backward), plus_(forward) {
    require_same_dim(minus_, plus_);
    require_boundary(minus_, "geodesic endpoint");
    require_boundary(plus_, "geodesic endpoint");
    if (same_boundary_point(minus_, plus_))
      throw ParameterError("geodesic endpoints must be distinct");
  }

  const HPoint& backward() const { return minus_; }
  const HPoint& forward() const { return plus_; }
  Dim dim() const { return minus_.dim(); }

  GeodesicLine reversed() const { return GeodesicLine(plus_, minus_); }

 private:
  HPoint minus_;
  HPoint plus_;
};

/// A unit tangent vector in Hopf coordinates: a line and a signed time along it.
/// Time zero is the point of the line closest to the reference point.
struct OrientedVector {
  GeodesicLine line;
  double basetime;
};

}  // namespace kleinian
