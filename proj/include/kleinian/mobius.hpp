#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string>
#include <string_view>
#include <variant>

#include "kleinian/point.hpp"

namespace kleinian {

/// An orientation-preserving isometry of upper half-space, stored as a
/// determinant-one matrix [[a,b],[c,d]]. Real entries for H2, complex for H3.
/// M and -M act identically; equality and hashing ignore the sign.
class MobiusMap {
 public:
  MobiusMap(Dim dim, Complex a, Complex b, Complex c, Complex d) : dim_(dim), m_{a, b, c, d} {
    if (dim == Dim::H2) {
      for (const auto& e : m_)
        if (e.imag() != 0.0) throw DimensionError("H2 maps need real matrix entries");
    }
    for (const auto& e : m_)
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
        throw ParameterError("matrix entries must be finite");
    normalize();
  }
  MobiusMap(Dim dim, double a, double b, double c, double d)
      : MobiusMap(dim, Complex(a), Complex(b), Complex(c), Complex(d)) {}

  static MobiusMap identity(Dim dim) { return MobiusMap(dim, 1.0, 0.0, 0.0, 1.0); }

  Dim dim() const { return dim_; }
  Complex a() const { return m_[0]; }
  Complex b() const { return m_[1]; }
  Complex c() const { return m_[2]; }
  Complex d() const { return m_[3]; }
  Complex det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  Complex trace() const { return m_[0] + m_[3]; }

  /// Trace with the sign ambiguity removed: real part >= 0 (imaginary part
  /// >= 0 when the real part vanishes).
  Complex normalized_trace() const {
    Complex t = trace();
    if (t.real() < 0.0 || (t.real() == 0.0 && t.imag() < 0.0)) t = -t;
    return t;
  }

  MobiusMap inverse() const { return MobiusMap(dim_, m_[3], -m_[1], -m_[2], m_[0], Raw{}); }

  friend MobiusMap operator*(const MobiusMap& g, const MobiusMap& h) {
    if (g.dim_ != h.dim_) throw DimensionError("cannot compose maps of different dimensions");
    const auto& x = g.m_;
    const auto& y = h.m_;
    return MobiusMap(g.dim_, x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3],
                     x[2] * y[0] + x[3] * y[2], x[2] * y[1] + x[3] * y[3], Raw{});
  }

  /// Max-entry distance between the matrices, minimized over the sign of h.
  friend double matrix_distance(const MobiusMap& g, const MobiusMap& h) {
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      plus = std::max(plus, std::abs(g.m_[i] - h.m_[i]));
      minus = std::max(minus, std::abs(g.m_[i] + h.m_[i]));
    }
    return std::min(plus, minus);
  }

  friend bool operator==(const MobiusMap& g, const MobiusMap& h) {
    if (g.dim_ != h.dim_) return false;
    return g.m_ == h.m_ || (g.m_[0] == -h.m_[0] && g.m_[1] == -h.m_[1] && g.m_[2] == -h.m_[2] &&
                            g.m_[3] == -h.m_[3]);
  }

  bool is_identity(double tol) const { return matrix_distance(*this, identity(dim_)) <= tol; }

  /// Representative of {M, -M} whose first nonzero entry has positive real
  /// part (or positive imaginary part); used for hashing.
  std::array<Complex, 4> canonical_entries() const {
    auto e = m_;
    for (const auto& x : e) {
      if (x == Complex(0.0)) continue;
      if (x.real() < 0.0 || (x.real() == 0.0 && x.imag() < 0.0))
        for (auto& y : e) y = -y;
      break;
    }
    for (auto& y : e) {  // fold -0.0 into 0.0 so equal maps hash equally
      y = Complex(y.real() + 0.0, y.imag() + 0.0);
    }
    return e;
  }

  std::string to_string() const {
    return "[[" + format_complex(m_[0]) + "," + format_complex(m_[1]) + "],[" +
           format_complex(m_[2]) + "," + format_complex(m_[3]) + "]]";
  }

 private:
  struct Raw {};
  // Products and inverses of normalized maps are normalized up to rounding;
  // skip the square root there.
  MobiusMap(Dim dim, Complex a, Complex b, Complex c, Complex d, Raw) : dim_(dim), m_{a, b, c, d} {
    if (dim_ == Dim::H2)
      for (auto& e : m_) e = Complex(e.real(), 0.0);
  }

  void normalize() {
    const Complex det = m_[0] * m_[3] - m_[1] * m_[2];
    if (std::abs(det) == 0.0) throw ParameterError("matrix is singular");
    if (std::abs(det - 1.0) <= 1e-14) return;
    Complex s;
    if (dim_ == Dim::H2) {
      if (det.real() <= 0.0)
        throw ParameterError("H2 maps need a positive determinant (orientation preserving)");
      s = Complex(std::sqrt(det.real()), 0.0);
    } else {
      s = std::sqrt(det);
    }
    for (auto& e : m_) e /= s;
    if (dim_ == Dim::H2)
      for (auto& e : m_) e = Complex(e.real(), 0.0);
  }

  Dim dim_;
  std::array<Complex, 4> m_;
};

struct MobiusHash {
  std::size_t operator()(const MobiusMap& g) const noexcept {
    std::size_t h = static_cast<std::size_t>(to_int(g.dim()));
    for (const auto& e : g.canonical_entries()) {
      for (double part : {e.real(), e.imag()}) {
        std::uint64_t bits;
        std::memcpy(&bits, &part, sizeof bits);
        h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      }
    }
    return h;
  }
};

/// Action on a point of upper half-space or its boundary (Poincare extension).
inline HPoint apply(const MobiusMap& g, const HPoint& x) {
  if (g.dim() != x.dim()) throw DimensionError("map and point live in different dimensions");
  const Complex a = g.a(), b = g.b(), c = g.c(), d = g.d();
  auto horizontal = [&](Complex z) {
    return g.dim() == Dim::H2 ? Complex(z.real(), 0.0) : z;
  };
  if (x.is_infinity()) {
    if (c == Complex(0.0)) return HPoint::infinity(x.dim());
    return HPoint::boundary(x.dim(), horizontal(a / c));
  }
  const Complex z = x.horizontal();
  const Complex czd = c * z + d;
  if (x.is_boundary()) {
    if (czd == Complex(0.0)) return HPoint::infinity(x.dim());
    return HPoint::boundary(x.dim(), horizontal((a * z + b) / czd));
  }
  const double h = x.height();
  const double h2 = h * h;
  const double den = std::norm(czd) + std::norm(c) * h2;
  const Complex num = (a * z + b) * std::conj(czd) + a * std::conj(c) * h2;
  return HPoint::interior(x.dim(), horizontal(num / den), h / den);
}

inline GeodesicLine apply(const MobiusMap& g, const GeodesicLine& line) {
  return GeodesicLine(apply(g, line.backward()), apply(g, line.forward()));
}

/// Classification of an isometry by its trace.
struct Loxodromic {
  double translation_length;
};
struct Parabolic {};
struct Elliptic {};
struct Identity {};
using IsometryClass = std::variant<Loxodromic, Parabolic, Elliptic, Identity>;

inline bool is_loxodromic(const IsometryClass& c) { return std::holds_alternative<Loxodromic>(c); }

inline const char* class_name(const IsometryClass& c) {
  switch (c.index()) {
    case 0: return "loxodromic";
    case 1: return "parabolic";
    case 2: return "elliptic";
    default: return "identity";
  }
}

namespace detail {
inline double trace_translation_length(Complex t) {
  if (t.imag() == 0.0) {
    const double half = std::abs(t.real()) / 2.0;
    return half > 1.0 ? 2.0 * std::acosh(half) : 0.0;
  }
  return std::max(0.0, 2.0 * std::abs(std::acosh(t / 2.0).real()));
}
}  // namespace detail

inline IsometryClass classify(const MobiusMap& g, double tol = Tolerances{}.classify) {
  if (!(tol > 0.0)) throw ParameterError("classification tolerance must be positive");
  if (g.is_identity(tol)) return Identity{};
  const Complex t = g.normalized_trace();
  const double disc = std::abs(t * t - 4.0);
  if (disc <= tol) return Parabolic{};
  if (g.dim() == Dim::H2) {
    const double t2 = t.real() * t.real();
    if (t2 < 4.0 - tol) return Elliptic{};
    return Loxodromic{detail::trace_translation_length(t)};
  }
  if (std::abs(t.imag()) <= tol && std::abs(t.real()) < 2.0) return Elliptic{};
  return Loxodromic{detail::trace_translation_length(t)};
}

/// Minimal displacement; zero for everything but loxodromics.
inline double translation_length(const MobiusMap& g, double tol = Tolerances{}.classify) {
  const auto c = classify(g, tol);
  if (const auto* lox = std::get_if<Loxodromic>(&c)) return lox->translation_length;
  return 0.0;
}

/// Oriented axis of a loxodromic map: from the repelling to the attracting
/// fixed point.
inline GeodesicLine axis(const MobiusMap& g, double tol = Tolerances{}.classify) {
  if (!is_loxodromic(classify(g, tol)))
    throw ClassificationError("axis is only defined for loxodromic maps");
  const Dim dim = g.dim();
  const Complex a = g.a(), b = g.b(), c = g.c(), d = g.d();
  auto boundary = [&](Complex z) {
    return HPoint::boundary(dim, dim == Dim::H2 ? Complex(z.real(), 0.0) : z);
  };
  if (c == Complex(0.0)) {
    // z -> a^2 z + ab: fixes infinity and ab / (1 - a^2) = b / (d - a).
    const HPoint finite = boundary(b / (d - a));
    if (std::abs(a) > 1.0) return GeodesicLine(finite, HPoint::infinity(dim));
    return GeodesicLine(HPoint::infinity(dim), finite);
  }
  // c z^2 + (d - a) z - b = 0, stable root pairing.
  const Complex B = d - a;
  Complex sq = std::sqrt(B * B + 4.0 * b * c);
  if (dim == Dim::H2) sq = Complex(sq.real(), 0.0);
  if ((std::conj(B) * sq).real() < 0.0) sq = -sq;
  const Complex q = -0.5 * (B + sq);
  const Complex r1 = q / c;
  const Complex r2 = (q == Complex(0.0)) ? Complex(0.0) : -b / q;
  // Attracting fixed point: |c z + d| > 1.
  if (std::abs(c * r1 + d) > std::abs(c * r2 + d)) return GeodesicLine(boundary(r2), boundary(r1));
  return GeodesicLine(boundary(r1), boundary(r2));
}

// ---------------------------------------------------------------------------
// Matrix literal syntax: [[a,b],[c,d]] with entries such as 1.5, -2, 0.3+1.2i,
// 2i, -i.

namespace detail {
inline void skip_ws(std::string_view s, std::size_t& i) {
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
}
}  // namespace detail

/// Parses a real or complex literal of the form "re", "imi" or "re+imi".
inline Complex parse_complex(std::string_view text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) throw ParameterError("empty numeric literal");
  auto parse_real = [&](const std::string& part) -> double {
    if (part.empty() || part == "+") return 1.0;
    if (part == "-") return -1.0;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw ParameterError("bad numeric literal '" + std::string(text) + "'");
    }
    if (used != part.size()) throw ParameterError("bad numeric literal '" + std::string(text) + "'");
    return v;
  };
  if (s.back() != 'i') return Complex(parse_real(s), 0.0);
  const std::string body = s.substr(0, s.size() - 1);
  // Split at the last sign that is not part of an exponent.
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  if (split == std::string::npos) return Complex(0.0, parse_real(body));
  return Complex(parse_real(body.substr(0, split)), parse_real(body.substr(split)));
}

/// Parses "[[a,b],[c,d]]". Dimension H2 requires real entries.
inline MobiusMap parse_matrix(std::string_view s, Dim dim) {
  std::size_t i = 0;
  auto expect = [&](char ch) {
    detail::skip_ws(s, i);
    if (i >= s.size() || s[i] != ch)
      throw ParameterError("matrix literal: expected '" + std::string(1, ch) + "' in '" +
                           std::string(s) + "'");
    ++i;
  };
  auto entry = [&]() {
    detail::skip_ws(s, i);
    const std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']') ++i;
    return parse_complex(s.substr(start, i - start));
  };
  expect('[');
  expect('[');
  const Complex a = entry();
  expect(',');
  const Complex b = entry();
  expect(']');
  expect(',');
  expect('[');
  const Complex c = entry();
  expect(',');
  const Complex d = entry();
  expect(']');
  expect(']');
  detail::skip_ws(s, i);
  if (i != s.size()) throw ParameterError("matrix literal: trailing characters");
  return MobiusMap(dim, a, b, c, d);
}

}  // namespace kleinian
