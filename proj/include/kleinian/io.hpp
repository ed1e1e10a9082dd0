#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kleinian/counting.hpp"
#include "kleinian/error.hpp"
#include "kleinian/group.hpp"
#include "kleinian/mobius.hpp"
#include "kleinian/sweep.hpp"

namespace kleinian::io {

using nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json parse_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Reading

namespace detail {

inline Complex complex_value(const json& j, const char* what) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_string()) return parse_complex(j.get<std::string>());
  throw ValidationError(std::string(what) + " must be a number or a complex literal");
}

inline const json& field(const json& j, const char* key, const char* owner) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string(owner) + " is missing \"" + key + "\"");
  return j.at(key);
}

inline double number(const json& j, const char* key, const char* owner) {
  const json& v = field(j, key, owner);
  if (!v.is_number()) throw ValidationError(std::string(owner) + ": \"" + key + "\" must be a number");
  return v.get<double>();
}

}  // namespace detail

/// Interior point {"horizontal": z, "height": h}.
inline HPoint parse_interior(const json& j, Dim dim) {
  const Complex z = detail::complex_value(detail::field(j, "horizontal", "point"), "horizontal");
  const double h = detail::number(j, "height", "point");
  if (dim == Dim::H2 && z.imag() != 0.0) throw DimensionError("H2 points have real horizontal coordinates");
  if (!(h > 0.0)) throw ValidationError("point height must be positive");
  return HPoint::interior(dim, z, h);
}

/// Boundary point: "inf" or a horizontal coordinate.
inline HPoint parse_boundary(const json& j, Dim dim) {
  if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity"))
    return HPoint::infinity(dim);
  const Complex z = detail::complex_value(j, "boundary point");
  if (dim == Dim::H2 && z.imag() != 0.0) throw DimensionError("H2 boundary points are real");
  return HPoint::boundary(dim, z);
}

inline MobiusMap parse_generator(const json& j, Dim dim) {
  if (j.is_string()) return parse_matrix(j.get<std::string>(), dim);
  if (j.is_array() && j.size() == 2 && j[0].is_array() && j[1].is_array() && j[0].size() == 2 &&
      j[1].size() == 2) {
    const Complex a = detail::complex_value(j[0][0], "matrix entry");
    const Complex b = detail::complex_value(j[0][1], "matrix entry");
    const Complex c = detail::complex_value(j[1][0], "matrix entry");
    const Complex d = detail::complex_value(j[1][1], "matrix entry");
    if (dim == Dim::H2 && (a.imag() != 0 || b.imag() != 0 || c.imag() != 0 || d.imag() != 0))
      throw DimensionError("H2 generators have real entries");
    return MobiusMap(dim, a, b, c, d);
  }
  throw ValidationError("generator must be a matrix literal or a 2x2 array");
}

inline StabilizedBody parse_body(const json& j, Dim dim, int rank) {
  const json& type = detail::field(j, "type", "body");
  if (!type.is_string()) throw ValidationError("body type must be a string");
  const std::string t = type.get<std::string>();
  Stabilizer stab;
  if (j.contains("stabilizer")) {
    if (!j.at("stabilizer").is_string()) throw ValidationError("stabilizer must be a word");
    stab = Stabilizer::from_word(parse_word(j.at("stabilizer").get<std::string>(), rank));
  }
  if (t == "ball")
    return {ConvexBody::ball(parse_interior(detail::field(j, "center", "ball"), dim),
                             detail::number(j, "radius", "ball")),
            stab};
  if (t == "horoball")
    return {ConvexBody::horoball(parse_boundary(detail::field(j, "base", "horoball"), dim),
                                 detail::number(j, "size", "horoball")),
            stab};
  if (t == "tube") {
    const json& axis = detail::field(j, "axis", "tube");
    if (!axis.is_array() || axis.size() != 2) throw ValidationError("tube axis must list two endpoints");
    return {ConvexBody::tube(GeodesicLine(parse_boundary(axis[0], dim), parse_boundary(axis[1], dim)),
                             detail::number(j, "radius", "tube")),
            stab};
  }
  throw ValidationError("unknown body type \"" + t + "\"");
}

inline BodyPair parse_bodies(const json& j, const GroupSpec& spec) {
  BodyPair p{parse_body(detail::field(j, "minus", "bodies"), spec.dim(), spec.rank()),
             parse_body(detail::field(j, "plus", "bodies"), spec.dim(), spec.rank())};
  check_precisely_invariant(spec, p.minus);
  check_precisely_invariant(spec, p.plus);
  return p;
}

struct GroupFile {
  GroupSpec spec;
  std::optional<BodyPair> bodies;
};

inline GroupFile parse_group(const json& j) {
  const double d = detail::number(j, "dimension", "group");
  if (d != 2.0 && d != 3.0) throw ValidationError("dimension must be 2 or 3");
  const Dim dim = d == 2.0 ? Dim::H2 : Dim::H3;
  const json& gens = detail::field(j, "generators", "group");
  if (!gens.is_array() || gens.empty()) throw ValidationError("generators must be a nonempty list");
  std::vector<MobiusMap> maps;
  for (const json& g : gens) maps.push_back(parse_generator(g, dim));
  const HPoint base = parse_interior(detail::field(j, "basepoint", "group"), dim);
  const bool free = j.value("freeness_assumed", true);
  const int check = j.value("relator_check_length", 6);
  GroupFile out{GroupSpec(std::move(maps), base, free, check), std::nullopt};
  if (j.contains("bodies")) out.bodies = parse_bodies(j.at("bodies"), out.spec);
  return out;
}

inline GroupFile load_group(const std::filesystem::path& path) {
  try {
    return parse_group(parse_json_file(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

inline FamilyMember parse_member(const json& j, const std::filesystem::path& dir) {
  const json& g = detail::field(j, "group", "family member");
  GroupFile gf = g.is_string() ? load_group(dir / g.get<std::string>()) : parse_group(g);
  if (j.contains("bodies")) gf.bodies = parse_bodies(j.at("bodies"), gf.spec);
  return {j.value("k", 0.0), std::move(gf.spec), std::move(gf.bodies)};
}

/// Family file; member groups are inline objects or paths relative to the
/// family file.
inline FamilySpec load_family(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  const std::filesystem::path dir = path.parent_path();
  try {
    const json& members = detail::field(j, "members", "family");
    if (!members.is_array()) throw ValidationError("members must be a list");
    std::vector<FamilyMember> list;
    for (const json& m : members) list.push_back(parse_member(m, dir));
    FamilySpec f{std::move(list), parse_member(detail::field(j, "limit", "family"), dir)};
    f.T = j.value("T", f.T);
    f.L = j.value("L", f.L);
    f.node_budget = j.value("budget", f.node_budget);
    if (j.contains("window")) {
      const json& w = j.at("window");
      if (!w.is_array() || w.size() != 2) throw ValidationError("window must be [t_lo, t_hi]");
      f.window = std::make_pair(w[0].get<double>(), w[1].get<double>());
    }
    f.validate();
    return f;
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Writing

struct Header {
  std::string config_hash;
  std::vector<std::string> certificates;
};

inline std::string tool_version() {
#ifdef KLEINIAN_VERSION
  return KLEINIAN_VERSION;
#else
  return "unknown";
#endif
}

inline std::string csv_header(const Header& h) {
  std::string s = "# tool: kleinian " + tool_version() + "\n# config_hash: " + h.config_hash + "\n";
  for (const auto& c : h.certificates) s += "# certificate: " + c + "\n";
  return s;
}

inline json header_json(const Header& h) {
  return {{"tool", "kleinian"}, {"version", tool_version()}, {"config_hash", h.config_hash},
          {"certificates", h.certificates}};
}

inline json to_json(const ExpFit& f) {
  return {{"C_hat", f.C_hat},         {"delta_hat", f.delta_hat}, {"window", {f.t_lo, f.t_hi}},
          {"residual", f.residual},   {"loglog_slope", f.loglog_slope}, {"rejected", f.rejected},
          {"samples", f.samples}};
}

inline json to_json(const ExponentEstimate& e) {
  return {{"delta_series", e.delta_series},   {"delta_growth", e.delta_growth},
          {"agreement_gap", e.agreement_gap}, {"T_max", e.T_max},
          {"orbit_size", e.orbit_size},       {"low_confidence", e.low_confidence},
          {"elementary", e.elementary},       {"certificate", e.certificate.to_string()}};
}

inline json nullable(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline json to_json(const SweepRow& r) {
  json j = {{"k", r.k}, {"limit", r.is_limit}, {"failed", r.failed}};
  if (r.failed) j["failure"] = r.failure;
  j["exponent"] = to_json(r.exponent);
  j["lambda0"] = r.lambda0;
  j["loop_fit"] = r.loop_fit ? to_json(*r.loop_fit) : json(nullptr);
  j["geodesic_count"] = r.geodesic_count;
  j["geodesic_ratio"] = r.geodesic_ratio;
  j["ortho_fit"] = r.ortho_fit ? to_json(*r.ortho_fit) : json(nullptr);
  j["certificates"] = r.certificates;
  return j;
}

inline json to_json(const SweepGaps& g) {
  return {{"delta_series", nullable(g.delta_series)}, {"delta_growth", nullable(g.delta_growth)},
          {"lambda0", nullable(g.lambda0)},           {"loop_C", nullable(g.loop_C)},
          {"loop_delta", nullable(g.loop_delta)},     {"geodesic_ratio", nullable(g.geodesic_ratio)},
          {"ortho_C", nullable(g.ortho_C)}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
  if (!out) throw ValidationError("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace kleinian::io
