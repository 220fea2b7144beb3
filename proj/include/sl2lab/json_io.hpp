#pragma once

// JSON descriptions of bases, potentials, cocycles and scenarios (strict:
// unknown fields are schema errors), and serializers for results.

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sl2lab/base_dynamics.hpp"
#include "sl2lab/cocycle.hpp"
#include "sl2lab/common.hpp"
#include "sl2lab/projective.hpp"
#include "sl2lab/spectral.hpp"
#include "sl2lab/uh.hpp"

namespace sl2lab::io {

using json = nlohmann::json;

inline constexpr const char* scenario_schema = "sl2lab.scenario/1";
inline constexpr const char* record_schema = "sl2lab.record/1";
inline constexpr const char* results_schema = "sl2lab.results/1";
inline constexpr const char* software_version = "1.0.0";

[[noreturn]] inline void schema_error(const std::string& what) { throw Failure(FailureKind::schema, what); }

/// Object view that rejects keys outside `allowed`.
class Fields {
 public:
  Fields(const json& j, std::string context, std::initializer_list<const char*> allowed) : j_(j), ctx_(std::move(context)) {
    if (!j.is_object()) schema_error(ctx_ + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!ok.count(it.key())) schema_error(ctx_ + ": unknown field '" + it.key() + "'");
    }
  }

  bool has(const char* k) const { return j_.contains(k); }
  const json& raw(const char* k) const {
    if (!has(k)) schema_error(ctx_ + ": missing field '" + k + "'");
    return j_.at(k);
  }
  double num(const char* k) const {
    const json& v = raw(k);
    if (!v.is_number()) schema_error(ctx_ + "." + k + ": expected a number");
    return v.get<double>();
  }
  double num(const char* k, double def) const { return has(k) ? num(k) : def; }
  std::int64_t integer(const char* k) const {
    const json& v = raw(k);
    if (!v.is_number_integer()) schema_error(ctx_ + "." + k + ": expected an integer");
    return v.get<std::int64_t>();
  }
  std::int64_t integer(const char* k, std::int64_t def) const { return has(k) ? integer(k) : def; }
  std::uint64_t unsigned_integer(const char* k, std::uint64_t def) const {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      schema_error(ctx_ + "." + k + ": expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }
  std::string str(const char* k) const {
    const json& v = raw(k);
    if (!v.is_string()) schema_error(ctx_ + "." + k + ": expected a string");
    return v.get<std::string>();
  }
  std::string str(const char* k, const std::string& def) const { return has(k) ? str(k) : def; }
  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_boolean()) schema_error(ctx_ + "." + k + ": expected a boolean");
    return v.get<bool>();
  }
  const std::string& context() const { return ctx_; }

 private:
  const json& j_;
  std::string ctx_;
};

/// A number or a [re, im] pair.
inline cplx parse_complex(const json& j, const std::string& ctx) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  schema_error(ctx + ": expected a number or [re, im]");
}

inline std::vector<cplx> parse_complex_list(const json& j, const std::string& ctx) {
  if (!j.is_array()) schema_error(ctx + ": expected an array");
  std::vector<cplx> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_complex(j[i], ctx + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> parse_real_list(const json& j, const std::string& ctx) {
  if (!j.is_array()) schema_error(ctx + ": expected an array");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) schema_error(ctx + ": expected numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline json complex_json(cplx z) {
  if (z.imag() == 0.0) return z.real();
  return json::array({z.real(), z.imag()});
}

// --------------------------------------------------------------------------
// Base systems

/// {"family":"periodic","orbits":[{"period":n,"weight":w}]}
/// {"family":"rotation","alpha":a | "golden"}
/// {"family":"bernoulli","probabilities":[...]}
inline BaseSystem parse_base(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) schema_error("base: missing string field 'family'");
  const std::string fam = j["family"].get<std::string>();
  if (fam == "periodic") {
    Fields f(j, "base", {"family", "orbits"});
    const json& os = f.raw("orbits");
    if (!os.is_array() || os.empty()) schema_error("base.orbits: expected a nonempty array");
    std::vector<Orbit> orbits;
    for (const auto& o : os) {
      Fields of(o, "base.orbits[]", {"period", "weight"});
      const auto p = of.integer("period");
      if (p < 1 || p > 1000000) schema_error("base.orbits[].period: out of range");
      orbits.push_back({static_cast<int>(p), of.num("weight", os.size() == 1 ? 1.0 : -1.0)});
    }
    return BaseSystem::periodic(orbits);
  }
  if (fam == "rotation") {
    Fields f(j, "base", {"family", "alpha"});
    const json& a = f.raw("alpha");
    if (a.is_string() && a.get<std::string>() == "golden") return BaseSystem::golden_rotation();
    return BaseSystem::rotation(f.num("alpha"));
  }
  if (fam == "bernoulli") {
    Fields f(j, "base", {"family", "probabilities"});
    return BaseSystem::bernoulli(parse_real_list(f.raw("probabilities"), "base.probabilities"));
  }
  schema_error("base.family: unknown family '" + fam + "'");
}

inline json base_json(const BaseSystem& b) {
  if (b.is_periodic()) {
    json os = json::array();
    for (const auto& o : b.orbits().orbits) os.push_back({{"period", o.period}, {"weight", o.weight}});
    return {{"family", "periodic"}, {"orbits", os}};
  }
  if (b.is_rotation()) return {{"family", "rotation"}, {"alpha", b.alpha()}};
  return {{"family", "bernoulli"}, {"probabilities", b.probabilities()}};
}

// --------------------------------------------------------------------------
// Potentials

/// {"kind":"constant","value":c}
/// {"kind":"table","values":[...]}                      (periodic bases)
/// {"kind":"trig","constant":c,"cos":[...],"sin":[...]}  (rotations)
/// {"kind":"cylinder","depth":k,"table":[...]}          (Bernoulli shifts)
inline Potential parse_potential(const json& j, const BaseSystem& base, const std::string& ctx = "potential") {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) schema_error(ctx + ": missing string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  Potential p;
  if (kind == "constant") {
    Fields f(j, ctx, {"kind", "value"});
    p = Potential::constant(base, parse_complex(f.raw("value"), ctx + ".value"));
  } else if (kind == "table") {
    Fields f(j, ctx, {"kind", "values"});
    p = Potential::table(parse_complex_list(f.raw("values"), ctx + ".values"));
  } else if (kind == "trig") {
    Fields f(j, ctx, {"kind", "constant", "cos", "sin"});
    TrigPolynomial t;
    if (f.has("constant")) t.constant = parse_complex(f.raw("constant"), ctx + ".constant");
    if (f.has("cos")) t.cos = parse_complex_list(f.raw("cos"), ctx + ".cos");
    if (f.has("sin")) t.sin = parse_complex_list(f.raw("sin"), ctx + ".sin");
    p = Potential(t);
  } else if (kind == "cylinder") {
    Fields f(j, ctx, {"kind", "depth", "table"});
    if (!base.is_shift()) schema_error(ctx + ": cylinder potentials need a Bernoulli base");
    p = Potential(CylinderTable{base.symbols(), static_cast<int>(f.integer("depth")), parse_complex_list(f.raw("table"), ctx + ".table")});
  } else {
    schema_error(ctx + ".kind: unknown kind '" + kind + "'");
  }
  if (!p.matches(base)) schema_error(ctx + ": representation does not match the base family");
  return p;
}

inline json potential_json(const Potential& p) {
  auto list = [](const std::vector<cplx>& v) {
    json a = json::array();
    for (cplx z : v) a.push_back(complex_json(z));
    return a;
  };
  if (const auto* t = std::get_if<PeriodicTable>(&p.repr())) return {{"kind", "table"}, {"values", list(t->values)}};
  if (const auto* t = std::get_if<TrigPolynomial>(&p.repr())) {
    return {{"kind", "trig"}, {"constant", complex_json(t->constant)}, {"cos", list(t->cos)}, {"sin", list(t->sin)}};
  }
  const auto& c = std::get<CylinderTable>(p.repr());
  return {{"kind", "cylinder"}, {"depth", c.depth}, {"table", list(c.table)}};
}

// --------------------------------------------------------------------------
// Cocycles

inline Mat2 parse_matrix(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_array() || !j[1].is_array() || j[0].size() != 2 || j[1].size() != 2) {
    schema_error(ctx + ": expected [[a11, a12], [a21, a22]]");
  }
  return {parse_complex(j[0][0], ctx), parse_complex(j[0][1], ctx), parse_complex(j[1][0], ctx), parse_complex(j[1][1], ctx)};
}

inline Sl2Element parse_sl2(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) schema_error(ctx + ": expected [b1, b2, b3]");
  return {parse_complex(j[0], ctx), parse_complex(j[1], ctx), parse_complex(j[2], ctx)};
}

/// {"kind":"schrodinger","potential":P,"energy":E}   fiber [[E - v, -1], [1, 0]]
/// {"kind":"potential","potential":P}                 fiber [[u, -1], [1, 0]]
/// {"kind":"constant","matrix":[[..],[..]]}
/// {"kind":"rotation","angle":theta}                   R(2 pi theta)
inline Cocycle parse_cocycle(const json& j, const BaseSystem& base) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) schema_error("cocycle: missing string field 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "schrodinger") {
    Fields f(j, "cocycle", {"kind", "potential", "energy"});
    return Cocycle::schrodinger(base, parse_potential(f.raw("potential"), base, "cocycle.potential"),
                                f.has("energy") ? parse_complex(f.raw("energy"), "cocycle.energy") : cplx(0.0));
  }
  if (kind == "potential") {
    Fields f(j, "cocycle", {"kind", "potential"});
    return Cocycle::of_potential(base, parse_potential(f.raw("potential"), base, "cocycle.potential"));
  }
  if (kind == "constant") {
    Fields f(j, "cocycle", {"kind", "matrix"});
    const Mat2 m = parse_matrix(f.raw("matrix"), "cocycle.matrix");
    if (!is_sl2(m)) schema_error("cocycle.matrix: determinant is not 1");
    return Cocycle::constant(base, m);
  }
  if (kind == "rotation") {
    Fields f(j, "cocycle", {"kind", "angle"});
    return Cocycle::constant(base, Mat2::rotation(2.0 * pi * f.num("angle")));
  }
  schema_error("cocycle.kind: unknown kind '" + kind + "'");
}

inline ConeField parse_cone(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "upper") return ConeField::upper_hemisphere();
    if (s == "lower") return ConeField::lower_hemisphere();
    schema_error("cone: expected 'upper', 'lower' or an object");
  }
  Fields f(j, "cone", {"center", "radius"});
  const auto c = parse_complex_list(f.raw("center"), "cone.center");
  if (c.size() != 2) schema_error("cone.center: expected [x, y]");
  try {
    return ConeField::constant({ProjPoint(c[0], c[1]), f.num("radius")});
  } catch (const Failure& e) {
    schema_error(std::string("cone: ") + e.what());
  }
}

// --------------------------------------------------------------------------
// Scenarios

struct Scenario {
  std::string operation;
  json base, potential, cocycle, params = json::object();
  std::uint64_t seed = 1;
  std::size_t samples = 8;
  std::int64_t n = 4096;
  double tol = 0.0;  // 0 = module default
  std::string out;
  unsigned threads = 1;
};

/// Top-level scenario fields; each has a matching CLI flag.
inline const std::vector<std::string>& scenario_fields() {
  static const std::vector<std::string> f = {"schema", "operation", "base", "potential", "cocycle", "params",
                                             "seed",   "samples",   "n",    "tol",       "out",     "threads"};
  return f;
}

inline const std::vector<std::string>& operations() {
  static const std::vector<std::string> ops = {"lyapunov", "certify", "bands", "ids", "phi",
                                               "ab-check", "search",  "quantita-scan", "reproduce"};
  return ops;
}

inline Scenario parse_scenario(const json& j) {
  Fields f(j, "scenario", {"schema", "operation", "base", "potential", "cocycle", "params", "seed", "samples", "n", "tol",
                           "out", "threads"});
  if (f.str("schema", scenario_schema) != scenario_schema) schema_error("scenario.schema: unsupported version");
  Scenario s;
  s.operation = f.str("operation");
  if (std::find(operations().begin(), operations().end(), s.operation) == operations().end()) {
    schema_error("scenario.operation: unknown operation '" + s.operation + "'");
  }
  if (f.has("base")) s.base = f.raw("base");
  if (f.has("potential")) s.potential = f.raw("potential");
  if (f.has("cocycle")) s.cocycle = f.raw("cocycle");
  if (f.has("params")) {
    s.params = f.raw("params");
    if (!s.params.is_object()) schema_error("scenario.params: expected an object");
  }
  s.seed = f.unsigned_integer("seed", 1);
  s.samples = static_cast<std::size_t>(f.integer("samples", 8));
  s.n = f.integer("n", 4096);
  s.tol = f.num("tol", 0.0);
  s.out = f.str("out", "");
  s.threads = static_cast<unsigned>(f.integer("threads", 1));
  if (s.samples < 1) schema_error("scenario.samples: must be at least 1");
  if (s.n < 1) schema_error("scenario.n: must be at least 1");
  if (s.tol < 0.0) schema_error("scenario.tol: must be nonnegative");
  if (s.threads < 1) schema_error("scenario.threads: must be at least 1");
  return s;
}

/// Canonical form without execution-only fields (out, threads), used for hashing.
inline json scenario_canonical(const Scenario& s) {
  json j = {{"schema", scenario_schema}, {"operation", s.operation}, {"params", s.params}, {"seed", s.seed},
            {"samples", s.samples},     {"n", s.n},                   {"tol", s.tol}};
  if (!s.base.is_null()) j["base"] = s.base;
  if (!s.potential.is_null()) j["potential"] = s.potential;
  if (!s.cocycle.is_null()) j["cocycle"] = s.cocycle;
  return j;
}

/// FNV-1a 64 of the canonical dump, hex.
inline std::string scenario_hash(const Scenario& s) {
  const std::string text = scenario_canonical(s).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// --------------------------------------------------------------------------
// Result serializers

inline json estimate_json(const LyapunovEstimate& e) {
  return {{"value", e.value}, {"stderr", e.std_error}, {"method", to_string(e.method)}, {"n", e.n}, {"samples", e.samples}};
}

inline json projpoint_json(const ProjPoint& m) { return json::array({complex_json(m.x()), complex_json(m.y())}); }

inline json point_json(const BasePoint& x) {
  if (const auto* p = std::get_if<OrbitPoint>(&x)) return {{"orbit", p->orbit}, {"phase", p->phase}};
  if (const auto* p = std::get_if<CirclePoint>(&x)) return {{"x", p->x}};
  const auto& s = std::get<ShiftPoint>(x);
  return {{"seed", s.seed}, {"index", s.index}};
}

inline json certificate_json(const UHCertificate& c) {
  json cones = json::array();
  for (const auto& k : c.cone.cones()) cones.push_back({{"center", projpoint_json(k.center)}, {"radius", k.radius}});
  json dirs = json::array();
  for (const auto& d : c.directions) {
    dirs.push_back({{"point", point_json(d.point)},
                    {"u", projpoint_json(d.u)},
                    {"s", projpoint_json(d.s)},
                    {"u_residual", d.u_residual},
                    {"s_residual", d.s_residual}});
  }
  return {{"n", c.n},
          {"cone", cones},
          {"margin", c.margin},
          {"probe_count", c.probe_count},
          {"boundary_directions", c.boundary_directions},
          {"lambda_lower", c.lambda_lower},
          {"separation", c.separation},
          {"note", c.note},
          {"directions", dirs}};
}

inline json bands_json(const BandStructure& b) {
  json bands = json::array(), branches = json::array();
  for (const auto& x : b.bands) bands.push_back({{"left", x.left}, {"right", x.right}, {"length", x.length()}});
  for (const auto& x : b.branches) branches.push_back({{"left", x.left}, {"right", x.right}, {"sign_left", x.sign_left}});
  return {{"period", b.period()}, {"bands", bands}, {"branches", branches}, {"all_gaps_open", b.all_gaps_open()},
          {"resolution", b.resolution}};
}

}  // namespace sl2lab::io
