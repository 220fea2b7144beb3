// sl2lab command-line front end.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "sl2lab/acceptance.hpp"
#include "sl2lab/json_io.hpp"
#include "sl2lab/regularizer.hpp"
#include "sl2lab/search.hpp"
#include "sl2lab/spectral.hpp"
#include "sl2lab/svg.hpp"
#include "sl2lab/uh.hpp"

namespace fs = std::filesystem;
using namespace sl2lab;
using io::json;

namespace {

constexpr int exit_ok = 0, exit_schema = 2, exit_numerical = 3, exit_budget = 4;

struct Flags {
  std::string scenario, base, potential, cocycle, params, out;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> samples, n, threads;
  std::optional<double> tol;
};

struct Output {
  json payload;
  std::map<std::string, std::string> files;  // file name -> contents
  std::string text;                          // replaces the JSON dump on stdout when set
  bool failed = false;
};

json parse_inline(const std::string& text, const char* flag) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    io::schema_error(std::string("--") + flag + ": " + e.what());
  }
}

io::Scenario assemble(const std::string& operation, const Flags& f) {
  json j = json::object();
  if (!f.scenario.empty()) {
    std::ifstream in(f.scenario);
    if (!in) io::schema_error("cannot open scenario file '" + f.scenario + "'");
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      io::schema_error(std::string("scenario file: ") + e.what());
    }
    if (!j.is_object()) io::schema_error("scenario: expected an object");
    if (j.contains("operation") && j["operation"] != operation) {
      io::schema_error("scenario operation '" + j["operation"].dump() + "' does not match subcommand '" + operation + "'");
    }
  }
  j["operation"] = operation;
  if (!f.base.empty()) j["base"] = parse_inline(f.base, "base");
  if (!f.potential.empty()) j["potential"] = parse_inline(f.potential, "potential");
  if (!f.cocycle.empty()) j["cocycle"] = parse_inline(f.cocycle, "cocycle");
  if (!f.params.empty()) j["params"] = parse_inline(f.params, "params");
  if (f.seed) j["seed"] = *f.seed;
  if (f.samples) j["samples"] = *f.samples;
  if (f.n) j["n"] = *f.n;
  if (f.tol) j["tol"] = *f.tol;
  if (!f.out.empty()) j["out"] = f.out;
  if (f.threads) j["threads"] = *f.threads;
  return io::parse_scenario(j);
}

BaseSystem need_base(const io::Scenario& s) {
  if (s.base.is_null()) io::schema_error("scenario: 'base' is required for " + s.operation);
  return io::parse_base(s.base);
}

Cocycle need_cocycle(const io::Scenario& s, const BaseSystem& base) {
  if (s.cocycle.is_null()) io::schema_error("scenario: 'cocycle' is required for " + s.operation);
  return io::parse_cocycle(s.cocycle, base);
}

LyapunovOptions lyap_options(const io::Scenario& s) {
  return {s.n, s.samples, s.seed};
}

/// Periodic potential from a table potential (base optional, defaults to one orbit).
PeriodicPotential need_periodic(const io::Scenario& s) {
  if (s.potential.is_null()) io::schema_error("scenario: 'potential' is required for " + s.operation);
  std::vector<cplx> values;
  if (s.base.is_null()) {
    io::Fields f(s.potential, "potential", {"kind", "values"});
    if (f.str("kind") != "table") io::schema_error("potential.kind: expected 'table'");
    values = io::parse_complex_list(f.raw("values"), "potential.values");
  } else {
    const BaseSystem base = io::parse_base(s.base);
    if (!base.is_periodic() || base.orbits().orbits.size() != 1) io::schema_error("base: expected a single periodic orbit");
    const Potential p = io::parse_potential(s.potential, base);
    values = std::get<PeriodicTable>(p.repr()).values;
  }
  std::vector<double> real;
  for (cplx z : values) {
    if (z.imag() != 0.0) io::schema_error("potential: spectral operations need a real potential");
    real.push_back(z.real());
  }
  return PeriodicPotential{real};
}

std::string csv_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// ---------------------------------------------------------------------------

Output run_lyapunov(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"method", "energies", "max_doubling", "cone"});
  const BaseSystem base = need_base(s);
  const std::string method = p.str("method", "auto");
  const LyapunovOptions lo = lyap_options(s);
  auto evaluate = [&](const Cocycle& c) -> json {
    if (method == "auto") return io::estimate_json(lyapunov(c, lo));
    if (method == "birkhoff") return io::estimate_json(lyapunov_birkhoff(c, s.n, s.samples, s.seed));
    if (method == "periodic_exact") return io::estimate_json(lyapunov_periodic_exact(c));
    if (method == "uh_exact") {
      const ConeField cone = p.has("cone") ? io::parse_cone(p.raw("cone")) : ConeField::upper_hemisphere();
      CertifyOptions co;
      co.seed = s.seed;
      if (s.tol > 0.0) co.direction_tol = s.tol;
      const auto cert = certify_uh(c, cone, 8, co);
      UhExactOptions uo;
      uo.points = static_cast<std::size_t>(s.n);
      uo.seed = s.seed;
      uo.direction_tol = co.direction_tol;
      const auto r = lyapunov_uh_exact(c, cert, uo);
      json j = io::estimate_json(r.estimate);
      j["dual"] = r.dual;
      j["discrepancy"] = r.discrepancy;
      j["integration_error"] = r.integration_error;
      j["certificate_n"] = cert.n;
      return j;
    }
    if (method == "fubini") {
      const auto v = lyapunov_fubini(c, static_cast<int>(p.integer("max_doubling", 10)), s.samples * 512, s.seed);
      return {{"method", "fubini"}, {"upper_bounds", v}, {"value", v.back()}};
    }
    io::schema_error("params.method: unknown method '" + method + "'");
  };
  Output out;
  out.payload = {{"method", method}};
  if (!p.has("energies")) {
    out.payload["estimate"] = evaluate(need_cocycle(s, base));
    return out;
  }
  if (s.cocycle.is_null() || s.cocycle.value("kind", "") != "schrodinger") {
    io::schema_error("params.energies: needs a schrodinger cocycle");
  }
  const auto energies = io::parse_real_list(p.raw("energies"), "params.energies");
  json rows = json::array();
  svg::Series curve{"L(E)", {}, {}};
  std::string csv = "# sl2lab.lyapunov-curve/1\nE,L,stderr\n";
  for (double e : energies) {
    json cj = s.cocycle;
    cj["energy"] = e;
    const json est = evaluate(io::parse_cocycle(cj, base));
    rows.push_back({{"energy", e}, {"estimate", est}});
    const double l = est.at("value").get<double>();
    curve.x.push_back(e);
    curve.y.push_back(l);
    csv += csv_number(e) + "," + csv_number(l) + "," + csv_number(est.value("stderr", 0.0)) + "\n";
  }
  out.payload["curve"] = rows;
  out.files["lyapunov.csv"] = csv;
  out.files["lyapunov.svg"] = svg::line_plot({curve}, "Lyapunov exponent", "E", "L");
  return out;
}

Output run_certify(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"cone", "n_max", "boundary_directions", "probes"});
  const BaseSystem base = need_base(s);
  const Cocycle c = need_cocycle(s, base);
  const ConeField cone = p.has("cone") ? io::parse_cone(p.raw("cone")) : ConeField::upper_hemisphere();
  CertifyOptions co;
  co.seed = s.seed;
  co.boundary_directions = static_cast<std::size_t>(p.integer("boundary_directions", 64));
  co.probes = static_cast<std::size_t>(p.integer("probes", 256));
  if (s.tol > 0.0) co.direction_tol = s.tol;
  const auto cert = certify_uh(c, cone, static_cast<int>(p.integer("n_max", 8)), co);
  return {{{"certificate", io::certificate_json(cert)}}, {}, {}, false};
}

Output run_bands(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"open_gaps", "gap_index"});
  PeriodicPotential v = need_periodic(s);
  const double resolution = s.tol > 0.0 ? s.tol : 1e-9;
  if (p.boolean("open_gaps", false)) v = gap_open_perturb(v, static_cast<int>(p.integer("gap_index", 0)), s.seed, resolution);
  const auto bs = bands(v, resolution);
  Output out;
  out.payload = io::bands_json(bs);
  out.payload["potential"] = v.values;
  std::string csv = "# sl2lab.bands/1\nleft,right,length\n";
  std::vector<std::pair<double, double>> iv;
  for (const auto& b : bs.bands) {
    csv += csv_number(b.left) + "," + csv_number(b.right) + "," + csv_number(b.length()) + "\n";
    iv.emplace_back(b.left, b.right);
  }
  out.files["bands.csv"] = csv;
  out.files["bands.svg"] = svg::band_diagram(iv, "Spectrum");
  return out;
}

Output run_ids(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"energies", "grid", "thouless"});
  const PeriodicPotential v = need_periodic(s);
  const IDS dos = ids(v, 1e-9);
  std::vector<double> energies;
  if (p.has("energies")) {
    energies = io::parse_real_list(p.raw("energies"), "params.energies");
  } else {
    double lo = v.min() - 3.0, hi = v.max() + 3.0;
    std::int64_t count = 201;
    if (p.has("grid")) {
      io::Fields g(p.raw("grid"), "params.grid", {"lo", "hi", "count"});
      lo = g.num("lo", lo);
      hi = g.num("hi", hi);
      count = g.integer("count", count);
    }
    if (count < 2 || !(hi > lo)) io::schema_error("params.grid: need count >= 2 and hi > lo");
    for (std::int64_t k = 0; k < count; ++k) energies.push_back(lo + (hi - lo) * double(k) / double(count - 1));
  }
  const bool with_l = p.boolean("thouless", true);
  const double tol = s.tol > 0.0 ? s.tol : 1e-12;
  const auto ls = parallel_map<double>(energies.size(), [&](std::size_t k) {
    return with_l ? thouless_lyapunov(dos, energies[k], tol) : 0.0;
  });
  Output out;
  json rows = json::array();
  std::string csv = with_l ? "# sl2lab.ids/1\nE,N,L\n" : "# sl2lab.ids/1\nE,N\n";
  svg::Series n_curve{"N(E)", {}, {}}, l_curve{"L(E)", {}, {}};
  for (std::size_t k = 0; k < energies.size(); ++k) {
    const double e = energies[k], nn = dos(e);
    json row = {{"energy", e}, {"ids", nn}};
    csv += csv_number(e) + "," + csv_number(nn);
    if (with_l) {
      row["lyapunov"] = ls[k];
      csv += "," + csv_number(ls[k]);
      l_curve.x.push_back(e);
      l_curve.y.push_back(ls[k]);
    }
    csv += "\n";
    n_curve.x.push_back(e);
    n_curve.y.push_back(nn);
    rows.push_back(row);
  }
  out.payload = {{"period", v.period()}, {"values", rows}};
  out.files["ids.csv"] = csv;
  std::vector<svg::Series> series = {n_curve};
  if (with_l) series.push_back(l_curve);
  out.files["ids.svg"] = svg::line_plot(series, "Integrated density of states", "E", "N, L");
  return out;
}

json phi_json(const PhiResult& r) {
  return {{"value", r.value}, {"quad_error", r.quad_error}, {"domain_flag", to_string(r.domain)}, {"nodes_used", r.nodes_used}};
}

Output run_phi(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"form", "v", "v0", "w", "epsilon", "delta", "b", "a", "points", "degrees"});
  const BaseSystem base = need_base(s);
  const std::string form = p.str("form", "schrodinger");
  const double eps = p.num("epsilon", 0.1);
  Output out;
  out.payload = {{"form", form}, {"epsilon", eps}};
  if (form == "general") {
    const Cocycle c = need_cocycle(s, base);
    const Sl2Element b = p.has("b") ? io::parse_sl2(p.raw("b"), "params.b") : Sl2Element::rotation_generator();
    const Sl2Element a = p.has("a") ? io::parse_sl2(p.raw("a"), "params.a") : Sl2Element{0.0, 0.0, 0.0};
    QuadratureOptions qo;
    qo.abs_tol = s.tol > 0.0 ? s.tol : (base.is_periodic() ? 1e-8 : 1e-3);
    out.payload["phi"] = phi_json(phi_general(c, b, a, eps, qo, lyap_options(s)));
    return out;
  }
  if (!p.has("v")) io::schema_error("params.v: required for form " + form);
  PhiQuery q = PhiQuery::make(base, io::parse_potential(p.raw("v"), base, "params.v"),
                              p.has("w") ? io::parse_potential(p.raw("w"), base, "params.w") : Potential::constant(base, 0.0),
                              eps);
  if (p.has("v0")) q.v0 = io::parse_potential(p.raw("v0"), base, "params.v0");
  if (s.tol > 0.0) q.quad.abs_tol = s.tol;
  q.lyap = lyap_options(s);
  if (form == "schrodinger") {
    out.payload["phi"] = phi_json(phi(q));
  } else if (form == "boundary") {
    const auto a = phi(q), b = phi_boundary(q);
    out.payload["phi"] = phi_json(a);
    out.payload["phi_boundary"] = phi_json(b);
    out.payload["difference"] = a.value - b.value;
    out.payload["combined_quad_error"] = a.quad_error + b.quad_error;
  } else if (form == "poisson") {
    const auto r = poisson_check(q);
    out.payload["center"] = r.center;
    out.payload["boundary_mean"] = r.boundary_mean;
    out.payload["defect"] = r.defect();
    out.payload["error"] = r.error;
  } else if (form == "convolved") {
    out.payload["delta"] = p.num("delta", 0.5);
    out.payload["phi"] = phi_json(phi_convolved(q, p.num("delta", 0.5)));
  } else if (form == "probe") {
    std::vector<int> degrees = {4, 8, 12};
    if (p.has("degrees")) {
      degrees.clear();
      for (double d : io::parse_real_list(p.raw("degrees"), "params.degrees")) degrees.push_back(static_cast<int>(d));
    }
    const auto grid = chebyshev_grid(static_cast<int>(p.integer("points", 33)));
    const auto values = phi_along(q, grid);
    json fits = json::array();
    for (int d : degrees) {
      const auto f = chebyshev_fit(grid, values, d);
      fits.push_back({{"degree", d}, {"coefficients", f.coefficients}, {"residual", f.residual},
                      {"max_quad_error", f.max_quad_error}});
    }
    out.payload["fits"] = fits;
    out.payload["domain_flag"] = to_string(q.domain());
    svg::Series curve{"Phi(s)", grid, {}};
    std::string csv = "# sl2lab.phi-probe/1\ns,phi,quad_error\n";
    for (std::size_t k = 0; k < grid.size(); ++k) {
      curve.y.push_back(values[k].value);
      csv += csv_number(grid[k]) + "," + csv_number(values[k].value) + "," + csv_number(values[k].quad_error) + "\n";
    }
    out.files["phi_s.csv"] = csv;
    out.files["phi_s.svg"] = svg::line_plot({curve}, "Phi along s w", "s", "Phi");
  } else {
    io::schema_error("params.form: unknown form '" + form + "'");
  }
  return out;
}

Output run_ab_check(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"theta_nodes"});
  const BaseSystem base = need_base(s);
  const auto r = ab_average_check(need_cocycle(s, base), static_cast<std::size_t>(p.integer("theta_nodes", 1024)), lyap_options(s));
  return {{{"lhs", r.lhs}, {"rhs", r.rhs}, {"lhs_error", r.lhs_error}, {"rhs_error", r.rhs_error}, {"difference", r.lhs - r.rhs}},
          {}, {}, false};
}

json report_json(const SearchReport& r) {
  json trace = json::array();
  for (const auto& t : r.trace) {
    json params = json::object();
    for (const auto& [k, v] : t.params) params[k] = v;
    trace.push_back({{"stage", t.stage}, {"params", params}, {"value", t.value}, {"error", t.error}});
  }
  json j = {{"found", r.found},
            {"epsilon", r.epsilon},
            {"s", r.s},
            {"t", r.t},
            {"coefficients", r.coefficients},
            {"perturbation_norm", r.perturbation_norm},
            {"lyapunov_at_result", io::estimate_json(r.lyapunov_at_result)},
            {"reverification", io::estimate_json(r.reverification)},
            {"phi_evaluations", r.phi_evaluations},
            {"trace", trace},
            {"warnings", r.warnings}};
  if (r.v2) j["v2"] = io::potential_json(*r.v2);
  return j;
}

Output run_search(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"kind", "v1", "energy", "delta", "degree", "with_sine", "budget", "restarts", "t_nodes",
                                    "s_levels", "k_sigma", "eta_gen"});
  const BaseSystem base = need_base(s);
  SearchOptions so;
  so.seed = s.seed;
  so.lyap = lyap_options(s);
  so.budget = static_cast<std::size_t>(p.integer("budget", 400));
  so.restarts = static_cast<int>(p.integer("restarts", 16));
  so.t_nodes = static_cast<int>(p.integer("t_nodes", 512));
  so.s_levels = static_cast<int>(p.integer("s_levels", 21));
  so.k_sigma = p.num("k_sigma", 3.0);
  if (s.tol > 0.0) so.quad_tol = s.tol;
  const std::string kind = p.str("kind", "schrodinger");
  const double delta = p.num("delta", 0.5);
  const int degree = static_cast<int>(p.integer("degree", p.str("kind", "schrodinger") == "schrodinger" ? 17 : 3));
  Output out;
  try {
    SearchReport r;
    if (kind == "schrodinger") {
      const Potential v1 = p.has("v1") ? io::parse_potential(p.raw("v1"), base, "params.v1") : Potential::constant(base, 0.0);
      std::vector<Potential> basis;
      if (base.is_rotation()) {
        basis = trig_basis(degree, p.boolean("with_sine", false));
      } else {
        // unit sup-norm indicator-free basis: the constant plus the potential's own table shape
        io::schema_error("params.kind: the schrodinger search basis needs a rotation base");
      }
      r = search_positive_schrodinger(base, v1, p.num("energy", 0.0), delta, basis, so);
    } else if (kind == "general") {
      r = search_positive_general(need_cocycle(s, base), delta, so, degree, p.num("eta_gen", default_eta_gen));
    } else {
      io::schema_error("params.kind: unknown kind '" + kind + "'");
    }
    out.payload = {{"kind", kind}, {"delta", delta}, {"report", report_json(r)}};
  } catch (const SearchFailure& f) {
    out.payload = {{"kind", kind}, {"delta", delta}, {"report", report_json(f.report())}};
    throw;
  }
  return out;
}

Output run_quantita(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"v", "w", "epsilon", "t_nodes", "e_nodes", "k_sigma"});
  const BaseSystem base = need_base(s);
  if (!p.has("v") || !p.has("w")) io::schema_error("params: 'v' and 'w' are required");
  const auto r = quantita_scan(base, io::parse_potential(p.raw("v"), base, "params.v"),
                               io::parse_potential(p.raw("w"), base, "params.w"), p.num("epsilon", 0.25),
                               static_cast<int>(p.integer("t_nodes", 64)), static_cast<int>(p.integer("e_nodes", 256)),
                               lyap_options(s), p.num("k_sigma", 3.0));
  Output out;
  std::vector<double> flat;
  std::string csv = "# sl2lab.quantita/1\nt,E,L\n";
  for (std::size_t i = 0; i < r.t_grid.size(); ++i) {
    for (std::size_t j = 0; j < r.e_grid.size(); ++j) {
      flat.push_back(r.values[i][j]);
      csv += csv_number(r.t_grid[i]) + "," + csv_number(r.e_grid[j]) + "," + csv_number(r.values[i][j]) + "\n";
    }
  }
  json success = json::array();
  for (bool b : r.success) success.push_back(b);
  out.payload = {{"fraction", r.fraction}, {"precondition_value", r.precondition_value}, {"t_grid", r.t_grid},
                 {"e_grid", r.e_grid}, {"success", success}};
  out.files["quantita.csv"] = csv;
  out.files["quantita.svg"] = svg::heat_map(r.e_grid, r.t_grid, flat, "L(E - v - t w)", "E", "t");
  return out;
}

Output run_reproduce(const io::Scenario& s) {
  io::Fields p(s.params, "params", {"criteria", "mutate_weight", "alt_threads"});
  acceptance::Options opt;
  opt.seed = s.seed;
  opt.threads = s.threads;
  opt.alt_threads = static_cast<unsigned>(p.integer("alt_threads", 4));
  if (p.has("criteria")) {
    for (double id : io::parse_real_list(p.raw("criteria"), "params.criteria")) {
      if (id < 1 || id > acceptance::criterion_count) io::schema_error("params.criteria: ids run from 1 to 13");
      opt.only.push_back(static_cast<int>(id));
    }
  }
  if (p.boolean("mutate_weight", false)) {
    opt.weight_fn = [](double t) { return (1.0 - t * t) / (t * t * t * t + 4.0 * t * t + 1.0); };
  }
  const auto results = acceptance::run_all(opt, [](const acceptance::CriterionResult& r) {
    std::cerr << acceptance::table({r});
  });
  Output out;
  json rows = json::array();
  bool all = true;
  for (const auto& r : results) {
    rows.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}});
    all = all && r.pass;
  }
  out.payload = {{"criteria", rows}, {"all_pass", all}};
  out.text = acceptance::table(results) + (all ? "all criteria pass\n" : "FAILURES present\n");
  out.failed = !all;
  return out;
}

Output dispatch(const io::Scenario& s) {
  if (s.operation == "lyapunov") return run_lyapunov(s);
  if (s.operation == "certify") return run_certify(s);
  if (s.operation == "bands") return run_bands(s);
  if (s.operation == "ids") return run_ids(s);
  if (s.operation == "phi") return run_phi(s);
  if (s.operation == "ab-check") return run_ab_check(s);
  if (s.operation == "search") return run_search(s);
  if (s.operation == "quantita-scan") return run_quantita(s);
  return run_reproduce(s);
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Failure(FailureKind::schema, "cannot write '" + path.string() + "'");
  f << text;
}

json wrap(const io::Scenario& s, json payload) {
  return {{"schema", io::results_schema}, {"operation", s.operation}, {"scenario_hash", io::scenario_hash(s)},
          {"payload", std::move(payload)}};
}

void emit(const io::Scenario& s, const json& results, const Output& out, double wall) {
  if (s.out.empty()) return;
  const fs::path dir(s.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Failure(FailureKind::schema, "cannot create output directory '" + s.out + "'");
  write_file(dir / "results.json", results.dump(2) + "\n");
  const json record = {{"schema", io::record_schema},     {"scenario_hash", io::scenario_hash(s)},
                       {"software_version", io::software_version}, {"wall_time_seconds", wall},
                       {"scenario", io::scenario_canonical(s)},    {"results", results}};
  write_file(dir / "record.json", record.dump(2) + "\n");
  for (const auto& [name, text] : out.files) write_file(dir / name, text);
}

int exit_code(FailureKind k) {
  if (k == FailureKind::schema) return exit_schema;
  if (k == FailureKind::budget_exhausted) return exit_budget;
  return exit_numerical;
}

int run(const std::string& operation, const Flags& flags) {
  std::optional<io::Scenario> scenario;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    scenario = assemble(operation, flags);
    set_thread_count(scenario->threads);
    const Output out = dispatch(*scenario);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json results = wrap(*scenario, out.payload);
    emit(*scenario, results, out, wall);
    std::cout << (out.text.empty() ? results.dump(2) + "\n" : out.text);
    return out.failed ? exit_numerical : exit_ok;
  } catch (const Failure& f) {
    json err = {{"schema", io::results_schema},
                {"operation", operation},
                {"error", {{"kind", to_string(f.kind())}, {"message", f.what()}, {"detail", f.detail()}}}};
    if (const auto* sf = dynamic_cast<const SearchFailure*>(&f)) err["partial_report"] = report_json(sf->report());
    if (scenario && !scenario->out.empty()) {
      try {
        std::error_code ec;
        fs::create_directories(scenario->out, ec);
        write_file(fs::path(scenario->out) / "results.json", err.dump(2) + "\n");
      } catch (const Failure&) {
      }
    }
    std::cout << err.dump(2) << "\n";
    std::cerr << "error (" << to_string(f.kind()) << "): " << f.what() << "\n";
    return exit_code(f.kind());
  } catch (const json::exception& e) {
    std::cerr << "error (schema): " << e.what() << "\n";
    return exit_schema;
  } catch (const std::exception& e) {
    std::cerr << "error (numerical): " << e.what() << "\n";
    return exit_numerical;
  }
}

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "Scenario JSON file; flags override its fields");
  cmd->add_option("--base", f.base, "Base dynamics (inline JSON)");
  cmd->add_option("--potential", f.potential, "Potential (inline JSON)");
  cmd->add_option("--cocycle", f.cocycle, "Cocycle (inline JSON)");
  cmd->add_option("--params", f.params, "Operation parameters (inline JSON object)");
  cmd->add_option("--seed", f.seed, "Random seed (u64)");
  cmd->add_option("--samples", f.samples, "Number of independent samples");
  cmd->add_option("--n", f.n, "Iterates / integration points");
  cmd->add_option("--tol", f.tol, "Tolerance (0 = operation default)");
  cmd->add_option("--out", f.out, "Output directory for results.json, record.json, CSV and SVG");
  cmd->add_option("--threads", f.threads, "Worker threads (does not change results)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sl2lab: Lyapunov exponents of SL(2) cocycles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", io::software_version);
  Flags flags;
  const std::map<std::string, std::string> help = {
      {"lyapunov", "Lyapunov exponent (optionally as a curve over energies)"},
      {"certify", "Uniform hyperbolicity certificate via the conefield criterion"},
      {"bands", "Band structure of a periodic Schrodinger operator"},
      {"ids", "Integrated density of states and Thouless exponent"},
      {"phi", "Regularized exponent integral (forms: schrodinger, general, convolved, boundary, poisson, probe)"},
      {"ab-check", "Rotation-average identity check"},
      {"search", "Search for a small perturbation with positive exponent"},
      {"quantita-scan", "Scan (t, E) grids for positive exponents"},
      {"reproduce", "Run the acceptance suite and print a pass/fail table"},
  };
  for (const auto& op : io::operations()) add_common(app.add_subcommand(op, help.at(op)), flags);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_schema;
  }
  return run(app.get_subcommands().front()->get_name(), flags);
}
