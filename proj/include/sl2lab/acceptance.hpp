#pragma once

// Release acceptance suite, shared by the test binary and `sl2lab reproduce`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "sl2lab/base_dynamics.hpp"
#include "sl2lab/cocycle.hpp"
#include "sl2lab/quadrature.hpp"
#include "sl2lab/regularizer.hpp"
#include "sl2lab/search.hpp"
#include "sl2lab/spectral.hpp"
#include "sl2lab/uh.hpp"

namespace sl2lab::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string summary;
  double seconds = 0.0;
  double limit_seconds = 0.0;
  std::vector<double> values;  // compared bitwise by the determinism criterion
};

struct Options {
  std::function<double(double)> weight_fn = weight;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  unsigned alt_threads = 4;
  std::vector<int> only;  // empty = all
};

inline constexpr int criterion_count = 13;

namespace detail {

class Seeded {
 public:
  explicit Seeded(std::uint64_t seed) : seed_(seed) {}
  double uniform(std::uint64_t stream, std::uint64_t k, double lo, double hi) const {
    return lo + (hi - lo) * unit_from_bits(derive_seed(derive_seed(seed_, stream), k));
  }

 private:
  std::uint64_t seed_;
};

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

inline std::vector<double> random_values(const Seeded& r, std::uint64_t stream, int n, double lo, double hi) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(r.uniform(stream, static_cast<std::uint64_t>(i), lo, hi));
  return v;
}

// 1. Weight normalization
inline void weight_normalization(CriterionResult& out, const Options& opt) {
  QuadratureOptions q;
  q.abs_tol = 1e-13;
  q.initial_panels = 4;
  const auto r = integrate_adaptive(opt.weight_fn, -1.0, 1.0, q);
  const double err = std::abs(r.value - pi / 4.0);
  out.values = {r.value};
  out.pass = err <= 1e-10;
  out.summary = fmt("int weight = %.15f, |diff from pi/4| = %.2e (tol 1e-10)", r.value, err);
}

// 2. Rotation-average identity for diag(2, 1/2)
inline void rotation_average(CriterionResult& out, const Options&) {
  const Cocycle c = Cocycle::constant(BaseSystem::fixed_point(), Mat2::diag(2.0, 0.5));
  const auto ab = ab_average_check(c, 8192);
  const double target = std::log(1.25);
  const double err = std::abs(ab.lhs - target);
  out.values = {ab.lhs, ab.rhs};
  out.pass = err <= 2e-3 && std::abs(ab.rhs - target) <= 1e-12;
  out.summary = fmt("theta-average = %.6f, ln 1.25 = %.6f, |diff| = %.2e (tol 2e-3)", ab.lhs, target, err);
}

// 3. Constant-cocycle exponents
inline void constant_exponents(CriterionResult& out, const Options& opt) {
  const BaseSystem golden = BaseSystem::golden_rotation();
  const double target = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  const auto rot_b = lyapunov_birkhoff(Cocycle::constant(golden, Mat2::rotation(2.0 * pi * 0.3)), 10000, 8, opt.seed);
  const auto rot_p = lyapunov_periodic_exact(Cocycle::constant(BaseSystem::fixed_point(), Mat2::rotation(2.0 * pi * 0.3)));
  const auto e3_b = lyapunov_birkhoff(Cocycle::schrodinger(golden, Potential::constant(golden, 0.0), 3.0), 10000, 8, opt.seed);
  const BaseSystem fp = BaseSystem::fixed_point();
  const auto e3_p = lyapunov_periodic_exact(Cocycle::schrodinger(fp, Potential::constant(fp, 0.0), 3.0));
  out.values = {rot_b.value, rot_p.value, e3_b.value, e3_p.value};
  const double rot = std::max(std::abs(rot_b.value), std::abs(rot_p.value));
  out.pass = rot <= 1e-6 && std::abs(e3_b.value - target) <= 1e-3 && std::abs(e3_p.value - target) <= 1e-12;
  out.summary = fmt("rotation |L| <= %.1e; E=3 Birkhoff err %.2e (tol 1e-3), exact err %.2e (tol 1e-12)", rot,
                    std::abs(e3_b.value - target), std::abs(e3_p.value - target));
}

// 4. Thouless formula against the exact periodic exponent
inline void thouless_consistency(CriterionResult& out, const Options& opt) {
  const Seeded r(derive_seed(opt.seed, 4));
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 1 + k % 5;
    const auto vals = random_values(r, static_cast<std::uint64_t>(k), n, -2.0, 2.0);
    const PeriodicPotential v{vals};
    const IDS dos = ids(v);
    const BaseSystem base = BaseSystem::single_orbit(n);
    const Potential pot = Potential::table(vals);
    const auto diffs = parallel_map<double>(50, [&](std::size_t j) {
      const double e = v.min() - 3.0 + (v.max() - v.min() + 6.0) * (double(j) + 0.5) / 50.0;
      const double th = thouless_lyapunov(dos, e);
      const double ex = lyapunov_periodic_exact(Cocycle::schrodinger(base, pot, e)).value;
      return std::abs(th - ex);
    });
    for (double d : diffs) worst = std::max(worst, d);
    out.values.insert(out.values.end(), diffs.begin(), diffs.end());
  }
  out.pass = worst <= 1e-6;
  out.summary = fmt("max |thouless - exact| = %.2e over 20 potentials x 50 energies (tol 1e-6)", worst);
}

// 5. Band facts after gap opening
inline void band_facts(CriterionResult& out, const Options& opt) {
  const Seeded r(derive_seed(opt.seed, 5));
  const auto results = parallel_map<std::vector<double>>(100, [&](std::size_t k) {
    const int n = 2 + static_cast<int>(k % 7);
    PeriodicPotential v{random_values(r, k, n, -1.0, 1.0)};
    v = gap_open_perturb(v, static_cast<int>(k % static_cast<std::size_t>(n)), derive_seed(opt.seed, k));
    const auto bs = bands(v);
    double longest = 0.0;
    for (const auto& b : bs.bands) longest = std::max(longest, b.length());
    const double e = find_hyperbolic_energy(bs);
    const bool ok = static_cast<int>(bs.bands.size()) == n && longest <= 2.0 * pi / n + 1e-9 && std::abs(e) < 3.0 * pi / n &&
                    std::abs(discriminant(v, e)) > 2.0;
    return std::vector<double>{ok ? 1.0 : 0.0, double(bs.bands.size()), longest, e};
  });
  int failures = 0;
  for (const auto& x : results) {
    failures += x[0] == 1.0 ? 0 : 1;
    out.values.insert(out.values.end(), x.begin(), x.end());
  }
  out.pass = failures == 0;
  out.summary = fmt("%.0f of 100 potentials (n = 2..8) violate band count / length / hyperbolic energy", failures);
}

// 6. Conefield criterion
inline void conefield(CriterionResult& out, const Options& opt) {
  const BaseSystem fp = BaseSystem::fixed_point();
  const Cocycle vi = Cocycle::of_potential(fp, Potential::constant(fp, cplx(0.0, 1.0)));
  const auto cert = certify_uh(vi, ConeField::upper_hemisphere(), 2);
  bool zero_fails = true;
  const Cocycle zero = Cocycle::schrodinger(fp, Potential::constant(fp, 0.0), 0.0);
  for (const auto& cone : {ConeField::upper_hemisphere(), ConeField::lower_hemisphere()}) {
    try {
      certify_uh(zero, cone, 16);
      zero_fails = false;
    } catch (const Failure& f) {
      zero_fails = zero_fails && f.kind() == FailureKind::no_contraction;
    }
  }

  // invariance and duality on certified cases
  const BaseSystem golden = BaseSystem::golden_rotation();
  TrigPolynomial tp;
  tp.constant = cplx(0.0, 1.0);
  tp.cos = {0.3};
  const std::vector<Cocycle> cases = {vi, Cocycle::of_potential(golden, Potential(tp)),
                                      Cocycle::of_potential(BaseSystem::single_orbit(3), Potential::table(std::vector<cplx>{
                                                                                             {0.5, 0.8}, {-1.0, 0.6}, {0.2, 1.1}}))};
  double worst_inv = 0.0, worst_dual = 0.0;
  CertifyOptions co;
  co.seed = opt.seed;
  co.probes = 64;
  for (const auto& c : cases) {
    const auto ct = certify_uh(c, ConeField::upper_hemisphere(), 8, co);
    UhExactOptions uo;
    uo.seed = opt.seed;
    const auto ux = lyapunov_uh_exact(c, ct, uo);
    if (c.base().is_periodic()) {
      worst_dual = std::max({worst_dual, ux.discrepancy, std::abs(ux.estimate.value - lyapunov_periodic_exact(c).value)});
    }
    for (const auto& d : ct.directions) {
      const BasePoint y = step(c.base(), d.point);
      const auto uy = converged_direction(unstable_direction, c, y, co.direction_tol);
      const auto sy = converged_direction(stable_direction, c, y, co.direction_tol);
      const Mat2 a = c(d.point);
      worst_inv = std::max({worst_inv, spherical_dist(mobius_act(a, d.u), uy.direction),
                            spherical_dist(mobius_act(a, d.s), sy.direction)});
      // lambda(A, u) + lambda(A, s) = ln d(u, s)(x) - ln d(u, s)(f x) for det A = 1
      const double cob = std::log(spherical_dist(d.u, d.s)) - std::log(spherical_dist(uy.direction, sy.direction));
      worst_dual = std::max(worst_dual, std::abs(expansion_coeff(a, d.u) + expansion_coeff(a, d.s) - cob));
    }
    out.values.push_back(ux.estimate.value);
    out.values.push_back(ux.dual);
  }
  out.values.push_back(cert.margin);
  out.pass = cert.n == 2 && zero_fails && worst_inv <= 1e-8 && worst_dual <= 1e-8;
  out.summary = fmt("v=i certified at n = %.0f; invariance defect %.2e, duality defect %.2e (tol 1e-8)", cert.n, worst_inv,
                    worst_dual) +
                (zero_fails ? "; v=0,E=0 rejected" : "; v=0,E=0 WRONGLY certified");
}

// 7. Subharmonicity / harmonicity of z -> L([[z, -1], [1, 0]])
inline void harmonicity(CriterionResult& out, const Options&) {
  const BaseSystem fp = BaseSystem::fixed_point();
  auto family = [&](cplx z) { return Cocycle::of_potential(fp, Potential::constant(fp, z)); };
  struct Disk {
    cplx center;
    double radius;
    bool uh;
  };
  const std::vector<Disk> disks = {{{0.0, 2.0}, 1.0, true}, {{5.0, 0.0}, 2.0, true}, {{-4.0, 1.0}, 1.5, true},
                                   {{0.0, 0.0}, 1.0, false}, {{2.0, 0.0}, 0.5, false}, {{1.0, 0.3}, 1.0, false}};
  double worst_uh = 0.0, min_cross = 1e300, max_cross = -1e300;
  for (const auto& d : disks) {
    const auto p = harmonicity_probe(family, d.center, d.radius, 1024);
    out.values.push_back(p.defect);
    if (d.uh) {
      worst_uh = std::max(worst_uh, std::abs(p.defect));
    } else {
      min_cross = std::min(min_cross, p.defect);
      max_cross = std::max(max_cross, p.defect);
    }
  }
  out.pass = worst_uh <= 1e-6 && min_cross >= -1e-6 && max_cross > 1e-6;
  out.summary = fmt("UH disks |defect| <= %.2e (tol 1e-6); crossing disks defect in [%.3e, %.3e]", worst_uh, min_cross, max_cross);
}

inline PhiQuery periodic_query(const Seeded& r, std::uint64_t k, double v_lo, double v_hi, double w_max, double eps) {
  const int n = 1 + static_cast<int>(k % 3);
  const BaseSystem base = BaseSystem::single_orbit(n);
  return PhiQuery::make(base, Potential::table(random_values(r, 2 * k, n, v_lo, v_hi)),
                        Potential::table(random_values(r, 2 * k + 1, n, -w_max, w_max)), eps);
}

// 8. Boundary identity and Poisson check
inline void boundary_identity(CriterionResult& out, const Options& opt) {
  const Seeded r(derive_seed(opt.seed, 8));
  double worst_ratio = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const PhiQuery q = periodic_query(r, k, -2.5, 2.5, 0.3, 0.2);
    const auto a = phi(q);
    const auto b = phi_boundary(q);
    const double combined = a.quad_error + b.quad_error;
    worst_ratio = std::max(worst_ratio, std::abs(a.value - b.value) / (2.0 * combined));
    out.values.push_back(a.value);
    out.values.push_back(b.value);
  }
  double worst_poisson = 0.0;
  for (std::uint64_t k = 0; k < 5; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    PhiQuery q = periodic_query(r, 100 + k, 4.0, 6.0, 0.3, 0.2);
    q.v = sign * q.v;
    const auto p = poisson_check(q);
    worst_poisson = std::max(worst_poisson, std::abs(p.defect()));
    out.values.push_back(p.defect());
  }
  out.pass = worst_ratio <= 1.0 && worst_poisson <= 1e-6;
  out.summary = fmt("max |phi - phi_boundary| / (2 combined error) = %.3f (<= 1); Poisson defect %.2e (tol 1e-6)", worst_ratio,
                    worst_poisson);
}

// 9. Positivity propagation
inline void positivity_propagation(CriterionResult& out, const Options& opt) {
  const Seeded r(derive_seed(opt.seed, 9));
  int cases = 0, failures = 0;
  double min_ratio = 1e300;
  for (std::uint64_t k = 0; cases < 20 && k < 1000; ++k) {
    const PhiQuery q = periodic_query(r, k, -3.0, 3.0, 0.3, 0.2);
    if (lyapunov_of_potential(q.base, q.family(0.0), q.lyap).value <= 0.01) continue;
    ++cases;
    const auto p = phi(q);
    min_ratio = std::min(min_ratio, p.value / std::max(p.quad_error, 1e-300));
    failures += p.value > 3.0 * p.quad_error ? 0 : 1;
    out.values.push_back(p.value);
  }
  out.pass = cases == 20 && failures == 0;
  out.summary = fmt("%.0f cases with L(v + eps w) > 0.01, %.0f failures; min phi/quad_error = %.3g", cases, failures, min_ratio);
}

// 10. Analyticity in s
inline void analyticity(CriterionResult& out, const Options& opt) {
  const Seeded r(derive_seed(opt.seed, 10));
  const auto grid = chebyshev_grid(41);
  double worst = 1e300;
  int cases = 0;
  for (std::uint64_t k = 0; cases < 10 && k < 1000; ++k) {
    PhiQuery q = periodic_query(r, k, -3.0, 3.0, 0.3, 0.2);
    q.quad.abs_tol = 1e-12;
    const auto values = phi_along(q, grid);
    double spread = 0.0;
    for (const auto& v : values) spread = std::max(spread, std::abs(v.value - values.front().value));
    if (spread < 1e-6) continue;  // Phi constant in s: nothing to fit
    ++cases;
    const std::vector<AnalyticityFit> fits = {chebyshev_fit(grid, values, 4), chebyshev_fit(grid, values, 12)};
    const double ratio = fits[0].residual / std::max(fits[1].residual, 1e-300);
    worst = std::min(worst, ratio);
    out.values.push_back(fits[0].residual);
    out.values.push_back(fits[1].residual);
  }
  out.pass = cases == 10 && worst >= 10.0;
  out.summary = fmt("min residual ratio degree 4 / degree 12 = %.3g over %.0f queries (>= 10)", worst, cases);
}

// 11. Density searches
inline void density_search(CriterionResult& out, const Options& opt) {
  const BaseSystem golden = BaseSystem::golden_rotation();
  SearchOptions so;
  so.seed = opt.seed;
  std::string summary;
  bool ok = true;
  try {
    const auto rep = search_positive_schrodinger(golden, Potential::constant(golden, 0.0), 0.0, 0.5, trig_basis(17), so);
    const bool pass = rep.found && rep.perturbation_norm < 0.5 &&
                      rep.reverification.value > 3.0 * rep.reverification.std_error;
    ok = ok && pass;
    out.values.insert(out.values.end(), {rep.perturbation_norm, rep.lyapunov_at_result.value, rep.reverification.value});
    summary += fmt("schrodinger: norm %.4f, L = %.3e (re-verified %.3e)", rep.perturbation_norm,
                   rep.lyapunov_at_result.value, rep.reverification.value);
  } catch (const Failure& f) {
    ok = false;
    summary += std::string("schrodinger failed: ") + f.what();
  }
  try {
    const Cocycle a = Cocycle::constant(golden, Mat2::rotation(pi * (3.0 - std::sqrt(5.0))));
    const auto rep = search_positive_general(a, 0.5, so);
    const bool pass = rep.found && rep.perturbation_norm < 0.5 &&
                      rep.reverification.value > 3.0 * rep.reverification.std_error;
    ok = ok && pass;
    out.values.insert(out.values.end(), {rep.perturbation_norm, rep.lyapunov_at_result.value, rep.reverification.value});
    summary += fmt("; general: norm %.4f, L = %.3e (re-verified %.3e)", rep.perturbation_norm, rep.lyapunov_at_result.value,
                   rep.reverification.value);
  } catch (const Failure& f) {
    ok = false;
    summary += std::string("; general failed: ") + f.what();
  }
  out.pass = ok;
  out.summary = summary;
}

// 12. Quantitative density scan
inline void quantita(CriterionResult& out, const Options& opt) {
  const Seeded r(derive_seed(opt.seed, 12));
  const BaseSystem base = BaseSystem::single_orbit(2);
  const Potential v = Potential::table(std::vector<double>{r.uniform(0, 0, 0.5, 1.5), r.uniform(0, 1, -1.5, -0.5)});
  const Potential w = Potential::table(random_values(r, 1, 2, -0.3, 0.3));
  const auto scan = quantita_scan(base, v, w, 0.25, 64, 256);
  out.values = {scan.fraction, scan.precondition_value};
  out.pass = scan.fraction >= 0.9;
  out.summary = fmt("fraction = %.4f on a 64 x 256 grid (>= 0.9); precondition L = %.4f", scan.fraction, scan.precondition_value);
}

struct Spec {
  const char* name;
  double limit_seconds;
  void (*run)(CriterionResult&, const Options&);
};

inline const std::vector<Spec>& specs() {
  static const std::vector<Spec> s = {
      {"weight normalization", 1.0, weight_normalization},
      {"rotation-average identity", 30.0, rotation_average},
      {"constant-cocycle exponents", 10.0, constant_exponents},
      {"Thouless consistency", 120.0, thouless_consistency},
      {"band facts", 120.0, band_facts},
      {"conefield criterion", 30.0, conefield},
      {"plurisubharmonicity", 60.0, harmonicity},
      {"boundary identity", 300.0, boundary_identity},
      {"positivity propagation", 120.0, positivity_propagation},
      {"analyticity probe", 300.0, analyticity},
      {"density search", 1200.0, density_search},
      {"quantitative scan", 120.0, quantita},
  };
  return s;
}

inline bool selected(const Options& opt, int id) {
  return opt.only.empty() || std::find(opt.only.begin(), opt.only.end(), id) != opt.only.end();
}

}  // namespace detail

/// Runs criterion `id` (1..12) at the given thread count.
inline CriterionResult run_criterion(int id, const Options& opt, unsigned threads) {
  const auto& spec = detail::specs().at(static_cast<std::size_t>(id - 1));
  CriterionResult out;
  out.id = id;
  out.name = spec.name;
  out.limit_seconds = spec.limit_seconds;
  const unsigned saved = thread_count();
  set_thread_count(threads);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    spec.run(out, opt);
  } catch (const Failure& f) {
    out.pass = false;
    out.summary = std::string("failure: ") + to_string(f.kind()) + ": " + f.what();
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  set_thread_count(saved);
  if (out.seconds > out.limit_seconds) {
    out.pass = false;
    out.summary += detail::fmt(" [runtime %.1f s over limit %.0f s]", out.seconds, out.limit_seconds);
  }
  return out;
}

inline bool bit_identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

/// Criteria 1..12 at opt.threads, then criterion 13: each selected criterion
/// re-run at opt.alt_threads must reproduce its values bit for bit.
inline std::vector<CriterionResult> run_all(const Options& opt, const std::function<void(const CriterionResult&)>& progress = {}) {
  std::vector<CriterionResult> results;
  for (int id = 1; id < criterion_count; ++id) {
    if (!detail::selected(opt, id) && !detail::selected(opt, criterion_count)) continue;
    results.push_back(run_criterion(id, opt, opt.threads));
    if (progress && detail::selected(opt, id)) progress(results.back());
  }
  if (detail::selected(opt, criterion_count)) {
    CriterionResult det;
    det.id = criterion_count;
    det.name = "determinism across thread counts";
    det.limit_seconds = 0.0;
    det.pass = true;
    std::vector<int> mismatched;
    const auto t0 = std::chrono::steady_clock::now();
    for (const auto& r : results) {
      const auto again = run_criterion(r.id, opt, opt.alt_threads);
      if (!bit_identical(r.values, again.values)) mismatched.push_back(r.id);
    }
    det.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    det.pass = mismatched.empty();
    std::ostringstream s;
    s << results.size() << " criteria re-run with " << opt.alt_threads << " threads vs " << opt.threads << "; mismatches:";
    if (mismatched.empty()) s << " none";
    for (int id : mismatched) s << " " << id;
    det.summary = s.str();
    std::vector<CriterionResult> kept;
    for (auto& r : results) {
      if (detail::selected(opt, r.id)) kept.push_back(std::move(r));
    }
    results = std::move(kept);
    results.push_back(det);
    if (progress) progress(results.back());
  }
  return results;
}

inline std::string table(const std::vector<CriterionResult>& results) {
  std::ostringstream s;
  for (const auto& r : results) {
    char head[96];
    std::snprintf(head, sizeof head, "[%s] %2d %-34s %8.2fs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
    s << head << r.summary << "\n";
  }
  return s.str();
}

}  // namespace sl2lab::acceptance
