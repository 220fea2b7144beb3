#pragma once

// Constructive positivity search (Schrodinger and general cocycles) and the
// numerical scan of the quantitative statement.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sl2lab/base_dynamics.hpp"
#include "sl2lab/cocycle.hpp"
#include "sl2lab/common.hpp"
#include "sl2lab/regularizer.hpp"

namespace sl2lab {

struct TraceEntry {
  std::string stage;
  std::vector<std::pair<std::string, double>> params;
  double value = 0.0;
  double error = 0.0;
};

struct SearchReport {
  bool found = false;
  double epsilon = 0.0;
  double s = 0.0;
  double t = 0.0;
  /// Coefficients of w (Schrodinger) or a (general) in the search basis.
  std::vector<double> coefficients;
  std::optional<Potential> v2;        // Schrodinger result
  std::optional<Cocycle> perturbed;   // general result
  double perturbation_norm = 0.0;
  LyapunovEstimate lyapunov_at_result;
  LyapunovEstimate reverification;
  std::size_t phi_evaluations = 0;
  std::vector<TraceEntry> trace;
  std::vector<std::string> warnings;
};

/// Failure carrying the partial report (best candidate and trace).
class SearchFailure : public Failure {
 public:
  SearchFailure(FailureKind kind, const std::string& message, SearchReport report, double detail = 0.0)
      : Failure(kind, message, detail), report_(std::move(report)) {}
  const SearchReport& report() const { return report_; }

 private:
  SearchReport report_;
};

struct SearchOptions {
  std::size_t budget = 400;  // maximum number of Phi evaluations
  std::uint64_t seed = 1;
  LyapunovOptions lyap{4096, 8, 1};
  double quad_tol = 1e-5;
  int restarts = 16;
  int s_levels = 21;  // s = 2^-j, j = 0..s_levels-1
  int t_nodes = 512;
  double k_sigma = 3.0;
};

/// cos(2 pi k x) for k = 1..degree, followed by sin(2 pi k x) when requested.
inline std::vector<Potential> trig_basis(int degree, bool with_sine = false) {
  std::vector<Potential> out;
  for (int pass = 0; pass < (with_sine ? 2 : 1); ++pass) {
    for (int k = 1; k <= degree; ++k) {
      TrigPolynomial p;
      (pass == 0 ? p.cos : p.sin).assign(static_cast<std::size_t>(k), 0.0);
      (pass == 0 ? p.cos : p.sin)[static_cast<std::size_t>(k - 1)] = 1.0;
      out.emplace_back(std::move(p));
    }
  }
  return out;
}

namespace detail {
inline void warn_if_periodic(const BaseSystem& base, SearchReport& r) {
  if (base.periodic_on_support()) r.warnings.push_back("base is periodic on the support of mu; the density theorems do not apply");
}

inline bool significant(const LyapunovEstimate& e, double k) { return e.value > k * e.std_error && e.value > 0.0; }

/// Rescales coefficients so that sum |c_k| * norm_k equals target.
inline void fit_to_ball(std::vector<double>& c, const std::vector<double>& norms, double target) {
  double l1 = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) l1 += std::abs(c[k]) * norms[k];
  if (l1 > 0.0) {
    for (double& x : c) x *= target / l1;
  }
}

/// Seeded coordinate ascent with restarts. `phi_of` evaluates the detector,
/// `stage2` is tried whenever the detector is significant and returns true on
/// success. Returns false when candidates run out; throws on budget exhaustion.
template <class PhiOf, class Stage2>
bool coordinate_search(std::size_t dim, const std::vector<double>& norms, double target, const SearchOptions& opt,
                       SearchReport& report, PhiOf&& phi_of, Stage2&& stage2) {
  double best_score = -1e300;
  auto evaluate = [&](const std::vector<double>& c, int restart) {
    if (report.phi_evaluations >= opt.budget) {
      throw SearchFailure(FailureKind::budget_exhausted, "Phi evaluation budget exhausted", report, best_score);
    }
    ++report.phi_evaluations;
    const PhiResult r = phi_of(c);
    TraceEntry e{"phi", {{"restart", double(restart)}}, r.value, r.quad_error};
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] != 0.0) e.params.emplace_back("c" + std::to_string(k), c[k]);
    }
    report.trace.push_back(std::move(e));
    return r;
  };
  for (int restart = 0; restart < opt.restarts; ++restart) {
    std::vector<double> current(dim, 0.0);
    double current_score = -1e300;
    if (restart > 0) {
      for (std::size_t k = 0; k < dim; ++k) {
        current[k] = 2.0 * unit_from_bits(derive_seed(derive_seed(opt.seed, 0x5ea4c4), restart * 1000003ULL + k)) - 1.0;
      }
      fit_to_ball(current, norms, target);
      const PhiResult r = evaluate(current, restart);
      current_score = r.value - opt.k_sigma * r.quad_error;
      if (r.value > opt.k_sigma * r.quad_error && stage2(current)) return true;
    }
    for (std::size_t k = 0; k < dim; ++k) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> trial = current;
        trial[k] += sign * target / norms[k];
        fit_to_ball(trial, norms, target);
        const PhiResult r = evaluate(trial, restart);
        const double score = r.value - opt.k_sigma * r.quad_error;
        best_score = std::max(best_score, score);
        if (r.value > opt.k_sigma * r.quad_error && stage2(trial)) return true;
        if (score > current_score) {
          current = trial;
          current_score = score;
        }
      }
    }
  }
  return false;
}

/// Scans s = 2^-j downward and t over an open midpoint grid of (-1, 1),
/// refining the grid x4 once when a level has no hit. Returns the best hit.
template <class Exponent>
std::optional<std::pair<double, double>> scan_s_t(const SearchOptions& opt, SearchReport& report, Exponent&& exponent) {
  for (int j = 0; j < opt.s_levels; ++j) {
    const double s = std::ldexp(1.0, -j);
    for (int nodes : {opt.t_nodes, 4 * opt.t_nodes}) {
      const auto ls = parallel_map<LyapunovEstimate>(static_cast<std::size_t>(nodes), [&](std::size_t k) {
        return exponent(s, -1.0 + (2.0 * double(k) + 1.0) / double(nodes));
      });
      std::optional<std::size_t> best;
      double best_ratio = 0.0;
      for (std::size_t k = 0; k < ls.size(); ++k) {
        if (!significant(ls[k], opt.k_sigma)) continue;
        const double ratio = ls[k].std_error > 0.0 ? ls[k].value / ls[k].std_error : 1e300;
        if (!best || ratio > best_ratio || (ratio == best_ratio && ls[k].value > ls[*best].value)) {
          best = k;
          best_ratio = ratio;
        }
      }
      report.trace.push_back({"st-scan", {{"s", s}, {"nodes", double(nodes)}}, best ? ls[*best].value : 0.0,
                              best ? ls[*best].std_error : 0.0});
      if (best) return std::make_pair(s, -1.0 + (2.0 * double(*best) + 1.0) / double(nodes));
    }
  }
  return std::nullopt;
}

inline LyapunovOptions reverify_options(const SearchOptions& opt) {
  return {2 * opt.lyap.n, opt.lyap.samples, derive_seed(opt.lyap.seed, 0xfeed)};
}
}  // namespace detail

/// Schrodinger density search: finds v2 with ||v1 - v2|| < delta and
/// L(E - v2) > k_sigma * stderr, following Phi positivity -> s -> t.
inline SearchReport search_positive_schrodinger(const BaseSystem& base, const Potential& v1, double energy,
                                                double delta, const std::vector<Potential>& basis,
                                                const SearchOptions& opt = {}) {
  SearchReport report;
  detail::warn_if_periodic(base, report);
  if (!(delta > 0.0)) throw SearchFailure(FailureKind::domain, "no admissible epsilon for delta <= 0", report);
  if (opt.budget == 0) throw SearchFailure(FailureKind::budget_exhausted, "zero budget", report);
  if (basis.empty()) throw Failure(FailureKind::schema, "empty perturbation basis");
  v1.require_matches(base);
  for (const auto& b : basis) b.require_matches(base);

  const Potential v = Potential::constant(base, energy) - v1;
  const auto base_l = lyapunov_of_potential(base, v, opt.lyap);
  report.trace.push_back({"initial", {{"E", energy}}, base_l.value, base_l.std_error});
  if (detail::significant(base_l, opt.k_sigma)) {
    const auto check = lyapunov_of_potential(base, v, detail::reverify_options(opt));
    if (detail::significant(check, opt.k_sigma)) {
      report.found = true;
      report.v2 = v1;
      report.lyapunov_at_result = base_l;
      report.reverification = check;
      return report;
    }
  }

  std::vector<double> norms;
  for (const auto& b : basis) norms.push_back(b.sup_norm().upper);
  const double max_norm = *std::max_element(norms.begin(), norms.end());
  report.epsilon = delta / (2.0 * (1.0 + max_norm));
  const double target = 0.95 * std::pow(2.0, -1.5);

  auto w_of = [&](const std::vector<double>& c) {
    Potential w = Potential::constant(base, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] != 0.0) w = w + c[k] * basis[k];
    }
    return w;
  };
  auto phi_of = [&](const std::vector<double>& c) {
    PhiQuery q = PhiQuery::make(base, v, w_of(c), report.epsilon);
    q.quad.abs_tol = opt.quad_tol;
    q.lyap = opt.lyap;
    return phi(q);
  };
  auto stage2 = [&](const std::vector<double>& c) {
    const Potential w = w_of(c);
    auto u = [&](double s, double t) { return v + combine(report.epsilon * t, Potential::constant(base, 1.0),
                                                          report.epsilon * (1.0 - t * t) * s, w); };
    const auto hit = detail::scan_s_t(opt, report, [&](double s, double t) { return lyapunov_of_potential(base, u(s, t), opt.lyap); });
    if (!hit) return false;
    const auto [s, t] = *hit;
    const Potential uu = u(s, t);
    const auto l = lyapunov_of_potential(base, uu, opt.lyap);
    const auto check = lyapunov_of_potential(base, uu, detail::reverify_options(opt));
    report.trace.push_back({"reverify", {{"s", s}, {"t", t}, {"n", double(2 * opt.lyap.n)}}, check.value, check.std_error});
    if (!detail::significant(check, opt.k_sigma)) return false;
    const Potential pert = combine(report.epsilon * t, Potential::constant(base, 1.0), report.epsilon * (1.0 - t * t) * s, w);
    report.found = true;
    report.s = s;
    report.t = t;
    report.coefficients = c;
    report.v2 = v1 - pert;
    report.perturbation_norm = pert.sup_norm().upper;
    report.lyapunov_at_result = l;
    report.reverification = check;
    return true;
  };
  if (detail::coordinate_search(basis.size(), norms, target, opt, report, phi_of, stage2)) return report;
  throw SearchFailure(FailureKind::budget_exhausted, "search space exhausted without a positive exponent", report);
}

/// sl(2,R) basis {cos, sin}(2 pi k x) x {H, S}, k = 0..degree (k = 0 constant
/// only), each scaled to sup norm eta.
inline std::vector<Sl2Field> sl2_trig_basis(const BaseSystem& base, int degree, double eta) {
  const Sl2Element h{1.0, 0.0, 0.0}, sym{0.0, 1.0, 1.0};
  std::vector<Sl2Field> out;
  for (const auto& e : {h, sym}) out.push_back(Sl2Field::constant(base, eta * e));
  for (int k = 1; k <= degree; ++k) {
    for (int pass = 0; pass < 2; ++pass) {
      TrigPolynomial p;
      (pass == 0 ? p.cos : p.sin).assign(static_cast<std::size_t>(k), 0.0);
      (pass == 0 ? p.cos : p.sin)[static_cast<std::size_t>(k - 1)] = eta;
      for (const auto& e : {h, sym}) out.push_back(Sl2Field::scaled(Potential(p), e));
    }
  }
  return out;
}

/// General density search: perturbations e^{eps(t b + (1 - t^2) s a)} A with b
/// the rotation generator and a in the eta_gen ball; Phi_general as detector.
inline SearchReport search_positive_general(const Cocycle& a_cocycle, double delta, const SearchOptions& opt = {},
                                            int degree = 3, double eta_gen = default_eta_gen) {
  SearchReport report;
  const BaseSystem& base = a_cocycle.base();
  detail::warn_if_periodic(base, report);
  if (opt.budget == 0) throw SearchFailure(FailureKind::budget_exhausted, "zero budget", report);
  if (!(delta > 0.0)) throw SearchFailure(FailureKind::domain, "no admissible epsilon for delta <= 0", report);
  if (!a_cocycle.is_real()) throw Failure(FailureKind::schema, "general search needs a real cocycle");
  if (!base.is_rotation()) throw Failure(FailureKind::schema, "general search perturbation basis needs a rotation base");

  const auto base_l = lyapunov(a_cocycle, opt.lyap);
  report.trace.push_back({"initial", {}, base_l.value, base_l.std_error});
  if (detail::significant(base_l, opt.k_sigma)) {
    const auto check = lyapunov(a_cocycle, detail::reverify_options(opt));
    if (detail::significant(check, opt.k_sigma)) {
      report.found = true;
      report.perturbed = a_cocycle;
      report.lyapunov_at_result = base_l;
      report.reverification = check;
      return report;
    }
  }

  const double eta = validate_eta_gen(eta_gen).eta;
  report.epsilon = std::log(1.0 + delta / 2.0) / (1.0 + eta);
  const auto basis = sl2_trig_basis(base, degree, eta);
  const Sl2Field b = Sl2Field::constant(base, Sl2Element::rotation_generator());
  const std::vector<double> norms(basis.size(), 1.0);  // sup norm of each field is eta; coefficients are in units of eta

  auto a_of = [&](const std::vector<double>& c) {
    Sl2Field a = Sl2Field::constant(base, {});
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] != 0.0) a = a + cplx(c[k]) * basis[k];
    }
    return a;
  };
  auto phi_of = [&](const std::vector<double>& c) {
    QuadratureOptions q;
    q.abs_tol = opt.quad_tol;
    return phi_general(a_cocycle, b, a_of(c), report.epsilon, q, opt.lyap);
  };
  auto stage2 = [&](const std::vector<double>& c) {
    const Sl2Field a = a_of(c);
    auto cocycle = [&](double s, double t) {
      return Cocycle::exp_perturbed(a_cocycle, cplx(t) * b + cplx((1.0 - t * t) * s) * a, report.epsilon);
    };
    const auto hit = detail::scan_s_t(opt, report, [&](double s, double t) { return lyapunov(cocycle(s, t), opt.lyap); });
    if (!hit) return false;
    const auto [s, t] = *hit;
    const Cocycle result = cocycle(s, t);
    const auto l = lyapunov(result, opt.lyap);
    const auto check = lyapunov(result, detail::reverify_options(opt));
    report.trace.push_back({"reverify", {{"s", s}, {"t", t}, {"n", double(2 * opt.lyap.n)}}, check.value, check.std_error});
    if (!detail::significant(check, opt.k_sigma)) return false;
    double l1 = 0.0;
    for (double x : c) l1 += std::abs(x);
    report.found = true;
    report.s = s;
    report.t = t;
    report.coefficients = c;
    report.perturbed = result;
    // ||e^{eps X} A - A|| <= e^{eps ||X||} - 1 with ||X|| <= |t| + (1 - t^2) s ||a||
    report.perturbation_norm = std::expm1(report.epsilon * (std::abs(t) + (1.0 - t * t) * s * eta * l1));
    report.lyapunov_at_result = l;
    report.reverification = check;
    return true;
  };
  if (detail::coordinate_search(basis.size(), norms, 0.95, opt, report, phi_of, stage2)) return report;
  throw SearchFailure(FailureKind::budget_exhausted, "search space exhausted without a positive exponent", report);
}

struct QuantitaScan {
  double fraction = 0.0;
  double precondition_value = 0.0;
  std::vector<double> t_grid;
  std::vector<double> e_grid;
  std::vector<std::vector<double>> values;  // values[i][j] = L(E_j - v - t_i w)
  std::vector<bool> success;
};

/// For t on a midpoint grid of (0, eps), looks for E on a midpoint grid of
/// (-2 eps, 2 eps) with L(E - v - t w) > k_sigma * stderr.
inline QuantitaScan quantita_scan(const BaseSystem& base, const Potential& v, const Potential& w, double epsilon,
                                  int t_nodes, int e_nodes, const LyapunovOptions& lyap = {}, double k_sigma = 3.0) {
  if (!(epsilon > 0.0) || t_nodes < 1 || e_nodes < 1) throw Failure(FailureKind::schema, "bad quantita grid");
  if (!(w.sup_norm().upper < std::pow(2.0, -1.5))) throw Failure(FailureKind::precondition, "||w|| must be below 2^-3/2");
  const auto pre = lyapunov_of_potential(base, -1.0 * (v + epsilon * w), lyap);
  if (!detail::significant(pre, k_sigma)) {
    throw Failure(FailureKind::precondition, "L(-v - eps w) is not positive", pre.value);
  }
  QuantitaScan out;
  out.precondition_value = pre.value;
  for (int i = 0; i < t_nodes; ++i) out.t_grid.push_back(epsilon * (i + 0.5) / t_nodes);
  for (int j = 0; j < e_nodes; ++j) out.e_grid.push_back(-2.0 * epsilon + 4.0 * epsilon * (j + 0.5) / e_nodes);
  const auto rows = parallel_map<std::pair<std::vector<double>, bool>>(static_cast<std::size_t>(t_nodes), [&](std::size_t i) {
    std::vector<double> row;
    bool hit = false;
    const Potential vt = v + out.t_grid[i] * w;
    for (double e : out.e_grid) {
      const auto l = lyapunov_of_potential(base, Potential::constant(base, e) - vt, lyap);
      row.push_back(l.value);
      hit = hit || detail::significant(l, k_sigma);
    }
    return std::make_pair(std::move(row), hit);
  });
  std::size_t hits = 0;
  for (const auto& r : rows) {
    out.values.push_back(r.first);
    out.success.push_back(r.second);
    hits += r.second ? 1 : 0;
  }
  out.fraction = double(hits) / double(t_nodes);
  return out;
}

}  // namespace sl2lab
