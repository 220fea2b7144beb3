#pragma once

// The regularized functionals Phi_eps (Schrodinger and general forms), the
// convolved Phi_{eps,delta}, the conformal boundary representation, and the
// numerical probes of their harmonicity and analyticity.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sl2lab/base_dynamics.hpp"
#include "sl2lab/cocycle.hpp"
#include "sl2lab/common.hpp"
#include "sl2lab/projective.hpp"
#include "sl2lab/quadrature.hpp"
#include "sl2lab/uh.hpp"

namespace sl2lab {

/// (1 - t^2) / |t^2 + 2it + 1|^2 = (1 - t^2) / (t^4 + 6t^2 + 1).
inline double weight(double t) {
  const double t2 = t * t;
  return (1.0 - t2) / (t2 * t2 + 6.0 * t2 + 1.0);
}

inline constexpr double weight_integral = pi / 4.0;

/// phi(z) = i(1 - z)/(1 + z): D -> upper half plane, (1, i, -1) -> (0, 1, inf).
inline cplx conformal_phi(cplx z) { return cplx(0.0, 1.0) * (1.0 - z) / (1.0 + z); }
inline cplx conformal_phi_inverse(cplx z) { return -(z - cplx(0.0, 1.0)) / (z + cplx(0.0, 1.0)); }
/// psi = phi^{-1}(sqrt(phi(z))): D -> D intersect H, principal root. phi(z)
/// is projected onto the closed upper half plane first so that boundary points
/// take the limit from inside D.
inline cplx conformal_psi(cplx z) {
  if (z == cplx(-1.0, 0.0)) return -1.0;
  cplx w = conformal_phi(z);
  if (!(w.imag() > 0.0)) w.imag(+0.0);
  return conformal_phi_inverse(std::sqrt(w));
}

/// Exponent oracle u -> L(u), the exponent of [[u, -1], [1, 0]].
using PotentialExponent = std::function<Noisy(const Potential&)>;

enum class DomainFlag { in_ball, out_of_ball };
inline const char* to_string(DomainFlag f) { return f == DomainFlag::in_ball ? "in-ball" : "out-of-ball"; }

struct PhiQuery {
  BaseSystem base;
  Potential v;
  Potential v0;
  Potential w;
  double epsilon = 0.1;
  QuadratureOptions quad;
  LyapunovOptions lyap;

  static PhiQuery make(BaseSystem base, Potential v, Potential w, double epsilon) {
    PhiQuery q{base, std::move(v), Potential::constant(base, 1.0), std::move(w), epsilon, {}, {}};
    q.quad.abs_tol = base.is_periodic() ? 1e-8 : 1e-3;
    return q;
  }

  double eta() const { return v0.inf_real(); }
  double w_norm() const { return w.sup_norm().upper; }
  DomainFlag domain() const { return w_norm() < eta() / std::pow(2.0, 1.5) ? DomainFlag::in_ball : DomainFlag::out_of_ball; }

  /// v + eps (z v0 + (1 - z^2) w)
  Potential family(cplx z) const { return v + combine(epsilon * z, v0, epsilon * (1.0 - z * z), w); }

  void validate() const {
    if (!(epsilon > 0.0)) throw Failure(FailureKind::schema, "epsilon must be positive");
    v.require_matches(base);
    v0.require_matches(base);
    w.require_matches(base);
    if (!v.is_real() || !v0.is_real()) throw Failure(FailureKind::schema, "v and v0 must be real");
    if (!(eta() > 0.0)) throw Failure(FailureKind::schema, "v0 must be bounded below by a positive constant");
  }
};

struct PhiResult {
  double value = 0.0;
  double quad_error = 0.0;
  DomainFlag domain = DomainFlag::in_ball;
  std::size_t nodes_used = 0;
};

inline PotentialExponent default_exponent(const BaseSystem& base, const LyapunovOptions& opt) {
  return [base, opt](const Potential& u) {
    const auto e = lyapunov_of_potential(base, u, opt);
    return Noisy{e.value, e.std_error};
  };
}

/// int_{-1}^1 weight(t) L(v + eps(t v0 + (1 - t^2) w)) dt with an injectable L.
inline PhiResult phi_with(const PhiQuery& q, const PotentialExponent& exponent) {
  q.validate();
  const auto r = integrate_adaptive(
      [&](double t) {
        const double wt = weight(t);
        const Noisy l = exponent(q.family(t));
        return Noisy{wt * l.value, wt * l.sigma};
      },
      -1.0, 1.0, q.quad);
  return {r.value, r.total_error(), q.domain(), r.evaluations};
}

inline PhiResult phi(const PhiQuery& q) { return phi_with(q, default_exponent(q.base, q.lyap)); }

/// L(u) for u on the uniformly hyperbolic locus: certified with the upper
/// hemisphere cone, then evaluated exactly (periodic) or by the invariant
/// direction integral. Throws not_uh when certification fails.
inline Noisy uh_exponent(const BaseSystem& base, const Potential& u, const LyapunovOptions& opt) {
  const Cocycle c = Cocycle::of_potential(base, u);
  CertifyOptions co;
  co.probes = 64;
  co.seed = opt.seed;
  UHCertificate cert = [&] {
    try {
      return certify_uh(c, ConeField::upper_hemisphere(), 8, co);
    } catch (const Failure& f) {
      throw Failure(FailureKind::not_uh, "boundary cocycle is not certified uniformly hyperbolic", f.detail());
    }
  }();
  if (base.is_periodic()) return {lyapunov_periodic_exact(c).value, 0.0};
  UhExactOptions uo;
  uo.points = static_cast<std::size_t>(std::max<std::int64_t>(opt.n, 2));
  uo.seed = opt.seed;
  const auto r = lyapunov_uh_exact(c, cert, uo);
  return {r.estimate.value, r.integration_error};
}

/// rho(z) = L(v + eps(z v0 + (1 - z^2) w)) in the statement's convention
/// (the proof's eps^2 w_proof equals eps w here).
inline Noisy boundary_rho(const PhiQuery& q, cplx z) { return uh_exponent(q.base, q.family(z), q.lyap); }

/// Phi via the pluriharmonic representation
/// (pi/2) [rho(psi(0)) - int_0^{1/2} rho(psi(e^{2 pi i theta})) dtheta],
/// which equals (pi/2) int_{1/2}^1 rho(psi(e^{2 pi i theta})) dtheta by the
/// Poisson formula. Every node lies on the uniformly hyperbolic locus.
inline PhiResult phi_boundary(const PhiQuery& q) {
  q.validate();
  const Noisy center = boundary_rho(q, conformal_psi(0.0));
  const auto arc = integrate_adaptive(
      [&](double th) { return boundary_rho(q, conformal_psi(std::polar(1.0, 2.0 * pi * th))); }, 0.0, 0.5, q.quad);
  PhiResult out;
  out.value = 0.5 * pi * (center.value - arc.value);
  out.quad_error = 0.5 * pi * (center.sigma + arc.total_error());
  out.domain = q.domain();
  out.nodes_used = arc.evaluations + 1;
  return out;
}

/// (pi/2) int_{1/2}^1 rho(psi(e^{2 pi i theta})) dtheta: psi sends this arc to
/// the real segment, so it is Phi after a change of variables.
inline PhiResult phi_lower_arc(const PhiQuery& q, const PotentialExponent& exponent) {
  q.validate();
  const auto r = integrate_adaptive(
      [&](double th) {
        const cplx z = conformal_psi(std::polar(1.0, 2.0 * pi * th));
        const Noisy l = exponent(q.family(z.real()));
        return Noisy{0.5 * pi * l.value, 0.5 * pi * l.sigma};
      },
      0.5, 1.0, q.quad);
  return {r.value, r.total_error(), q.domain(), r.evaluations};
}

struct PoissonCheck {
  double center = 0.0;
  double boundary_mean = 0.0;
  double error = 0.0;
  double defect() const { return boundary_mean - center; }
};

/// rho(psi(0)) against the mean of rho(psi(.)) over the full unit circle.
inline PoissonCheck poisson_check(const PhiQuery& q, int initial_panels = 4) {
  q.validate();
  if (!q.w.is_real()) throw Failure(FailureKind::schema, "poisson check needs a real w");
  QuadratureOptions opt = q.quad;
  opt.initial_panels = initial_panels;
  const auto exponent = default_exponent(q.base, q.lyap);
  const Noisy center = boundary_rho(q, conformal_psi(0.0));
  const auto upper = integrate_adaptive(
      [&](double th) { return boundary_rho(q, conformal_psi(std::polar(1.0, 2.0 * pi * th))); }, 0.0, 0.5, opt);
  const auto lower = integrate_adaptive(
      [&](double th) { return exponent(q.family(conformal_psi(std::polar(1.0, 2.0 * pi * th)).real())); }, 0.5, 1.0,
      opt);
  return {center.value, upper.value + lower.value, center.sigma + upper.total_error() + lower.total_error()};
}

// ---------------------------------------------------------------------------
// General SL(2,R) cocycles

inline constexpr double default_eta_gen = 0.05;

/// int_{-1}^1 weight(t) L(e^{eps(t b + (1 - t^2) a)} A) dt.
inline PhiResult phi_general(const Cocycle& a_cocycle, const Sl2Field& b, const Sl2Field& a, double epsilon,
                             const QuadratureOptions& quad = {}, const LyapunovOptions& lyap = {}) {
  if (!(epsilon > 0.0)) throw Failure(FailureKind::schema, "epsilon must be positive");
  const auto r = integrate_adaptive(
      [&](double t) {
        const Sl2Field field = cplx(t) * b + cplx(1.0 - t * t) * a;
        const auto l = lyapunov(Cocycle::exp_perturbed(a_cocycle, field, epsilon), lyap);
        const double wt = weight(t);
        return Noisy{wt * l.value, wt * l.std_error};
      },
      -1.0, 1.0, quad);
  return {r.value, r.total_error(), DomainFlag::in_ball, r.evaluations};
}

inline PhiResult phi_general(const Cocycle& a_cocycle, const Sl2Element& b, const Sl2Element& a, double epsilon,
                             const QuadratureOptions& quad = {}, const LyapunovOptions& lyap = {}) {
  const BaseSystem& base = a_cocycle.base();
  return phi_general(a_cocycle, Sl2Field::constant(base, b), Sl2Field::constant(base, a), epsilon, quad, lyap);
}

/// Im d/d eps of the projective image of m under e^{eps(z b + (1 - z^2) a)}
/// at eps = 0, in the first chart (second chart when m is infinite).
inline double cone_derivative_check(const Sl2Element& b, const Sl2Element& a, cplx z, const ChartValue& m) {
  const cplx s = 1.0 - z * z;
  if (m.infinite) return std::imag(-z * b.b3 - s * a.b3);
  const cplx x = m.value;
  return std::imag(z * (2.0 * b.b1 * x + b.b2 - b.b3 * x * x) + s * (2.0 * a.b1 * x + a.b2 - a.b3 * x * x));
}

struct EtaValidation {
  double eta = default_eta_gen;
  int halvings = 0;
  std::size_t samples = 0;
};

/// Runs cone_derivative_check on seeded samples (real b within eta of the
/// rotation generator, complex a within eta, z on the upper unit arc or psi(0),
/// m a random real direction) and halves eta until every check is positive.
inline EtaValidation validate_eta_gen(double eta = default_eta_gen, std::size_t samples = 1000, std::uint64_t seed = 7) {
  EtaValidation out{eta, 0, samples};
  auto u = [&](std::uint64_t i, std::uint64_t k) { return unit_from_bits(derive_seed(derive_seed(seed, i), k)); };
  auto element = [&](std::uint64_t i, std::uint64_t k0, bool complex, double radius) {
    Sl2Element e{cplx(2 * u(i, k0) - 1, complex ? 2 * u(i, k0 + 1) - 1 : 0.0),
                 cplx(2 * u(i, k0 + 2) - 1, complex ? 2 * u(i, k0 + 3) - 1 : 0.0),
                 cplx(2 * u(i, k0 + 4) - 1, complex ? 2 * u(i, k0 + 5) - 1 : 0.0)};
    const double n = e.norm();
    return n > 0.0 ? (radius * u(i, k0 + 6) / n) * e : e;
  };
  for (int round = 0; round < 30; ++round) {
    bool ok = true;
    for (std::uint64_t i = 0; i < samples && ok; ++i) {
      const Sl2Element b = Sl2Element::rotation_generator() + element(i, 0, false, out.eta);
      const Sl2Element a = element(i, 10, true, out.eta);
      const cplx z = (i % 10 == 0) ? conformal_psi(0.0) : std::polar(1.0, pi * (0.02 + 0.96 * u(i, 20)));
      const double angle = pi * u(i, 21);
      const ProjPoint m = ProjPoint::real_direction(angle);
      const ChartValue cv = chart(m, Chart::first);
      const bool use_second = cv.infinite || std::abs(cv.value) > 1.0;
      double d;
      if (use_second) {
        // m' = -y/x: conjugating by [[0,-1],[1,0]] maps b -> (-b1, -b3, -b2)
        const ChartValue sv = chart(m, Chart::second);
        const Sl2Element bb{-b.b1, -b.b3, -b.b2}, aa{-a.b1, -a.b3, -a.b2};
        d = cone_derivative_check(bb, aa, z, sv);
      } else {
        d = cone_derivative_check(b, a, z, cv);
      }
      if (!(d > 0.0)) ok = false;
    }
    if (ok) return out;
    out.eta *= 0.5;
    ++out.halvings;
  }
  throw Failure(FailureKind::domain, "eta_gen validation did not converge");
}

// ---------------------------------------------------------------------------
// Convolved functional and analyticity probe

/// Inner integrand (a, b) -> Phi_eps(v + eps a, b w).
using ConvolvedInner = std::function<Noisy(double a, double b)>;

inline ConvolvedInner default_convolved_inner(const PhiQuery& q) {
  return [q](double a, double b) {
    PhiQuery inner = q;
    inner.v = q.v + Potential::constant(q.base, q.epsilon * a);
    inner.w = b * q.w;
    const auto r = phi(inner);
    return Noisy{r.value, r.quad_error};
  };
}

/// int_0^1 int_{-delta}^{delta} inner(a, b) da db by a 15 x 15 Gauss-Kronrod
/// tensor rule; the error is |K x K - G x G| plus the inner errors.
inline PhiResult phi_convolved(const PhiQuery& q, double delta, const ConvolvedInner& inner) {
  if (!(delta > 0.0 && delta < 1.0)) throw Failure(FailureKind::schema, "delta must lie in (0,1)");
  const auto x = gk15::abscissae();
  const auto vals = parallel_map<Noisy>(225, [&](std::size_t k) {
    const double a = delta * x[k / 15];
    const double b = 0.5 * (1.0 + x[k % 15]);
    return inner(a, b);
  });
  CompensatedSum kk, gg, noise;
  for (std::size_t k = 0; k < 225; ++k) {
    const int i = static_cast<int>(k / 15), j = static_cast<int>(k % 15);
    const double wk = gk15::kronrod_weight(i) * gk15::kronrod_weight(j);
    kk.add(wk * vals[k].value);
    gg.add(gk15::gauss_weight(i) * gk15::gauss_weight(j) * vals[k].value);
    noise.add(wk * vals[k].sigma);
  }
  const double jac = delta * 0.5;
  PhiResult out;
  out.value = jac * kk.value();
  out.quad_error = jac * (std::abs(kk.value() - gg.value()) + noise.value());
  out.domain = q.domain();
  out.nodes_used = 225;
  return out;
}

inline PhiResult phi_convolved(const PhiQuery& q, double delta) { return phi_convolved(q, delta, default_convolved_inner(q)); }

struct AnalyticityFit {
  int degree = 0;
  std::vector<double> coefficients;  // Chebyshev basis T_0..T_d on [-1, 1]
  double residual = 0.0;             // max |fit - data| on the grid
  double max_quad_error = 0.0;
};

/// Values of s -> Phi(v, v0, s w) on the grid.
inline std::vector<PhiResult> phi_along(const PhiQuery& q, const std::vector<double>& s_grid) {
  return parallel_map<PhiResult>(s_grid.size(), [&](std::size_t k) {
    PhiQuery p = q;
    p.w = s_grid[k] * q.w;
    return phi(p);
  });
}

/// Least-squares Chebyshev fit of degree d to precomputed samples.
inline AnalyticityFit chebyshev_fit(const std::vector<double>& s, const std::vector<PhiResult>& values, int degree) {
  const Eigen::Index m = static_cast<Eigen::Index>(s.size());
  if (m <= degree) throw Failure(FailureKind::domain, "grid too small for the fit degree");
  Eigen::MatrixXd design(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double t0 = 1.0, t1 = s[i];
    for (int k = 0; k <= degree; ++k) {
      design(i, k) = (k == 0) ? 1.0 : t1;
      if (k >= 1) {
        const double t2 = 2.0 * s[i] * t1 - t0;
        t0 = t1;
        t1 = t2;
      }
    }
    rhs(i) = values[static_cast<std::size_t>(i)].value;
  }
  const Eigen::VectorXd c = design.colPivHouseholderQr().solve(rhs);
  AnalyticityFit out;
  out.degree = degree;
  out.coefficients.assign(c.data(), c.data() + c.size());
  out.residual = (design * c - rhs).cwiseAbs().maxCoeff();
  for (const auto& v : values) out.max_quad_error = std::max(out.max_quad_error, v.quad_error);
  return out;
}

inline std::vector<double> chebyshev_grid(int points) {
  std::vector<double> s(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) s[static_cast<std::size_t>(k)] = -std::cos(pi * (k + 0.5) / points);
  return s;
}

/// Fits s -> Phi(v, v0, s w) by degree-d polynomials on s_grid.
inline std::vector<AnalyticityFit> analyticity_probe(const PhiQuery& q, const std::vector<double>& s_grid,
                                                     const std::vector<int>& degrees) {
  const auto values = phi_along(q, s_grid);
  std::vector<AnalyticityFit> out;
  for (int d : degrees) out.push_back(chebyshev_fit(s_grid, values, d));
  return out;
}

}  // namespace sl2lab
