#pragma once

// Uniform hyperbolicity: conefield certificates, invariant directions, the
// exact exponent on the UH locus and harmonicity probes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sl2lab/base_dynamics.hpp"
#include "sl2lab/cocycle.hpp"
#include "sl2lab/common.hpp"
#include "sl2lab/projective.hpp"

namespace sl2lab {

/// Open chordal disk {m : dist(m, center) < radius}.
struct Cone {
  ProjPoint center;
  double radius = 0.5;

  bool contains(const ProjPoint& m) const { return spherical_dist(m, center) < radius; }

  /// Boundary point at angle phi: cos(b) c + sin(b) e^{i phi} c_perp with sin(b) = radius.
  ProjPoint boundary(double phi) const {
    const cplx c1 = center.x(), c2 = center.y();
    const double sb = radius, cb = std::sqrt(1.0 - radius * radius);
    const cplx e = std::polar(1.0, phi);
    return {cb * c1 - sb * e * std::conj(c2), cb * c2 + sb * e * std::conj(c1)};
  }
};

/// Chordal radius of the hemisphere cones; their boundary is the real projective line.
inline const double hemisphere_radius = 1.0 / std::sqrt(2.0);

class ConeField {
 public:
  static ConeField constant(Cone c) {
    check(c);
    return ConeField({std::move(c)});
  }
  /// Hemisphere centered on (i,1): invariant for [[v,-1],[1,0]] with Im v > 0.
  static ConeField upper_hemisphere() { return constant({ProjPoint(cplx(0.0, 1.0), 1.0), hemisphere_radius}); }
  /// Its mirror image, invariant for [[E - v,-1],[1,0]] with Im v > 0.
  static ConeField lower_hemisphere() { return constant({ProjPoint(cplx(0.0, -1.0), 1.0), hemisphere_radius}); }
  /// One cone per orbit point of a periodic base, in flat orbit order.
  static ConeField table(std::vector<Cone> cones) {
    if (cones.empty()) throw Failure(FailureKind::schema, "empty cone table");
    for (const auto& c : cones) check(c);
    return ConeField(std::move(cones));
  }

  bool is_constant() const { return cones_.size() == 1; }
  const std::vector<Cone>& cones() const { return cones_; }

  const Cone& at(const BaseSystem& base, const BasePoint& x) const {
    if (is_constant()) return cones_[0];
    const auto* p = std::get_if<OrbitPoint>(&x);
    if (!base.is_periodic() || !p) throw Failure(FailureKind::schema, "cone tables need a periodic base");
    const std::size_t k = base.orbit_offset(p->orbit) + static_cast<std::size_t>(p->phase);
    if (k >= cones_.size()) throw Failure(FailureKind::schema, "cone table shorter than the orbit set");
    return cones_[k];
  }

 private:
  explicit ConeField(std::vector<Cone> c) : cones_(std::move(c)) {}
  static void check(const Cone& c) {
    if (!(c.radius > 0.0 && c.radius < 1.0)) throw Failure(FailureKind::schema, "cone radius must lie in (0,1)");
  }
  std::vector<Cone> cones_;
};

struct DirectionResult {
  ProjPoint direction;
  double residual = 0.0;
  std::int64_t n = 0;
};

namespace detail {
inline const ProjPoint& seed_direction() {
  static const ProjPoint m0 = ProjPoint::real_direction(0.4142);
  return m0;
}

inline ProjPoint push_forward(const Cocycle& c, BasePoint y, std::int64_t n, ProjPoint m) {
  for (std::int64_t k = 0; k < n; ++k) {
    m = mobius_act(c(y), m);
    advance(c.base(), y, 1);
  }
  return m;
}

inline ProjPoint pull_back(const Cocycle& c, BasePoint y, std::int64_t n, ProjPoint m) {
  for (std::int64_t k = 0; k < n; ++k) {
    advance(c.base(), y, -1);
    m = mobius_act(c(y).inverse(), m);
  }
  return m;
}
}  // namespace detail

/// A_n(f^{-n}x) m0. The residual is the larger of dist(u_n, u_{n/2}) and
/// dist(u_n, u_{n-1}); the second catches periodic projective orbits.
inline DirectionResult unstable_direction(const Cocycle& c, const BasePoint& x, std::int64_t n) {
  if (n < 2) throw Failure(FailureKind::domain, "direction iteration needs n >= 2");
  auto from = [&](std::int64_t k) {
    BasePoint y = x;
    advance(c.base(), y, -k);
    return detail::push_forward(c, y, k, detail::seed_direction());
  };
  const ProjPoint u = from(n);
  const double r = std::max(spherical_dist(u, from(n / 2)), spherical_dist(u, from(n - 1)));
  return {u, r, n};
}

/// A_n(x)^{-1} m0, the backward mirror of unstable_direction.
inline DirectionResult stable_direction(const Cocycle& c, const BasePoint& x, std::int64_t n) {
  if (n < 2) throw Failure(FailureKind::domain, "direction iteration needs n >= 2");
  auto from = [&](std::int64_t k) {
    BasePoint y = x;
    advance(c.base(), y, k);
    return detail::pull_back(c, y, k, detail::seed_direction());
  };
  const ProjPoint s = from(n);
  const double r = std::max(spherical_dist(s, from(n / 2)), spherical_dist(s, from(n - 1)));
  return {s, r, n};
}

/// Doubles n from n0 until the residual drops below tol or n exceeds n_max.
template <class Direction>
DirectionResult converged_direction(Direction&& dir, const Cocycle& c, const BasePoint& x, double tol,
                                    std::int64_t n0 = 32, std::int64_t n_max = 4096) {
  DirectionResult r = dir(c, x, n0);
  while (r.residual > tol && r.n * 2 <= n_max) r = dir(c, x, r.n * 2);
  return r;
}

struct DirectionSample {
  BasePoint point;
  ProjPoint u, s;
  double u_residual = 0.0, s_residual = 0.0;
};

struct UHCertificate {
  int n = 0;
  ConeField cone;
  double margin = 0.0;
  std::size_t probe_count = 0;
  std::size_t boundary_directions = 0;
  double lambda_lower = 0.0;
  std::vector<DirectionSample> directions;
  double separation = 0.0;  // min dist(u, s) over the direction samples
  std::string note = "numerical certificate: sampled cone boundaries, not validated enclosures";
};

struct CertifyOptions {
  std::size_t boundary_directions = 64;
  std::size_t probes = 256;  // rotation grid size / shift windows
  std::uint64_t seed = 1;
  double min_margin = 1e-9;
  double direction_tol = 1e-10;
};

namespace detail {
struct ConeImage {
  double margin;        // r_target - max dist(image, target center)
  double lambda_lower;  // ln(R_target / R_image) / (2n) in a chart centered on the target
};

inline double chart_radius(double chordal) { return chordal / std::sqrt(std::max(1e-300, 1.0 - chordal * chordal)); }

inline ConeImage cone_image(const Cocycle& c, const ConeField& cone, const BasePoint& x, int n, std::size_t dirs) {
  const auto prod = iterate_renormalized(c, x, n);
  const Cone& src = cone.at(c.base(), x);
  const Cone& dst = cone.at(c.base(), prod.end);
  double worst = spherical_dist(mobius_act(prod.m, src.center), dst.center);
  for (std::size_t k = 0; k < dirs; ++k) {
    const ProjPoint m = src.boundary(2.0 * pi * double(k) / double(dirs));
    worst = std::max(worst, spherical_dist(mobius_act(prod.m, m), dst.center));
  }
  const double margin = dst.radius - worst;
  const double lambda = margin > 0.0 ? std::log(chart_radius(dst.radius) / chart_radius(worst)) / (2.0 * n) : 0.0;
  return {margin, lambda};
}
}  // namespace detail

/// Smallest n <= n_max whose n-step image of every sampled cone closure lies
/// inside the target cone with margin above opt.min_margin.
inline UHCertificate certify_uh(const Cocycle& c, const ConeField& cone, int n_max, const CertifyOptions& opt = {}) {
  if (n_max < 1) throw Failure(FailureKind::domain, "n_max must be at least 1");
  const auto probes = probe_points(c.base(), opt.probes, opt.seed);
  double best = -1.0;
  for (int n = 1; n <= n_max; ++n) {
    const auto images = parallel_map<detail::ConeImage>(
        probes.size(), [&](std::size_t i) { return detail::cone_image(c, cone, probes[i], n, opt.boundary_directions); });
    double margin = images.front().margin, lambda = images.front().lambda_lower;
    for (const auto& im : images) {
      margin = std::min(margin, im.margin);
      lambda = std::min(lambda, im.lambda_lower);
    }
    best = std::max(best, margin);
    if (margin <= opt.min_margin) continue;

    UHCertificate cert{n, cone, margin, probes.size(), opt.boundary_directions, lambda, {}, 1.0};
    cert.directions = parallel_map<DirectionSample>(probes.size(), [&](std::size_t i) {
      const auto u = converged_direction(unstable_direction, c, probes[i], opt.direction_tol);
      const auto s = converged_direction(stable_direction, c, probes[i], opt.direction_tol);
      return DirectionSample{probes[i], u.direction, s.direction, u.residual, s.residual};
    });
    for (const auto& d : cert.directions) cert.separation = std::min(cert.separation, spherical_dist(d.u, d.s));
    return cert;
  }
  throw Failure(FailureKind::no_contraction, "no n <= " + std::to_string(n_max) + " maps the cone inside itself", best);
}

struct UhExponent {
  LyapunovEstimate estimate;
  double dual = 0.0;         // -int lambda(A(x), s(x)) dmu
  double discrepancy = 0.0;  // |estimate - dual|
  double integration_error = 0.0;
  double max_residual = 0.0;
};

struct UhExactOptions {
  std::size_t points = 4096;  // rotation orbit length / shift samples
  std::uint64_t seed = 1;
  double direction_tol = 1e-10;
};

/// L(A) = int lambda(A(x), u(x)) dmu on a certified cocycle, with the stable
/// direction integral as an independent duality check.
inline UhExponent lyapunov_uh_exact(const Cocycle& c, const UHCertificate& cert, const UhExactOptions& opt = {}) {
  if (cert.margin <= 0.0) throw Failure(FailureKind::domain, "certificate has no positive margin");
  const auto scheme = default_scheme(c.base(), opt.points, opt.seed);
  double max_residual = 0.0;
  auto expansion = [&](bool unstable) {
    return integrate(
        c.base(),
        [&](const BasePoint& x) {
          const auto d = unstable ? converged_direction(unstable_direction, c, x, opt.direction_tol)
                                  : converged_direction(stable_direction, c, x, opt.direction_tol);
          if (d.residual > opt.direction_tol) {
            throw Failure(FailureKind::directions_unconverged, "invariant direction did not converge", d.residual);
          }
          return expansion_coeff(c(x), d.direction);
        },
        scheme);
  };
  const Integral u = expansion(true);
  const Integral s = expansion(false);
  for (const auto& d : cert.directions) max_residual = std::max({max_residual, d.u_residual, d.s_residual});
  UhExponent out;
  out.estimate.value = u.value;
  out.estimate.method = LyapunovMethod::uh_exact;
  out.estimate.samples = c.base().is_periodic() ? c.base().orbit_point_count() : opt.points;
  out.dual = -s.value;
  out.discrepancy = std::abs(u.value + s.value);
  out.integration_error = std::max(u.error_estimate, s.error_estimate);
  out.max_residual = max_residual;
  return out;
}

/// Exponent by the best available method: exact on periodic bases, the
/// invariant-direction integral when a hemisphere or given cone certifies,
/// Birkhoff otherwise. `certified` reports whether the UH route was taken.
struct BestExponent {
  LyapunovEstimate estimate;
  bool certified = false;
};

inline BestExponent best_exponent(const Cocycle& c, const std::optional<ConeField>& cone = std::nullopt,
                                  const LyapunovOptions& opt = {}) {
  if (c.base().is_periodic()) return {lyapunov_periodic_exact(c), false};
  if (cone) {
    try {
      CertifyOptions co;
      co.seed = opt.seed;
      co.probes = 64;
      const auto cert = certify_uh(c, *cone, 8, co);
      UhExactOptions uo;
      uo.seed = opt.seed;
      return {lyapunov_uh_exact(c, cert, uo).estimate, true};
    } catch (const Failure&) {
    }
  }
  return {lyapunov_birkhoff(c, opt.n, opt.samples, opt.seed), false};
}

struct HarmonicityProbe {
  double center_value = 0.0;
  double circle_mean = 0.0;
  double defect = 0.0;  // circle_mean - center_value
  double max_stderr = 0.0;
};

/// Mean value test of z -> L(family(z)) on the circle |z - z0| = r
/// (trapezoid rule on circle_nodes equally spaced points).
inline HarmonicityProbe harmonicity_probe(const std::function<Cocycle(cplx)>& family, cplx z0, double r,
                                          std::size_t circle_nodes = 256,
                                          const std::function<LyapunovEstimate(const Cocycle&)>& exponent = {}) {
  auto eval = [&](const Cocycle& c) { return exponent ? exponent(c) : best_exponent(c).estimate; };
  const LyapunovEstimate center = eval(family(z0));
  const auto ring = parallel_map<LyapunovEstimate>(circle_nodes, [&](std::size_t k) {
    return eval(family(z0 + std::polar(r, 2.0 * pi * double(k) / double(circle_nodes))));
  });
  CompensatedSum mean;
  HarmonicityProbe out;
  out.max_stderr = center.std_error;
  for (const auto& l : ring) {
    mean.add(l.value);
    out.max_stderr = std::max(out.max_stderr, l.std_error);
  }
  out.center_value = center.value;
  out.circle_mean = mean.value() / double(circle_nodes);
  out.defect = out.circle_mean - out.center_value;
  return out;
}

}  // namespace sl2lab
