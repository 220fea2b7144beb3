#pragma once

// Cocycles (f, A) over a BaseSystem, renormalized iteration, and Lyapunov
// exponent estimators.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sl2lab/base_dynamics.hpp"
#include "sl2lab/common.hpp"
#include "sl2lab/projective.hpp"
#include "sl2lab/quadrature.hpp"

namespace sl2lab {

/// sl(2)-valued function x -> [[b1(x), b2(x)], [b3(x), -b1(x)]].
struct Sl2Field {
  Potential b1, b2, b3;

  static Sl2Field constant(const BaseSystem& base, const Sl2Element& e) {
    return {Potential::constant(base, e.b1), Potential::constant(base, e.b2), Potential::constant(base, e.b3)};
  }
  /// phi(x) * e for a scalar potential phi.
  static Sl2Field scaled(const Potential& phi, const Sl2Element& e) { return {e.b1 * phi, e.b2 * phi, e.b3 * phi}; }

  Sl2Element operator()(const BaseSystem& base, const BasePoint& x) const {
    return {b1(base, x), b2(base, x), b3(base, x)};
  }

  bool is_real() const { return b1.is_real() && b2.is_real() && b3.is_real(); }
  bool matches(const BaseSystem& base) const { return b1.matches(base) && b2.matches(base) && b3.matches(base); }

  /// sup_x of the operator norm: exact on tables, sampled (lower) and
  /// Frobenius/l1 bounded (upper) on trigonometric fields.
  SupNorm sup_norm(const BaseSystem& base) const {
    if (base.is_rotation()) {
      double sampled = 0.0;
      for (int i = 0; i < 4096; ++i) {
        const BasePoint x = CirclePoint{i / 4096.0};
        sampled = std::max(sampled, (*this)(base, x).norm());
      }
      const double u1 = b1.sup_norm().upper, u2 = b2.sup_norm().upper, u3 = b3.sup_norm().upper;
      return {sampled, std::sqrt(2 * u1 * u1 + u2 * u2 + u3 * u3)};
    }
    double m = 0.0;
    if (base.is_periodic()) {
      for (const auto& x : probe_points(base, 0, 0)) m = std::max(m, (*this)(base, x).norm());
    } else {
      // every word of the deepest table occurs as a prefix
      int depth = 0;
      for (const auto* p : {&b1, &b2, &b3}) depth = std::max(depth, std::get<CylinderTable>(p->repr()).depth);
      std::size_t words = 1;
      for (int i = 0; i < depth; ++i) words *= static_cast<std::size_t>(base.symbols());
      for (std::size_t w = 0; w < words; ++w) {
        ShiftPoint p{0, 0, std::vector<std::uint8_t>(static_cast<std::size_t>(depth))};
        std::size_t r = w;
        for (int i = depth - 1; i >= 0; --i) {
          p.prefix[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(r % base.symbols());
          r /= base.symbols();
        }
        m = std::max(m, (*this)(base, BasePoint{p}).norm());
      }
    }
    return {m, m};
  }

  friend Sl2Field operator+(const Sl2Field& a, const Sl2Field& b) { return {a.b1 + b.b1, a.b2 + b.b2, a.b3 + b.b3}; }
  friend Sl2Field operator*(cplx s, const Sl2Field& a) { return {s * a.b1, s * a.b2, s * a.b3}; }
};

class Cocycle {
 public:
  using Fiber = std::function<Mat2(const BasePoint&)>;

  /// Generic fiber; the determinant invariant is checked at 1000 seeded probes.
  Cocycle(BaseSystem base, Fiber fiber, bool real, double det_tol = default_det_tol)
      : base_(std::move(base)), fiber_(std::move(fiber)), real_(real) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      const Mat2 a = fiber_(sample_point(base_, 0x5eed, i));
      require_sl2(a, det_tol);
      if (real_ && !a.is_real()) throw Failure(FailureKind::domain, "real-flagged cocycle has complex entries");
    }
  }

  static Cocycle constant(BaseSystem base, const Mat2& a) {
    require_sl2(a);
    return Cocycle(std::move(base), [a](const BasePoint&) { return a; }, a.is_real(), Unchecked{});
  }

  /// Schrodinger cocycle [[E - v(x), -1], [1, 0]].
  static Cocycle schrodinger(BaseSystem base, Potential v, cplx energy) {
    v.require_matches(base);
    const bool real = v.is_real() && energy.imag() == 0.0;
    auto b = std::make_shared<const BaseSystem>(base);
    return Cocycle(
        std::move(base), [b, v = std::move(v), energy](const BasePoint& x) { return Mat2::schrodinger(energy - v(*b, x)); },
        real, Unchecked{});
  }

  /// Cocycle [[u(x), -1], [1, 0]], so that L(u) is the exponent of A^(u).
  static Cocycle of_potential(BaseSystem base, const Potential& u) { return schrodinger(std::move(base), -1.0 * u, 0.0); }

  /// x -> e^{s field(x)} A(x).
  static Cocycle exp_perturbed(const Cocycle& a, const Sl2Field& field, cplx s) {
    if (!field.matches(a.base())) throw Failure(FailureKind::schema, "sl(2) field does not match the base family");
    const bool real = a.is_real() && field.is_real() && s.imag() == 0.0;
    auto b = std::make_shared<const BaseSystem>(a.base());
    return Cocycle(
        a.base(), [b, fiber = a.fiber_, field, s](const BasePoint& x) { return exp_sl2(field(*b, x), s) * fiber(x); },
        real, Unchecked{});
  }

  /// x -> A(x) R(2 pi theta).
  Cocycle rotated(double theta) const {
    const Mat2 r = Mat2::rotation(2.0 * pi * theta);
    return Cocycle(base_, [fiber = fiber_, r](const BasePoint& x) { return fiber(x) * r; }, real_, Unchecked{});
  }

  const BaseSystem& base() const { return base_; }
  bool is_real() const { return real_; }
  Mat2 operator()(const BasePoint& x) const { return fiber_(x); }
  const Fiber& fiber() const { return fiber_; }

 private:
  struct Unchecked {};
  Cocycle(BaseSystem base, Fiber fiber, bool real, Unchecked)
      : base_(std::move(base)), fiber_(std::move(fiber)), real_(real) {}

  BaseSystem base_;
  Fiber fiber_;
  bool real_;
};

struct RenormalizedProduct {
  Mat2 m;                  // unit Frobenius norm
  double log_norm = 0.0;   // A_n(x) = m * exp(log_norm)
  BasePoint end;           // f^n(x)

  double log_operator_norm() const { return log_norm + std::log(m.operator_norm()); }
};

/// A_n(x) = A(f^{n-1}x)...A(x), rescaled by its Frobenius norm after every
/// factor with the logs accumulated in compensated summation.
inline RenormalizedProduct iterate_renormalized(const Cocycle& c, BasePoint x, std::int64_t n) {
  if (n < 1) throw Failure(FailureKind::domain, "iterate length must be at least 1");
  const BaseSystem& base = c.base();
  Mat2 m = Mat2::identity();
  CompensatedSum log;
  for (std::int64_t k = 0; k < n; ++k) {
    m = c(x) * m;
    const double s = m.frobenius();
    m /= s;
    log.add(std::log(s));
    advance(base, x, 1);
  }
  return {m, log.value(), std::move(x)};
}

namespace detail {
/// ln||A_m(x)|| (operator norm) at m = n, n/2, n/4, n/8 from one pass.
inline std::array<double, 4> log_norms_with_checkpoints(const Cocycle& c, BasePoint x, std::int64_t n) {
  const BaseSystem& base = c.base();
  Mat2 m = Mat2::identity();
  CompensatedSum log;
  std::array<double, 4> out{};
  for (std::int64_t k = 1; k <= n; ++k) {
    m = c(x) * m;
    const double s = m.frobenius();
    m /= s;
    log.add(std::log(s));
    advance(base, x, 1);
    for (int j = 0; j < 4; ++j) {
      if (k == std::max<std::int64_t>(1, n >> j)) out[static_cast<std::size_t>(j)] = log.value() + std::log(m.operator_norm());
    }
  }
  return out;
}
}  // namespace detail

enum class LyapunovMethod { birkhoff, periodic_exact, uh_exact, fubini };

inline const char* to_string(LyapunovMethod m) {
  switch (m) {
    case LyapunovMethod::birkhoff: return "birkhoff";
    case LyapunovMethod::periodic_exact: return "periodic_exact";
    case LyapunovMethod::uh_exact: return "uh_exact";
    case LyapunovMethod::fubini: return "fubini";
  }
  return "unknown";
}

struct LyapunovEstimate {
  double value = 0.0;   // nats per iterate
  double std_error = 0.0;
  LyapunovMethod method = LyapunovMethod::birkhoff;
  std::int64_t n = 0;
  std::size_t samples = 0;

  /// value > k * stderr, with stderr 0 meaning an exact evaluation.
  bool positive(double k = 3.0) const { return value > k * std_error && value > 0.0; }
};

/// Average of (1/n) ln||A_n(x)|| over seeded mu-distributed starting points.
/// The reported stderr combines the sample standard error with the finite-n
/// proxy max_m |L_n - L_m| / (n/m - 1) over m = n/2, n/4, n/8, so an exponent
/// that is really zero (where (1/n) ln||A_n|| ~ C/n) is not reported as
/// significantly positive.
inline LyapunovEstimate lyapunov_birkhoff(const Cocycle& c, std::int64_t n, std::size_t samples, std::uint64_t seed) {
  if (n < 1 || samples < 1) throw Failure(FailureKind::domain, "birkhoff estimate needs n >= 1 and samples >= 1");
  const auto runs = parallel_map<std::array<double, 4>>(
      samples, [&](std::size_t i) { return detail::log_norms_with_checkpoints(c, sample_point(c.base(), seed, i), n); });
  std::array<CompensatedSum, 4> sums;
  for (const auto& r : runs) {
    for (std::size_t j = 0; j < 4; ++j) sums[j].add(r[j] / double(std::max<std::int64_t>(1, n >> j)));
  }
  const double mean = sums[0].value() / double(samples);
  double bias = 0.0;
  for (std::size_t j = 1; j < 4; ++j) {
    const std::int64_t m = std::max<std::int64_t>(1, n >> j);
    if (m == n) continue;
    bias = std::max(bias, std::abs(mean - sums[j].value() / double(samples)) / (double(n) / double(m) - 1.0));
  }
  double var = 0.0;
  if (samples > 1) {
    CompensatedSum sq;
    for (const auto& r : runs) sq.add((r[0] / double(n) - mean) * (r[0] / double(n) - mean));
    var = sq.value() / double(samples - 1) / double(samples);
  }
  LyapunovEstimate e;
  e.value = mean;
  e.std_error = std::sqrt(var + bias * bias);
  e.method = LyapunovMethod::birkhoff;
  e.n = n;
  e.samples = samples;
  return e;
}

/// ln rho(M) for M = scaled * exp(log_scale), a unit determinant product.
/// Real products with |tr| <= 2 give exactly 0.
inline double log_spectral_radius_scaled(const Mat2& scaled, double log_scale) {
  const cplx half_tr = 0.5 * scaled.trace();
  if (scaled.is_real() && std::abs(half_tr.real()) * std::exp(log_scale) <= 1.0) return 0.0;
  const cplx det = scaled.det();  // = exp(-2 log_scale) in exact arithmetic
  const cplx root = std::sqrt(half_tr * half_tr - det);
  const cplx big = (std::real(std::conj(half_tr) * root) >= 0.0) ? half_tr + root : half_tr - root;
  return std::max(0.0, log_scale + std::log(std::abs(big)));
}

/// Monodromy of orbit j starting at phase 0.
inline RenormalizedProduct monodromy(const Cocycle& c, std::size_t orbit) {
  const int period = c.base().orbits().orbits.at(orbit).period;
  return iterate_renormalized(c, OrbitPoint{orbit, 0}, period);
}

/// sum_j w_j (1/n_j) ln rho(A_{n_j}(x_j)).
inline LyapunovEstimate lyapunov_periodic_exact(const Cocycle& c) {
  if (!c.base().is_periodic()) throw Failure(FailureKind::schema, "exact periodic exponent needs a periodic base");
  const auto& os = c.base().orbits().orbits;
  CompensatedSum total;
  for (std::size_t j = 0; j < os.size(); ++j) {
    if (os[j].weight == 0.0) continue;
    const auto mono = monodromy(c, j);
    total.add(os[j].weight * log_spectral_radius_scaled(mono.m, mono.log_norm) / os[j].period);
  }
  LyapunovEstimate e;
  e.value = total.value();
  e.method = LyapunovMethod::periodic_exact;
  e.n = 0;
  e.samples = os.size();
  return e;
}

struct LyapunovOptions {
  std::int64_t n = 4096;
  std::size_t samples = 8;
  std::uint64_t seed = 1;
};

/// Best available exponent: exact on periodic bases, Birkhoff otherwise.
inline LyapunovEstimate lyapunov(const Cocycle& c, const LyapunovOptions& opt = {}) {
  if (c.base().is_periodic()) return lyapunov_periodic_exact(c);
  return lyapunov_birkhoff(c, opt.n, opt.samples, opt.seed);
}

/// L(u) := L(A^(u)) for the Schrodinger convention of the regularizer.
inline LyapunovEstimate lyapunov_of_potential(const BaseSystem& base, const Potential& u, const LyapunovOptions& opt = {}) {
  return lyapunov(Cocycle::of_potential(base, u), opt);
}

/// int (1/2^m) ln||A_{2^m}||_HS dmu for m = 0..max_doubling; non-increasing by
/// subadditivity, every term an upper bound for L.
inline std::vector<double> lyapunov_fubini(const Cocycle& c, int max_doubling, std::size_t points = 4096,
                                           std::uint64_t seed = 1) {
  if (max_doubling < 0 || max_doubling > 20) throw Failure(FailureKind::domain, "max_doubling must lie in 0..20");
  const IntegrationScheme scheme = default_scheme(c.base(), points, seed);
  std::vector<double> out;
  for (int m = 0; m <= max_doubling; ++m) {
    const std::int64_t len = std::int64_t{1} << m;
    // unit Frobenius normalization makes log_norm the HS log norm
    const auto integral = integrate(
        c.base(), [&](const BasePoint& x) { return iterate_renormalized(c, x, len).log_norm / double(len); }, scheme);
    out.push_back(integral.value);
  }
  return out;
}

struct AbCheck {
  double lhs = 0.0;  // int_0^1 L(A R_theta) dtheta
  double rhs = 0.0;  // int ln((||A|| + ||A||^-1)/2) dmu
  double lhs_error = 0.0;
  double rhs_error = 0.0;
};

/// Both sides of the rotation-average identity, for the caller to compare.
/// lhs uses the midpoint rule on theta_nodes angles.
inline AbCheck ab_average_check(const Cocycle& c, std::size_t theta_nodes, const LyapunovOptions& opt = {}) {
  if (!c.is_real()) throw Failure(FailureKind::domain, "rotation average identity needs a real cocycle");
  if (theta_nodes < 16) throw Failure(FailureKind::domain, "need at least 16 angle nodes");
  const auto ls = parallel_map<LyapunovEstimate>(theta_nodes, [&](std::size_t k) {
    return lyapunov(c.rotated((double(k) + 0.5) / double(theta_nodes)), opt);
  });
  CompensatedSum lhs, lhs_err;
  for (const auto& l : ls) {
    lhs.add(l.value);
    lhs_err.add(l.std_error);
  }
  AbCheck out;
  out.lhs = lhs.value() / double(theta_nodes);
  out.lhs_error = lhs_err.value() / double(theta_nodes);
  const auto rhs = integrate(
      c.base(),
      [&](const BasePoint& x) {
        const double nrm = c(x).operator_norm();
        return std::log(0.5 * (nrm + 1.0 / nrm));
      },
      default_scheme(c.base(), 100000, opt.seed));
  out.rhs = rhs.value;
  out.rhs_error = rhs.error_estimate;
  return out;
}

}  // namespace sl2lab
