#pragma once

// Concrete base dynamics (f, mu): unions of periodic orbits, circle rotations
// with Lebesgue measure and Bernoulli full shifts, plus potentials on them and
// mu-integration schemes.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "sl2lab/common.hpp"

namespace sl2lab {

struct Orbit {
  int period = 1;
  double weight = 1.0;
};

struct PeriodicOrbits {
  std::vector<Orbit> orbits;
};

struct CircleRotation {
  double alpha = 0.0;
};

struct BernoulliShift {
  std::vector<double> probabilities;
};

/// True when alpha agrees with a rational p/q, q <= max_denominator, to within
/// double resolution. Convergents of the continued fraction are tested.
inline bool alpha_looks_rational(double alpha, long long max_denominator = 1000000) {
  double x = alpha - std::floor(alpha);
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    const double a = std::floor(x);
    const long long ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > max_denominator) return false;
    if (q2 > 0 && std::abs(alpha - std::floor(alpha) - double(p2) / double(q2)) <= 1e-14) return true;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    const double frac = x - a;
    if (frac <= 0.0) return true;
    x = 1.0 / frac;
  }
  return false;
}

class BaseSystem {
 public:
  using Family = std::variant<PeriodicOrbits, CircleRotation, BernoulliShift>;

  static BaseSystem periodic(std::vector<Orbit> orbits) {
    if (orbits.empty()) throw Failure(FailureKind::schema, "periodic base needs at least one orbit");
    double total = 0.0;
    for (const auto& o : orbits) {
      if (o.period < 1) throw Failure(FailureKind::schema, "orbit period must be positive");
      if (!(o.weight >= 0.0)) throw Failure(FailureKind::schema, "orbit weight must be nonnegative");
      total += o.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Failure(FailureKind::schema, "orbit weights must sum to 1");
    BaseSystem b;
    b.family_ = PeriodicOrbits{std::move(orbits)};
    b.index_orbits();
    return b;
  }
  static BaseSystem single_orbit(int period) { return periodic({{period, 1.0}}); }
  static BaseSystem fixed_point() { return single_orbit(1); }

  static BaseSystem rotation(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Failure(FailureKind::schema, "rotation alpha must lie in (0,1)");
    BaseSystem b;
    b.family_ = CircleRotation{alpha};
    b.rational_ = alpha_looks_rational(alpha);
    return b;
  }
  static BaseSystem golden_rotation() { return rotation((std::sqrt(5.0) - 1.0) / 2.0); }

  static BaseSystem bernoulli(std::vector<double> probabilities) {
    if (probabilities.size() < 2 || probabilities.size() > 255) {
      throw Failure(FailureKind::schema, "Bernoulli shift needs 2..255 symbols");
    }
    double total = 0.0;
    for (double p : probabilities) {
      if (!(p >= 0.0)) throw Failure(FailureKind::schema, "probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw Failure(FailureKind::schema, "probabilities must sum to 1");
    BaseSystem b;
    b.family_ = BernoulliShift{std::move(probabilities)};
    return b;
  }

  const Family& family() const { return family_; }
  bool is_periodic() const { return std::holds_alternative<PeriodicOrbits>(family_); }
  bool is_rotation() const { return std::holds_alternative<CircleRotation>(family_); }
  bool is_shift() const { return std::holds_alternative<BernoulliShift>(family_); }

  const PeriodicOrbits& orbits() const { return std::get<PeriodicOrbits>(family_); }
  double alpha() const { return std::get<CircleRotation>(family_).alpha; }
  const std::vector<double>& probabilities() const { return std::get<BernoulliShift>(family_).probabilities; }
  int symbols() const { return static_cast<int>(probabilities().size()); }

  /// Rotation with alpha numerically rational.
  bool alpha_rational() const { return rational_; }
  /// f restricted to supp mu is periodic: the density theorems do not apply.
  bool periodic_on_support() const { return is_periodic() || (is_rotation() && rational_); }

  /// Index of orbit point (orbit j, phase 0) in a flat table of all orbit points.
  std::size_t orbit_offset(std::size_t j) const { return offsets_[j]; }
  std::size_t orbit_point_count() const { return offsets_.empty() ? 0 : offsets_.back(); }

 private:
  BaseSystem() = default;

  void index_orbits() {
    const auto& os = std::get<PeriodicOrbits>(family_).orbits;
    offsets_.assign(os.size() + 1, 0);
    for (std::size_t j = 0; j < os.size(); ++j) offsets_[j + 1] = offsets_[j] + os[j].period;
  }

  Family family_;
  bool rational_ = false;
  std::vector<std::size_t> offsets_;
};

struct OrbitPoint {
  std::size_t orbit = 0;
  int phase = 0;
};

struct CirclePoint {
  double x = 0.0;
};

/// Position `index` in a two-sided symbol sequence. Symbols at indices
/// [0, prefix.size()) come from `prefix`; all others are drawn from a stream
/// that is a pure function of (seed, index), so backward orbits are free.
struct ShiftPoint {
  std::uint64_t seed = 0;
  std::int64_t index = 0;
  std::vector<std::uint8_t> prefix;
};

using BasePoint = std::variant<OrbitPoint, CirclePoint, ShiftPoint>;

inline std::uint8_t draw_symbol(const std::vector<double>& probabilities, std::uint64_t seed, std::int64_t index) {
  const double u = unit_from_bits(derive_seed(seed, static_cast<std::uint64_t>(index)));
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < probabilities.size(); ++s) {
    acc += probabilities[s];
    if (u < acc) return static_cast<std::uint8_t>(s);
  }
  return static_cast<std::uint8_t>(probabilities.size() - 1);
}

inline std::uint8_t symbol_at(const BaseSystem& base, const ShiftPoint& p, std::int64_t offset = 0) {
  const std::int64_t k = p.index + offset;
  if (k >= 0 && k < static_cast<std::int64_t>(p.prefix.size())) return p.prefix[static_cast<std::size_t>(k)];
  return draw_symbol(base.probabilities(), p.seed, k);
}

namespace detail {
[[noreturn]] inline void family_mismatch() {
  throw Failure(FailureKind::schema, "base point does not belong to this base family");
}
}  // namespace detail

inline void check_point(const BaseSystem& base, const BasePoint& x) {
  if (base.is_periodic()) {
    const auto* p = std::get_if<OrbitPoint>(&x);
    if (!p || p->orbit >= base.orbits().orbits.size() || p->phase < 0 ||
        p->phase >= base.orbits().orbits[p->orbit].period) {
      detail::family_mismatch();
    }
  } else if (base.is_rotation()) {
    if (!std::holds_alternative<CirclePoint>(x)) detail::family_mismatch();
  } else if (!std::holds_alternative<ShiftPoint>(x)) {
    detail::family_mismatch();
  }
}

/// In-place f^k for any integer k (the shift is invertible on two-sided sequences).
inline void advance(const BaseSystem& base, BasePoint& x, std::int64_t k = 1) {
  switch (x.index()) {
    case 0: {
      auto& p = std::get<OrbitPoint>(x);
      const std::int64_t n = base.orbits().orbits[p.orbit].period;
      p.phase = static_cast<int>(((p.phase + k) % n + n) % n);
      break;
    }
    case 1: {
      auto& p = std::get<CirclePoint>(x);
      const double y = p.x + static_cast<double>(k) * base.alpha();
      p.x = y - std::floor(y);
      if (p.x >= 1.0) p.x = 0.0;
      break;
    }
    default:
      std::get<ShiftPoint>(x).index += k;
  }
}

/// One application of the base map f.
inline BasePoint step(const BaseSystem& base, const BasePoint& x) {
  check_point(base, x);
  BasePoint y = x;
  advance(base, y, 1);
  return y;
}

/// Point number i of a mu-distributed seeded sample.
inline BasePoint sample_point(const BaseSystem& base, std::uint64_t seed, std::uint64_t i) {
  const std::uint64_t bits = derive_seed(seed, i);
  if (base.is_periodic()) {
    const auto& os = base.orbits().orbits;
    const double u = unit_from_bits(bits);
    double acc = 0.0;
    std::size_t j = 0;
    for (; j + 1 < os.size(); ++j) {
      acc += os[j].weight;
      if (u < acc) break;
    }
    const double v = unit_from_bits(mix_seed(bits));
    const int phase = std::min(os[j].period - 1, static_cast<int>(v * os[j].period));
    return OrbitPoint{j, phase};
  }
  if (base.is_rotation()) return CirclePoint{unit_from_bits(bits)};
  return ShiftPoint{bits, 0, {}};
}

/// Deterministic probe set: every orbit point, a uniform grid of `count`
/// circle points, or `count` seeded shift windows.
inline std::vector<BasePoint> probe_points(const BaseSystem& base, std::size_t count, std::uint64_t seed) {
  std::vector<BasePoint> out;
  if (base.is_periodic()) {
    const auto& os = base.orbits().orbits;
    for (std::size_t j = 0; j < os.size(); ++j) {
      if (os[j].weight <= 0.0) continue;
      for (int k = 0; k < os[j].period; ++k) out.emplace_back(OrbitPoint{j, k});
    }
  } else if (base.is_rotation()) {
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(CirclePoint{double(i) / double(count)});
  } else {
    for (std::size_t i = 0; i < count; ++i) out.emplace_back(ShiftPoint{derive_seed(seed, i), 0, {}});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Potentials

struct PeriodicTable {
  std::vector<cplx> values;  // one per orbit point, flat in orbit order
};

/// constant + sum_k cos_k cos(2 pi k x) + sin_k sin(2 pi k x), k = 1..degree.
struct TrigPolynomial {
  cplx constant{0.0};
  std::vector<cplx> cos;
  std::vector<cplx> sin;
};

/// Locally constant function of the first `depth` symbols; word w_0..w_{k-1}
/// has index sum w_i S^{k-1-i}.
struct CylinderTable {
  int symbols = 2;
  int depth = 0;
  std::vector<cplx> table{0.0};
};

struct SupNorm {
  double lower = 0.0;  // attained (or sampled) value
  double upper = 0.0;  // guaranteed bound
};

class Potential {
 public:
  using Repr = std::variant<PeriodicTable, TrigPolynomial, CylinderTable>;

  Potential() : repr_(TrigPolynomial{}) {}
  Potential(PeriodicTable t) : repr_(std::move(t)) {}
  Potential(TrigPolynomial t) : repr_(std::move(t)) {
    auto& p = std::get<TrigPolynomial>(repr_);
    const std::size_t d = std::max(p.cos.size(), p.sin.size());
    p.cos.resize(d, 0.0);
    p.sin.resize(d, 0.0);
  }
  Potential(CylinderTable t) : repr_(std::move(t)) {
    const auto& c = std::get<CylinderTable>(repr_);
    if (c.symbols < 2 || c.depth < 0 || c.depth > 12) throw Failure(FailureKind::schema, "bad cylinder table shape");
    std::size_t size = 1;
    for (int i = 0; i < c.depth; ++i) size *= static_cast<std::size_t>(c.symbols);
    if (c.table.size() != size) throw Failure(FailureKind::schema, "cylinder table has wrong size");
  }

  /// The constant function c, represented in the family matching `base`.
  static Potential constant(const BaseSystem& base, cplx c) {
    if (base.is_periodic()) return PeriodicTable{std::vector<cplx>(base.orbit_point_count(), c)};
    if (base.is_rotation()) return TrigPolynomial{c, {}, {}};
    return CylinderTable{base.symbols(), 0, {c}};
  }

  /// Period-n table on a single orbit.
  static Potential table(std::vector<cplx> values) { return PeriodicTable{std::move(values)}; }
  static Potential table(const std::vector<double>& values) {
    return PeriodicTable{std::vector<cplx>(values.begin(), values.end())};
  }

  const Repr& repr() const { return repr_; }

  bool matches(const BaseSystem& base) const {
    if (const auto* p = std::get_if<PeriodicTable>(&repr_)) {
      return base.is_periodic() && p->values.size() == base.orbit_point_count();
    }
    if (std::holds_alternative<TrigPolynomial>(repr_)) return base.is_rotation();
    return base.is_shift() && std::get<CylinderTable>(repr_).symbols == base.symbols();
  }

  void require_matches(const BaseSystem& base) const {
    if (!matches(base)) throw Failure(FailureKind::schema, "potential representation does not match the base family");
  }

  bool is_real() const {
    auto real = [](const std::vector<cplx>& v) {
      return std::all_of(v.begin(), v.end(), [](cplx z) { return z.imag() == 0.0; });
    };
    if (const auto* p = std::get_if<PeriodicTable>(&repr_)) return real(p->values);
    if (const auto* t = std::get_if<TrigPolynomial>(&repr_)) return t->constant.imag() == 0.0 && real(t->cos) && real(t->sin);
    return real(std::get<CylinderTable>(repr_).table);
  }

  cplx operator()(const BaseSystem& base, const BasePoint& x) const {
    switch (repr_.index()) {
      case 0: {
        const auto& p = std::get<OrbitPoint>(x);
        return std::get<PeriodicTable>(repr_).values[base.orbit_offset(p.orbit) + static_cast<std::size_t>(p.phase)];
      }
      case 1:
        return at(std::get<CirclePoint>(x).x);
      default: {
        const auto& c = std::get<CylinderTable>(repr_);
        const auto& p = std::get<ShiftPoint>(x);
        std::size_t idx = 0;
        for (int i = 0; i < c.depth; ++i) idx = idx * static_cast<std::size_t>(c.symbols) + symbol_at(base, p, i);
        return c.table[idx];
      }
    }
  }

  /// Circle evaluation for trigonometric potentials.
  cplx at(double x) const {
    const auto& t = std::get<TrigPolynomial>(repr_);
    cplx v = t.constant;
    // cos/sin of 2 pi k x by angle addition
    const double c1 = std::cos(2.0 * pi * x), s1 = std::sin(2.0 * pi * x);
    double ck = 1.0, sk = 0.0;
    for (std::size_t k = 0; k < t.cos.size(); ++k) {
      const double cn = ck * c1 - sk * s1;
      sk = sk * c1 + ck * s1;
      ck = cn;
      v += t.cos[k] * ck + t.sin[k] * sk;
    }
    return v;
  }

  SupNorm sup_norm() const {
    auto table_max = [](const std::vector<cplx>& v) {
      double m = 0.0;
      for (cplx z : v) m = std::max(m, std::abs(z));
      return m;
    };
    if (const auto* p = std::get_if<PeriodicTable>(&repr_)) {
      const double m = table_max(p->values);
      return {m, m};
    }
    if (const auto* c = std::get_if<CylinderTable>(&repr_)) {
      const double m = table_max(c->table);
      return {m, m};
    }
    const auto& t = std::get<TrigPolynomial>(repr_);
    double l1 = std::abs(t.constant);
    for (std::size_t k = 0; k < t.cos.size(); ++k) l1 += std::abs(t.cos[k]) + std::abs(t.sin[k]);
    double sampled = 0.0;
    for (int i = 0; i < 4096; ++i) sampled = std::max(sampled, std::abs(at(i / 4096.0)));
    return {sampled, l1};
  }

  /// Infimum of the real part (exact for tables, sampled for trig polynomials).
  double inf_real() const {
    double m = INFINITY;
    if (const auto* p = std::get_if<PeriodicTable>(&repr_)) {
      for (cplx z : p->values) m = std::min(m, z.real());
    } else if (const auto* c = std::get_if<CylinderTable>(&repr_)) {
      for (cplx z : c->table) m = std::min(m, z.real());
    } else {
      for (int i = 0; i < 4096; ++i) m = std::min(m, at(i / 4096.0).real());
    }
    return m;
  }

  Potential& operator*=(cplx s) {
    std::visit(
        [s](auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, PeriodicTable>) {
            for (auto& z : r.values) z *= s;
          } else if constexpr (std::is_same_v<T, TrigPolynomial>) {
            r.constant *= s;
            for (auto& z : r.cos) z *= s;
            for (auto& z : r.sin) z *= s;
          } else {
            for (auto& z : r.table) z *= s;
          }
        },
        repr_);
    return *this;
  }

  Potential& operator+=(const Potential& o) {
    if (repr_.index() != o.repr_.index()) throw Failure(FailureKind::schema, "cannot add potentials of different families");
    if (auto* p = std::get_if<PeriodicTable>(&repr_)) {
      const auto& q = std::get<PeriodicTable>(o.repr_);
      if (p->values.size() != q.values.size()) throw Failure(FailureKind::schema, "periodic tables differ in size");
      for (std::size_t i = 0; i < q.values.size(); ++i) p->values[i] += q.values[i];
    } else if (auto* t = std::get_if<TrigPolynomial>(&repr_)) {
      const auto& u = std::get<TrigPolynomial>(o.repr_);
      const std::size_t d = std::max(t->cos.size(), u.cos.size());
      t->cos.resize(d, 0.0);
      t->sin.resize(d, 0.0);
      t->constant += u.constant;
      for (std::size_t k = 0; k < u.cos.size(); ++k) {
        t->cos[k] += u.cos[k];
        t->sin[k] += u.sin[k];
      }
    } else {
      auto& c = std::get<CylinderTable>(repr_);
      CylinderTable d = std::get<CylinderTable>(o.repr_);
      if (c.symbols != d.symbols) throw Failure(FailureKind::schema, "cylinder tables differ in alphabet");
      if (c.depth < d.depth) c = refine(c, d.depth);
      if (d.depth < c.depth) d = refine(d, c.depth);
      for (std::size_t i = 0; i < c.table.size(); ++i) c.table[i] += d.table[i];
    }
    return *this;
  }

  friend Potential operator+(Potential a, const Potential& b) { return a += b; }
  friend Potential operator-(Potential a, const Potential& b) {
    Potential nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend Potential operator*(cplx s, Potential a) { return a *= s; }

 private:
  /// Same function expressed on longer words.
  static CylinderTable refine(const CylinderTable& c, int depth) {
    CylinderTable out{c.symbols, depth, {}};
    std::size_t size = 1, shrink = 1;
    for (int i = 0; i < depth; ++i) size *= static_cast<std::size_t>(c.symbols);
    for (int i = c.depth; i < depth; ++i) shrink *= static_cast<std::size_t>(c.symbols);
    out.table.resize(size);
    for (std::size_t i = 0; i < size; ++i) out.table[i] = c.table[i / shrink];
    return out;
  }

  Repr repr_;
};

/// Linear combination a*p + b*q.
inline Potential combine(cplx a, const Potential& p, cplx b, const Potential& q) {
  return a * p + b * q;
}

// ---------------------------------------------------------------------------
// mu-integration

struct ExactSum {};
/// One Birkhoff orbit of `points` points from a seeded start (rotations).
struct BirkhoffOrbit {
  std::size_t points = 100000;
  std::uint64_t seed = 0;
};
/// Independent seeded samples with a standard error estimate (shifts).
struct MonteCarlo {
  std::size_t samples = 100000;
  std::uint64_t seed = 0;
};
using IntegrationScheme = std::variant<ExactSum, BirkhoffOrbit, MonteCarlo>;

struct Integral {
  double value = 0.0;
  double error_estimate = 0.0;
};

inline IntegrationScheme default_scheme(const BaseSystem& base, std::size_t points, std::uint64_t seed) {
  if (base.is_periodic()) return ExactSum{};
  if (base.is_rotation()) return BirkhoffOrbit{points, seed};
  return MonteCarlo{points, seed};
}

/// Integral of a real observable against mu.
template <class Observable>
Integral integrate(const BaseSystem& base, Observable&& observable, const IntegrationScheme& scheme) {
  if (base.is_periodic()) {
    if (!std::holds_alternative<ExactSum>(scheme)) throw Failure(FailureKind::schema, "periodic bases integrate by exact sum");
    const auto& os = base.orbits().orbits;
    CompensatedSum total;
    for (std::size_t j = 0; j < os.size(); ++j) {
      if (os[j].weight == 0.0) continue;
      CompensatedSum orbit;
      for (int k = 0; k < os[j].period; ++k) orbit.add(observable(BasePoint{OrbitPoint{j, k}}));
      total.add(os[j].weight * orbit.value() / os[j].period);
    }
    return {total.value(), 0.0};
  }
  if (base.is_rotation()) {
    const auto* s = std::get_if<BirkhoffOrbit>(&scheme);
    if (!s || s->points < 2) throw Failure(FailureKind::schema, "rotation bases integrate along a Birkhoff orbit");
    const double x0 = unit_from_bits(derive_seed(s->seed, 0));
    const double alpha = base.alpha();
    const auto values = parallel_map<double>(s->points, [&](std::size_t k) {
      const double y = x0 + static_cast<double>(k) * alpha;
      return static_cast<double>(observable(BasePoint{CirclePoint{y - std::floor(y)}}));
    });
    CompensatedSum full, half;
    const std::size_t h = s->points / 2;
    for (std::size_t k = 0; k < values.size(); ++k) {
      full.add(values[k]);
      if (k < h) half.add(values[k]);
    }
    const double mean = full.value() / double(s->points);
    const double mean_half = half.value() / double(h);
    return {mean, std::abs(mean - mean_half)};
  }
  const auto* s = std::get_if<MonteCarlo>(&scheme);
  if (!s || s->samples < 2) throw Failure(FailureKind::schema, "shift bases integrate by Monte Carlo");
  const auto values = parallel_map<double>(s->samples, [&](std::size_t i) {
    return static_cast<double>(observable(BasePoint{ShiftPoint{derive_seed(s->seed, i), 0, {}}}));
  });
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / double(values.size());
  CompensatedSum sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double var = sq.value() / double(values.size() - 1);
  return {mean, std::sqrt(var / double(values.size()))};
}

}  // namespace sl2lab
