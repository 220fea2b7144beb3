#pragma once

// Periodic Schrodinger operators: discriminant, bands, gap opening, the
// integrated density of states and the Thouless formula.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "sl2lab/common.hpp"
#include "sl2lab/projective.hpp"
#include "sl2lab/quadrature.hpp"

namespace sl2lab {

struct PeriodicPotential {
  std::vector<double> values;

  PeriodicPotential() = default;
  PeriodicPotential(std::vector<double> v) : values(std::move(v)) {
    if (values.empty()) throw Failure(FailureKind::schema, "periodic potential needs period >= 1");
    for (double x : values) {
      if (!std::isfinite(x)) throw Failure(FailureKind::schema, "periodic potential values must be finite");
    }
  }
  int period() const { return static_cast<int>(values.size()); }
  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
};

/// Monodromy A_n = A(n-1)...A(0) with A(k) = [[E - v_k, -1], [1, 0]].
inline Mat2 monodromy(const PeriodicPotential& v, cplx energy) {
  Mat2 m = Mat2::identity();
  for (double x : v.values) m = Mat2::schrodinger(energy - x) * m;
  return m;
}

/// t(E) = tr A_n, a monic degree-n polynomial in E.
inline cplx discriminant(const PeriodicPotential& v, cplx energy) { return monodromy(v, energy).trace(); }
inline double discriminant(const PeriodicPotential& v, double energy) {
  // real recurrence on the first column pair, cheaper than complex products
  double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
  for (double x : v.values) {
    const double u = energy - x;
    const double b11 = u * a11 - a21, b12 = u * a12 - a22;
    a21 = a11;
    a22 = a12;
    a11 = b11;
    a12 = b12;
  }
  return a11 + a22;
}

/// (t(E), t'(E)) by differentiating the transfer-matrix recurrence.
inline std::pair<double, double> discriminant_with_derivative(const PeriodicPotential& v, double energy) {
  double a11 = 1, a12 = 0, a21 = 0, a22 = 1;
  double d11 = 0, d12 = 0, d21 = 0, d22 = 0;
  for (double x : v.values) {
    const double u = energy - x;
    const double n11 = u * d11 - d21 + a11, n12 = u * d12 - d22 + a12;
    d21 = d11;
    d22 = d12;
    d11 = n11;
    d12 = n12;
    const double b11 = u * a11 - a21, b12 = u * a12 - a22;
    a21 = a11;
    a22 = a12;
    a11 = b11;
    a12 = b12;
  }
  return {a11 + a22, d11 + d22};
}

/// A maximal interval on which t is monotone and covers [-2, 2] once.
struct Branch {
  double left = 0.0, right = 0.0;
  int sign_left = 1;  // t(left) = 2 * sign_left
};

struct Band {
  double left = 0.0, right = 0.0;
  double length() const { return right - left; }
};

struct BandStructure {
  PeriodicPotential potential;
  std::vector<Branch> branches;  // always n of them
  std::vector<Band> bands;       // branches merged across closed gaps
  std::vector<double> zeros;     // zeros of t, one per branch
  double resolution = 1e-9;

  int period() const { return potential.period(); }
  bool all_gaps_open() const { return static_cast<int>(bands.size()) == period(); }
};

namespace detail {
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-13) {
  double flo = f(lo);
  for (int it = 0; it < 200 && hi - lo > tol * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline int sign(double x) { return (x > 0) - (x < 0); }

inline std::vector<double> discriminant_zeros(const PeriodicPotential& v, double lo, double hi) {
  const int n = v.period();
  auto t = [&](double e) { return discriminant(v, e); };
  for (std::size_t samples = 64 * static_cast<std::size_t>(n); samples <= (std::size_t{1} << 24); samples *= 2) {
    const auto vals = parallel_map<double>(samples + 1, [&](std::size_t k) {
      return t(lo + (hi - lo) * double(k) / double(samples));
    });
    std::vector<double> zeros;
    for (std::size_t k = 0; k < samples; ++k) {
      const double a = lo + (hi - lo) * double(k) / double(samples);
      const double b = lo + (hi - lo) * double(k + 1) / double(samples);
      if (vals[k] == 0.0) zeros.push_back(a);
      else if (sign(vals[k]) * sign(vals[k + 1]) < 0) zeros.push_back(bisect(t, a, b));
    }
    if (static_cast<int>(zeros.size()) == n) return zeros;
  }
  throw Failure(FailureKind::domain, "could not isolate the zeros of the discriminant");
}
}  // namespace detail

/// Spectrum {E : |t(E)| <= 2} as n monotone branches and the merged bands.
/// Edges are refined to 1e-12; gaps narrower than `resolution` count as closed.
inline BandStructure bands(const PeriodicPotential& v, double resolution = 1e-9) {
  const int n = v.period();
  const double lo = v.min() - 3.0, hi = v.max() + 3.0;
  BandStructure out;
  out.potential = v;
  out.resolution = resolution;
  out.zeros = detail::discriminant_zeros(v, lo, hi);
  auto t = [&](double e) { return discriminant(v, e); };
  auto dt = [&](double e) { return discriminant_with_derivative(v, e).second; };

  // edges[i] = (left, right) of branch i
  std::vector<std::pair<double, double>> edges(n);
  const double t_lo = t(lo);
  edges[0].first = detail::bisect([&](double e) { return t(e) - 2.0 * detail::sign(t_lo); }, lo, out.zeros[0], 1e-15);
  edges[n - 1].second = detail::bisect([&](double e) { return t(e) - 2.0; }, out.zeros[n - 1], hi, 1e-15);
  for (int i = 0; i + 1 < n; ++i) {
    const double a = out.zeros[i], b = out.zeros[i + 1];
    const double c = detail::bisect(dt, a, b, 1e-15);
    const double tc = t(c);
    if (std::abs(tc) <= 2.0) {
      edges[i].second = edges[i + 1].first = c;
      continue;
    }
    const double level = 2.0 * detail::sign(tc);
    edges[i].second = detail::bisect([&](double e) { return t(e) - level; }, a, c, 1e-15);
    edges[i + 1].first = detail::bisect([&](double e) { return t(e) - level; }, c, b, 1e-15);
  }
  for (int i = 0; i < n; ++i) {
    const double tl = t(edges[i].first);
    out.branches.push_back({edges[i].first, edges[i].second, tl >= 0 ? 1 : -1});
  }
  for (const auto& b : out.branches) {
    if (!out.bands.empty() && b.left - out.bands.back().right < resolution) out.bands.back().right = b.right;
    else out.bands.push_back({b.left, b.right});
  }
  return out;
}

/// Adds a seeded draw from (0, 0.05) to v_k until every gap is open.
inline PeriodicPotential gap_open_perturb(const PeriodicPotential& v, int k, std::uint64_t seed, double resolution = 1e-9) {
  if (v.period() < 2) throw Failure(FailureKind::domain, "gap opening needs period >= 2");
  if (k < 0 || k >= v.period()) throw Failure(FailureKind::domain, "perturbation index out of range");
  if (bands(v, resolution).all_gaps_open()) return v;
  for (std::uint64_t attempt = 0; attempt < 50; ++attempt) {
    PeriodicPotential p = v;
    double u = unit_from_bits(derive_seed(seed, attempt));
    if (u == 0.0) u = 0.5;
    p.values[static_cast<std::size_t>(k)] += 0.05 * u;
    if (bands(p, resolution).all_gaps_open()) return p;
  }
  throw Failure(FailureKind::gaps_stubborn, "gaps stayed closed after 50 perturbations");
}

/// Some E in (-3pi/n, 3pi/n) with |t(E)| > 2: gap critical points first, then
/// the parts of the interval below and above the spectrum.
inline double find_hyperbolic_energy(const BandStructure& bs) {
  const PeriodicPotential& v = bs.potential;
  const double bound = 3.0 * pi / v.period();
  std::vector<double> candidates;
  for (std::size_t i = 0; i + 1 < bs.branches.size(); ++i) {
    const double a = bs.branches[i].right, b = bs.branches[i + 1].left;
    if (b - a <= 0.0) continue;
    const double c = detail::bisect([&](double e) { return discriminant_with_derivative(v, e).second; }, a, b, 1e-15);
    if (std::abs(c) < bound) candidates.push_back(c);
    const double lo = std::max(a, -bound), hi = std::min(b, bound);
    if (lo < hi) candidates.push_back(0.5 * (lo + hi));
  }
  const double first = bs.branches.front().left, last = bs.branches.back().right;
  if (-bound < first) candidates.push_back(0.5 * (-bound + std::min(first, bound)));
  if (last < bound) candidates.push_back(0.5 * (std::max(last, -bound) + bound));
  for (double e : candidates) {
    if (std::abs(e) < bound && std::abs(discriminant(v, e)) > 2.0) return e;
  }
  throw Failure(FailureKind::not_found, "no hyperbolic energy in (-3pi/n, 3pi/n)");
}

/// Integrated density of states N(E) = (i-1)/n + theta_i(E)/(n pi) on branch i.
class IDS {
 public:
  explicit IDS(BandStructure bs) : bs_(std::move(bs)) {}

  const BandStructure& bands() const { return bs_; }
  int period() const { return bs_.period(); }

  /// theta in [0, pi] on branch i: arccos(sign_left * t(E) / 2).
  double theta(std::size_t i, double energy) const {
    const double c = bs_.branches[i].sign_left * discriminant(bs_.potential, energy) / 2.0;
    return std::acos(std::clamp(c, -1.0, 1.0));
  }

  double operator()(double energy) const {
    const auto& br = bs_.branches;
    const double n = period();
    if (energy <= br.front().left) return 0.0;
    if (energy >= br.back().right) return 1.0;
    for (std::size_t i = 0; i < br.size(); ++i) {
      if (energy < br[i].left) return double(i) / n;
      if (energy <= br[i].right) return (double(i) + theta(i, energy) / pi) / n;
    }
    return 1.0;
  }

  /// E_i(theta): the branch-i energy with t = 2 sign_left cos(theta), by safeguarded Newton.
  double energy_at(std::size_t i, double th) const {
    const Branch& b = bs_.branches[i];
    const double target = 2.0 * b.sign_left * std::cos(th);
    double lo = b.left, hi = b.right;
    double e = b.left + (b.right - b.left) * th / pi;
    for (int it = 0; it < 200; ++it) {
      const auto [tv, dv] = discriminant_with_derivative(bs_.potential, e);
      // gv increases along the branch
      const double gv = b.sign_left * (target - tv);
      if (gv == 0.0) return e;
      if (gv < 0) lo = e;
      else hi = e;
      double next = e - gv / (-b.sign_left * dv);
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      if (std::abs(next - e) <= 1e-15 * std::max(1.0, std::abs(e)) || hi - lo <= 1e-15 * std::max(1.0, std::abs(e))) {
        return next;
      }
      e = next;
    }
    return e;
  }

 private:
  BandStructure bs_;
};

inline IDS ids(const PeriodicPotential& v, double resolution = 1e-9) { return IDS(bands(v, resolution)); }

/// int ln|E' - E| dN(E') = (1/(n pi)) sum_i int_0^pi ln|E_i(theta) - E| dtheta.
/// When E lies on branch i, ln|theta - theta*| is split off and integrated exactly.
inline double thouless_lyapunov(const IDS& ids, double energy, double tol = 1e-12) {
  const auto& br = ids.bands().branches;
  QuadratureOptions opt;
  opt.abs_tol = tol;
  opt.max_evaluations = 200000;
  CompensatedSum total;
  for (std::size_t i = 0; i < br.size(); ++i) {
    const bool inside = energy >= br[i].left && energy <= br[i].right;
    if (!inside) {
      auto f = [&](double th) { return std::log(std::abs(ids.energy_at(i, th) - energy)); };
      total.add(integrate_adaptive(f, 0.0, pi, opt).value);
      continue;
    }
    const double ts = ids.theta(i, energy);
    auto xlogx = [](double x) { return x > 0.0 ? x * std::log(x) : 0.0; };
    total.add(xlogx(pi - ts) + xlogx(ts) - pi);
    auto g = [&](double th) {
      const double d = th - ts;
      const double e = ids.energy_at(i, th);
      if (std::abs(d) < 1e-9) {
        const auto dv = discriminant_with_derivative(ids.bands().potential, e).second;
        return std::log(std::abs(2.0 * std::sin(th) / dv));
      }
      return std::log(std::abs((e - energy) / d));
    };
    if (ts > 0.0) total.add(integrate_adaptive(g, 0.0, ts, opt).value);
    if (ts < pi) total.add(integrate_adaptive(g, ts, pi, opt).value);
  }
  return total.value() / (ids.period() * pi);
}

}  // namespace sl2lab
