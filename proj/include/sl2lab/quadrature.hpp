#pragma once

// Adaptive Gauss-Kronrod (7/15) quadrature with per-panel error estimates, and
// Gauss-Legendre nodes for tensor-product rules.

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "sl2lab/common.hpp"

namespace sl2lab {

namespace gk15 {
inline constexpr std::array<double, 8> nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights belong to the odd-indexed Kronrod nodes (1, 3, 5, 7).
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

/// The 15 abscissae on [-1,1] in ascending order.
inline std::array<double, 15> abscissae() {
  std::array<double, 15> x{};
  for (int i = 0; i < 7; ++i) {
    x[i] = -nodes[i];
    x[14 - i] = nodes[i];
  }
  x[7] = 0.0;
  return x;
}

inline double kronrod_weight(int i) { return kronrod_weights[i < 7 ? i : (i == 7 ? 7 : 14 - i)]; }
inline double gauss_weight(int i) {
  const int j = i < 7 ? i : (i == 7 ? 7 : 14 - i);
  return (j % 2 == 1) ? gauss_weights[j / 2] : 0.0;
}
}  // namespace gk15

struct QuadratureOptions {
  double abs_tol = 1e-8;
  double rel_tol = 0.0;
  int max_depth = 40;
  std::size_t max_evaluations = 100000;
  /// Initial uniform split of [a,b].
  int initial_panels = 1;
};

struct QuadratureResult {
  double value = 0.0;
  /// Sum of |K15 - G7| over the final panels.
  double error = 0.0;
  /// Quadrature-weighted integrand uncertainty (noisy integrands only).
  double noise = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;

  double total_error() const { return error + noise; }
};

namespace detail {
template <class R>
Noisy as_noisy(const R& r) {
  if constexpr (std::is_same_v<std::decay_t<R>, Noisy>) {
    return r;
  } else {
    return Noisy{static_cast<double>(r), 0.0};
  }
}

struct Panel {
  double a, b;
  int depth;
  double kronrod, gauss, noise;
  double error() const { return std::abs(kronrod - gauss); }
};
}  // namespace detail

/// Integrates f over [a,b]. f may return double or Noisy; Noisy sigmas are
/// integrated with the Kronrod weights and reported separately as `noise`.
/// Panels are refined in deterministic rounds: every panel whose error exceeds
/// its share of the tolerance is bisected, and all new nodes of a round are
/// evaluated together (in parallel when threads are configured).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  const auto x = gk15::abscissae();
  auto evaluate_panels = [&](const std::vector<std::pair<double, double>>& spans, int depth) {
    const std::size_t count = spans.size() * 15;
    const auto samples = parallel_map<Noisy>(count, [&](std::size_t k) {
      const auto& s = spans[k / 15];
      const double mid = 0.5 * (s.first + s.second), half = 0.5 * (s.second - s.first);
      return detail::as_noisy(f(mid + half * x[k % 15]));
    });
    out.evaluations += count;
    std::vector<detail::Panel> panels;
    panels.reserve(spans.size());
    for (std::size_t p = 0; p < spans.size(); ++p) {
      const double half = 0.5 * (spans[p].second - spans[p].first);
      double k = 0.0, g = 0.0, n = 0.0;
      for (int i = 0; i < 15; ++i) {
        const Noisy& s = samples[p * 15 + i];
        k += gk15::kronrod_weight(i) * s.value;
        g += gk15::gauss_weight(i) * s.value;
        n += gk15::kronrod_weight(i) * s.sigma;
      }
      panels.push_back({spans[p].first, spans[p].second, depth, k * half, g * half, n * std::abs(half)});
    }
    return panels;
  };

  std::vector<std::pair<double, double>> first;
  const int n0 = std::max(1, opt.initial_panels);
  for (int i = 0; i < n0; ++i) first.emplace_back(a + (b - a) * i / n0, i + 1 == n0 ? b : a + (b - a) * (i + 1) / n0);
  std::vector<detail::Panel> panels = evaluate_panels(first, 0);

  const double length = std::abs(b - a);
  for (;;) {
    double value = 0.0, error = 0.0;
    for (const auto& p : panels) {
      value += p.kronrod;
      error += p.error();
    }
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(value));
    if (error <= tol) {
      out.converged = true;
      break;
    }
    // Panels over their share of the tolerance, largest error first.
    std::vector<std::size_t> split;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const auto& p = panels[i];
      if (p.depth < opt.max_depth && p.error() > tol * std::abs(p.b - p.a) / length) split.push_back(i);
    }
    if (split.empty()) break;
    std::stable_sort(split.begin(), split.end(),
                     [&](std::size_t i, std::size_t j) { return panels[i].error() > panels[j].error(); });
    const std::size_t room = opt.max_evaluations > out.evaluations ? (opt.max_evaluations - out.evaluations) / 30 : 0;
    if (room == 0) break;
    if (split.size() > room) split.resize(room);
    std::sort(split.begin(), split.end());

    std::vector<std::pair<double, double>> spans;
    for (std::size_t i : split) {
      const auto& p = panels[i];
      const double m = 0.5 * (p.a + p.b);
      spans.emplace_back(p.a, m);
      spans.emplace_back(m, p.b);
    }
    auto children = evaluate_panels(spans, 0);
    for (std::size_t c = 0; c < children.size(); ++c) children[c].depth = panels[split[c / 2]].depth + 1;

    std::vector<detail::Panel> next;
    next.reserve(panels.size() + split.size());
    std::size_t s = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (s < split.size() && split[s] == i) {
        next.push_back(children[2 * s]);
        next.push_back(children[2 * s + 1]);
        ++s;
      } else {
        next.push_back(panels[i]);
      }
    }
    panels = std::move(next);
  }

  CompensatedSum value, error, noise;
  for (const auto& p : panels) {
    value.add(p.kronrod);
    error.add(p.error());
    noise.add(p.noise);
  }
  out.value = value.value();
  out.error = error.value();
  out.noise = noise.value();
  return out;
}

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1] (Newton on the three-term recurrence).
inline GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    rule.nodes[n - 1 - i] = z;
    rule.weights[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return rule;
}

}  // namespace sl2lab
