#pragma once

// 2x2 complex matrices, the projective line P(C^2) with its chordal metric,
// the induced Mobius action and the sl(2) exponential map.

#include <cmath>
#include <complex>
#include <string>

#include "sl2lab/common.hpp"

namespace sl2lab {

inline constexpr double default_det_tol = 1e-10;

struct Vec2 {
  cplx x;
  cplx y;

  double norm() const { return std::sqrt(std::norm(x) + std::norm(y)); }
};

struct Mat2 {
  cplx a11{1.0}, a12{0.0}, a21{0.0}, a22{1.0};

  static Mat2 identity() { return {}; }
  static Mat2 diag(cplx d1, cplx d2) { return {d1, 0.0, 0.0, d2}; }
  /// Counterclockwise rotation by `angle` radians.
  static Mat2 rotation(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c, -s, s, c};
  }
  /// Schrodinger transfer matrix [[u, -1], [1, 0]].
  static Mat2 schrodinger(cplx u) { return {u, -1.0, 1.0, 0.0}; }

  cplx det() const { return a11 * a22 - a12 * a21; }
  cplx trace() const { return a11 + a22; }

  Mat2 inverse() const {
    const cplx d = det();
    return {a22 / d, -a12 / d, -a21 / d, a11 / d};
  }

  bool is_real() const {
    return a11.imag() == 0.0 && a12.imag() == 0.0 && a21.imag() == 0.0 && a22.imag() == 0.0;
  }

  double frobenius_sq() const {
    return std::norm(a11) + std::norm(a12) + std::norm(a21) + std::norm(a22);
  }
  double frobenius() const { return std::sqrt(frobenius_sq()); }

  /// Largest singular value, closed form ||A||^2 = (s + sqrt(s^2 - 4|det|^2)) / 2.
  double operator_norm() const {
    const double s = frobenius_sq();
    const double d = std::abs(det());
    const double disc = std::max(0.0, s * s - 4.0 * d * d);
    return std::sqrt(0.5 * (s + std::sqrt(disc)));
  }

  Mat2& operator*=(cplx s) {
    a11 *= s; a12 *= s; a21 *= s; a22 *= s;
    return *this;
  }
  Mat2& operator/=(double s) {
    a11 /= s; a12 /= s; a21 /= s; a22 /= s;
    return *this;
  }
};

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  return {a.a11 * b.a11 + a.a12 * b.a21, a.a11 * b.a12 + a.a12 * b.a22,
          a.a21 * b.a11 + a.a22 * b.a21, a.a21 * b.a12 + a.a22 * b.a22};
}
inline Mat2 operator*(cplx s, Mat2 a) { return a *= s; }
inline Mat2 operator+(const Mat2& a, const Mat2& b) {
  return {a.a11 + b.a11, a.a12 + b.a12, a.a21 + b.a21, a.a22 + b.a22};
}
inline Mat2 operator-(const Mat2& a, const Mat2& b) {
  return {a.a11 - b.a11, a.a12 - b.a12, a.a21 - b.a21, a.a22 - b.a22};
}
inline Vec2 operator*(const Mat2& a, const Vec2& v) {
  return {a.a11 * v.x + a.a12 * v.y, a.a21 * v.x + a.a22 * v.y};
}

inline bool is_sl2(const Mat2& a, double det_tol = default_det_tol) {
  return std::abs(a.det() - 1.0) <= det_tol;
}

inline void require_sl2(const Mat2& a, double det_tol = default_det_tol) {
  if (!is_sl2(a, det_tol)) {
    throw Failure(FailureKind::domain,
                  "matrix determinant off by " + std::to_string(std::abs(a.det() - 1.0)));
  }
}

/// ln of the spectral radius for a unit determinant matrix. Real matrices with
/// |tr| <= 2 (elliptic or parabolic) return exactly 0.
inline double log_spectral_radius(const Mat2& a) {
  const cplx half_tr = 0.5 * a.trace();
  if (a.is_real() && std::abs(half_tr.real()) <= 1.0) return 0.0;
  const cplx root = std::sqrt(half_tr * half_tr - a.det());
  // Pick the sign that avoids cancellation; that eigenvalue has the larger modulus.
  const cplx big = (std::real(std::conj(half_tr) * root) >= 0.0) ? half_tr + root : half_tr - root;
  return std::max(0.0, std::log(std::abs(big)));
}

/// A point of P(C^2), stored as a unit vector whose first nonzero coordinate
/// is real and positive.
class ProjPoint {
 public:
  ProjPoint() : x_(1.0), y_(0.0) {}
  ProjPoint(cplx x, cplx y) { assign(x, y); }
  explicit ProjPoint(const Vec2& v) { assign(v.x, v.y); }

  cplx x() const { return x_; }
  cplx y() const { return y_; }
  Vec2 vec() const { return {x_, y_}; }

  /// Real directions are (cos a, sin a); horizontal is (1,0).
  static ProjPoint real_direction(double angle) { return {std::cos(angle), std::sin(angle)}; }
  static ProjPoint horizontal() { return {1.0, 0.0}; }
  static ProjPoint vertical() { return {0.0, 1.0}; }

 private:
  void assign(cplx x, cplx y) {
    const double n = std::sqrt(std::norm(x) + std::norm(y));
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Failure(FailureKind::domain, "degenerate homogeneous pair");
    }
    x /= n;
    y /= n;
    const cplx lead = (x != 0.0) ? x : y;
    const cplx phase = std::conj(lead) / std::abs(lead);
    x_ = x * phase;
    y_ = y * phase;
    if (x_ != 0.0) x_ = std::abs(x_);
    else y_ = std::abs(y_);
  }

  cplx x_;
  cplx y_;
};

/// Chordal metric |x1 y2 - x2 y1| on unit representatives; bounded by 1.
inline double spherical_dist(const ProjPoint& a, const ProjPoint& b) {
  return std::abs(a.x() * b.y() - b.x() * a.y());
}

inline bool projectively_equal(const ProjPoint& a, const ProjPoint& b, double tol = 1e-12) {
  return spherical_dist(a, b) <= tol;
}

inline ProjPoint mobius_act(const Mat2& a, const ProjPoint& m) { return ProjPoint(a * m.vec()); }

/// ln ||A z|| for z the unit representative of m.
inline double expansion_coeff(const Mat2& a, const ProjPoint& m) {
  return std::log((a * m.vec()).norm());
}

/// Traceless matrix [[b1, b2], [b3, -b1]].
struct Sl2Element {
  cplx b1{0.0}, b2{0.0}, b3{0.0};

  /// [[0, 1], [-1, 0]], the generator of rotations.
  static Sl2Element rotation_generator() { return {0.0, 1.0, -1.0}; }

  Mat2 matrix() const { return {b1, b2, b3, -b1}; }
  double norm() const { return matrix().operator_norm(); }
  bool is_real() const { return b1.imag() == 0.0 && b2.imag() == 0.0 && b3.imag() == 0.0; }
};

inline Sl2Element operator+(const Sl2Element& a, const Sl2Element& b) {
  return {a.b1 + b.b1, a.b2 + b.b2, a.b3 + b.b3};
}
inline Sl2Element operator-(const Sl2Element& a, const Sl2Element& b) {
  return {a.b1 - b.b1, a.b2 - b.b2, a.b3 - b.b3};
}
inline Sl2Element operator*(cplx s, const Sl2Element& a) { return {s * a.b1, s * a.b2, s * a.b3}; }

inline constexpr double exp_series_switch = 1e-4;

/// e^{s b} = cosh(d) I + (sinh(d)/d) s b with d^2 = s^2 (b1^2 + b2 b3).
inline Mat2 exp_sl2(const Sl2Element& b, cplx s) {
  const Sl2Element sb = s * b;
  const cplx d2 = sb.b1 * sb.b1 + sb.b2 * sb.b3;
  const cplx d = std::sqrt(d2);
  cplx c, sh;
  if (std::abs(d) < exp_series_switch) {
    // cosh d = sum d^{2k}/(2k)!, sinh(d)/d = sum d^{2k}/(2k+1)!, six terms each
    cplx term_c = 1.0, term_s = 1.0;
    c = 0.0;
    sh = 0.0;
    for (int k = 0; k < 6; ++k) {
      c += term_c;
      sh += term_s;
      term_c *= d2 / double((2 * k + 1) * (2 * k + 2));
      term_s *= d2 / double((2 * k + 2) * (2 * k + 3));
    }
  } else {
    c = std::cosh(d);
    sh = std::sinh(d) / d;
  }
  return {c + sh * sb.b1, sh * sb.b2, sh * sb.b3, c - sh * sb.b1};
}

enum class Chart { first, second };

/// A point of the extended complex plane.
struct ChartValue {
  cplx value{0.0};
  bool infinite = false;

  static ChartValue infinity() { return {0.0, true}; }
};

/// first: x/y (infinite at (1,0)); second: -y/x (0 at (1,0), infinite at (0,1)).
inline ChartValue chart(const ProjPoint& m, Chart which) {
  if (which == Chart::first) {
    if (m.y() == 0.0) return ChartValue::infinity();
    return {m.x() / m.y(), false};
  }
  if (m.x() == 0.0) return ChartValue::infinity();
  return {-m.y() / m.x(), false};
}

inline ProjPoint unchart(const ChartValue& z, Chart which) {
  if (which == Chart::first) {
    if (z.infinite) return ProjPoint::horizontal();
    return {z.value, 1.0};
  }
  if (z.infinite) return ProjPoint::vertical();
  return {1.0, -z.value};
}

}  // namespace sl2lab
