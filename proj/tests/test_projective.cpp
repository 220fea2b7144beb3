#include <gtest/gtest.h>

#include "sl2lab/projective.hpp"

using namespace sl2lab;

namespace {

ProjPoint chart_point(cplx z) { return unchart({z, false}, Chart::first); }

Mat2 random_sl2(std::uint64_t seed) {
  auto u = [&](std::uint64_t k) { return 2.0 * unit_from_bits(derive_seed(seed, k)) - 1.0; };
  const cplx a(u(0), u(1)), b(u(2), u(3)), c(u(4), u(5));
  const cplx a11 = a + 1.5;
  return {a11, b, c, (1.0 + b * c) / a11};
}

}  // namespace

TEST(Mobius, IdentityFixesEveryPoint) {
  const ProjPoint m(cplx(0.3, -0.2), 1.0);
  EXPECT_LT(spherical_dist(mobius_act(Mat2::identity(), m), m), 1e-15);
}

TEST(Mobius, QuarterTurnSwapsAxes) {
  const Mat2 j{0.0, -1.0, 1.0, 0.0};
  EXPECT_TRUE(projectively_equal(mobius_act(j, ProjPoint::vertical()), ProjPoint::horizontal()));
}

TEST(Mobius, DiagonalScalesChartValue) {
  const auto z = chart(mobius_act(Mat2::diag(2.0, 0.5), chart_point(1.0)), Chart::first);
  EXPECT_FALSE(z.infinite);
  EXPECT_NEAR(std::abs(z.value - 4.0), 0.0, 1e-14);
}

TEST(Mobius, ActionIsAHomomorphism) {
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Mat2 a = random_sl2(2 * k), b = random_sl2(2 * k + 1);
    ASSERT_TRUE(is_sl2(a));
    const ProjPoint m(cplx(unit_from_bits(derive_seed(k, 9)), 0.1), 1.0);
    EXPECT_LT(spherical_dist(mobius_act(a * b, m), mobius_act(a, mobius_act(b, m))), 1e-9);
  }
}

TEST(SphericalDist, Basics) {
  const ProjPoint m(cplx(0.2, 0.7), 1.0);
  EXPECT_EQ(spherical_dist(m, m), 0.0);
  EXPECT_NEAR(spherical_dist(ProjPoint::vertical(), ProjPoint::horizontal()), 1.0, 1e-15);
  EXPECT_NEAR(spherical_dist(chart_point(1.0), chart_point(-1.0)), 1.0, 1e-15);
}

TEST(SphericalDist, PhaseInvariance) {
  const cplx x(0.3, 0.4), y(-0.1, 0.8), p = std::polar(1.0, 1.234);
  const ProjPoint a(x, y), b(p * x, p * y), c(1.0, 0.5);
  EXPECT_NEAR(spherical_dist(a, c), spherical_dist(b, c), 1e-12);
  EXPECT_LT(spherical_dist(a, b), 1e-12);
}

TEST(ProjPoint, NormalizedAndRejectsZero) {
  const ProjPoint m(cplx(3.0, 4.0), cplx(0.0, 12.0));
  EXPECT_NEAR(std::norm(m.x()) + std::norm(m.y()), 1.0, 1e-12);
  EXPECT_GT(m.x().real(), 0.0);
  EXPECT_EQ(m.x().imag(), 0.0);
  EXPECT_THROW(ProjPoint(0.0, 0.0), Failure);
}

TEST(Expansion, Examples) {
  EXPECT_EQ(expansion_coeff(Mat2::identity(), chart_point(cplx(0.3, 0.1))), 0.0);
  EXPECT_NEAR(expansion_coeff(Mat2::diag(2.0, 0.5), ProjPoint::horizontal()), std::log(2.0), 1e-15);
  EXPECT_NEAR(expansion_coeff(Mat2::diag(2.0, 0.5), ProjPoint::vertical()), -std::log(2.0), 1e-15);
}

TEST(Expansion, CocycleAndInverseIdentities) {
  for (std::uint64_t k = 0; k < 500; ++k) {
    const Mat2 a = random_sl2(3 * k), b = random_sl2(3 * k + 1);
    const ProjPoint m = ProjPoint::real_direction(unit_from_bits(derive_seed(k, 77)) * pi);
    EXPECT_NEAR(expansion_coeff(a * b, m), expansion_coeff(a, mobius_act(b, m)) + expansion_coeff(b, m), 1e-9);
    EXPECT_NEAR(expansion_coeff(a, m) + expansion_coeff(a.inverse(), mobius_act(a, m)), 0.0, 1e-9);
  }
}

TEST(ExpSl2, Examples) {
  const Mat2 e0 = exp_sl2({0.3, cplx(0.1, 2.0), -0.7}, 0.0);
  EXPECT_LT((e0 - Mat2::identity()).frobenius(), 1e-15);
  const double th = 0.83;
  const Mat2 r = exp_sl2(Sl2Element::rotation_generator(), th);
  const Mat2 expect{std::cos(th), std::sin(th), -std::sin(th), std::cos(th)};
  EXPECT_LT((r - expect).frobenius(), 1e-14);
  const Mat2 d = exp_sl2({1.0, 0.0, 0.0}, 1.0);
  EXPECT_LT((d - Mat2::diag(std::exp(1.0), std::exp(-1.0))).frobenius(), 1e-14);
}

TEST(ExpSl2, OneParameterGroupAndSeriesBranch) {
  const Sl2Element b{cplx(0.4, 0.1), cplx(-0.3, 0.2), cplx(0.9, -0.5)};
  for (int i = 0; i < 20; ++i) {
    const cplx s(-2.0 + 0.2 * i, 0.1 * i - 1.0), t(1.5 - 0.15 * i, 0.05 * i);
    EXPECT_LT((exp_sl2(b, s + t) - exp_sl2(b, s) * exp_sl2(b, t)).frobenius(), 1e-9);
    EXPECT_TRUE(is_sl2(exp_sl2(b, s)));
  }
  // across the series switch the two formulas agree
  const Sl2Element r = Sl2Element::rotation_generator();
  const Mat2 small = exp_sl2(r, 0.99e-4), big = exp_sl2(r, 1.01e-4);
  EXPECT_NEAR(small.a12.real(), std::sin(0.99e-4), 1e-18);
  EXPECT_NEAR(big.a12.real(), std::sin(1.01e-4), 1e-18);
}

TEST(Chart, Examples) {
  EXPECT_TRUE(chart(ProjPoint::horizontal(), Chart::first).infinite);
  const auto z = chart(ProjPoint::horizontal(), Chart::second);
  EXPECT_FALSE(z.infinite);
  EXPECT_EQ(std::abs(z.value), 0.0);
  const auto h = chart(ProjPoint(cplx(0.0, 1.0), 1.0), Chart::first);
  EXPECT_NEAR(std::abs(h.value - cplx(0.0, 1.0)), 0.0, 1e-15);
  for (Chart c : {Chart::first, Chart::second}) {
    const ProjPoint m(cplx(0.2, -0.4), cplx(1.1, 0.3));
    EXPECT_LT(spherical_dist(unchart(chart(m, c), c), m), 1e-15);
  }
}

TEST(Mat2, OperatorNormAndSpectralRadius) {
  EXPECT_NEAR(Mat2::diag(3.0, 1.0 / 3.0).operator_norm(), 3.0, 1e-14);
  EXPECT_NEAR(Mat2::rotation(0.4).operator_norm(), 1.0, 1e-14);
  EXPECT_EQ(log_spectral_radius(Mat2::schrodinger(1.0)), 0.0);
  EXPECT_NEAR(log_spectral_radius(Mat2::schrodinger(3.0)), 0.962423650119206895, 1e-15);
}
